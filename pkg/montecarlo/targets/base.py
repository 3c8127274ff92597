"""Interfaces shared by the samplers: pointwise targets and state-space models."""
from abc import ABC, abstractmethod
from typing import Callable, Optional, Tuple

import numpy as np

from ..parallel import PrecisionMode
from ..prng import StreamBank


class TargetSpec(ABC):
    """
    Unnormalized log-density log pi* on R^dim.

    ``log_density`` is vectorised: rows of ``x`` are points, the result has
    one entry per row, each finite or -inf, never NaN for finite input.
    ``bounds`` is the support box used to draw initial states uniformly, or
    None when the target has no natural box.
    """

    dim: int = 1
    bounds: Optional[Tuple[float, float]] = None

    def __init__(self, mode=None):
        self.mode = PrecisionMode.coerce(mode)

    @property
    def dtype(self):
        return self.mode.dtype

    @abstractmethod
    def log_density(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def points(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        return x.reshape(-1, self.dim)

    def sample_prior(self, streams: StreamBank) -> np.ndarray:
        """One point per stream, uniform on the bounding box; consumes ``dim`` uniforms per stream."""
        if self.bounds is None:
            raise NotImplementedError(f"{type(self).__name__} has no bounding box to sample from")
        lower, upper = self.bounds
        u = streams.uniforms(self.dim)
        return (lower + (upper - lower) * u).astype(self.dtype)


class FunctionTarget(TargetSpec):
    """Wraps a vectorised callable; handy for quick Gaussian or custom targets."""

    def __init__(self, dim: int, fn: Callable[[np.ndarray], np.ndarray],
                 bounds: Optional[Tuple[float, float]] = None, mode=None):
        super().__init__(mode)
        self.dim = dim
        self.fn = fn
        self.bounds = bounds

    def log_density(self, x):
        return np.asarray(self.fn(self.points(x)), dtype=self.dtype).reshape(-1)


class SsmSpec(ABC):
    """State-space model: initial law p0, transition f and observation density g."""

    state_dim: int = 1
    obs_dim: int = 1

    def __init__(self, mode=None):
        self.mode = PrecisionMode.coerce(mode)

    @property
    def dtype(self):
        return self.mode.dtype

    @abstractmethod
    def sample_initial(self, streams: StreamBank) -> np.ndarray:
        raise NotImplementedError

    @abstractmethod
    def sample_transition(self, x_prev: np.ndarray, streams: StreamBank) -> np.ndarray:
        raise NotImplementedError

    @abstractmethod
    def log_obs_density(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @abstractmethod
    def simulate(self, T: int, stream) -> Tuple[np.ndarray, np.ndarray]:
        """Latent path x_{1:T} and observations y_{1:T} from a scalar stream."""
        raise NotImplementedError
