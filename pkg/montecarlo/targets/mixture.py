"""
Posterior of the component means of a univariate Gaussian mixture with known
weights and common variance, under a uniform prior on [-bound, bound]**k.

The likelihood is invariant to relabelling the components, so the posterior
has k! symmetric modes.
"""
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..exceptions import ConfigurationError
from ..parallel import PrecisionMode, pairwise_sum
from .base import TargetSpec

logger = logging.getLogger(__name__)

TRUE_MEANS = (-3.0, 0.0, 3.0, 6.0)
DEFAULT_SIGMA = 0.55
DEFAULT_OBSERVATIONS = 100
DEFAULT_BOUND = 10.0


@dataclass
class MixtureModel:
    y: np.ndarray
    k: int = 4
    sigma: float = DEFAULT_SIGMA
    bound: float = DEFAULT_BOUND
    w: float = field(init=False)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=np.float64).ravel()
        if self.k < 1:
            raise ConfigurationError(f"Mixture needs k >= 1 components, got {self.k}")
        if self.sigma <= 0:
            raise ConfigurationError(f"sigma must be positive, got {self.sigma}")
        if self.bound <= 0:
            raise ConfigurationError(f"bound must be positive, got {self.bound}")
        if self.y.size < 1:
            raise ConfigurationError('Mixture model needs at least one observation')
        self.w = 1.0 / self.k

    @property
    def m(self) -> int:
        return self.y.size


def simulate_mixture_data(true_mu: Sequence[float], m: int, sigma: float, stream) -> np.ndarray:
    """
    m draws from the equally weighted mixture.

    Each observation uses one uniform for the component label and then one
    normal for the noise, in that order.
    """
    if m < 1:
        raise ConfigurationError(f"m must be >= 1, got {m}")
    if sigma < 0:
        raise ConfigurationError(f"sigma must be non-negative, got {sigma}")
    mu = [float(v) for v in true_mu]
    k = len(mu)
    y = np.empty(m, dtype=np.float64)
    for j in range(m):
        label = min(int(stream.next_uniform() * k), k - 1)
        y[j] = mu[label] + sigma * stream.next_gaussian()
    logger.debug(f"Simulated {m} mixture observations, sample mean {y.mean():.4f}")
    return y


def mixture_log_posterior(mu, model: MixtureModel, mode=None) -> np.ndarray:
    """
    Unnormalized log posterior, one value per row of ``mu``.

    sum_j log sum_i w N(y_j; mu_i, sigma**2) inside the box, -inf outside.
    Rows are sorted before evaluation so the value is exactly invariant to
    relabelling.
    """
    mode = PrecisionMode.coerce(mode)
    dtype = mode.dtype
    mu = np.asarray(mu, dtype=dtype).reshape(-1, model.k)
    inside = np.all(np.abs(mu) <= model.bound, axis=1)
    mu = np.sort(mu, axis=1)

    y = model.y.astype(dtype)
    var = model.sigma ** 2
    const = dtype.type(np.log(model.w) - 0.5 * np.log(2.0 * np.pi * var))
    scale = dtype.type(1.0 / (2.0 * var))
    # (n, m, k) component log terms
    comp = const - scale * (y[None, :, None] - mu[:, None, :]) ** 2
    top = comp.max(axis=2)
    per_obs = top + np.log(pairwise_sum(np.exp(comp - top[..., None]), mode, axis=-1))
    out = pairwise_sum(per_obs, mode, axis=-1).astype(dtype)
    return np.where(inside, out, dtype.type(-np.inf))


class MixturePosterior(TargetSpec):
    def __init__(self, model: MixtureModel, mode=None):
        super().__init__(mode)
        self.model = model
        self.dim = model.k
        self.bounds = (-model.bound, model.bound)

    def log_density(self, x):
        return mixture_log_posterior(x, self.model, self.mode)
