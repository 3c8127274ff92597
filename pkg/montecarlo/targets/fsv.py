"""
Factor stochastic volatility model.

    y_t ~ N(B f_t, Psi),  f_t ~ N(0, diag(exp(x_t))),  x_t ~ N(Phi x_{t-1}, U)

The factors are integrated out for filtering, so the observation density is
N(y_t; 0, B diag(exp(x_t)) B' + Psi).
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..exceptions import ConfigurationError, NumericalError
from ..parallel import PrecisionMode, pairwise_sum
from ..prng import StreamBank
from .base import SsmSpec

logger = logging.getLogger(__name__)

DEFAULT_B = (
    (1.0, 0.0, 0.0),
    (0.5, 1.0, 0.0),
    (0.5, 0.5, 1.0),
    (0.2, 0.6, 0.3),
    (0.8, 0.7, 0.5),
)
DEFAULT_U = (
    (0.5, 0.2, 0.1),
    (0.2, 0.5, 0.2),
    (0.1, 0.2, 0.5),
)
DEFAULT_PSI = 0.5
DEFAULT_PHI = 0.9
DEFAULT_T = 200


@dataclass
class FsvParams:
    B: np.ndarray
    psi: np.ndarray
    phi: np.ndarray
    U: np.ndarray
    x0: np.ndarray

    def __post_init__(self):
        self.B = np.atleast_2d(np.asarray(self.B, dtype=np.float64))
        m, k = self.B.shape
        self.psi = np.broadcast_to(np.asarray(self.psi, dtype=np.float64), (m,)).copy()
        self.phi = np.broadcast_to(np.asarray(self.phi, dtype=np.float64), (k,)).copy()
        self.U = np.atleast_2d(np.asarray(self.U, dtype=np.float64))
        self.x0 = np.broadcast_to(np.asarray(self.x0, dtype=np.float64), (k,)).copy()

        if self.U.shape != (k, k):
            raise ConfigurationError(f"U must be {k}x{k}, got {self.U.shape}")
        if np.any(np.triu(self.B, 1) != 0):
            raise ConfigurationError('B must be zero above the diagonal')
        if np.any(self.psi <= 0):
            raise ConfigurationError('Psi entries must be positive')
        if not np.allclose(self.U, self.U.T, rtol=0, atol=1e-12):
            raise ConfigurationError('U must be symmetric')
        self.U_chol = self._cholesky(self.U)

    @staticmethod
    def _cholesky(U: np.ndarray) -> np.ndarray:
        if not np.any(U):
            # U = 0 is the deterministic special case
            return np.zeros_like(U)
        try:
            return np.linalg.cholesky(U)
        except np.linalg.LinAlgError:
            raise ConfigurationError('U must be symmetric positive definite')

    @property
    def obs_dim(self) -> int:
        return self.B.shape[0]

    @property
    def factor_dim(self) -> int:
        return self.B.shape[1]

    @classmethod
    def default(cls, obs_dim: int = 5, factor_dim: int = 3, psi=DEFAULT_PSI, phi=DEFAULT_PHI,
                x0=0.0, B=None, U=None) -> 'FsvParams':
        """Default parameters; smaller dimensions take the leading blocks of the default B and U."""
        full_b = np.array(DEFAULT_B)
        full_u = np.array(DEFAULT_U)
        if B is None:
            if obs_dim > full_b.shape[0] or factor_dim > full_b.shape[1]:
                raise ConfigurationError(
                    f"No default loadings for M={obs_dim}, K={factor_dim}; pass B explicitly"
                )
            B = full_b[:obs_dim, :factor_dim]
        if U is None:
            if factor_dim > full_u.shape[0]:
                raise ConfigurationError(f"No default U for K={factor_dim}; pass U explicitly")
            U = full_u[:factor_dim, :factor_dim]
        return cls(B=B, psi=psi, phi=phi, U=U, x0=x0)


@dataclass
class FsvSimulation:
    x: np.ndarray  # (T, K)
    y: np.ndarray  # (T, M)
    f: np.ndarray  # (T, K)


def fsv_simulate(params: FsvParams, T: int, stream) -> FsvSimulation:
    """
    Simulate T steps from a scalar stream.

    Per step the stream yields K normals for the state noise, K for the
    factors and M for the observation noise, in that order.
    """
    if T < 1:
        raise ConfigurationError(f"T must be >= 1, got {T}")
    k, m = params.factor_dim, params.obs_dim
    x = np.empty((T, k))
    f = np.empty((T, k))
    y = np.empty((T, m))
    prev = params.x0.copy()
    sqrt_psi = np.sqrt(params.psi)
    for t in range(T):
        z = stream.normals(k)
        prev = params.phi * prev + params.U_chol @ z
        x[t] = prev
        f[t] = np.exp(0.5 * prev) * stream.normals(k)
        y[t] = params.B @ f[t] + sqrt_psi * stream.normals(m)
    return FsvSimulation(x=x, y=y, f=f)


def fsv_transition_sample(x_prev: np.ndarray, params: FsvParams, streams: StreamBank, mode=None) -> np.ndarray:
    """One AR(1) step per row; consumes K normals per stream."""
    dtype = PrecisionMode.coerce(mode).dtype
    x_prev = np.asarray(x_prev, dtype=dtype).reshape(-1, params.factor_dim)
    z = streams.normals(params.factor_dim).astype(dtype)
    noise = z @ params.U_chol.T.astype(dtype)
    return params.phi.astype(dtype) * x_prev + noise


def fsv_log_obs_density(x: np.ndarray, y: np.ndarray, params: FsvParams, mode=None) -> np.ndarray:
    """
    log N(y; 0, B diag(exp(x)) B' + diag(Psi)) for every row of ``x``.

    Uses a batched Cholesky of the M x M covariance. A failed factorisation
    cannot happen with Psi > 0 and is reported as a NumericalError.
    """
    mode = PrecisionMode.coerce(mode)
    dtype = mode.dtype
    x = np.asarray(x, dtype=dtype).reshape(-1, params.factor_dim)
    y = np.asarray(y, dtype=dtype).reshape(params.obs_dim)
    B = params.B.astype(dtype)
    cov = np.einsum('ik,nk,jk->nij', B, np.exp(x), B)
    cov += np.diag(params.psi.astype(dtype))
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Observation covariance is not positive definite: {exc}")
    rhs = np.broadcast_to(y, (x.shape[0], params.obs_dim))[..., None]
    v = np.linalg.solve(chol, rhs)[..., 0]
    log_diag = np.log(np.diagonal(chol, axis1=1, axis2=2))
    logdet = dtype.type(2) * pairwise_sum(log_diag, mode, axis=-1)
    quad = pairwise_sum(v * v, mode, axis=-1)
    const = dtype.type(params.obs_dim * np.log(2.0 * np.pi))
    return (dtype.type(-0.5) * (const + logdet + quad)).astype(dtype)


class FsvModel(SsmSpec):
    """Bootstrap-filter view of the model; p0 is the point mass at x0."""

    def __init__(self, params: FsvParams, mode=None):
        super().__init__(mode)
        self.params = params
        self.state_dim = params.factor_dim
        self.obs_dim = params.obs_dim

    def sample_initial(self, streams: StreamBank) -> np.ndarray:
        return np.tile(self.params.x0.astype(self.dtype), (len(streams), 1))

    def sample_transition(self, x_prev, streams):
        return fsv_transition_sample(x_prev, self.params, streams, self.mode)

    def log_obs_density(self, x, y):
        return fsv_log_obs_density(x, y, self.params, self.mode)

    def simulate(self, T: int, stream) -> Tuple[np.ndarray, np.ndarray]:
        sim = fsv_simulate(self.params, T, stream)
        return sim.x, sim.y
