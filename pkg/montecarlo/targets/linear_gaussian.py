"""
1-D linear-Gaussian state-space model with its exact Kalman filter.

    x_0 ~ N(m0, p0),  x_t = a x_{t-1} + N(0, q),  y_t = x_t + N(0, r)

Used as the reference problem for the particle filter: the Kalman recursion
gives the exact filtering means, variances and log-likelihood.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..exceptions import ConfigurationError
from .base import SsmSpec


@dataclass
class KalmanResult:
    means: np.ndarray
    variances: np.ndarray
    log_likelihood: float


class LinearGaussianModel(SsmSpec):
    state_dim = 1
    obs_dim = 1

    def __init__(self, a: float = 0.9, q: float = 1.0, r: float = 1.0, m0: float = 0.0, p0: float = 1.0,
                 mode=None):
        super().__init__(mode)
        if q < 0 or r <= 0 or p0 < 0:
            raise ConfigurationError('Linear-Gaussian model needs q >= 0, r > 0 and p0 >= 0')
        self.a, self.q, self.r, self.m0, self.p0 = float(a), float(q), float(r), float(m0), float(p0)

    def sample_initial(self, streams):
        z = streams.normals(1).astype(self.dtype)
        return self.dtype.type(self.m0) + self.dtype.type(np.sqrt(self.p0)) * z

    def sample_transition(self, x_prev, streams):
        x_prev = np.asarray(x_prev, dtype=self.dtype).reshape(-1, 1)
        z = streams.normals(1).astype(self.dtype)
        return self.dtype.type(self.a) * x_prev + self.dtype.type(np.sqrt(self.q)) * z

    def log_obs_density(self, x, y):
        x = np.asarray(x, dtype=self.dtype).reshape(-1)
        y = self.dtype.type(np.asarray(y).reshape(-1)[0])
        half_log = self.dtype.type(0.5 * np.log(2.0 * np.pi * self.r))
        return -((y - x) ** 2) / self.dtype.type(2.0 * self.r) - half_log

    def simulate(self, T: int, stream) -> Tuple[np.ndarray, np.ndarray]:
        if T < 1:
            raise ConfigurationError(f"T must be >= 1, got {T}")
        x = np.empty((T, 1))
        y = np.empty((T, 1))
        prev = self.m0 + np.sqrt(self.p0) * stream.next_gaussian()
        for t in range(T):
            prev = self.a * prev + np.sqrt(self.q) * stream.next_gaussian()
            x[t, 0] = prev
            y[t, 0] = prev + np.sqrt(self.r) * stream.next_gaussian()
        return x, y

    def kalman_filter(self, y) -> KalmanResult:
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        means = np.empty(y.size)
        variances = np.empty(y.size)
        m, p = self.m0, self.p0
        loglik = 0.0
        for t, obs in enumerate(y):
            m = self.a * m
            p = self.a * self.a * p + self.q
            s = p + self.r
            loglik += -0.5 * (np.log(2.0 * np.pi * s) + (obs - m) ** 2 / s)
            gain = p / s
            m = m + gain * (obs - m)
            p = (1.0 - gain) * p
            means[t] = m
            variances[t] = p
        return KalmanResult(means, variances, float(loglik))
