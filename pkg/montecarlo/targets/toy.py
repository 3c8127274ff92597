"""
Importance-sampling toy: a two-component normal mixture target (means -1 and
1.5, variance 0.25, equal weights) estimated under a standard normal proposal.
Both densities are properly normalized.
"""
import numpy as np

from ..parallel import PrecisionMode
from .base import TargetSpec

TOY_MEANS = (-1.0, 1.5)
TOY_VARIANCE = 0.25
# 0.5 * (1 + 0.25) + 0.5 * (2.25 + 0.25)
TOY_SECOND_MOMENT = 1.875


def _normal_logpdf(x, mean, var, dtype):
    x = np.asarray(x, dtype=dtype)
    half_log = dtype.type(0.5 * np.log(2.0 * np.pi * var))
    return -((x - dtype.type(mean)) ** 2) / dtype.type(2.0 * var) - half_log


def toy_log_target(x, mode=None) -> np.ndarray:
    """log(0.5 N(x; -1, 0.25) + 0.5 N(x; 1.5, 0.25)), vectorised."""
    dtype = PrecisionMode.coerce(mode).dtype
    half = dtype.type(np.log(0.5))
    a = _normal_logpdf(x, TOY_MEANS[0], TOY_VARIANCE, dtype) + half
    b = _normal_logpdf(x, TOY_MEANS[1], TOY_VARIANCE, dtype) + half
    return np.logaddexp(a, b)


def toy_log_proposal(x, mode=None) -> np.ndarray:
    return _normal_logpdf(x, 0.0, 1.0, PrecisionMode.coerce(mode).dtype)


def square(x):
    return np.asarray(x) ** 2


class ToyTarget(TargetSpec):
    dim = 1

    def log_density(self, x):
        return toy_log_target(self.points(x)[:, 0], self.mode)
