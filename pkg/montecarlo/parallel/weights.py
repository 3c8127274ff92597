"""
Importance weights: log-domain normalization, effective sample size and
the plain and self-normalized Monte Carlo estimators.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from ..exceptions import DegeneratePopulationError
from .reduction import PrecisionMode, pairwise_sum

logger = logging.getLogger(__name__)


@dataclass
class NormalizedWeights:
    weights: np.ndarray
    log_norm_constant_increment: float

    def __len__(self):
        return self.weights.shape[0]

    def ess(self) -> float:
        return ess(self)


def normalize_log_weights(log_weights, mode=None, time_index: int = None) -> NormalizedWeights:
    """
    W_i = exp(lw_i - max) / sum_j exp(lw_j - max).

    -inf entries get weight 0. The increment is
    max + log(sum exp(lw - max)) - log N, the log of the mean unnormalized weight.
    """
    mode = PrecisionMode.coerce(mode)
    lw = np.asarray(log_weights, dtype=mode.dtype).ravel()
    if lw.size == 0:
        raise DegeneratePopulationError('No weights to normalize', time_index=time_index)
    if np.isnan(lw).any():
        raise DegeneratePopulationError('NaN log-weight', time_index=time_index)
    top = lw.max()
    if np.isneginf(top):
        raise DegeneratePopulationError('All log-weights are -inf', time_index=time_index)
    if np.isposinf(top):
        raise DegeneratePopulationError('Infinite log-weight', time_index=time_index)
    unnormalized = np.exp(lw - top)
    total = pairwise_sum(unnormalized, mode)
    weights = unnormalized / total
    increment = float(top) + float(np.log(total)) - float(np.log(lw.size))
    return NormalizedWeights(weights, increment)


def ess(w) -> float:
    """1 / sum W_i**2, clamped to [1, N]; equal weights give exactly N."""
    weights = w.weights if isinstance(w, NormalizedWeights) else np.asarray(w)
    n = weights.shape[0]
    if n == 0:
        return 0.0
    if np.all(weights == weights[0]):
        return float(n)
    # ascending order fixes the summation result under any permutation of the weights
    value = 1.0 / float(pairwise_sum(np.sort(weights.astype(np.float64) ** 2)))
    return min(max(value, 1.0), float(n))


def weighted_moments(weights, values, mode=None) -> Tuple[np.ndarray, np.ndarray]:
    """Weighted mean and standard deviation of ``values`` (rows are particles) under normalized weights."""
    mode = PrecisionMode.coerce(mode)
    w = np.asarray(weights, dtype=mode.dtype)
    x = np.asarray(values, dtype=mode.dtype)
    if x.ndim == 1:
        x = x[:, None]
    mean = pairwise_sum(w[:, None] * x, mode, axis=0)
    var = pairwise_sum(w[:, None] * (x - mean) ** 2, mode, axis=0)
    return np.atleast_1d(mean), np.sqrt(np.maximum(np.atleast_1d(var), 0))


def mc_estimate(samples, phi: Callable, mode=None, workers: int = 1) -> float:
    """(1/N) * pairwise sum of phi over the samples; phi is applied vectorised along the first axis."""
    values = np.asarray(phi(np.asarray(samples)), dtype=PrecisionMode.coerce(mode).dtype)
    return float(pairwise_sum(values, mode, workers=workers)) / values.shape[0]


def importance_estimate(samples, log_target: Callable, log_proposal: Callable, phi: Callable,
                        mode=None, workers: int = 1) -> float:
    """Self-normalized estimate sum W_i phi(x_i) with W from log_target - log_proposal."""
    estimate, _ = importance_estimate_with_error(samples, log_target, log_proposal, phi, mode, workers)
    return estimate


def importance_estimate_with_error(samples, log_target, log_proposal, phi, mode=None,
                                   workers: int = 1) -> Tuple[float, float]:
    mode = PrecisionMode.coerce(mode)
    x = np.asarray(samples, dtype=mode.dtype)
    lw = np.asarray(log_target(x), dtype=mode.dtype) - np.asarray(log_proposal(x), dtype=mode.dtype)
    nw = normalize_log_weights(lw, mode)
    phi_values = np.asarray(phi(x), dtype=mode.dtype)
    # renormalizing by the summed weights makes phi = 1 return exactly 1
    estimate = float(pairwise_sum(nw.weights * phi_values, mode, workers=workers)
                     / pairwise_sum(nw.weights, mode, workers=workers))
    return estimate, importance_std_error(nw.weights, phi_values, estimate)


def importance_std_error(weights, phi_values, estimate: float = None) -> float:
    """Delta-method standard error of a self-normalized estimate: sqrt(sum W_i**2 (phi_i - I)**2)."""
    w = np.asarray(weights, dtype=np.float64)
    phi = np.asarray(phi_values, dtype=np.float64)
    if estimate is None:
        estimate = float(pairwise_sum(w * phi))
    return float(np.sqrt(pairwise_sum(w ** 2 * (phi - estimate) ** 2)))
