"""
Resampling through the empirical CDF of the weights.

The CDF is the pairwise inclusive prefix sum, and ancestors come from a
binary search of each position in it. Multinomial draws one uniform per
particle slot from that slot's own stream. Systematic uses a single
coordinator uniform u and positions (u + i) / N.
"""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..exceptions import ConfigurationError
from ..parallel import PrecisionMode, ess, inclusive_prefix_sum, normalize_log_weights

logger = logging.getLogger(__name__)

RESAMPLERS = ('multinomial', 'systematic')


@dataclass
class WeightedPopulation:
    particles: np.ndarray  # (N, d)
    log_weights: np.ndarray  # (N,)
    ess_ratio: float = 1.0

    def __post_init__(self):
        if self.particles.shape[0] != self.log_weights.shape[0]:
            raise ConfigurationError('particles and log_weights must have the same length')

    def __len__(self):
        return self.log_weights.shape[0]

    def normalized(self, mode=None, time_index: int = None):
        return normalize_log_weights(self.log_weights, mode, time_index)


def ancestors_from_positions(weights: np.ndarray, positions: np.ndarray, mode=None) -> np.ndarray:
    """
    Invert the weight ECDF at ``positions`` given as fractions in [0, 1).

    The CDF keeps the run's precision but positions are scaled and searched
    in double, so a uniform just below 1 never rounds up to the total and
    lands on a trailing zero-weight particle.
    """
    cdf = inclusive_prefix_sum(weights, mode).astype(np.float64)
    targets = np.asarray(positions, dtype=np.float64) * cdf[-1]
    idx = np.searchsorted(cdf, targets, side='right')
    return np.minimum(idx, cdf.shape[0] - 1)


def multinomial_ancestors(weights: np.ndarray, uniforms: np.ndarray, mode=None) -> np.ndarray:
    return ancestors_from_positions(weights, uniforms, mode)


def systematic_ancestors(weights: np.ndarray, u: float, mode=None, count: int = None) -> np.ndarray:
    """``count`` evenly spaced positions (u + i) / count, one per offspring; defaults to one per particle."""
    n = weights.shape[0] if count is None else count
    positions = (u + np.arange(n, dtype=np.float64)) / n
    return ancestors_from_positions(weights, positions, mode)


def offspring_counts(ancestors: np.ndarray, n: int) -> np.ndarray:
    return np.bincount(ancestors, minlength=n)


def _uniform_population(pop: WeightedPopulation, ancestors: np.ndarray) -> WeightedPopulation:
    return WeightedPopulation(
        particles=pop.particles[ancestors],
        log_weights=np.zeros_like(pop.log_weights),
        ess_ratio=1.0,
    )


def resample_multinomial(pop: WeightedPopulation, streams, mode=None,
                         time_index: int = None) -> Tuple[WeightedPopulation, np.ndarray]:
    """N i.i.d. ancestors; slot i uses one uniform from ``streams`` row i."""
    weights = pop.normalized(mode, time_index).weights
    ancestors = multinomial_ancestors(weights, streams.uniforms(), mode)
    return _uniform_population(pop, ancestors), ancestors


def resample_systematic(pop: WeightedPopulation, stream, mode=None,
                        time_index: int = None) -> Tuple[WeightedPopulation, np.ndarray]:
    """One uniform from the coordinator ``stream``; offspring counts are floor or ceil of N * W_i."""
    weights = pop.normalized(mode, time_index).weights
    ancestors = systematic_ancestors(weights, stream.next_uniform(), mode)
    return _uniform_population(pop, ancestors), ancestors


def resample(pop: WeightedPopulation, method: str, streams, coordinator, mode=None,
             time_index: int = None) -> Tuple[WeightedPopulation, np.ndarray]:
    if method == 'multinomial':
        return resample_multinomial(pop, streams, mode, time_index)
    if method == 'systematic':
        return resample_systematic(pop, coordinator, mode, time_index)
    raise ConfigurationError(f"Unknown resampler '{method}'; choose from {', '.join(RESAMPLERS)}")


def should_resample(ess_value: float, n: int, threshold_ratio: float) -> bool:
    return threshold_ratio > 0 and ess_value / n < threshold_ratio


def population_ess(pop: WeightedPopulation, mode=None) -> float:
    return ess(pop.normalized(PrecisionMode.coerce(mode)))
