"""
Bootstrap particle filter.

Particles are propagated through the transition and weighted by the
observation density. Log-weights are kept as log(N * W), so the
normalization increment at each step is exactly the log of the predictive
likelihood estimate and the increments sum to the log-likelihood estimate.
"""
import logging
from dataclasses import dataclass, field
from functools import partial
from typing import List, Optional

import numpy as np

from ..exceptions import ConfigurationError
from ..parallel import (
    PrecisionMode,
    Population,
    WorkerPool,
    ess,
    normalize_log_weights,
    weighted_moments,
)
from ..prng import build_streams
from ..prng.constants import DEFAULT_BLOCK_LENGTH
from ..targets import SsmSpec
from .resampling import RESAMPLERS, WeightedPopulation, resample, should_resample

logger = logging.getLogger(__name__)


@dataclass
class PfilterConfig:
    particles: int = 8192
    ess_threshold: float = 0.5
    resampler: str = 'multinomial'
    seed: int = 0
    workers: int = 1
    precision: str = 'double'
    generator: str = 'mrg32k3a'
    block_length: int = DEFAULT_BLOCK_LENGTH

    def __post_init__(self):
        if self.particles < 2:
            raise ConfigurationError(f"particles must be >= 2, got {self.particles}")
        if not 0.0 <= self.ess_threshold <= 1.0:
            raise ConfigurationError(f"ess_threshold must lie in [0, 1], got {self.ess_threshold}")
        if self.resampler not in RESAMPLERS:
            raise ConfigurationError(f"Unknown resampler '{self.resampler}'")


@dataclass
class PfilterResult:
    means: np.ndarray  # (T, state_dim)
    stds: np.ndarray  # (T, state_dim)
    log_likelihood: float
    ess_trace: List[dict]
    coverage: Optional[float] = None
    resample_events: List[int] = field(default_factory=list)


def _propagate_kernel(chunk, streams, model: SsmSpec, y: np.ndarray):
    x = model.sample_transition(chunk['x'], streams)
    return {'x': x, 'logg': model.log_obs_density(x, y)}


def particle_filter_run(config: PfilterConfig, model: SsmSpec, observations,
                        truth: np.ndarray = None) -> PfilterResult:
    """
    Filter ``observations`` (T rows). When the true latent path is supplied
    the result carries the fraction of (t, component) cells where the truth
    lies within one filter standard deviation of the filter mean.
    """
    mode = PrecisionMode.coerce(config.precision)
    dtype = mode.dtype
    y = np.asarray(observations, dtype=np.float64).reshape(-1, model.obs_dim)
    T = y.shape[0]
    if T < 1:
        raise ConfigurationError('Particle filter needs at least one observation')
    n = config.particles
    log_n = dtype.type(np.log(n))
    bank, coordinator = build_streams(config.generator, config.seed, n, config.block_length)

    x = np.asarray(model.sample_initial(bank), dtype=dtype).reshape(n, model.state_dim)
    log_weights = np.zeros(n, dtype=dtype)
    means = np.empty((T, model.state_dim))
    stds = np.empty((T, model.state_dim))
    log_likelihood = 0.0
    trace = []
    events = []
    logger.info(f"pfilter: N={n}, T={T}, resampler={config.resampler}, threshold={config.ess_threshold}, "
                f"workers={config.workers}")

    with WorkerPool(config.workers) as pool:
        for t in range(T):
            population = pool.map(
                Population({'x': x}, bank), partial(_propagate_kernel, model=model, y=y[t].astype(dtype))
            )
            x, bank = population['x'].astype(dtype), population.streams
            log_weights = (log_weights + population['logg']).astype(dtype)

            weights = normalize_log_weights(log_weights, mode, time_index=t + 1)
            log_likelihood += weights.log_norm_constant_increment
            mean, std = weighted_moments(weights.weights, x, mode)
            means[t], stds[t] = mean, std
            ess_value = ess(weights)

            resampled = should_resample(ess_value, n, config.ess_threshold)
            if resampled:
                pop, _ = resample(WeightedPopulation(x, log_weights), config.resampler, bank, coordinator,
                                  mode, t + 1)
                x, log_weights = pop.particles, pop.log_weights
                events.append(t + 1)
            else:
                with np.errstate(divide='ignore'):
                    log_weights = (np.log(weights.weights) + log_n).astype(dtype)
            carried_ess = ess(normalize_log_weights(log_weights, mode, time_index=t + 1)) if resampled else ess_value
            trace.append({'t': t + 1, 'ess': ess_value, 'ess_ratio': ess_value / n, 'resampled': resampled,
                          'ess_after': carried_ess})
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug(f"t={t + 1} ess={ess_value:.1f} loglik={log_likelihood:.4f} resampled={resampled}")

    coverage = None
    if truth is not None:
        truth = np.asarray(truth, dtype=np.float64).reshape(T, model.state_dim)
        coverage = float(np.mean(np.abs(truth - means) <= stds))
    logger.info(f"pfilter finished: log-likelihood {log_likelihood:.4f}, {len(events)} resampling events")
    return PfilterResult(means=means, stds=stds, log_likelihood=log_likelihood, ess_trace=trace,
                         coverage=coverage, resample_events=events)
