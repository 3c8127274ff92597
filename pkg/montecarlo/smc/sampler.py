"""
Tempered SMC sampler; with the ESS threshold at 0 it never resamples and is
annealed importance sampling.

Particles start uniform on the target's box with equal weights. At each
temperature the weights are multiplied by pi_t(x)/pi_{t-1}(x) evaluated at
the particles before they move, the population is resampled if its ESS
fell below the threshold, and every particle then takes a fixed number of
random-walk Metropolis steps targeting pi**beta_t.
"""
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from ..exceptions import ConfigurationError
from ..parallel import PrecisionMode, Population, WorkerPool, ess, normalize_log_weights
from ..popmcmc import make_ladder, rwm_kernel
from ..prng import build_streams
from ..prng.constants import DEFAULT_BLOCK_LENGTH
from ..targets import TargetSpec
from .resampling import RESAMPLERS, WeightedPopulation, resample, should_resample

logger = logging.getLogger(__name__)


@dataclass
class SmcSamplerConfig:
    particles: int = 8192
    temperatures: int = 200
    mcmc_steps: int = 10
    ess_threshold: float = 0.5
    resampler: str = 'multinomial'
    rwm_scale: float = 1.0
    seed: int = 0
    workers: int = 1
    precision: str = 'double'
    generator: str = 'mrg32k3a'
    block_length: int = DEFAULT_BLOCK_LENGTH

    def __post_init__(self):
        if self.particles < 2:
            raise ConfigurationError(f"particles must be >= 2, got {self.particles}")
        if self.temperatures < 1:
            raise ConfigurationError(f"temperatures must be >= 1, got {self.temperatures}")
        if self.mcmc_steps < 0:
            raise ConfigurationError(f"mcmc_steps must be >= 0, got {self.mcmc_steps}")
        if not 0.0 <= self.ess_threshold <= 1.0:
            raise ConfigurationError(f"ess_threshold must lie in [0, 1], got {self.ess_threshold}")
        if self.resampler not in RESAMPLERS:
            raise ConfigurationError(f"Unknown resampler '{self.resampler}'")

    @property
    def is_ais(self) -> bool:
        return self.ess_threshold == 0


@dataclass
class SmcSamplerResult:
    population: WeightedPopulation
    weights: np.ndarray
    trace: List[dict]
    resample_events: List[int] = field(default_factory=list)


def smc_sampler_run(config: SmcSamplerConfig, target: TargetSpec) -> SmcSamplerResult:
    mode = PrecisionMode.coerce(config.precision)
    dtype = mode.dtype
    n = config.particles
    bank, coordinator = build_streams(config.generator, config.seed, n, config.block_length)
    betas = (0.0,) + make_ladder(config.temperatures).betas

    x = target.sample_prior(bank)
    logpi = target.log_density(x)
    log_weights = np.zeros(n, dtype=dtype)
    trace = []
    events = []
    label = 'AIS' if config.is_ais else 'SMC sampler'
    logger.info(f"{label}: N={n}, T={config.temperatures}, mcmc_steps={config.mcmc_steps}, "
                f"threshold={config.ess_threshold}, workers={config.workers}")

    with WorkerPool(config.workers) as pool:
        for t in range(1, len(betas)):
            step = dtype.type(betas[t] - betas[t - 1])
            with np.errstate(invalid='ignore'):
                log_weights = (log_weights + step * logpi).astype(dtype)
            weights = normalize_log_weights(log_weights, mode, time_index=t)
            ess_value = ess(weights)
            resampled = should_resample(ess_value, n, config.ess_threshold)
            if resampled:
                pop, ancestors = resample(
                    WeightedPopulation(x, log_weights), config.resampler, bank, coordinator, mode, t
                )
                x, log_weights = pop.particles, pop.log_weights
                logpi = logpi[ancestors]
                events.append(t)
            carried_ess = ess(normalize_log_weights(log_weights, mode, time_index=t)) if resampled else ess_value

            accepted = 0
            if config.mcmc_steps:
                population = Population(
                    {'x': x, 'logpi': logpi, 'beta': np.full(n, betas[t], dtype=dtype),
                     'accepted': np.zeros(n, dtype=np.int64)},
                    bank,
                )
                population = pool.map(population, rwm_kernel(target, config.rwm_scale, config.mcmc_steps))
                x, logpi, bank = population['x'], population['logpi'], population.streams
                accepted = int(population['accepted'].sum())

            trace.append({
                't': t,
                'beta': betas[t],
                'ess': ess_value,
                'ess_ratio': ess_value / n,
                'resampled': resampled,
                'ess_after': carried_ess,
                'acceptance': accepted / (n * config.mcmc_steps) if config.mcmc_steps else float('nan'),
            })
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug(f"t={t} beta={betas[t]:.5f} ess={ess_value:.1f} resampled={resampled}")

    final_weights = normalize_log_weights(log_weights, mode, time_index=config.temperatures)
    final_ess = ess(final_weights)
    logger.info(f"{label} finished: {len(events)} resampling events, final ESS {final_ess:.1f}")
    return SmcSamplerResult(
        population=WeightedPopulation(x, log_weights, final_ess / n),
        weights=final_weights.weights,
        trace=trace,
        resample_events=events,
    )
