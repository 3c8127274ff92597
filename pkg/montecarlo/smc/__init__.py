from .pfilter import PfilterConfig, PfilterResult, particle_filter_run
from .resampling import (
    RESAMPLERS,
    WeightedPopulation,
    ancestors_from_positions,
    multinomial_ancestors,
    offspring_counts,
    resample,
    resample_multinomial,
    resample_systematic,
    systematic_ancestors,
)
from .sampler import SmcSamplerConfig, SmcSamplerResult, smc_sampler_run

__all__ = [
    'PfilterConfig', 'PfilterResult', 'RESAMPLERS', 'SmcSamplerConfig', 'SmcSamplerResult',
    'WeightedPopulation', 'ancestors_from_positions', 'multinomial_ancestors', 'offspring_counts',
    'particle_filter_run', 'resample', 'resample_multinomial', 'resample_systematic', 'smc_sampler_run',
    'systematic_ancestors',
]
