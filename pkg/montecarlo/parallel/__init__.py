from .executor import Population, WorkerPool, chunk_bounds, par_map
from .reduction import (
    PrecisionMode,
    as_precision,
    inclusive_prefix_sum,
    pairwise_sum,
    sequential_sum,
)
from .weights import (
    NormalizedWeights,
    ess,
    importance_estimate,
    importance_estimate_with_error,
    importance_std_error,
    mc_estimate,
    normalize_log_weights,
    weighted_moments,
)

__all__ = [
    'NormalizedWeights', 'Population', 'PrecisionMode', 'WorkerPool', 'as_precision', 'chunk_bounds',
    'ess', 'importance_estimate', 'importance_estimate_with_error', 'importance_std_error',
    'inclusive_prefix_sum', 'mc_estimate', 'normalize_log_weights', 'pairwise_sum', 'par_map',
    'sequential_sum', 'weighted_moments',
]
