from .base import FunctionTarget, SsmSpec, TargetSpec
from .fsv import (
    FsvModel,
    FsvParams,
    FsvSimulation,
    fsv_log_obs_density,
    fsv_simulate,
    fsv_transition_sample,
)
from .linear_gaussian import KalmanResult, LinearGaussianModel
from .mixture import TRUE_MEANS, MixtureModel, MixturePosterior, mixture_log_posterior, simulate_mixture_data
from .toy import TOY_SECOND_MOMENT, ToyTarget, square, toy_log_proposal, toy_log_target

__all__ = [
    'FsvModel', 'FsvParams', 'FsvSimulation', 'FunctionTarget', 'KalmanResult', 'LinearGaussianModel',
    'MixtureModel', 'MixturePosterior', 'SsmSpec', 'TOY_SECOND_MOMENT', 'TRUE_MEANS', 'TargetSpec',
    'ToyTarget', 'fsv_log_obs_density', 'fsv_simulate', 'fsv_transition_sample', 'mixture_log_posterior',
    'simulate_mixture_data', 'square', 'toy_log_proposal', 'toy_log_target',
]
