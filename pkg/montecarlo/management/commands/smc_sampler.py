from ._base import MIXTURE_OPTIONS, ExperimentCommand, add_mixture_arguments


class Command(ExperimentCommand):
    help = "SMC sampler over a tempering schedule on the mixture-means posterior (AIS with --ess-threshold 0)."
    kind = 'smc-sampler'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--particles', type=int, help='Particles N (default 8192)')
        parser.add_argument('--temperatures', type=int, help='Tempering steps T (default 200)')
        parser.add_argument('--mcmc-steps', type=int, help='RWM moves per temperature (default 10)')
        parser.add_argument('--ess-threshold', type=float, help='Resample when ESS/N drops below this (default 0.5)')
        parser.add_argument('--resampler', choices=['multinomial', 'systematic'])
        parser.add_argument('--rwm-scale', type=float, help='Random-walk proposal standard deviation')
        parser.add_argument('--no-kde', dest='kde', action='store_false', default=None,
                            help='Skip the (mu1, mu2) density grid')
        add_mixture_arguments(parser)

    def experiment_options(self):
        return ('particles', 'temperatures', 'mcmc_steps', 'ess_threshold', 'resampler', 'rwm_scale', 'kde',
                *MIXTURE_OPTIONS)
