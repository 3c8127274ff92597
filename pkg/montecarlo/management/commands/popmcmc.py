from ._base import MIXTURE_OPTIONS, ExperimentCommand, add_mixture_arguments


class Command(ExperimentCommand):
    help = (
        "Population MCMC (parallel tempering) on the mixture-means posterior. "
        "Writes samples.csv from the target chain plus the exchange trace and mode diagnostics."
    )
    kind = 'popmcmc'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--chains', type=int, help='Number of tempered chains M (default 200)')
        parser.add_argument('--iterations', type=int, help='Recorded iterations (default 8192)')
        parser.add_argument('--burn-in', type=int, help='Iterations discarded before recording')
        parser.add_argument('--rwm-scale', type=float, help='Random-walk proposal standard deviation')
        parser.add_argument('--dump-all-chains', action='store_true', default=None,
                            help='Also write every chain state per iteration')
        parser.add_argument('--no-kde', dest='kde', action='store_false', default=None,
                            help='Skip the (mu1, mu2) density grid')
        parser.add_argument('--trace', metavar='PATH', help='Also copy the exchange trace CSV to PATH')
        add_mixture_arguments(parser)

    def experiment_options(self):
        return ('chains', 'iterations', 'burn_in', 'rwm_scale', 'dump_all_chains', 'kde', 'trace',
                *MIXTURE_OPTIONS)
