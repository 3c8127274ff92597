from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = (
        "Run istoy, smc-sampler and pfilter in double and single precision on identical random numbers "
        "and compare the difference with each estimate's Monte Carlo standard error."
    )
    kind = 'compare-precision'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--experiments', metavar='LIST', help='Subset of istoy,smc-sampler,pfilter')
        parser.add_argument('--samples', type=int, help='istoy draws')
        parser.add_argument('--threads', type=int, help='istoy substreams')
        parser.add_argument('--particles', type=int, help='smc-sampler particles')
        parser.add_argument('--temperatures', type=int, help='smc-sampler temperatures')
        parser.add_argument('--mcmc-steps', type=int, help='smc-sampler moves per temperature')
        parser.add_argument('--filter-particles', type=int, help='pfilter particles')

    def experiment_options(self):
        return ('experiments', 'samples', 'threads', 'particles', 'temperatures', 'mcmc_steps',
                'filter_particles')
