from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = (
        "Time popmcmc, smc-sampler and pfilter across sizes and worker counts. "
        "Writes timings.csv (median of repetitions, speedup) and scaling.json."
    )
    kind = 'bench'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--workers-list', metavar='LIST', help='Comma-separated worker counts (at least two)')
        parser.add_argument('--repetitions', type=int, help='Timed repetitions per cell, at least 3')
        parser.add_argument('--experiments', metavar='LIST', help='Subset of popmcmc,smc-sampler,pfilter')
        parser.add_argument('--chain-sizes', metavar='LIST', help='Chain counts M for popmcmc')
        parser.add_argument('--particle-sizes', metavar='LIST', help='Particle counts N for smc-sampler')
        parser.add_argument('--filter-sizes', metavar='LIST', help='Particle counts N for pfilter')

    def experiment_options(self):
        return ('workers_list', 'repetitions', 'experiments', 'chain_sizes', 'particle_sizes', 'filter_sizes')
