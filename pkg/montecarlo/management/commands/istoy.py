from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Importance-sampling toy: self-normalized estimate of E[X^2] under a two-component Gaussian mixture."
    kind = 'istoy'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--samples', type=int, help='Proposal draws N (default 2**24)')
        parser.add_argument('--threads', type=int, help='Substreams the draws are split across (default 4096)')

    def experiment_options(self):
        return ('samples', 'threads')
