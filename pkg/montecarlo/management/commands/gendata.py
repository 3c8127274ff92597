from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Simulate a dataset (mixture observations or a state-space path) seeded by --seed."
    kind = 'gendata'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--model', choices=['mixture', 'fsv', 'linear-gaussian'])
        parser.add_argument('--observations', type=int, help='Mixture observations m (default 100)')
        parser.add_argument('--true-means', metavar='LIST', help='Comma-separated mixture means')
        parser.add_argument('--k', type=int, help='Mixture components (default 4)')
        parser.add_argument('--sigma', type=float, help='Mixture component standard deviation')
        parser.add_argument('--steps', type=int, help='State-space time steps (default 200)')
        parser.add_argument('--obs-dim', type=int, help='FSV observation dimension M (default 5)')
        parser.add_argument('--factor-dim', type=int, help='FSV factor dimension K (default 3)')

    def experiment_options(self):
        return ('model', 'observations', 'true_means', 'k', 'sigma', 'steps', 'obs_dim', 'factor_dim')
