from ._base import ExperimentCommand


class Command(ExperimentCommand):
    help = (
        "Bootstrap particle filter on the factor stochastic volatility model (or the linear-Gaussian "
        "reference). Reads observations from --data or simulates them; writes per-step means and stds."
    )
    kind = 'pfilter'

    def add_experiment_arguments(self, parser):
        parser.add_argument('--model', choices=['fsv', 'linear-gaussian'])
        parser.add_argument('--particles', type=int, help='Particles N (default 8192)')
        parser.add_argument('--ess-threshold', type=float, help='Resample when ESS/N drops below this (default 0.5)')
        parser.add_argument('--resampler', choices=['multinomial', 'systematic'])
        parser.add_argument('--data', metavar='PATH', help='Observations CSV (y1.. columns, optional x1.. truth)')
        parser.add_argument('--data-seed', type=int, help='Seed of the simulated dataset')
        parser.add_argument('--steps', type=int, help='Time steps when simulating (default 200)')

    def experiment_options(self):
        return ('model', 'particles', 'ess_threshold', 'resampler', 'data', 'data_seed', 'steps')
