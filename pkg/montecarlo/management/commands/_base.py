import json

from django.core.management.base import BaseCommand, CommandError

from montecarlo.exceptions import MonteCarloError


class ExperimentCommand(BaseCommand):
    """
    Shared plumbing for experiment commands.

    Subclasses set ``kind`` and add their own flags in ``add_experiment_arguments``;
    every flag left unset falls back to the config file, then to the defaults.
    """

    kind = ''
    common_options = ('seed', 'workers', 'precision', 'generator', 'out_dir', 'out')

    def add_arguments(self, parser):
        parser.add_argument('--config', dest='config_file', metavar='PATH',
                            help='Flat "key = value" experiment configuration file')
        parser.add_argument('--out-dir', metavar='PATH', help='Directory for artifacts and manifest.json')
        parser.add_argument('--out', metavar='PATH', help='Also copy the main result CSV to PATH')
        parser.add_argument('--seed', type=int, help='Master seed')
        parser.add_argument('--workers', type=int, help='Worker threads')
        parser.add_argument('--precision', choices=['single', 'double'])
        parser.add_argument('--generator', choices=['mrg32k3a', 'xorshift'])
        parser.add_argument('--no-record', action='store_true', help='Do not write a run ledger row')
        parser.add_argument('--json', action='store_true', help='Print the run summary as JSON')
        self.add_experiment_arguments(parser)

    def add_experiment_arguments(self, parser):
        pass

    def experiment_options(self):
        return ()

    def handle(self, *args, **options):
        from montecarlo.experiments import build_config, run_experiment

        overrides = {key: options.get(key) for key in (*self.common_options, *self.experiment_options())}
        try:
            config = build_config(self.kind, options.get('config_file'), overrides)
            outcome = run_experiment(self.kind, config, record=False if options['no_record'] else None)
        except MonteCarloError as exc:
            self.stderr.write(self.style.ERROR(f"{self.kind} failed: {exc}"))
            raise CommandError(str(exc), returncode=exc.exit_code)

        if options['json']:
            self.stdout.write(json.dumps(outcome.summary, indent=2, sort_keys=True, default=str))
        else:
            for key, value in sorted(outcome.summary.items()):
                self.stdout.write(f"  {key}: {value}")
        self.stdout.write(self.style.SUCCESS(
            f"{self.kind} completed in {outcome.run.wall_clock_seconds:.2f}s -> {outcome.out_dir}"
        ))


MIXTURE_OPTIONS = ('k', 'sigma', 'observations', 'true_means', 'bound', 'data', 'data_seed', 'capture_radius')


def add_mixture_arguments(parser):
    parser.add_argument('--k', type=int, help='Mixture components (default 4)')
    parser.add_argument('--sigma', type=float, help='Component standard deviation (default 0.55)')
    parser.add_argument('--observations', type=int, help='Simulated observations m (default 100)')
    parser.add_argument('--true-means', metavar='LIST', help='Comma-separated means used to simulate data')
    parser.add_argument('--bound', type=float, help='Prior box half-width (default 10)')
    parser.add_argument('--data', metavar='PATH', help='Observations CSV with a single y column')
    parser.add_argument('--data-seed', type=int, help='Seed of the simulated dataset')
    parser.add_argument('--capture-radius', type=float, help='Distance within which a sample belongs to a mode')
