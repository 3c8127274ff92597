"""
Experiment runner.

Binds a validated configuration to models, samplers and diagnostics, writes
the CSV/JSON artifacts into the run directory and records the run in the
ledger. Every run, failed or not, leaves a manifest.json describing the
configuration, its hash, wall-clock time, worker count and the artifacts.
"""
import hashlib
import json
import logging
import platform
import time
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import psutil
from django.conf import settings
from django.db import DatabaseError
from django.utils import timezone
from rest_framework import serializers

from . import artifacts as io
from .diagnostics import (
    ModeAtlas,
    assign_mode,
    kde_grid,
    min_mode_mass,
    mode_counts,
    occupancy_ratio,
    traversal_summary,
)
from .exceptions import ConfigurationError, MonteCarloError, NumericalError
from .models import ExperimentRun
from .parallel import (
    Population,
    PrecisionMode,
    WorkerPool,
    importance_std_error,
    normalize_log_weights,
    pairwise_sum,
)
from .popmcmc import PopMcmcConfig, run_popmcmc
from .prng import Mrg32k3a, build_streams
from .serializers import CONFIG_SERIALIZERS, ExperimentRunSerializer
from .smc import PfilterConfig, SmcSamplerConfig, particle_filter_run, smc_sampler_run
from .targets import (
    TOY_SECOND_MOMENT,
    FsvModel,
    FsvParams,
    LinearGaussianModel,
    MixtureModel,
    MixturePosterior,
    simulate_mixture_data,
    toy_log_proposal,
    toy_log_target,
)

logger = logging.getLogger(__name__)

HASH_EXCLUDED = ('workers', 'out_dir', 'out', 'trace')
MAX_ATLAS_COMPONENTS = 6

Artifacts = Tuple[List[Path], dict]


# Configuration

def normalize_key(key: str) -> str:
    return key.strip().replace('-', '_')


def parse_value(raw: str):
    """'a' stays a string, 'a, b' becomes a list, 'a, b; c, d' a list of rows."""
    raw = raw.strip()
    if ';' in raw:
        return [[c.strip() for c in row.split(',') if c.strip()] for row in raw.split(';') if row.strip()]
    if ',' in raw:
        return [c.strip() for c in raw.split(',') if c.strip()]
    return raw


def parse_config_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, hyphens and underscores in keys are interchangeable."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"Cannot read config file {path}: {exc}")
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value', got '{line}'")
        key, value = line.split('=', 1)
        values[normalize_key(key)] = parse_value(value)
    return values


def build_config(kind: str, config_file=None, overrides: Optional[dict] = None) -> dict:
    """Defaults, then the config file, then non-None overrides, validated by the kind's serializer."""
    try:
        serializer_class = CONFIG_SERIALIZERS[kind]
    except KeyError:
        raise ConfigurationError(f"Unknown experiment kind '{kind}'")
    data = {}
    if config_file:
        data.update(parse_config_file(config_file))
    for key, value in (overrides or {}).items():
        if value is not None:
            data[normalize_key(key)] = parse_value(value) if isinstance(value, str) else value

    fields = serializer_class().fields
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigurationError(f"Unknown {kind} settings: {', '.join(unknown)}",
                                 errors={key: ['Unknown setting.'] for key in unknown})
    for key, value in data.items():
        if isinstance(fields[key], serializers.ListField) and not isinstance(value, list):
            data[key] = [value]
    serializer = serializer_class(data=data)
    if not serializer.is_valid():
        logger.error(f"Invalid {kind} configuration: {serializer.errors}")
        raise ConfigurationError(f"Invalid {kind} configuration: {json.dumps(serializer.errors)}",
                                 errors=serializer.errors)
    return json.loads(json.dumps(serializer.validated_data))


def config_hash(config: dict) -> str:
    canonical = {k: v for k, v in config.items() if k not in HASH_EXCLUDED}
    blob = json.dumps(canonical, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(blob.encode()).hexdigest()


def host_facts() -> dict:
    memory = psutil.virtual_memory()
    return {
        'physical_cores': psutil.cpu_count(logical=False),
        'logical_cores': psutil.cpu_count(),
        'memory_bytes': memory.total,
        'python': platform.python_version(),
        'numpy': np.__version__,
        'platform': platform.platform(),
    }


# Shared model construction

def mixture_model_from_config(config: dict) -> MixtureModel:
    if config.get('data'):
        y = io.load_mixture_data(config['data'])
    else:
        y = simulate_mixture_data(config['true_means'], config['observations'], config['sigma'],
                                  Mrg32k3a.from_seed(config['data_seed']))
    return MixtureModel(y, k=config['k'], sigma=config['sigma'], bound=config['bound'])


def ssm_from_config(config: dict, mode=None):
    """(model, observations, true latent path or None)."""
    if config['model'] == 'fsv':
        params = FsvParams.default(
            obs_dim=config['obs_dim'], factor_dim=config['factor_dim'], psi=config['psi'],
            phi=config['phi'], x0=config['x0'], B=config.get('B'), U=config.get('U'),
        )
        model = FsvModel(params, mode)
    else:
        model = LinearGaussianModel(a=config['a'], q=config['q'], r=config['r'], mode=mode)
    if config.get('data'):
        y, x = io.load_ssm_data(config['data'])
        if y.shape[1] != model.obs_dim:
            raise ConfigurationError(f"{config['data']} has {y.shape[1]} observation columns, "
                                     f"model expects {model.obs_dim}")
    else:
        x, y = model.simulate(config['steps'], Mrg32k3a.from_seed(config['data_seed']))
    return model, y, x


def _atlas(config: dict) -> Optional[ModeAtlas]:
    if config['k'] > MAX_ATLAS_COMPONENTS:
        logger.warning(f"Skipping mode diagnostics for k={config['k']}")
        return None
    return ModeAtlas(tuple(config['true_means']), config['capture_radius'])


def _mu_header(k: int) -> List[str]:
    return [f"mu{i + 1}" for i in range(k)]


def _write_histograms(out_dir: Path, samples, atlas: ModeAtlas, weights=None) -> Tuple[List[Path], dict]:
    full = mode_counts(samples, atlas, weights)
    marginal = mode_counts(samples, atlas, weights, marginal=True)
    paths = [
        io.write_records(out_dir / 'mode_counts.csv',
                         [{'mode_id': m, 'count_or_weight': c} for m, c in full.rows()]),
        io.write_records(out_dir / 'marginal_mode_counts.csv',
                         [{'mode_id': m, 'count_or_weight': c} for m, c in marginal.rows()]),
    ]
    summary = {
        'modes_occupied': int((full.counts > 0).sum()),
        'marginal_modes_occupied': int((marginal.counts > 0).sum()),
        'occupancy_ratio': occupancy_ratio(full),
        'min_mode_mass': min_mode_mass(full),
        'min_marginal_mode_mass': min_mode_mass(marginal),
    }
    return paths, summary


def _write_density(out_dir: Path, points, weights, bound: float) -> List[Path]:
    """(mu1, mu2) density grid; skipped with a warning when the points are too few or degenerate."""
    try:
        grid = kde_grid(points, weights, -bound, bound, max_points=settings.MONTECARLO['KDE_MAX_POINTS'])
    except (ConfigurationError, NumericalError) as exc:
        logger.warning(f"Skipping kde.csv: {exc}")
        return []
    return [io.write_matrix(out_dir / 'kde.csv', ['mu1', 'mu2', 'density'], grid)]


# istoy

def _istoy_kernel(chunk, streams, per: int, mode: PrecisionMode):
    x = streams.normals(per).astype(mode.dtype)
    return {'lw': toy_log_target(x, mode) - toy_log_proposal(x, mode), 'phi': x * x}


def istoy_estimate(config: dict) -> dict:
    """
    Self-normalized estimate of E[X**2] under the toy target.

    ``threads`` substreams each produce one contiguous block of standard
    normal proposals, in stream order.
    """
    mode = PrecisionMode.coerce(config['precision'])
    n, threads = config['samples'], min(config['threads'], config['samples'])
    per = -(-n // threads)
    bank, _ = build_streams(config['generator'], config['seed'], threads, config['block_length'])
    population = Population({'thread': np.arange(threads)}, bank)
    with WorkerPool(config['workers']) as pool:
        population = pool.map(population, partial(_istoy_kernel, per=per, mode=mode))
    lw = population['lw'].reshape(-1)[:n]
    phi = population['phi'].reshape(-1)[:n]
    weights = normalize_log_weights(lw, mode)
    estimate = float(pairwise_sum(weights.weights * phi, mode, workers=config['workers']))
    std_error = importance_std_error(weights.weights, phi, estimate)
    logger.info(f"istoy: N={n}, estimate {estimate:.6f} +/- {std_error:.2e} (exact {TOY_SECOND_MOMENT})")
    return {'samples': n, 'estimate': estimate, 'std_error': std_error, 'exact': TOY_SECOND_MOMENT,
            'precision': mode.value}


def run_istoy(config: dict, out_dir: Path) -> Artifacts:
    result = istoy_estimate(config)
    path = io.write_records(out_dir / 'estimate.csv', [{'quantity': 'E[X^2]', **result}],
                            ['quantity', 'samples', 'estimate', 'std_error', 'exact', 'precision'])
    return [path], result


# popmcmc

def run_popmcmc_experiment(config: dict, out_dir: Path) -> Artifacts:
    model = mixture_model_from_config(config)
    target = MixturePosterior(model, config['precision'])
    atlas = _atlas(config)
    result = run_popmcmc(PopMcmcConfig(
        chains=config['chains'], iterations=config['iterations'], rwm_scale=config['rwm_scale'],
        seed=config['seed'], workers=config['workers'], burn_in=config['burn_in'],
        dump_all_chains=config['dump_all_chains'], precision=config['precision'],
        generator=config['generator'], block_length=config['block_length'],
    ), target)

    header = _mu_header(model.k)
    paths = [
        io.dump_mixture_data(out_dir / 'data.csv', model.y),
        io.write_matrix(out_dir / 'samples.csv', header, result.samples),
        io.write_records(out_dir / 'trace.csv', result.trace),
        io.write_records(out_dir / 'chains.csv', result.chain_table),
    ]
    if result.all_chains is not None:
        iters, chains, k = result.all_chains.shape
        index = np.column_stack([np.repeat(np.arange(iters), chains), np.tile(np.arange(chains), iters)])
        paths.append(io.write_matrix(out_dir / 'all_chains.csv', ['iteration', 'chain'] + header,
                                     np.hstack([index, result.all_chains.reshape(-1, k)])))

    summary = {
        'iterations': config['iterations'],
        'chains': config['chains'],
        'target_chain_rwm_acceptance': result.chain_table[-1]['rwm_acceptance'],
        'swap_rate': float(np.mean([t['swaps_accepted'] / t['swaps_attempted']
                                    for t in result.trace if t['swaps_attempted']] or [0.0])),
    }
    if atlas is not None:
        sequence = assign_mode(result.samples, atlas)
        traversal = traversal_summary(sequence, atlas)
        paths.append(io.write_json(out_dir / 'traversal.json', traversal))
        hist_paths, hist_summary = _write_histograms(out_dir, result.samples, atlas)
        paths += hist_paths
        summary.update(hist_summary)
        summary['traversal_time'] = traversal['traversal_time']
    if config['kde'] and model.k >= 2:
        paths += _write_density(out_dir, result.samples[:, :2], None, model.bound)
    return paths, summary


# smc-sampler

def run_smc_sampler_experiment(config: dict, out_dir: Path) -> Artifacts:
    model = mixture_model_from_config(config)
    target = MixturePosterior(model, config['precision'])
    atlas = _atlas(config)
    result = smc_sampler_run(SmcSamplerConfig(
        particles=config['particles'], temperatures=config['temperatures'], mcmc_steps=config['mcmc_steps'],
        ess_threshold=config['ess_threshold'], resampler=config['resampler'], rwm_scale=config['rwm_scale'],
        seed=config['seed'], workers=config['workers'], precision=config['precision'],
        generator=config['generator'], block_length=config['block_length'],
    ), target)

    particles = result.population.particles.astype(np.float64)
    weights = result.weights.astype(np.float64)
    header = _mu_header(model.k)
    paths = [
        io.dump_mixture_data(out_dir / 'data.csv', model.y),
        io.write_matrix(out_dir / 'particles.csv', header + ['weight'], np.column_stack([particles, weights])),
        io.write_records(out_dir / 'trace.csv', result.trace),
    ]
    mean_mu1 = float(pairwise_sum(weights * particles[:, 0]))
    summary = {
        'particles': config['particles'],
        'temperatures': config['temperatures'],
        'resample_events': len(result.resample_events),
        'final_ess': result.population.ess_ratio * config['particles'],
        'posterior_mean_mu1': mean_mu1,
        'posterior_mean_mu1_std_error': importance_std_error(weights, particles[:, 0], mean_mu1),
    }
    if atlas is not None:
        hist_paths, hist_summary = _write_histograms(out_dir, particles, atlas, weights)
        paths += hist_paths
        summary.update(hist_summary)
    if config['kde'] and model.k >= 2:
        paths += _write_density(out_dir, particles[:, :2], weights, model.bound)
    return paths, summary


# pfilter

def filter_std_errors(result) -> np.ndarray:
    """Monte Carlo standard error of each filter mean: std / sqrt(ESS_t)."""
    ess_values = np.array([row['ess'] for row in result.ess_trace])
    return result.stds / np.sqrt(ess_values)[:, None]


def pfilter_from_config(config: dict):
    mode = PrecisionMode.coerce(config['precision'])
    model, y, truth = ssm_from_config(config, mode)
    result = particle_filter_run(PfilterConfig(
        particles=config['particles'], ess_threshold=config['ess_threshold'], resampler=config['resampler'],
        seed=config['seed'], workers=config['workers'], precision=config['precision'],
        generator=config['generator'], block_length=config['block_length'],
    ), model, y, truth)
    return model, y, truth, result


def run_pfilter_experiment(config: dict, out_dir: Path) -> Artifacts:
    model, y, truth, result = pfilter_from_config(config)
    header = [f"x{i + 1}" for i in range(model.state_dim)]
    paths = [
        io.dump_ssm_data(out_dir / 'data.csv', y, truth),
        io.write_matrix(out_dir / 'means.csv', header, result.means),
        io.write_matrix(out_dir / 'stds.csv', header, result.stds),
        io.write_records(out_dir / 'ess.csv', result.ess_trace),
    ]
    summary = {
        'model': config['model'],
        'particles': config['particles'],
        'steps': int(y.shape[0]),
        'log_likelihood': result.log_likelihood,
        'resample_events': len(result.resample_events),
        'coverage': result.coverage,
    }
    if isinstance(model, LinearGaussianModel):
        kalman = model.kalman_filter(y)
        paths.append(io.write_matrix(out_dir / 'kalman.csv', ['mean', 'variance'],
                                     np.column_stack([kalman.means, kalman.variances])))
        errors = filter_std_errors(result)[:, 0]
        summary['kalman_log_likelihood'] = kalman.log_likelihood
        summary['max_kalman_deviation_in_std_errors'] = float(
            np.max(np.abs(result.means[:, 0] - kalman.means) / errors)
        )
    return paths, summary


# gendata

def run_gendata(config: dict, out_dir: Path) -> Artifacts:
    if config['model'] == 'mixture':
        y = simulate_mixture_data(config['true_means'], config['observations'], config['sigma'],
                                  Mrg32k3a.from_seed(config['seed']))
        path = io.dump_mixture_data(out_dir / 'data.csv', y)
        return [path], {'model': 'mixture', 'rows': int(y.size), 'sample_mean': float(y.mean())}
    model, y, x = ssm_from_config({**config, 'data': None, 'data_seed': config['seed']})
    path = io.dump_ssm_data(out_dir / 'data.csv', y, x)
    return [path], {'model': config['model'], 'rows': int(y.shape[0]), 'obs_dim': int(y.shape[1])}


# compare-precision

def _precision_row(name: str, quantity: str, double: float, single: float, std_error: float,
                   abs_diff: Optional[float] = None) -> dict:
    diff = abs(double - single) if abs_diff is None else abs_diff
    ratio = diff / std_error if std_error > 0 else float('inf')
    return {'experiment': name, 'quantity': quantity, 'double': double, 'single': single,
            'abs_diff': diff, 'std_error': std_error, 'ratio': ratio, 'within_error': ratio < 1.0}


def run_compare_precision(config: dict, out_dir: Path) -> Artifacts:
    """Run each experiment with identical random numbers in double and single precision."""
    engine = {key: config[key] for key in ('seed', 'workers', 'generator', 'block_length')}
    rows = []
    if 'istoy' in config['experiments']:
        runs = {p: istoy_estimate({**engine, 'precision': p, 'samples': config['samples'],
                                   'threads': config['threads']}) for p in ('double', 'single')}
        rows.append(_precision_row('istoy', 'E[X^2]', runs['double']['estimate'], runs['single']['estimate'],
                                   runs['double']['std_error']))

    if 'smc-sampler' in config['experiments']:
        estimates = {}
        for precision in ('double', 'single'):
            sampler_config = build_config('smc-sampler', overrides={
                **engine, 'precision': precision, 'particles': config['particles'],
                'temperatures': config['temperatures'], 'mcmc_steps': config['mcmc_steps'],
                'data_seed': config['data_seed'],
            })
            model = mixture_model_from_config(sampler_config)
            result = smc_sampler_run(SmcSamplerConfig(
                particles=config['particles'], temperatures=config['temperatures'],
                mcmc_steps=config['mcmc_steps'], seed=config['seed'], workers=config['workers'],
                precision=precision, generator=config['generator'], block_length=config['block_length'],
            ), MixturePosterior(model, precision))
            w = result.weights.astype(np.float64)
            mu1 = result.population.particles[:, 0].astype(np.float64)
            mean = float(pairwise_sum(w * mu1))
            estimates[precision] = (mean, importance_std_error(w, mu1, mean))
        rows.append(_precision_row('smc-sampler', 'E[mu1]', estimates['double'][0], estimates['single'][0],
                                   estimates['double'][1]))

    if 'pfilter' in config['experiments']:
        results = {}
        for precision in ('double', 'single'):
            filter_config = build_config('pfilter', overrides={
                **engine, 'precision': precision, 'particles': config['filter_particles'],
                'data_seed': config['data_seed'],
            })
            results[precision] = pfilter_from_config(filter_config)[3]
        errors = filter_std_errors(results['double'])
        diff = np.abs(results['double'].means - results['single'].means)
        row = _precision_row('pfilter', 'filter means (averaged)', float(results['double'].means.mean()),
                             float(results['single'].means.mean()), float(errors.mean()),
                             abs_diff=float(diff.mean()))
        row['max_cell_ratio'] = float(np.max(diff / errors))
        rows.append(row)

    path = io.write_records(out_dir / 'compare.csv', rows,
                            ['experiment', 'quantity', 'double', 'single', 'abs_diff', 'std_error', 'ratio',
                             'within_error', 'max_cell_ratio'])
    return [path], {'rows': rows, 'all_within_error': all(r['within_error'] for r in rows)}


def _run_bench(config: dict, out_dir: Path) -> Artifacts:
    from .benchmark import run_bench
    return run_bench(config, out_dir)


EXPERIMENTS: Dict[str, Callable[[dict, Path], Artifacts]] = {
    'istoy': run_istoy,
    'popmcmc': run_popmcmc_experiment,
    'smc-sampler': run_smc_sampler_experiment,
    'pfilter': run_pfilter_experiment,
    'gendata': run_gendata,
    'compare-precision': run_compare_precision,
    'bench': _run_bench,
}

# Artifact copied by --out and --trace, per kind
EXPORTS = {
    'out': {
        'istoy': 'estimate.csv',
        'popmcmc': 'samples.csv',
        'smc-sampler': 'particles.csv',
        'pfilter': 'means.csv',
        'gendata': 'data.csv',
        'bench': 'timings.csv',
        'compare-precision': 'compare.csv',
    },
    'trace': {
        'popmcmc': 'trace.csv',
    },
}


# Ledger and manifest

@dataclass
class ExperimentOutcome:
    run: ExperimentRun
    out_dir: Path
    artifacts: List[Path]
    summary: dict
    manifest: Optional[Path] = None
    exit_code: int = 0
    extra: dict = field(default_factory=dict)


class ExperimentRunner:
    """Drives one experiment through REQUESTED -> RUNNING -> COMPLETED | FAILED."""

    def __init__(self, kind: str, config: dict, record: Optional[bool] = None):
        self.kind = kind
        self.config = config
        self.hash = config_hash(config)
        base = Path(settings.MONTECARLO['OUT_DIR'])
        self.out_dir = Path(config.get('out_dir') or base / f"{kind}-{self.hash[:12]}")
        self.record = settings.MONTECARLO['RECORD_RUNS'] if record is None else record
        self.run = ExperimentRun(
            kind=kind,
            config=config,
            config_hash=self.hash,
            seed=config.get('seed', 0),
            workers=config.get('workers', 1),
            precision=config.get('precision', 'double'),
            generator=config.get('generator', 'mrg32k3a'),
            out_dir=str(self.out_dir),
        )

    def _save(self):
        if not self.record:
            return
        try:
            self.run.save()
        except DatabaseError as exc:
            logger.warning(f"Run ledger unavailable, continuing without it: {exc}")
            self.record = False

    def _write_manifest(self, artifacts: List[Path], summary: dict) -> Path:
        payload = dict(ExperimentRunSerializer(self.run).data)
        payload.update({
            'config_hash': self.hash,
            'host': host_facts(),
            'artifacts': io.describe_artifacts(artifacts),
            'summary': summary,
        })
        return io.write_json(self.out_dir / 'manifest.json', payload)

    def _export(self, paths: List[Path]) -> List[Path]:
        by_name = {Path(p).name: p for p in paths}
        exported = []
        for key, sources in EXPORTS.items():
            destination = self.config.get(key)
            source = by_name.get(sources.get(self.kind))
            if destination and source is not None:
                exported.append(io.export_copy(source, destination))
        return exported

    def execute(self, fn: Callable[[dict, Path], Artifacts] = None) -> ExperimentOutcome:
        fn = fn or EXPERIMENTS[self.kind]
        io.ensure_dir(self.out_dir)
        self.run.status = 'RUNNING'
        self.run.started_at = timezone.now()
        self._save()
        logger.info(f"Starting {self.kind} run {self.run.id} (config {self.hash[:12]}) -> {self.out_dir}")
        started = time.perf_counter()
        try:
            paths, summary = fn(self.config, self.out_dir)
            exports = self._export(paths)
        except Exception as exc:
            exit_code = exc.exit_code if isinstance(exc, MonteCarloError) else 1
            self.run.status = 'FAILED'
            self.run.exit_code = exit_code
            self.run.error = str(exc)
            self.run.wall_clock_seconds = time.perf_counter() - started
            self.run.finished_at = timezone.now()
            self._save()
            logger.error(f"{self.kind} run {self.run.id} failed with exit code {exit_code}: {exc}")
            try:
                self._write_manifest([], {'error': str(exc)})
            except MonteCarloError:
                pass
            raise

        self.run.status = 'COMPLETED'
        self.run.exit_code = 0
        self.run.wall_clock_seconds = time.perf_counter() - started
        self.run.finished_at = timezone.now()
        self._save()
        if exports:
            summary = {**summary, 'exports': [str(p) for p in exports]}
        manifest = self._write_manifest(paths, summary)
        logger.info(f"{self.kind} run {self.run.id} completed in {self.run.wall_clock_seconds:.2f}s")
        return ExperimentOutcome(self.run, self.out_dir, paths, summary, manifest)


def run_experiment(kind: str, config: dict, record: Optional[bool] = None) -> ExperimentOutcome:
    return ExperimentRunner(kind, config, record).execute()
