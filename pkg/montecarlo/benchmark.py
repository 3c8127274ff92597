"""
Worker-scaling benchmark.

Times population MCMC, the SMC sampler and the particle filter over a list
of problem sizes and worker counts. Each cell is the median wall-clock of
several repetitions. The table mirrors the classic "size, time, speedup"
layout; scaling.json checks the shape of the single-worker cost curve and
the speedup reached with the most workers.
"""
import logging
import statistics
import time
from pathlib import Path
from typing import Callable, Dict, List, Tuple

import numpy as np
import psutil

from . import artifacts as io
from .popmcmc import PopMcmcConfig, run_popmcmc
from .prng import Mrg32k3a
from .smc import PfilterConfig, SmcSamplerConfig, particle_filter_run, smc_sampler_run
from .targets import (
    TRUE_MEANS,
    FsvModel,
    FsvParams,
    MixtureModel,
    MixturePosterior,
    simulate_mixture_data,
)

logger = logging.getLogger(__name__)

DOUBLING_BOUNDS = (1.8, 2.2)
MIN_SPEEDUP = 2.0
MIN_CORES_FOR_SPEEDUP = 4
DATA_SEED = 1

TIMING_FIELDS = ['experiment', 'size', 'workers', 'repetitions', 'median_seconds', 'speedup']


class BenchmarkCase:
    """One timed experiment; ``build`` prepares inputs once, ``run(size, workers)`` is what gets timed."""

    name = ''

    def __init__(self, config: dict):
        self.config = config
        self.engine = dict(seed=config['seed'], precision=config['precision'],
                           generator=config['generator'], block_length=config['block_length'])

    def sizes(self) -> List[int]:
        raise NotImplementedError

    def run(self, size: int, workers: int):
        raise NotImplementedError


class PopMcmcCase(BenchmarkCase):
    name = 'popmcmc'

    def __init__(self, config):
        super().__init__(config)
        y = simulate_mixture_data(TRUE_MEANS, 100, 0.55, Mrg32k3a.from_seed(DATA_SEED))
        self.target = MixturePosterior(MixtureModel(y), config['precision'])

    def sizes(self):
        return self.config['chain_sizes']

    def run(self, size, workers):
        run_popmcmc(PopMcmcConfig(chains=size, iterations=self.config['popmcmc_iterations'],
                                  workers=workers, **self.engine), self.target)


class SmcSamplerCase(PopMcmcCase):
    name = 'smc-sampler'

    def sizes(self):
        return self.config['particle_sizes']

    def run(self, size, workers):
        smc_sampler_run(SmcSamplerConfig(particles=size, temperatures=self.config['smc_temperatures'],
                                         mcmc_steps=self.config['smc_mcmc_steps'], workers=workers,
                                         **self.engine), self.target)


class PfilterCase(BenchmarkCase):
    name = 'pfilter'

    def __init__(self, config):
        super().__init__(config)
        self.model = FsvModel(FsvParams.default(), config['precision'])
        _, self.y = self.model.simulate(config['filter_steps'], Mrg32k3a.from_seed(DATA_SEED))

    def sizes(self):
        return self.config['filter_sizes']

    def run(self, size, workers):
        particle_filter_run(PfilterConfig(particles=size, workers=workers, **self.engine), self.model, self.y)


CASES: Dict[str, Callable[[dict], BenchmarkCase]] = {
    'popmcmc': PopMcmcCase,
    'smc-sampler': SmcSamplerCase,
    'pfilter': PfilterCase,
}


def time_call(fn: Callable[[], object], repetitions: int) -> float:
    """Median wall-clock seconds of ``repetitions`` calls."""
    samples = []
    for _ in range(repetitions):
        started = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - started)
    return statistics.median(samples)


def time_case(case: BenchmarkCase, workers_list: List[int], repetitions: int) -> List[dict]:
    rows = []
    baseline_workers = min(workers_list)
    for size in case.sizes():
        baseline = None
        # baseline first so every speedup has a reference
        for workers in sorted(workers_list, key=lambda w: w != baseline_workers):
            seconds = time_call(lambda: case.run(size, workers), repetitions)
            if baseline is None:
                baseline = seconds
            logger.info(f"bench {case.name}: size={size} workers={workers} median {seconds:.4f}s")
            rows.append({'experiment': case.name, 'size': size, 'workers': workers,
                         'repetitions': repetitions, 'median_seconds': seconds,
                         'speedup': baseline / seconds if seconds > 0 else float('inf')})
    rows.sort(key=lambda r: (r['size'], r['workers']))
    return rows


def scaling_report(rows: List[dict], cores: int) -> dict:
    """Per experiment: doubling ratios at the fewest workers and speedup at the largest size."""
    report = {}
    for name in dict.fromkeys(r['experiment'] for r in rows):
        mine = [r for r in rows if r['experiment'] == name]
        min_workers = min(r['workers'] for r in mine)
        max_workers = max(r['workers'] for r in mine)
        base = sorted((r['size'], r['median_seconds']) for r in mine if r['workers'] == min_workers)
        ratios = []
        for (size_a, t_a), (size_b, t_b) in zip(base, base[1:]):
            ratios.append({'from': size_a, 'to': size_b, 'size_ratio': size_b / size_a,
                           'time_ratio': t_b / t_a if t_a > 0 else float('inf')})
        doubling = [r['time_ratio'] for r in ratios if r['size_ratio'] == 2]
        largest = base[-1][0]
        top = next(r for r in mine if r['size'] == largest and r['workers'] == max_workers)
        speedup_checked = cores >= MIN_CORES_FOR_SPEEDUP and max_workers >= MIN_CORES_FOR_SPEEDUP
        report[name] = {
            'baseline_workers': min_workers,
            'ratios': ratios,
            'doubling_bounds': list(DOUBLING_BOUNDS),
            'doubling_within_bounds': all(DOUBLING_BOUNDS[0] <= r <= DOUBLING_BOUNDS[1] for r in doubling),
            'max_workers': max_workers,
            'largest_size': largest,
            'max_worker_speedup': top['speedup'],
            'speedup_checked': speedup_checked,
            'speedup_ok': (top['speedup'] >= MIN_SPEEDUP) if speedup_checked else None,
        }
    return report


def run_bench(config: dict, out_dir: Path) -> Tuple[List[Path], dict]:
    workers_list = list(config['workers_list'])
    cores = psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
    if max(workers_list) > cores:
        logger.warning(f"Benchmarking up to {max(workers_list)} workers on {cores} physical cores")
    rows = []
    for name in config['experiments']:
        case = CASES[name](config)
        rows += time_case(case, workers_list, config['repetitions'])

    report = scaling_report(rows, cores)
    report['host'] = {'physical_cores': cores, 'logical_cores': psutil.cpu_count(),
                      'numpy': np.__version__}
    paths = [
        io.write_records(out_dir / 'timings.csv', rows, TIMING_FIELDS),
        io.write_json(out_dir / 'scaling.json', report),
    ]
    summary = {name: {'doubling_within_bounds': entry['doubling_within_bounds'],
                      'max_worker_speedup': entry['max_worker_speedup']}
               for name, entry in report.items() if name != 'host'}
    return paths, summary
