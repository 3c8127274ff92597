#!/usr/bin/env python3
"""
Performance Testing Script for popmc
Times the samplers over growing problem sizes and worker counts and checks
the cost curve and speedup against the bounds in montecarlo.benchmark.

Usage: python tests/performance_test.py [--workers 1,2,4,8] [--repetitions 3]
"""

import argparse
import os
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'popmc.settings')

import django  # noqa: E402

django.setup()

from montecarlo import artifacts as io  # noqa: E402
from montecarlo.benchmark import DOUBLING_BOUNDS, MIN_SPEEDUP, run_bench  # noqa: E402
from montecarlo.experiments import build_config  # noqa: E402


class PerformanceReporter:
    """Generate performance test reports"""

    @staticmethod
    def print_results(name, timings, entry):
        print(f"\n{'=' * 50}")
        print(f"Performance Test: {name}")
        print(f"{'=' * 50}")
        for row in timings:
            print(f"size {int(row['size']):>7}  workers {int(row['workers']):>3}  "
                  f"median {float(row['median_seconds']):8.3f}s  speedup {float(row['speedup']):5.2f}x")
        for ratio in entry['ratios']:
            print(f"cost {ratio['from']} -> {ratio['to']}: {ratio['time_ratio']:.2f}x")
        print(f"{'=' * 50}\n")

    @staticmethod
    def check_performance_bounds(entry):
        """Check if results meet performance requirements"""
        failures = []
        if not entry['doubling_within_bounds']:
            ratios = ', '.join(f"{r['time_ratio']:.2f}" for r in entry['ratios'] if r['size_ratio'] == 2)
            failures.append(f"Cost per doubling [{ratios}] outside {DOUBLING_BOUNDS[0]}-{DOUBLING_BOUNDS[1]}x")
        if entry['speedup_checked'] and not entry['speedup_ok']:
            failures.append(f"Speedup {entry['max_worker_speedup']:.2f}x with {entry['max_workers']} workers "
                            f"below {MIN_SPEEDUP}x")
        return not failures, failures


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    parser.add_argument('--workers', help='Comma-separated worker counts')
    parser.add_argument('--repetitions', type=int)
    parser.add_argument('--experiments', help='Subset of popmcmc,smc-sampler,pfilter')
    args = parser.parse_args()

    config = build_config('bench', overrides={'workers_list': args.workers, 'repetitions': args.repetitions,
                                              'experiments': args.experiments})
    reporter = PerformanceReporter()
    out_dir = Path(tempfile.mkdtemp(prefix='popmc-bench-'))
    print(f"Starting Performance Tests (workers {config['workers_list']}) -> {out_dir}")
    run_bench(config, out_dir)

    report = io.read_json(out_dir / 'scaling.json')
    timings = io.read_records(out_dir / 'timings.csv')

    all_passed = True
    for name in config['experiments']:
        entry = report[name]
        reporter.print_results(name, [t for t in timings if t['experiment'] == name], entry)
        passed, failures = reporter.check_performance_bounds(entry)
        if not passed:
            all_passed = False
            print(f"❌ {name} FAILED:")
            for failure in failures:
                print(f"   {failure}")
        else:
            print(f"✅ {name} PASSED")
        if not entry['speedup_checked']:
            print(f"   speedup not checked ({report['host']['physical_cores']} physical cores)")
    return 0 if all_passed else 1


if __name__ == "__main__":
    print("popmc Performance Testing Suite")
    sys.exit(main())
