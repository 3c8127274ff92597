"""
Statistical Acceptance - Test Cases
Long reproduction runs (minutes each). Skipped unless POPMC_ACCEPTANCE=1:

    POPMC_ACCEPTANCE=1 POPMC_WORKERS=8 python manage.py test tests.test_acceptance
"""
import math
import os
import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np
import psutil
from django.conf import settings
from django.test import SimpleTestCase

from montecarlo import artifacts as io
from montecarlo.benchmark import run_bench
from montecarlo.diagnostics import ModeAtlas, assign_mode, min_mode_mass, mode_counts, traversal_time
from montecarlo.experiments import (
    EXPERIMENTS,
    build_config,
    filter_std_errors,
    istoy_estimate,
    run_compare_precision,
)
from montecarlo.parallel import pairwise_sum, sequential_sum
from montecarlo.popmcmc import PopMcmcConfig, run_popmcmc
from montecarlo.prng import Mrg32k3a, Mrg32k3aState, skip_ahead
from montecarlo.smc import (
    PfilterConfig,
    SmcSamplerConfig,
    multinomial_ancestors,
    offspring_counts,
    particle_filter_run,
    smc_sampler_run,
    systematic_ancestors,
)
from montecarlo.targets import (
    TOY_SECOND_MOMENT,
    TRUE_MEANS,
    FsvModel,
    FsvParams,
    LinearGaussianModel,
    MixtureModel,
    MixturePosterior,
    simulate_mixture_data,
)

ACCEPTANCE = os.getenv('POPMC_ACCEPTANCE') == '1'
SEEDS = range(1, 11)


def workers():
    return settings.MONTECARLO['WORKERS']


def mixture_target():
    y = simulate_mixture_data(TRUE_MEANS, 100, 0.55, Mrg32k3a.from_seed(1))
    return MixturePosterior(MixtureModel(y))


@unittest.skipUnless(ACCEPTANCE, 'set POPMC_ACCEPTANCE=1 to run the statistical acceptance suite')
class NumericsAcceptanceTestCase(SimpleTestCase):
    """Test cases for generator jumps, summation error and resampling bias"""

    def test_skip_ahead_is_exact(self):
        for n in (0, 1, 2, 10 ** 3, 10 ** 6, 10 ** 6 + 3):
            stream = Mrg32k3a()
            stream.uniforms(n)
            self.assertEqual(skip_ahead(Mrg32k3aState.default(), n), stream.state, n)

    def test_pairwise_error_is_a_hundredth_of_sequential(self):
        values = Mrg32k3a.from_seed(5).uniforms(10 ** 6).astype(np.float32)
        exact = math.fsum(values.astype(np.float64))
        pairwise = float(pairwise_sum(values, 'single'))
        sequential = float(sequential_sum(values, 'single'))
        self.assertLessEqual(abs(pairwise - exact), abs(sequential - exact) / 100)

    def test_resampling_is_unbiased(self):
        """Test that mean offspring counts match N * W for both resamplers"""
        n, replicates = 16, 10 ** 5
        rng = Mrg32k3a.from_seed(11)
        for _ in range(5):
            w = rng.uniforms(n) ** 2
            w /= w.sum()
            expected = n * w
            multinomial = np.empty((replicates, n))
            systematic = np.empty((replicates, n))
            for r in range(replicates):
                multinomial[r] = offspring_counts(multinomial_ancestors(w, rng.uniforms(n)), n)
                systematic[r] = offspring_counts(systematic_ancestors(w, rng.next_uniform()), n)
            for counts in (multinomial, systematic):
                sigma = counts.std(axis=0, ddof=1) / np.sqrt(replicates)
                self.assertTrue(np.all(np.abs(counts.mean(axis=0) - expected) <= 3 * sigma + 1e-12))
            self.assertTrue(np.all(np.abs(systematic - expected) < 1.0 + 1e-9))


@unittest.skipUnless(ACCEPTANCE, 'set POPMC_ACCEPTANCE=1 to run the statistical acceptance suite')
class EstimatorAcceptanceTestCase(SimpleTestCase):
    """Test cases for the importance-sampling toy, mode traversal and mode balance"""

    def test_toy_second_moment(self):
        config = build_config('istoy', overrides={'workers': workers()})
        result = istoy_estimate(config)
        self.assertLessEqual(abs(result['estimate'] - TOY_SECOND_MOMENT), 3 * result['std_error'])

    def test_tempering_traverses_all_modes(self):
        """Test that 32 tempered chains visit all 24 modes and a single chain does not"""
        target, atlas = mixture_target(), ModeAtlas()
        times = {}
        for chains in (32, 1):
            times[chains] = []
            for seed in SEEDS:
                result = run_popmcmc(PopMcmcConfig(chains=chains, iterations=40000, seed=seed,
                                                   workers=workers()), target)
                times[chains].append(traversal_time(assign_mode(result.samples, atlas), atlas.n_full))
        traversed = [t for t in times[32] if t is not None]
        self.assertGreaterEqual(len(traversed), 9)
        self.assertLessEqual(np.median([t if t is not None else np.inf for t in times[32]]), 40000)
        self.assertEqual(sum(t is not None for t in times[1]), 0)

    def test_modes_are_balanced(self):
        target, atlas = mixture_target(), ModeAtlas()
        balanced = 0
        for seed in SEEDS:
            result = run_popmcmc(PopMcmcConfig(chains=2048, iterations=2 ** 18, seed=seed, workers=workers()),
                                 target)
            counts = mode_counts(result.samples, atlas).counts
            if counts.min() > 0 and counts.max() / counts.min() <= 2:
                balanced += 1
        self.assertGreaterEqual(balanced, 8)

    def test_smc_covers_marginal_modes(self):
        """Test that resampling SMC covers every marginal mode and beats AIS on the smallest mode mass"""
        target, atlas = mixture_target(), ModeAtlas()
        covered = 0
        masses = {0.5: [], 0.0: []}
        for seed in SEEDS:
            for threshold in masses:
                result = smc_sampler_run(SmcSamplerConfig(particles=8192, temperatures=200, mcmc_steps=10,
                                                          ess_threshold=threshold, seed=seed,
                                                          workers=workers()), target)
                histogram = mode_counts(result.population.particles, atlas, result.weights, marginal=True)
                masses[threshold].append(min_mode_mass(histogram))
                if threshold and min_mode_mass(histogram) >= 1 / 24:
                    covered += 1
        self.assertGreaterEqual(covered, 8)
        self.assertGreater(np.mean(masses[0.5]), np.mean(masses[0.0]))


@unittest.skipUnless(ACCEPTANCE, 'set POPMC_ACCEPTANCE=1 to run the statistical acceptance suite')
class FilterAcceptanceTestCase(SimpleTestCase):
    """Test cases for the particle filter against exact and high-resolution references"""

    def test_linear_gaussian_matches_kalman(self):
        """
        Test that at least 99% of the 50 x 20 (seed, t) filter means lie within
        3 Monte Carlo standard errors of the Kalman means, and that the mean
        log-likelihood over the seeds is within 3 standard errors of the exact one
        """
        model = LinearGaussianModel()
        x, y = model.simulate(20, Mrg32k3a.from_seed(1))
        kalman = model.kalman_filter(y)
        z_scores, logliks = [], []
        for seed in range(50):
            result = particle_filter_run(PfilterConfig(particles=2 ** 14, seed=seed, workers=workers()),
                                         model, y, x)
            z_scores.append(np.abs(result.means[:, 0] - kalman.means) / filter_std_errors(result)[:, 0])
            logliks.append(result.log_likelihood)
        self.assertGreaterEqual(np.mean(np.concatenate(z_scores) <= 3), 0.99)
        logliks = np.array(logliks)
        self.assertLessEqual(abs(logliks.mean() - kalman.log_likelihood),
                             3 * logliks.std(ddof=1) / np.sqrt(logliks.size))

    def test_fsv_converges_and_tracks(self):
        """
        Test that N = 8192 and N = 131072 filter means differ on average by less
        than 3 standard errors of the smaller run, and that the +-1 std band
        covers the true path on at least 60% of the cells
        """
        model = FsvModel(FsvParams.default())
        x, y = model.simulate(200, Mrg32k3a.from_seed(1))
        small = particle_filter_run(PfilterConfig(particles=8192, workers=workers()), model, y, x)
        large = particle_filter_run(PfilterConfig(particles=131072, seed=1, workers=workers()), model, y, x)
        difference = np.abs(small.means - large.means).mean()
        self.assertLess(difference, 3 * filter_std_errors(small).mean())
        self.assertGreaterEqual(small.coverage, 0.6)


@unittest.skipUnless(ACCEPTANCE, 'set POPMC_ACCEPTANCE=1 to run the statistical acceptance suite')
class EngineAcceptanceTestCase(SimpleTestCase):
    """Test cases for precision robustness, determinism and cost scaling"""

    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp(prefix='popmc-acceptance-'))
        self.addCleanup(shutil.rmtree, self.tmp, ignore_errors=True)

    def test_single_precision_within_error(self):
        config = build_config('compare-precision', overrides={'workers': workers()})
        _, summary = run_compare_precision(config, self.tmp)
        self.assertTrue(summary['all_within_error'], summary['rows'])

    def test_artifacts_identical_across_workers(self):
        """Test that every experiment writes byte-identical data for 1, 2 and 8 workers"""
        small = {
            'istoy': {'samples': 2 ** 18, 'threads': 64},
            'popmcmc': {'chains': 16, 'iterations': 2000},
            'smc-sampler': {'particles': 1024, 'temperatures': 20, 'mcmc_steps': 2},
            'pfilter': {'particles': 2048, 'steps': 50},
            'gendata': {'model': 'fsv', 'steps': 50},
            'compare-precision': {'samples': 2 ** 16, 'particles': 512, 'temperatures': 10,
                                  'mcmc_steps': 1, 'filter_particles': 512},
        }
        for kind, overrides in small.items():
            digests = []
            for count in (1, 2, 8):
                out_dir = self.tmp / f"{kind}-{count}"
                io.ensure_dir(out_dir)
                paths, _ = EXPERIMENTS[kind](build_config(kind, overrides={**overrides, 'workers': count}),
                                             out_dir)
                digests.append({p.name: io.file_digest(p) for p in paths})
            self.assertEqual(digests[0], digests[1], kind)
            self.assertEqual(digests[0], digests[2], kind)

    def test_cost_scaling(self):
        cores = psutil.cpu_count(logical=False) or 1
        config = build_config('bench', overrides={'experiments': ['popmcmc', 'smc-sampler'],
                                                  'workers_list': sorted({1, max(2, cores)})})
        run_bench(config, self.tmp)
        report = io.read_json(self.tmp / 'scaling.json')
        for name in ('popmcmc', 'smc-sampler'):
            self.assertTrue(report[name]['doubling_within_bounds'], report[name]['ratios'])
            if report[name]['speedup_checked']:
                self.assertTrue(report[name]['speedup_ok'], report[name]['max_worker_speedup'])
