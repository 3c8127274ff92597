"""
Parallel substrate - Test Cases
Pairwise reductions, prefix sums, weight normalization and par_map.
"""
import math

import numpy as np
from django.test import SimpleTestCase

from montecarlo.exceptions import ConfigurationError, DegeneratePopulationError, ElementKernelError
from montecarlo.parallel import (
    Population,
    PrecisionMode,
    WorkerPool,
    chunk_bounds,
    ess,
    importance_estimate,
    importance_estimate_with_error,
    inclusive_prefix_sum,
    mc_estimate,
    normalize_log_weights,
    pairwise_sum,
    par_map,
    sequential_sum,
    weighted_moments,
)
from montecarlo.prng import Mrg32k3a, build_streams
from montecarlo.targets import square, toy_log_proposal, toy_log_target


def _reference_tree(values):
    """Recursive left-packed tree in plain Python floats."""
    level = list(values)
    while len(level) > 1:
        nxt = [level[i] + level[i + 1] for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]


class PairwiseSumTestCase(SimpleTestCase):
    """Test cases for the deterministic tree reduction"""

    def test_small_exact_values(self):
        self.assertEqual(pairwise_sum([1.0, 2.0, 3.0]), 6.0)
        self.assertEqual(pairwise_sum([]), 0.0)
        self.assertEqual(pairwise_sum([4.5]), 4.5)

    def test_matches_reference_tree_order(self):
        """Test that odd lengths carry the trailing element exactly like the reference tree"""
        values = Mrg32k3a.from_seed(1).uniforms(1001) * 1e3
        self.assertEqual(float(pairwise_sum(values)), _reference_tree(values.tolist()))

    def test_worker_count_does_not_change_result(self):
        """Test that the parallel path is bit-identical to the sequential tree"""
        values = Mrg32k3a.from_seed(2).normals(100003)
        for mode in ('double', 'single'):
            base = pairwise_sum(values, mode)
            for workers in (2, 3, 4, 7, 8):
                self.assertEqual(pairwise_sum(values, mode, workers=workers), base)

    def test_axis_reduction(self):
        a = np.arange(12, dtype=np.float64).reshape(3, 4)
        np.testing.assert_array_equal(pairwise_sum(a, axis=0), a.sum(axis=0))
        np.testing.assert_array_equal(pairwise_sum(a, axis=1), a.sum(axis=1))

    def test_single_precision_beats_naive_accumulation(self):
        """Test that the tree error in float32 is far below left-to-right accumulation"""
        n = 2 ** 22
        values = np.full(n, 0.1, dtype=np.float32)
        exact = n * float(np.float32(0.1))
        tree_err = abs(float(pairwise_sum(values, 'single')) - exact)
        naive_err = abs(float(sequential_sum(values, 'single')) - exact)
        self.assertLess(tree_err, naive_err)
        self.assertLess(tree_err / exact, 1e-5)

    def test_tree_error_bound(self):
        """Test that |S_tree - S_exact| stays within ceil(log2 N) * eps * sum|x|"""
        values = Mrg32k3a.from_seed(4).uniforms(50000).astype(np.float32)
        exact = math.fsum(values.astype(np.float64).tolist())
        bound = math.ceil(math.log2(values.size)) * PrecisionMode.SINGLE.eps * exact
        self.assertLessEqual(abs(float(pairwise_sum(values, 'single')) - exact), bound)

    def test_unknown_precision_rejected(self):
        with self.assertRaises(ConfigurationError):
            pairwise_sum([1.0], 'half')


class PrefixSumTestCase(SimpleTestCase):
    """Test cases for the inclusive prefix sum"""

    def test_prefix_sum_values(self):
        np.testing.assert_array_equal(inclusive_prefix_sum([1.0, 2.0, 3.0, 4.0, 5.0]),
                                      [1.0, 3.0, 6.0, 10.0, 15.0])

    def test_last_entry_is_pairwise_sum(self):
        """Test that the final prefix equals the tree root bit for bit"""
        for n in (1, 2, 7, 64, 1000, 1025):
            values = Mrg32k3a.from_seed(n).uniforms(n)
            self.assertEqual(inclusive_prefix_sum(values)[-1], pairwise_sum(values))

    def test_prefix_is_monotone_for_nonnegative_input(self):
        values = Mrg32k3a.from_seed(8).uniforms(777)
        self.assertTrue(np.all(np.diff(inclusive_prefix_sum(values)) >= 0))

    def test_matches_sequential_scan(self):
        """Test that 10**4 uniforms agree with a running sum within 4 eps N elementwise"""
        n = 10 ** 4
        values = Mrg32k3a.from_seed(21).uniforms(n)
        prefix = inclusive_prefix_sum(values)
        scan = np.cumsum(values)
        bound = 4 * np.finfo(np.float64).eps * n * np.abs(scan)
        self.assertTrue(np.all(np.abs(prefix - scan) <= bound))


class WeightsTestCase(SimpleTestCase):
    """Test cases for weight normalization and ESS"""

    def test_equal_log_weights(self):
        """Test that equal weights give W = 1/N, ESS = N and a zero increment"""
        nw = normalize_log_weights(np.full(8, 3.0))
        np.testing.assert_allclose(nw.weights, 1 / 8)
        self.assertEqual(ess(nw), 8.0)
        self.assertAlmostEqual(nw.log_norm_constant_increment, 3.0, places=12)

    def test_single_survivor(self):
        """Test that one finite weight among -inf gives ESS = 1"""
        lw = np.array([-np.inf, 0.0, -np.inf, -np.inf])
        nw = normalize_log_weights(lw)
        np.testing.assert_array_equal(nw.weights, [0.0, 1.0, 0.0, 0.0])
        self.assertEqual(ess(nw), 1.0)

    def test_large_log_weights_do_not_overflow(self):
        nw = normalize_log_weights(np.array([1000.0, 1000.0 + math.log(3.0)]))
        np.testing.assert_allclose(nw.weights, [0.25, 0.75])

    def test_degenerate_inputs_raise(self):
        """Test that all -inf, NaN and empty log-weights are degenerate populations"""
        with self.assertRaises(DegeneratePopulationError):
            normalize_log_weights(np.full(4, -np.inf))
        with self.assertRaises(DegeneratePopulationError):
            normalize_log_weights(np.array([0.0, np.nan]))
        with self.assertRaises(DegeneratePopulationError) as ctx:
            normalize_log_weights(np.array([]), time_index=5)
        self.assertEqual(ctx.exception.time_index, 5)

    def test_ess_bounds(self):
        w = Mrg32k3a.from_seed(3).uniforms(500)
        value = ess(w / w.sum())
        self.assertGreaterEqual(value, 1.0)
        self.assertLessEqual(value, 500.0)

    def test_weighted_moments(self):
        mean, std = weighted_moments(np.array([0.25, 0.75]), np.array([[0.0], [4.0]]))
        np.testing.assert_allclose(mean, [3.0])
        np.testing.assert_allclose(std, [math.sqrt(3.0)])

    def test_ess_worked_example(self):
        self.assertAlmostEqual(ess(np.array([0.5, 0.25, 0.25])), 8.0 / 3, places=12)

    def test_ess_permutation_invariant(self):
        """Test that shuffling the weights leaves the ESS unchanged bit for bit"""
        w = Mrg32k3a.from_seed(4).uniforms(1001)
        w = w / w.sum()
        reference = ess(w)
        for seed in range(5):
            order = np.random.default_rng(seed).permutation(w.size)
            self.assertEqual(ess(w[order]), reference)

    def test_constant_shift_leaves_weights_unchanged(self):
        lw = Mrg32k3a.from_seed(6).normals(200) * 3
        base = normalize_log_weights(lw)
        for shift in (-750.0, 1e-3, 42.5, 600.0):
            shifted = normalize_log_weights(lw + shift)
            np.testing.assert_allclose(shifted.weights, base.weights, rtol=1e-11, atol=0)
            self.assertAlmostEqual(shifted.log_norm_constant_increment,
                                   base.log_norm_constant_increment + shift, places=9)


class EstimatorTestCase(SimpleTestCase):
    """Test cases for the plain and self-normalized estimators"""

    def test_plain_estimate(self):
        self.assertEqual(mc_estimate(np.array([1.0, 2.0, 3.0]), square), 14.0 / 3)

    def test_importance_toy_estimate(self):
        """Test that 2**16 standard-normal proposals estimate E[X^2] = 1.875 within 4 standard errors"""
        x = Mrg32k3a.from_seed(12).normals(2 ** 16)
        estimate, std_error = importance_estimate_with_error(x, toy_log_target, toy_log_proposal, square)
        self.assertLess(abs(estimate - 1.875), 4 * std_error)
        self.assertLess(std_error, 0.05)

    def test_constant_test_function_gives_exactly_one(self):
        """Test that phi = 1 self-normalizes to exactly 1 in both precisions"""
        x = Mrg32k3a.from_seed(13).normals(4097)
        for mode in ('double', 'single'):
            estimate = importance_estimate(x, toy_log_target, toy_log_proposal, np.ones_like, mode=mode)
            self.assertEqual(estimate, 1.0)


def _double_kernel(chunk, streams):
    return {'x': chunk['x'] * 2 + streams.uniforms()}


def _failing_kernel(chunk, streams):
    if np.any(chunk['x'] == 13):
        bad = int(np.flatnonzero(chunk['x'] == 13)[0])
        raise ElementKernelError(bad, 'unlucky element')
    return {'x': chunk['x']}


def _crashing_kernel(chunk, streams):
    if np.any(chunk['x'] >= 10):
        raise ValueError('boom')
    return {'x': chunk['x']}


def _batch_only_kernel(chunk, streams):
    if chunk['x'].shape[0] > 1:
        raise RuntimeError('needs a single element')
    return {'x': chunk['x']}


class ParMapTestCase(SimpleTestCase):
    """Test cases for the data-parallel map"""

    def test_chunk_bounds_cover_range(self):
        self.assertEqual(chunk_bounds(10, 3), [(0, 3), (3, 6), (6, 10)])
        self.assertEqual(chunk_bounds(2, 8), [(0, 1), (1, 2)])

    def test_result_independent_of_workers(self):
        """Test that outputs and final stream states do not depend on the worker count"""
        results = []
        for workers in (1, 2, 5):
            bank, _ = build_streams('mrg32k3a', 0, 37, 2 ** 20)
            pop = par_map(Population({'x': np.arange(37, dtype=np.float64)}, bank), _double_kernel, workers)
            results.append((pop['x'].tolist(), pop.streams.fingerprint()))
        self.assertEqual(results[0], results[1])
        self.assertEqual(results[0], results[2])

    def test_worker_pool_reuse(self):
        bank, _ = build_streams('xorshift', 0, 20)
        pop = Population({'x': np.zeros(20)}, bank)
        with WorkerPool(4) as pool:
            pop = pool.map(pop, _double_kernel)
            pop = pool.map(pop, _double_kernel)
        self.assertEqual(len(pop), 20)
        self.assertTrue(np.all(pop['x'] > 0))

    def test_element_error_reports_global_index(self):
        """Test that a failing element is reported by its global index"""
        bank, _ = build_streams('mrg32k3a', 0, 20, 100)
        with self.assertRaises(ElementKernelError) as ctx:
            par_map(Population({'x': np.arange(20)}, bank), _failing_kernel, workers=4)
        self.assertEqual(ctx.exception.index, 13)

    def test_unexpected_error_reports_first_failing_element(self):
        """Test that an ordinary exception is pinned to the lowest failing element for any chunking"""
        for workers in (1, 3, 4):
            bank, _ = build_streams('mrg32k3a', 0, 20, 100)
            with self.assertRaises(ElementKernelError) as ctx:
                par_map(Population({'x': np.arange(20)}, bank), _crashing_kernel, workers=workers)
            self.assertEqual(ctx.exception.index, 10, workers)
            self.assertIn('boom', ctx.exception.reason)

    def test_whole_chunk_failure_falls_back_to_chunk_start(self):
        bank, _ = build_streams('mrg32k3a', 0, 8, 100)
        with self.assertRaises(ElementKernelError) as ctx:
            par_map(Population({'x': np.arange(8)}, bank), _batch_only_kernel, workers=2)
        self.assertEqual(ctx.exception.index, 0)

    def test_population_shape_checked(self):
        bank, _ = build_streams('mrg32k3a', 0, 4, 100)
        with self.assertRaises(ConfigurationError):
            Population({'x': np.zeros(5)}, bank)
