"""
Target densities and state-space models - Test Cases
"""
import itertools
import math

import numpy as np
from django.test import SimpleTestCase
from scipy import integrate, stats

from montecarlo.exceptions import ConfigurationError
from montecarlo.prng import Mrg32k3a, build_streams
from montecarlo.targets import (
    TOY_SECOND_MOMENT,
    TRUE_MEANS,
    FsvModel,
    FsvParams,
    FunctionTarget,
    LinearGaussianModel,
    MixtureModel,
    MixturePosterior,
    ToyTarget,
    fsv_log_obs_density,
    fsv_simulate,
    fsv_transition_sample,
    mixture_log_posterior,
    simulate_mixture_data,
    toy_log_proposal,
    toy_log_target,
)


class ToyTargetTestCase(SimpleTestCase):
    """Test cases for the importance-sampling toy densities"""

    def test_target_is_normalized(self):
        total, _ = integrate.quad(lambda x: math.exp(float(toy_log_target(np.array([x]))[0])), -10, 10)
        self.assertAlmostEqual(total, 1.0, places=8)

    def test_second_moment_constant(self):
        moment, _ = integrate.quad(lambda x: x * x * math.exp(float(toy_log_target(np.array([x]))[0])), -10, 10)
        self.assertAlmostEqual(moment, TOY_SECOND_MOMENT, places=8)

    def test_proposal_matches_standard_normal(self):
        x = np.linspace(-3, 3, 13)
        np.testing.assert_allclose(toy_log_proposal(x), stats.norm.logpdf(x), rtol=1e-12)

    def test_single_precision_dtype(self):
        self.assertEqual(toy_log_target(np.zeros(3), 'single').dtype, np.float32)
        self.assertEqual(ToyTarget('single').log_density(np.zeros((2, 1))).shape, (2,))


class MixtureTestCase(SimpleTestCase):
    """Test cases for the mixture-means posterior"""

    def setUp(self):
        self.y = simulate_mixture_data(TRUE_MEANS, 100, 0.55, Mrg32k3a.from_seed(1))
        self.model = MixtureModel(self.y)

    def test_simulated_data_is_deterministic(self):
        again = simulate_mixture_data(TRUE_MEANS, 100, 0.55, Mrg32k3a.from_seed(1))
        np.testing.assert_array_equal(self.y, again)
        self.assertEqual(self.y.shape, (100,))

    def test_simulation_consumes_uniform_then_normal(self):
        """Test that each observation uses one label uniform followed by one normal"""
        stream = Mrg32k3a.from_seed(6)
        y = simulate_mixture_data((0.0, 100.0), 1, 1.0, stream.copy())
        label = int(stream.next_uniform() * 2)
        self.assertEqual(y[0], (0.0, 100.0)[label] + stream.next_gaussian())

    def test_noise_free_data_lands_on_the_means(self):
        y = simulate_mixture_data(TRUE_MEANS, 400, 0.0, Mrg32k3a.from_seed(3))
        self.assertTrue(set(y.tolist()) <= set(float(mu) for mu in TRUE_MEANS))
        self.assertEqual(len(set(y.tolist())), len(TRUE_MEANS))

    def test_permutation_invariance(self):
        """Test that every relabelling of the means has exactly the same log posterior"""
        mu = np.array(TRUE_MEANS)
        values = mixture_log_posterior(np.array(list(itertools.permutations(mu))), self.model)
        self.assertEqual(len(set(values.tolist())), 1)

    def test_outside_box_is_neg_inf(self):
        values = mixture_log_posterior(np.array([[0.0, 0.0, 0.0, 10.5], [0.0, 0.0, 0.0, 10.0]]), self.model)
        self.assertTrue(np.isneginf(values[0]))
        self.assertTrue(np.isfinite(values[1]))

    def test_matches_direct_formula(self):
        """Test the log-sum-exp evaluation against scipy densities"""
        mu = np.array([-2.5, 0.3, 3.1, 5.7])
        dens = stats.norm.pdf(self.y[:, None], loc=mu[None, :], scale=0.55).mean(axis=1)
        self.assertAlmostEqual(float(mixture_log_posterior(mu, self.model)[0]), float(np.log(dens).sum()),
                               places=8)

    def test_true_means_beat_a_far_point(self):
        target = MixturePosterior(self.model)
        values = target.log_density(np.array([TRUE_MEANS, (5.0, 5.0, 5.0, 5.0)]))
        self.assertGreater(values[0], values[1])

    def test_invalid_model_rejected(self):
        with self.assertRaises(ConfigurationError):
            MixtureModel(self.y, sigma=0.0)
        with self.assertRaises(ConfigurationError):
            MixtureModel(np.array([]))

    def test_prior_draws_inside_box(self):
        bank, _ = build_streams('mrg32k3a', 0, 50, 2 ** 20)
        x = MixturePosterior(self.model).sample_prior(bank)
        self.assertEqual(x.shape, (50, 4))
        self.assertTrue(np.all(np.abs(x) <= 10))

    def test_function_target(self):
        target = FunctionTarget(2, lambda x: -0.5 * (x ** 2).sum(axis=1))
        np.testing.assert_allclose(target.log_density(np.array([[1.0, 1.0]])), [-1.0])


class FsvTestCase(SimpleTestCase):
    """Test cases for the factor stochastic volatility model"""

    def test_default_dimensions(self):
        params = FsvParams.default()
        self.assertEqual((params.obs_dim, params.factor_dim), (5, 3))
        np.testing.assert_allclose(params.U_chol @ params.U_chol.T, params.U)

    def test_invalid_parameters_rejected(self):
        """Test that upper-triangular loadings and non-SPD U are refused"""
        with self.assertRaises(ConfigurationError):
            FsvParams.default(B=[[1.0, 0.5], [0.0, 1.0]], U=np.eye(2), factor_dim=2, obs_dim=2)
        with self.assertRaises(ConfigurationError):
            FsvParams.default(U=[[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]])

    def test_simulation_shapes_and_determinism(self):
        params = FsvParams.default()
        sim = fsv_simulate(params, 200, Mrg32k3a.from_seed(1))
        again = fsv_simulate(params, 200, Mrg32k3a.from_seed(1))
        self.assertEqual(sim.x.shape, (200, 3))
        self.assertEqual(sim.y.shape, (200, 5))
        np.testing.assert_array_equal(sim.y, again.y)

    def test_zero_state_noise_gives_deterministic_path(self):
        """Test that U = 0 reduces the state to x_t = phi**t x0"""
        params = FsvParams.default(U=np.zeros((3, 3)), x0=1.0)
        sim = fsv_simulate(params, 5, Mrg32k3a())
        np.testing.assert_allclose(sim.x[:, 0], 0.9 ** np.arange(1, 6))

    def test_observation_density_matches_scipy(self):
        params = FsvParams.default()
        x = np.array([[0.1, -0.3, 0.2], [1.0, 0.0, -1.0]])
        y = np.array([0.5, -1.0, 0.3, 0.0, 2.0])
        got = fsv_log_obs_density(x, y, params)
        for row, value in zip(x, got):
            cov = params.B @ np.diag(np.exp(row)) @ params.B.T + np.diag(params.psi)
            self.assertAlmostEqual(float(value), stats.multivariate_normal(np.zeros(5), cov).logpdf(y), places=9)

    def test_initial_law_is_point_mass(self):
        model = FsvModel(FsvParams.default(x0=0.25))
        bank, _ = build_streams('mrg32k3a', 0, 4, 100)
        np.testing.assert_array_equal(model.sample_initial(bank), np.full((4, 3), 0.25))

    def test_zero_loadings_give_independent_normals(self):
        """Test that B = 0 leaves log N(y; 0, diag(Psi)) whatever the state"""
        psi = np.array([0.5, 1.0, 1.5, 2.0, 0.25])
        params = FsvParams.default(B=np.zeros((5, 3)), psi=psi)
        y = np.array([0.3, -1.2, 0.0, 2.5, -0.4])
        x = Mrg32k3a.from_seed(3).normals(12).reshape(4, 3)
        expected = stats.norm(0.0, np.sqrt(psi)).logpdf(y).sum()
        np.testing.assert_allclose(fsv_log_obs_density(x, y, params), expected, rtol=1e-12)

    def test_density_invariant_to_relabelling_observations(self):
        """Test that permuting y, the rows of B and Psi together leaves the density unchanged"""
        psi = np.array([0.5, 1.0, 1.5, 2.0, 0.25])
        y = np.array([0.3, -1.2, 0.7, 2.5, -0.4])
        x = Mrg32k3a.from_seed(4).normals(6).reshape(6, 1)
        single_factor = FsvParams.default(B=[[1.0], [0.5], [0.2], [0.8], [0.3]], U=[[0.5]], psi=psi,
                                          obs_dim=5, factor_dim=1)
        reference = fsv_log_obs_density(x, y, single_factor)
        for order in itertools.permutations(range(5)):
            order = list(order)
            permuted = FsvParams.default(B=single_factor.B[order], U=[[0.5]], psi=psi[order],
                                         obs_dim=5, factor_dim=1)
            np.testing.assert_allclose(fsv_log_obs_density(x, y[order], permuted), reference, rtol=1e-10)

        # rows 2 to 4 of the default loadings have no structural zeros
        params = FsvParams.default(psi=psi)
        x = Mrg32k3a.from_seed(5).normals(15).reshape(5, 3)
        reference = fsv_log_obs_density(x, y, params)
        for tail in itertools.permutations((2, 3, 4)):
            order = [0, 1, *tail]
            permuted = FsvParams.default(B=params.B[order], psi=psi[order])
            np.testing.assert_allclose(fsv_log_obs_density(x, y[order], permuted), reference, rtol=1e-10)

    def test_long_run_state_variance(self):
        """Test that each log-volatility settles to variance U_ii / (1 - phi**2) over 10**5 steps"""
        params = FsvParams.default()
        n = 10 ** 5
        sim = fsv_simulate(params, n, Mrg32k3a.from_seed(8))
        expected = np.diag(params.U) / (1 - params.phi ** 2)
        # x_t**2 has lag-k autocorrelation phi**(2k), so the effective sample size shrinks accordingly
        effective = n * (1 - params.phi ** 2) / (1 + params.phi ** 2)
        tolerance = 5 * expected * np.sqrt(2 / effective)
        self.assertTrue(np.all(np.abs(sim.x.var(axis=0) - expected) < tolerance))

    def test_transition_noise_covariance_is_u(self):
        """Test that 10**5 one-step moves from a fixed state have mean phi x and covariance U"""
        params = FsvParams.default()
        bank, _ = build_streams('mrg32k3a', 2, 1000, 2 ** 12)
        start = np.ones((1000, 3))
        steps = np.concatenate([fsv_transition_sample(start, params, bank) for _ in range(100)])
        np.testing.assert_allclose(steps.mean(axis=0), params.phi, atol=0.01)
        np.testing.assert_allclose(np.cov(steps, rowvar=False), params.U, atol=0.012)

    def test_zero_state_noise_transition_is_exact(self):
        params = FsvParams.default(U=np.zeros((3, 3)))
        bank, _ = build_streams('mrg32k3a', 0, 4, 100)
        x_prev = np.array([[1.0, -2.0, 0.5]] * 4)
        np.testing.assert_array_equal(fsv_transition_sample(x_prev, params, bank), params.phi * x_prev)


class LinearGaussianTestCase(SimpleTestCase):
    """Test cases for the linear-Gaussian reference model"""

    def test_kalman_static_case(self):
        """Test the Kalman filter on one step with a = 1, q = 0"""
        model = LinearGaussianModel(a=1.0, q=0.0, r=1.0, m0=0.0, p0=1.0)
        result = model.kalman_filter([2.0])
        self.assertAlmostEqual(result.means[0], 1.0)
        self.assertAlmostEqual(result.variances[0], 0.5)
        self.assertAlmostEqual(result.log_likelihood, float(stats.norm.logpdf(2.0, 0.0, math.sqrt(2.0))))

    def test_simulation_shapes(self):
        x, y = LinearGaussianModel().simulate(50, Mrg32k3a.from_seed(2))
        self.assertEqual(x.shape, (50, 1))
        self.assertEqual(y.shape, (50, 1))

    def test_invalid_noise_rejected(self):
        with self.assertRaises(ConfigurationError):
            LinearGaussianModel(r=0.0)
