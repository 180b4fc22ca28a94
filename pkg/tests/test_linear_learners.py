# -*- coding: UTF-8 -*-
#! python3

"""
    Usage from the repo root folder:

    ```python
    python -m unittest tests.test_linear_learners
    ```
"""

# #############################################################################
# ########## Libraries #############
# ##################################

# Standard library
import shutil
import unittest
from pathlib import Path

# 3rd party
import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

# modules
from pil_lab.learners import (
    LossWeightsLinear,
    PredictorSetLinear,
    compare_pil_bc,
    fit_bc,
    fit_pil_alternating,
    fit_pil_fixed_G,
    fit_pil_h1,
    fit_predictors_ols,
    pil_linear_loss,
    read_linear_model,
    write_linear_model,
)
from pil_lab.numkit import NoiseModel, RngStream
from pil_lab.utils.errors import DatasetFormatError, ShapeError, SingularMatrixError
from pil_lab.worlds import TrajectoryDataset, reference_system, generate_expert_dataset, lqr_gain

# #############################################################################
# ######## Globals #################
# ##################################

OUTPUT_DIR = Path(__file__).parent / "output" / "linear_learners"

# #############################################################################
# ########## Functions #############
# ##################################


def _dataset(sys, K, xi_var=0.0, eta_var=0.0, n_traj=10, T=50, seed=0):
    return generate_expert_dataset(
        sys,
        K,
        n_traj,
        T,
        NoiseModel.gaussian(np.eye(sys.n)),
        NoiseModel.gaussian(xi_var, dim=sys.n),
        NoiseModel.gaussian(eta_var, dim=sys.m),
        RngStream(seed),
    )


# #############################################################################
# ########## Classes ###############
# ##################################


class TestExactRecovery(unittest.TestCase):
    """Noise-free expert data: every estimator returns the expert gain."""

    # standard methods
    def setUp(self):
        """Executed before each test."""
        self.sys = reference_system()
        self.expert = lqr_gain(self.sys, np.eye(2), 0.01 * np.eye(1))
        self.data = _dataset(self.sys, self.expert)
        self.F = self.sys.closed_loop(self.expert.K)

    #  -- Tests ------------------------------------------------------------
    def test_bc(self):
        self.assertLess(np.max(np.abs(fit_bc(self.data).K - self.expert.K)), 1e-8)

    def test_pil_h1(self):
        K = fit_pil_h1(self.data, self.sys, np.eye(2), np.eye(1)).K
        self.assertLess(np.max(np.abs(K - self.expert.K)), 1e-8)

    def test_pil_fixed_true_predictors(self):
        for H, alpha in ((1, 1.0), (3, 0.9), (5, 0.5)):
            G = PredictorSetLinear.from_closed_loop(self.F, H)
            w = LossWeightsLinear(np.eye(2), np.eye(1), np.eye(2), H=H, alpha=alpha)
            K = fit_pil_fixed_G(self.data, self.sys, G, w).K
            self.assertLess(np.max(np.abs(K - self.expert.K)), 1e-8)

    def test_ols_predictors(self):
        """OLS predictors recover the closed-loop powers."""
        G = fit_predictors_ols(self.data, 4)
        for tau in range(1, 5):
            assert_allclose(G.at(tau), np.linalg.matrix_power(self.F, tau), atol=1e-8)
        assert_array_equal(G.at(0), np.eye(2))


class TestEstimatorIdentities(unittest.TestCase):
    """Relations between estimators and optimality on noisy data."""

    # standard methods
    def setUp(self):
        """Executed before each test."""
        self.sys = reference_system()
        self.expert = lqr_gain(self.sys, np.eye(2), 0.01 * np.eye(1))
        self.data = _dataset(self.sys, self.expert, xi_var=0.01, eta_var=0.01, seed=3)

    #  -- Tests ------------------------------------------------------------
    def test_fixed_G_with_ols_is_h1(self):
        """H = 1, P = Q and OLS G_1: the fixed-predictor estimator equals one-step PIL."""
        Q = np.diag([1.0, 2.0])
        w = LossWeightsLinear(Q, np.eye(1), Q, H=1)
        K_fixed = fit_pil_fixed_G(self.data, self.sys, fit_predictors_ols(self.data, 1), w).K
        K_h1 = fit_pil_h1(self.data, self.sys, Q, np.eye(1)).K
        assert_allclose(K_fixed, K_h1, rtol=1e-9, atol=1e-12)

    def test_fixed_G_without_consistency_is_bc(self):
        """P = 0 and H = 1 reduce PIL to behavior cloning."""
        w = LossWeightsLinear(np.eye(2), np.eye(1), np.zeros((2, 2)), H=1)
        G = PredictorSetLinear.identity(2, 1)
        assert_allclose(fit_pil_fixed_G(self.data, self.sys, G, w).K, fit_bc(self.data).K, rtol=1e-9, atol=1e-12)

    def test_fixed_G_is_minimizer(self):
        """The objective does not decrease along any perturbation of the gain."""
        w = LossWeightsLinear(np.eye(2), np.eye(1), np.eye(2), H=3, alpha=0.9)
        G = fit_predictors_ols(self.data, 3)
        K = fit_pil_fixed_G(self.data, self.sys, G, w).K
        base = pil_linear_loss(self.data, self.sys, K, G, w)
        rng = np.random.default_rng(0)
        for _ in range(20):
            D = rng.normal(size=K.shape)
            for eps in (1e-3, -1e-3):
                self.assertGreaterEqual(pil_linear_loss(self.data, self.sys, K + eps * D, G, w), base * (1 - 1e-12))

    def test_h1_is_minimizer(self):
        """One-step PIL minimizes |y_1 - (A + BK) y|_Q^2 + |v - K y|_R^2."""
        w = LossWeightsLinear(np.eye(2), np.eye(1), np.eye(2), H=1)

        def loss(K):
            return pil_linear_loss(self.data, self.sys, K, PredictorSetLinear([self.sys.closed_loop(K)]), w)

        K = fit_pil_h1(self.data, self.sys, np.eye(2), np.eye(1)).K
        base = loss(K)
        rng = np.random.default_rng(1)
        for _ in range(20):
            D = rng.normal(size=K.shape)
            self.assertGreaterEqual(loss(K + 1e-3 * D), base * (1 - 1e-12))

    def test_dimension_checks(self):
        w = LossWeightsLinear(np.eye(2), np.eye(1), np.eye(2), H=3)
        with self.assertRaises(ShapeError):
            fit_pil_fixed_G(self.data, self.sys, PredictorSetLinear.identity(2, 2), w)
        with self.assertRaises(ShapeError):
            LossWeightsLinear(np.eye(2), np.eye(1), np.eye(3))
        with self.assertRaises(ValueError):
            LossWeightsLinear(np.eye(2), np.eye(1), np.eye(2), alpha=0.0)
        with self.assertRaises(TypeError):
            fit_bc(np.zeros((2, 2)))

    def test_ols_singular_without_ridge(self):
        """Zero states leave the Gram matrix singular; a ridge fixes it."""
        zero = generate_expert_dataset(
            self.sys,
            self.expert,
            2,
            10,
            NoiseModel.none(2),
            NoiseModel.none(2),
            NoiseModel.none(1),
            RngStream(0),
        )
        with self.assertRaises(SingularMatrixError):
            fit_predictors_ols(zero, 2)
        G = fit_predictors_ols(zero, 2, ridge=1e-3)
        assert_array_equal(G.at(2), np.zeros((2, 2)))


class TestAlternating(unittest.TestCase):
    """Block coordinate descent on gain and predictors."""

    # standard methods
    def setUp(self):
        """Executed before each test."""
        self.sys = reference_system()
        self.expert = lqr_gain(self.sys, np.eye(2), 0.01 * np.eye(1))

    #  -- Tests ------------------------------------------------------------
    def test_noise_free_recovery(self):
        data = _dataset(self.sys, self.expert)
        w = LossWeightsLinear(np.eye(2), np.eye(1), np.eye(2), H=1)
        gain, G, info = fit_pil_alternating(data, self.sys, w, max_iters=200, tol=1e-12)
        self.assertTrue(info["converged"])
        assert_allclose(gain.K, self.expert.K, atol=1e-6)
        assert_allclose(G.at(1), self.sys.closed_loop(self.expert.K), atol=1e-6)

    def test_objective_non_increasing(self):
        data = _dataset(self.sys, self.expert, xi_var=0.01, eta_var=0.01, seed=5)
        w = LossWeightsLinear(np.eye(2), np.eye(1), 10.0 * np.eye(2), H=3, alpha=0.9)
        gain, G, info = fit_pil_alternating(data, self.sys, w, max_iters=50)
        losses = info["losses"]
        self.assertEqual(len(losses), 2 * info["iterations"])
        for before, after in zip(losses[:-1], losses[1:]):
            self.assertLessEqual(after, before * (1 + 1e-10))
        self.assertAlmostEqual(pil_linear_loss(data, self.sys, gain, G, w), min(losses), delta=1e-9 * min(losses))

    def test_heavy_consistency_chains_predictors(self):
        """With a large P each predictor is the closed loop applied to the previous one."""
        data = _dataset(self.sys, self.expert, xi_var=0.01, eta_var=0.01, seed=3)
        residuals = {}
        for p in (1.0, 1e6):
            w = LossWeightsLinear(np.eye(2), np.eye(1), p * np.eye(2), H=3, alpha=0.9)
            gain, G, _ = fit_pil_alternating(data, self.sys, w, max_iters=500)
            F = self.sys.closed_loop(gain.K)
            residuals[p] = max(
                np.linalg.norm(G.at(tau) - F @ G.at(tau - 1)) / np.linalg.norm(G.at(tau))
                for tau in range(1, 4)
            )
        self.assertLess(residuals[1e6], 1e-3)
        self.assertLess(residuals[1e6], residuals[1.0])

    def test_invalid_arguments(self):
        data = _dataset(self.sys, self.expert, T=5)
        w = LossWeightsLinear(np.eye(2), np.eye(1), np.eye(2), H=2)
        with self.assertRaises(ValueError):
            fit_pil_alternating(data, self.sys, w, max_iters=0)
        with self.assertRaises(ShapeError):
            fit_pil_alternating(data, self.sys, w, G_init=PredictorSetLinear.identity(2, 1))
        with self.assertRaises(ValueError):
            fit_pil_alternating(data, self.sys, LossWeightsLinear(np.eye(2), np.eye(1), np.eye(2), H=6))


class TestCompareAndSerialize(unittest.TestCase):
    """Noise-term comparison and gain / predictor files."""

    # standard methods
    def setUp(self):
        """Executed before each test."""
        OUTPUT_DIR.mkdir(parents=True, exist_ok=True)
        self.sys = reference_system()
        self.expert = lqr_gain(self.sys, np.eye(2), 0.01 * np.eye(1))

    def tearDown(self):
        """Executed after each test."""
        shutil.rmtree(OUTPUT_DIR, ignore_errors=True)

    #  -- Tests ------------------------------------------------------------
    def test_compare_pil_bc(self):
        sigma_xi, sigma_eta = 1e-6 * np.eye(2), 0.01 * np.eye(1)
        data = _dataset(self.sys, self.expert, xi_var=1e-6, eta_var=0.01, seed=2)
        report = compare_pil_bc(data, self.sys, np.eye(2), np.eye(1), sigma_xi, sigma_eta)
        self.assertTrue(report.condition_holds)
        self.assertLessEqual(report.lhs, report.rhs)
        self.assertEqual(report.omega_pil.shape, (1, 2))
        self.assertGreater(report.omega_bc_norm, 0.0)
        flipped = compare_pil_bc(data, self.sys, np.eye(2), np.eye(1), 100.0 * np.eye(2), 1e-6 * np.eye(1))
        self.assertFalse(flipped.condition_holds)

    def test_compare_needs_noise_records(self):
        data = _dataset(self.sys, self.expert)
        plain = TrajectoryDataset(x=data.x, u=data.u, y=data.y, v=data.v)
        with self.assertRaises(ValueError):
            compare_pil_bc(plain, self.sys, np.eye(2), np.eye(1), np.eye(2), np.eye(1))

    def test_linear_model_file(self):
        data = _dataset(self.sys, self.expert, xi_var=0.01, eta_var=0.01)
        G = fit_predictors_ols(data, 3)
        gain = fit_bc(data)
        path = write_linear_model(OUTPUT_DIR / "model.csv", gain, G, meta={"method": "bc"})
        gain2, G2, meta = read_linear_model(path)
        assert_array_equal(gain2.K, gain.K)
        for tau in range(1, 4):
            assert_array_equal(G2.at(tau), G.at(tau))
        self.assertEqual(meta["method"], "bc")
        only_gain = read_linear_model(write_linear_model(OUTPUT_DIR / "gain.csv", gain))
        self.assertIsNone(only_gain[1])
        with self.assertRaises(DatasetFormatError):
            read_linear_model(OUTPUT_DIR / "nope.csv")


# ##############################################################################
# ##### Stand alone program ########
# ##################################
if __name__ == "__main__":
    unittest.main()
