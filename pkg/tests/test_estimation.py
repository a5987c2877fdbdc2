import math

import numpy as np
import pytest
from scipy import optimize

from clinference.core import cl_log_likelihood
from clinference.errors import DegenerateDataError
from clinference.estimation import (
    OptimizerSettings,
    constant_estimate,
    fit,
    golden_section_max,
    lognorm_null_estimate,
    mcle_lognorm,
    mcle_scalar,
)
from clinference.indexing import full_conditional_scheme
from clinference.models import ExpConditionalModel, LogNormalConditionalModel
from oracles import exp_grid_argmax

W = full_conditional_scheme(2)
EXP = ExpConditionalModel()
LN = LogNormalConditionalModel()


def coordinate_grid_oracle(X, start):
    """Cyclic coordinate search with shrinking step, in (mu1, log s1, mu2, log s2, log c)."""

    def ll(u):
        theta = [u[0], math.exp(u[1]), u[2], math.exp(u[3]), math.exp(u[4])]
        return cl_log_likelihood(LN, W, X, theta)

    u = np.array(start, dtype=float)
    best = ll(u)
    step = 0.5
    while step > 1e-7:
        improved = True
        while improved:
            improved = False
            for i in range(5):
                for direction in (1, -1):
                    for mult in (1, 2, 4):
                        cand = u.copy()
                        cand[i] += direction * mult * step
                        val = ll(cand)
                        if val > best:
                            u, best, improved = cand, val, True
        step /= 4
    return best


class TestGoldenSection:
    def test_quadratic(self):
        x, fx, it, ok = golden_section_max(lambda t: -(t - 1.3) ** 2, 0, 4, 1e-10, 500)
        assert ok and x == pytest.approx(1.3, abs=1e-8)

    def test_boundary_max(self):
        x, _, _, _ = golden_section_max(lambda t: -t, 0, 4, 1e-10, 500)
        assert x == pytest.approx(0.0, abs=1e-8)

    def test_iteration_cap(self):
        *_, ok = golden_section_max(lambda t: -(t - 1.3) ** 2, 0, 4, 1e-12, 3)
        assert not ok


class TestScalarMcle:
    def test_independent_data_near_zero(self):
        X = EXP.sample([0.0], 20_000, np.random.default_rng(0))
        est = mcle_scalar(EXP, W, X)
        assert est.converged
        assert 0 <= est.theta_hat[0] < 0.05

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_grid_search(self, seed):
        X = EXP.sample([1.0], 1000, np.random.default_rng(seed))
        est = mcle_scalar(EXP, W, X)
        t_grid, _ = exp_grid_argmax(X)
        assert est.theta_hat[0] == pytest.approx(t_grid, abs=1e-3)
        assert est.logcl_at_max == pytest.approx(cl_log_likelihood(EXP, W, X, est.theta_hat))

    @pytest.mark.parametrize("theta0", [0.0, 0.3, 1.0, 5.0, 10.0])
    def test_local_max_certificate(self, theta0):
        X = EXP.sample([theta0], 300, np.random.default_rng(int(theta0 * 10)))
        est = mcle_scalar(EXP, W, X)
        t = est.theta_hat[0]
        for probe in (t - 0.01, t + 0.01):
            if probe >= 0:
                assert est.logcl_at_max >= cl_log_likelihood(EXP, W, X, [probe])

    def test_nonconvergence_is_flagged(self):
        X = EXP.sample([1.0], 200, np.random.default_rng(1))
        est = mcle_scalar(EXP, W, X, OptimizerSettings(max_iters=2))
        assert not est.converged

    def test_wrong_model(self):
        with pytest.raises(ValueError):
            mcle_scalar(LN, W, np.ones((3, 2)))


class TestLognormMcle:
    def test_null_two_point(self):
        X = np.array([[1.0, 2.0], [math.e**2, 5.0]])
        est = mcle_lognorm(LN, W, X, fix_c_to_zero=True)
        assert est.theta_hat[0] == pytest.approx(1.0)
        assert est.theta_hat[1] == pytest.approx(1.0)
        assert est.theta_hat[4] == 0.0

    def test_degenerate(self):
        X = np.array([[2.0, 1.0], [2.0, 3.0], [2.0, 4.0]])
        with pytest.raises(DegenerateDataError):
            mcle_lognorm(LN, W, X)
        with pytest.raises(DegenerateDataError):
            lognorm_null_estimate(np.array([[1.0, 2.0]]))

    def test_too_few_rows_unconstrained(self):
        with pytest.raises(DegenerateDataError):
            mcle_lognorm(LN, W, np.array([[1.0, 2.0], [3.0, 4.0]]))

    @pytest.mark.slow
    def test_against_coordinate_grid_oracle(self):
        X = LN.sample([2, 1, 2, 1, 1.0], 1000, np.random.default_rng(11))
        est = mcle_lognorm(LN, W, X)
        null = lognorm_null_estimate(X)
        start = [null[0], math.log(null[1]), null[2], math.log(null[3]), 0.0]
        oracle_best = coordinate_grid_oracle(X, start)
        assert est.converged
        assert est.logcl_at_max >= oracle_best - 1e-4

    @pytest.mark.parametrize("seed", range(20))
    def test_null_closed_form_matches_numerical(self, seed):
        rng = np.random.default_rng(100 + seed)
        X = LN.sample([rng.normal(), rng.uniform(0.5, 2), rng.normal(), rng.uniform(0.5, 2), 0.0], 200, rng)

        def negll(u):
            return -cl_log_likelihood(LN, W, X, [u[0], math.exp(u[1]), u[2], math.exp(u[3]), 0.0])

        res = optimize.minimize(negll, [0.0, 0.0, 0.0, 0.0], method="BFGS", options={"gtol": 1e-10})
        numeric = np.array([res.x[0], math.exp(res.x[1]), res.x[2], math.exp(res.x[3])])
        closed = lognorm_null_estimate(X)[:4]
        np.testing.assert_allclose(closed, numeric, atol=1e-6)

    @pytest.mark.parametrize("c0", [0.0, 1.0, 5.0])
    def test_unconstrained_dominates_null(self, c0):
        for seed in range(3):
            X = LN.sample([2, 1, 2, 1, c0], 100, np.random.default_rng(seed))
            free = mcle_lognorm(LN, W, X)
            null = mcle_lognorm(LN, W, X, fix_c_to_zero=True)
            assert free.logcl_at_max >= null.logcl_at_max

    def test_more_restarts_never_worse(self):
        X = LN.sample([2, 1, 2, 1, 5.0], 100, np.random.default_rng(9))
        values = [mcle_lognorm(LN, W, X, OptimizerSettings(restarts=r)).logcl_at_max for r in (1, 2, 3, 5)]
        assert values == sorted(values)

    def test_recovers_truth_at_large_n(self):
        X = LN.sample([2, 1, 2, 1, 1.0], 10_000, np.random.default_rng(4))
        est = mcle_lognorm(LN, W, X)
        np.testing.assert_allclose(est.theta_hat, [2, 1, 2, 1, 1.0], atol=0.15)


def test_fit_dispatch_and_constant():
    X = EXP.sample([2.0], 50, np.random.default_rng(0))
    est = fit(EXP, W, X, provenance=2)
    assert est.provenance == 2 and est.converged
    with pytest.raises(ValueError):
        fit(EXP, W, X, null=True)
    const = constant_estimate(EXP, W, X, [7.0], provenance=1)
    assert const.theta_hat[0] == 7.0 and const.logcl_at_max < est.logcl_at_max
    assert set(est.to_dict()) == {"theta_hat", "logcl_at_max", "converged", "iterations", "provenance"}


def test_settings_validation():
    for bad in ({"rel_tol": 0}, {"max_iters": 0}, {"restarts": 0}, {"bracket_growth": 1.0}):
        with pytest.raises(ValueError):
            OptimizerSettings(**bad)
