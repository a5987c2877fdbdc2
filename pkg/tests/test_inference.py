import math

import numpy as np
import pytest

from clinference.errors import ContractError
from clinference.estimation import constant_estimate, fit
from clinference.indexing import full_conditional_scheme
from clinference.inference import (
    ConfidenceSet1D,
    SplitSample,
    confidence_set_1d,
    fit_halves,
    log_u_split,
    log_u_swap,
    member,
    ratio_statistic,
    ratio_test,
    split,
)
from clinference.models import ExpConditionalModel, LogNormalConditionalModel
from oracles import exp_logcl_longhand, grid_scan_set

W = full_conditional_scheme(2)
EXP = ExpConditionalModel()
LN = LogNormalConditionalModel()


def exp_split(seed, theta0=1.0, n1=100):
    X = EXP.sample([theta0], 2 * n1, np.random.default_rng(seed))
    ss = split(X)
    return ss, fit_halves(EXP, W, ss)


class TestSplit:
    def test_sizes(self):
        assert (split(np.ones((4, 2))).n1, split(np.ones((4, 2))).n2) == (2, 2)
        ss = split(np.arange(10.0).reshape(5, 2))
        assert (ss.n1, ss.n2) == (3, 2)
        np.testing.assert_array_equal(ss.part1[:, 0], [0, 2, 4])

    def test_random_is_deterministic(self):
        X = np.arange(40.0).reshape(20, 2)
        a, b = split(X, "random", 7), split(X, "random", 7)
        np.testing.assert_array_equal(a.part1, b.part1)
        np.testing.assert_array_equal(a.part2, b.part2)
        assert sorted(np.vstack([a.part1, a.part2])[:, 0]) == list(X[:, 0])

    def test_errors(self):
        with pytest.raises(ValueError):
            split(np.ones((1, 2)))
        with pytest.raises(ValueError):
            split(np.ones((4, 2)), "alternate")


class TestLogU:
    def test_zero_at_numerator_estimate(self):
        ss, (e1, e2) = exp_split(0)
        assert log_u_split(EXP, W, ss, 1, e2, e2.theta_hat) == 0.0
        assert log_u_split(EXP, W, ss, 2, e1, e1.theta_hat) == 0.0

    def test_maximized_at_own_mcle(self):
        ss, (e1, e2) = exp_split(1)
        at_own = log_u_split(EXP, W, ss, 1, e2, e1.theta_hat)
        for theta in np.linspace(0, 4, 41):
            assert log_u_split(EXP, W, ss, 1, e2, [theta]) >= at_own - 1e-9
        assert at_own <= 0

    def test_recomputation_oracle(self):
        ss, (e1, e2) = exp_split(42)
        for theta in (0.2, 1.0, 2.7):
            got = log_u_split(EXP, W, ss, 1, e2, [theta])
            num = exp_logcl_longhand(ss.part1, e2.theta_hat[0])[0]
            den = exp_logcl_longhand(ss.part1, theta)[0]
            assert got == pytest.approx(num - den, abs=1e-10)

    def test_provenance_enforced(self):
        ss, (e1, e2) = exp_split(2)
        with pytest.raises(ContractError):
            log_u_split(EXP, W, ss, 1, e1, [1.0])
        with pytest.raises(ContractError):
            log_u_split(EXP, W, ss, 2, e2, [1.0])
        # untagged arrays are the caller's responsibility
        assert math.isfinite(log_u_split(EXP, W, ss, 1, np.array([1.0]), [2.0]))

    def test_off_support_query(self):
        ss = SplitSample(np.array([[1.0, 1.0]]), np.array([[1.0, 2.0]]))
        lm_theta = [0.0, 1.0, 0.0, 1.0, 0.0]
        # zero CL in the denominator is an infinite ratio
        bad = SplitSample(np.array([[1.0, -1.0]]), np.array([[1.0, 2.0]]))
        assert log_u_split(LN, W, bad, 1, np.array(lm_theta), lm_theta) == math.inf
        assert math.isfinite(log_u_split(LN, W, ss, 1, np.array(lm_theta), lm_theta))


class TestLogUSwap:
    def test_examples(self):
        assert log_u_swap(0.0, 0.0) == 0.0
        assert log_u_swap(math.log(4), -math.inf) == pytest.approx(math.log(2))
        assert log_u_swap(1000.0, 10.0) == pytest.approx(1000 - math.log(2) + math.log1p(math.exp(-990)))

    def test_huge_inputs(self):
        assert log_u_swap(1e5, 1e5) == pytest.approx(1e5)
        assert log_u_swap(-1e5, 3.0) == pytest.approx(3.0 - math.log(2))

    def test_statistic_kinds(self):
        ss, ests = exp_split(3)
        s1 = ratio_statistic(EXP, W, ss, ests, "split-1", [1.5], alpha=0.05)
        s2 = ratio_statistic(EXP, W, ss, ests, "split-2", [1.5])
        sw = ratio_statistic(EXP, W, ss, ests, "swap", [1.5], alpha=0.05)
        assert sw.log_value == pytest.approx(np.logaddexp(s1.log_value, s2.log_value) - math.log(2))
        assert s1.alpha_threshold_log == pytest.approx(math.log(20))
        assert s2.exceeds is None
        assert max(s1.log_value, s2.log_value) - math.log(2) <= sw.log_value <= max(s1.log_value, s2.log_value)


class TestConfidenceSet:
    def test_split_contains_other_estimate(self):
        for seed in range(5):
            ss, ests = exp_split(seed)
            for alpha in (0.01, 0.5, 0.99):
                cs = confidence_set_1d(EXP, W, ss, alpha, ests, "split")
                assert cs.contains(ests[1].theta_hat[0])

    def test_nesting_in_alpha(self):
        ss, ests = exp_split(7)
        for method in ("split", "swap"):
            sets = [confidence_set_1d(EXP, W, ss, a, ests, method) for a in (0.01, 0.05, 0.2, 0.6)]
            for wide, narrow in zip(sets, sets[1:]):
                assert wide.accepted_intervals[0][0] <= narrow.accepted_intervals[0][0] + 1e-6
                assert wide.accepted_intervals[-1][1] >= narrow.accepted_intervals[-1][1] - 1e-6
                assert wide.diameter >= narrow.diameter - 2e-6

    @pytest.mark.parametrize("method", ["split", "swap"])
    def test_seed_42_against_grid_scan(self, method):
        ss, (e1, e2) = exp_split(42)
        cs = confidence_set_1d(EXP, W, ss, 0.05, (e1, e2), method)
        assert len(cs.accepted_intervals) == 1
        lo, hi, runs = grid_scan_set(ss.part1, ss.part2, e1.theta_hat[0], e2.theta_hat[0], 0.05, method, hi=cs.theta_max)
        assert runs == 1
        assert cs.accepted_intervals[0][0] == pytest.approx(lo, abs=1e-3)
        assert cs.accepted_intervals[0][1] == pytest.approx(hi, abs=1e-3)
        assert cs.contains(1.0)
        assert cs.diameter == pytest.approx(hi - lo, abs=2e-3)

    def test_boundary_zero_accepted(self):
        X = EXP.sample([0.0], 60, np.random.default_rng(5))
        ss = split(X)
        cs = confidence_set_1d(EXP, W, ss, 0.05, fit_halves(EXP, W, ss), "split")
        assert cs.accepted_intervals[0][0] == 0.0

    def test_serialization(self):
        ss, ests = exp_split(8)
        d = confidence_set_1d(EXP, W, ss, 0.1, ests, "swap").to_dict()
        assert set(d) >= {"alpha", "intervals", "diameter"}
        assert ConfidenceSet1D(0.1, [], 0.0, "split").contains(1.0) is False

    def test_alpha_validation(self):
        ss, ests = exp_split(9)
        for alpha in (0.0, 1.0, -0.5):
            with pytest.raises(ValueError):
                confidence_set_1d(EXP, W, ss, alpha, ests)


class TestMember:
    def test_other_estimate_always_member(self):
        ss, ests = exp_split(10)
        assert member(EXP, W, ss, 0.05, ests, "split", ests[1].theta_hat)

    def test_outside_parameter_space(self):
        ss, ests = exp_split(11)
        assert not member(EXP, W, ss, 0.05, ests, "split", [-1.0])
        assert not member(EXP, W, ss, 0.05, ests, "swap", [math.nan])

    @pytest.mark.parametrize("method", ["split", "swap"])
    def test_agrees_with_interval(self, method):
        ss, ests = exp_split(12)
        search_tol = 1e-6
        cs = confidence_set_1d(EXP, W, ss, 0.05, ests, method)
        rng = np.random.default_rng(0)
        ends = [e for iv in cs.accepted_intervals for e in iv]
        for theta in rng.uniform(0, cs.theta_max, 100):
            if min(abs(theta - e) for e in ends) < 2 * search_tol:
                continue
            assert member(EXP, W, ss, 0.05, ests, method, [theta]) == cs.contains(theta)

    def test_multidimensional(self):
        X = LN.sample([2, 1, 2, 1, 1.0], 200, np.random.default_rng(3))
        ss = split(X)
        ests = fit_halves(LN, W, ss)
        assert member(LN, W, ss, 0.05, ests, "split", ests[1].theta_hat)
        assert not member(LN, W, ss, 0.05, ests, "swap", [2, 1, 2, 1, -1.0])
        assert not member(LN, W, ss, 0.05, ests, "swap", [40, 1, 2, 1, 1.0])


class TestRatioTest:
    def test_full_null_never_rejects(self):
        for seed in range(10):
            ss, frees = exp_split(seed)
            nulls = frees  # the null set is the whole space, so the MCLEs maximize over it
            for method in ("split", "swap"):
                res = ratio_test(EXP, W, ss, 0.05, nulls, frees, method)
                assert res.statistic_log <= 1e-9
                assert not res.reject

    def test_reject_rule_and_serialization(self):
        X = LN.sample([2, 1, 2, 1, 5.0], 400, np.random.default_rng(1))
        ss = split(X)
        nulls = fit_halves(LN, W, ss, null=True)
        frees = fit_halves(LN, W, ss)
        for method in ("split", "swap"):
            res = ratio_test(LN, W, ss, 0.05, nulls, frees, method)
            assert res.reject == (res.statistic_log >= -math.log(0.05))
            assert res.reject
            assert res.e_value == pytest.approx(math.exp(res.statistic_log)) or res.e_value == math.inf
            assert set(res.to_dict()) == {"method", "alpha", "log_statistic", "reject"}

    def test_provenance_mismatch(self):
        X = LN.sample([2, 1, 2, 1, 0.0], 100, np.random.default_rng(2))
        ss = split(X)
        nulls = fit_halves(LN, W, ss, null=True)
        frees = fit_halves(LN, W, ss)
        with pytest.raises(ContractError):
            ratio_test(LN, W, ss, 0.05, nulls, frees[::-1], "split")
        with pytest.raises(ContractError):
            ratio_test(LN, W, ss, 0.05, nulls[::-1], frees, "swap")

    def test_any_estimator_plugs_in(self):
        X = LN.sample([2, 1, 2, 1, 0.0], 200, np.random.default_rng(4))
        ss = split(X)
        nulls = fit_halves(LN, W, ss, null=True)
        bad = (
            constant_estimate(LN, W, ss.part1, [0, 3, 5, 0.2, 9.0], provenance=1),
            constant_estimate(LN, W, ss.part2, [0, 3, 5, 0.2, 9.0], provenance=2),
        )
        res = ratio_test(LN, W, ss, 0.05, nulls, bad, "swap")
        assert not res.reject and res.statistic_log < 0

    def test_exp_model_free_fit(self):
        ss, frees = exp_split(4)
        nulls = (fit(EXP, W, ss.part1, provenance=1), fit(EXP, W, ss.part2, provenance=2))
        assert not ratio_test(EXP, W, ss, 0.5, nulls, frees).reject
