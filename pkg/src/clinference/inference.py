"""Split and swap composite likelihood ratio statistics.

With a dataset split into halves ``X1`` and ``X2`` and an estimator fitted on
each half, the split statistic for half ``k`` at a query parameter ``theta`` is

    U_k(theta) = L(theta_hat_{3-k}; X_k) / L(theta; X_k),

and the swap statistic is ``(U_1 + U_2) / 2``. Both have expectation at most
one at the true parameter whatever estimator is plugged in, so thresholding
at ``1/alpha`` gives confidence sets and tests that are valid at every sample
size. All values here are logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .core import ConditionalModel, cl_log_likelihood
from .errors import ContractError
from .estimation import EstimateResult, OptimizerSettings, fit
from .indexing import WeightScheme

LOG2 = math.log(2.0)
Method = Literal["split", "swap"]
METHODS = ("split", "swap")


@dataclass(frozen=True, eq=False)
class SplitSample:
    part1: np.ndarray
    part2: np.ndarray
    rule: str = "first-half"
    seed: int | None = None

    def __post_init__(self):
        if len(self.part1) < 1 or len(self.part2) < 1:
            raise ValueError("both halves of a split sample must be nonempty")

    @property
    def n1(self) -> int:
        return len(self.part1)

    @property
    def n2(self) -> int:
        return len(self.part2)

    def part(self, k: int) -> np.ndarray:
        if k == 1:
            return self.part1
        if k == 2:
            return self.part2
        raise ValueError(f"part index must be 1 or 2, got {k}")


def split(data, rule: str = "first-half", seed: int | None = None) -> SplitSample:
    """Partition rows into two halves; the first half gets the extra row when n is odd.

    ``rule="first-half"`` keeps row order; ``rule="random"`` shuffles with
    ``seed`` first.
    """
    X = np.asarray(data, dtype=float)
    n = X.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 rows to split, got {n}")
    n1 = (n + 1) // 2
    if rule == "first-half":
        return SplitSample(X[:n1].copy(), X[n1:].copy(), rule, seed)
    if rule == "random":
        perm = np.random.default_rng(seed).permutation(n)
        return SplitSample(X[perm[:n1]], X[perm[n1:]], rule, seed)
    raise ValueError(f"unknown split rule {rule!r}")


def fit_halves(model, w, ss: SplitSample, settings=OptimizerSettings(), null: bool = False):
    """Fit the MCLE separately on each half, tagging each result with its half."""
    return (
        fit(model, w, ss.part1, settings, null=null, provenance=1),
        fit(model, w, ss.part2, settings, null=null, provenance=2),
    )


def _theta_of(est) -> np.ndarray:
    if isinstance(est, EstimateResult):
        return est.theta_hat
    return np.asarray(est, dtype=float).reshape(-1)


def _require_provenance(est, expected: int, role: str):
    if isinstance(est, EstimateResult) and est.provenance is not None and est.provenance != expected:
        raise ContractError(f"{role} must come from part {expected}, got an estimate fitted on part {est.provenance}")


def log_u_split(model: ConditionalModel, w: WeightScheme, ss: SplitSample, k: int, estimate_other, theta) -> float:
    """``log U_k(theta)``: log-CL of half ``k`` at the other half's estimate minus at ``theta``.

    ``estimate_other`` must not have been fitted on half ``k``; tagged
    estimates are checked and a mismatch raises :class:`ContractError`.
    A ``theta`` at which half ``k`` has zero composite likelihood gives ``+inf``.
    """
    _require_provenance(estimate_other, 3 - k, f"the numerator estimate for U_{k}")
    data = ss.part(k)
    denom = cl_log_likelihood(model, w, data, theta)
    if denom == -math.inf:
        return math.inf
    return cl_log_likelihood(model, w, data, _theta_of(estimate_other)) - denom


def log_u_swap(log_u1: float, log_u2: float) -> float:
    """``log((U_1 + U_2) / 2)`` computed without leaving log space."""
    return float(np.logaddexp(log_u1, log_u2) - LOG2)


@dataclass(frozen=True, eq=False)
class LogRatioStatistic:
    kind: Literal["split-1", "split-2", "swap"]
    log_value: float
    theta_query: np.ndarray
    alpha_threshold_log: float | None = None

    @property
    def exceeds(self) -> bool | None:
        if self.alpha_threshold_log is None:
            return None
        return self.log_value > self.alpha_threshold_log


def _statistic_fn(model, w, ss, estimates, method):
    """Return ``theta -> log statistic`` with the numerators computed once."""
    est1, est2 = estimates
    _require_provenance(est1, 1, "the first estimate")
    _require_provenance(est2, 2, "the second estimate")
    num1 = cl_log_likelihood(model, w, ss.part1, _theta_of(est2))
    num2 = cl_log_likelihood(model, w, ss.part2, _theta_of(est1)) if method == "swap" else None

    def log_u(part, num, theta):
        denom = cl_log_likelihood(model, w, part, theta)
        return math.inf if denom == -math.inf else num - denom

    if method == "split":
        return lambda theta: log_u(ss.part1, num1, theta)
    if method == "swap":
        return lambda theta: log_u_swap(log_u(ss.part1, num1, theta), log_u(ss.part2, num2, theta))
    raise ValueError(f"method must be one of {METHODS}, got {method!r}")


def ratio_statistic(model, w, ss, estimates, kind, theta, alpha: float | None = None) -> LogRatioStatistic:
    """Evaluate ``log U_1``, ``log U_2`` or ``log U_bar`` at ``theta``.

    ``estimates`` is the pair ``(fit on part 1, fit on part 2)``.
    """
    est1, est2 = estimates
    if kind == "split-1":
        value = log_u_split(model, w, ss, 1, est2, theta)
    elif kind == "split-2":
        value = log_u_split(model, w, ss, 2, est1, theta)
    elif kind == "swap":
        value = log_u_swap(log_u_split(model, w, ss, 1, est2, theta), log_u_split(model, w, ss, 2, est1, theta))
    else:
        raise ValueError(f"unknown statistic kind {kind!r}")
    thr = None if alpha is None else -math.log(alpha)
    return LogRatioStatistic(kind, value, np.asarray(theta, dtype=float), thr)


def _check_alpha(alpha: float) -> float:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


def member(model, w, ss, alpha, estimates, method: Method, theta) -> bool:
    """Whether ``theta`` belongs to the level-``alpha`` split or swap confidence set.

    Works for any parameter dimension. Parameters outside the model's
    parameter space are never members.
    """
    alpha = _check_alpha(alpha)
    if not model.in_param_space(theta):
        return False
    stat = _statistic_fn(model, w, ss, estimates, method)(np.asarray(theta, dtype=float).reshape(-1))
    return bool(stat <= -math.log(alpha))


# -- scalar confidence sets -----------------------------------------------------


@dataclass(frozen=True)
class SearchSettings:
    linear_points: int = 401
    geometric_points: int = 200
    bisect_tol: float = 1e-6
    growth: float = 2.0
    max_expansions: int = 60


@dataclass(frozen=True)
class ConfidenceSet1D:
    alpha: float
    accepted_intervals: list[tuple[float, float]]
    diameter: float
    method: str
    unbounded: bool = False
    theta_max: float = field(default=math.nan, compare=False)

    def contains(self, theta: float) -> bool:
        return any(lo <= theta <= hi for lo, hi in self.accepted_intervals)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "method": self.method,
            "intervals": [[lo, hi] for lo, hi in self.accepted_intervals],
            "diameter": self.diameter,
            "unbounded": self.unbounded,
        }


def _bisect(f, inside: float, outside: float, thr: float, tol: float) -> float:
    """Shrink ``[inside, outside]`` around the threshold crossing; return the accepted end."""
    while abs(outside - inside) > tol:
        mid = 0.5 * (inside + outside)
        if f(mid) <= thr:
            inside = mid
        else:
            outside = mid
    return inside


def confidence_set_1d(
    model: ConditionalModel,
    w: WeightScheme,
    ss: SplitSample,
    alpha: float,
    estimates: Sequence,
    method: Method = "split",
    search: SearchSettings = SearchSettings(),
) -> ConfidenceSet1D:
    """Level-``alpha`` confidence set for a scalar parameter on ``[0, inf)``.

    The upper search limit grows geometrically until the statistic exceeds
    ``-log alpha`` there. A combined linear and geometric grid on
    ``[0, theta_max]`` then locates the accepted runs, and each run edge is
    refined by bisection to ``search.bisect_tol``. The result may be a union
    of intervals; its diameter is ``max(hi) - min(lo)``.

    If the statistic stays below the threshold after ``max_expansions``
    growth steps, the set is flagged ``unbounded`` with infinite diameter.
    """
    alpha = _check_alpha(alpha)
    if model.param_dim != 1:
        raise ValueError("confidence_set_1d needs a scalar parameter")
    lower = model.param_bounds[0][0]
    if lower != 0.0:
        raise ValueError("confidence_set_1d searches [0, inf); model parameter must be non-negative")
    thr = -math.log(alpha)
    stat = _statistic_fn(model, w, ss, estimates, method)
    f = lambda t: stat(np.array([t]))  # noqa: E731

    centers = [float(_theta_of(e)[0]) for e in estimates]
    theta_max = max(1.0, 2.0 * max(centers))
    expansions = 0
    while f(theta_max) <= thr:
        if expansions >= search.max_expansions:
            return ConfidenceSet1D(alpha, [(0.0, math.inf)], math.inf, method, True, theta_max)
        theta_max *= search.growth
        expansions += 1

    grid = np.unique(
        np.concatenate(
            [
                np.linspace(0.0, theta_max, search.linear_points),
                np.geomspace(theta_max * 1e-6, theta_max, search.geometric_points),
                [c for c in centers if 0 <= c < theta_max],
            ]
        )
    )
    values = np.array([f(t) for t in grid])
    accepted = values <= thr

    intervals = []
    i = 0
    m = len(grid)
    while i < m:
        if not accepted[i]:
            i += 1
            continue
        j = i
        while j + 1 < m and accepted[j + 1]:
            j += 1
        lo = grid[i] if i == 0 else _bisect(f, grid[i], grid[i - 1], thr, search.bisect_tol)
        hi = _bisect(f, grid[j], grid[j + 1], thr, search.bisect_tol)
        intervals.append((float(lo), float(hi)))
        i = j + 1

    diameter = intervals[-1][1] - intervals[0][0] if intervals else 0.0
    return ConfidenceSet1D(alpha, intervals, float(diameter), method, False, theta_max)


# -- tests --------------------------------------------------------------------


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # keep pytest from collecting this class

    statistic_log: float
    reject: bool
    alpha: float
    method: str

    @property
    def e_value(self) -> float:
        return math.exp(self.statistic_log) if self.statistic_log < 709.0 else math.inf

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "alpha": self.alpha,
            "log_statistic": self.statistic_log,
            "reject": self.reject,
        }


def ratio_test(
    model: ConditionalModel,
    w: WeightScheme,
    ss: SplitSample,
    alpha: float,
    null_maximizers: Sequence,
    free_estimates: Sequence,
    method: Method = "split",
) -> TestResult:
    """Split (``V_1``) or swap (``V_bar``) composite likelihood ratio test.

    ``null_maximizers[k-1]`` maximizes the CL of half ``k`` over the null set;
    ``free_estimates[k-1]`` is any estimator fitted on half ``k``. The split
    statistic is ``log U_1`` evaluated at the part-1 null maximizer; the swap
    statistic averages that with the mirror-image ``U_2``. Rejects when the
    statistic is at least ``-log alpha``.
    """
    alpha = _check_alpha(alpha)
    null1, null2 = null_maximizers
    free1, free2 = free_estimates
    _require_provenance(null1, 1, "the null maximizer for part 1")
    _require_provenance(null2, 2, "the null maximizer for part 2")
    _require_provenance(free1, 1, "the free estimate for part 1")
    _require_provenance(free2, 2, "the free estimate for part 2")

    v1 = log_u_split(model, w, ss, 1, free2, _theta_of(null1))
    if method == "split":
        stat = v1
    elif method == "swap":
        stat = log_u_swap(v1, log_u_split(model, w, ss, 2, free1, _theta_of(null2)))
    else:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    return TestResult(float(stat), bool(stat >= -math.log(alpha)), alpha, method)
