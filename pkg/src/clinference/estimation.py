"""Maximum composite likelihood estimation.

Two fitters cover the two bivariate models: :func:`mcle_scalar` for a single
non-negative parameter (bracket expansion plus golden-section search) and
:func:`mcle_lognorm` for the five-parameter log-normal model (closed form
under ``c = 0``, multi-start Nelder-Mead otherwise).

Every :class:`EstimateResult` may carry a ``provenance`` tag naming the half
of a split sample it was fitted on (1 or 2); the inference layer uses it to
refuse estimates evaluated on their own training half.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .core import ConditionalModel, cl_log_likelihood
from .errors import DegenerateDataError
from .indexing import WeightScheme

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
C_OFFSET = 1e-10


@dataclass(frozen=True)
class OptimizerSettings:
    rel_tol: float = 1e-8
    max_iters: int = 500
    restarts: int = 3
    bracket_growth: float = 4.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.bracket_growth > 1:
            raise ValueError("bracket_growth must be > 1")


@dataclass(frozen=True, eq=False)
class EstimateResult:
    theta_hat: np.ndarray
    logcl_at_max: float
    converged: bool
    iterations: int
    provenance: int | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "theta_hat": [float(v) for v in self.theta_hat],
            "logcl_at_max": float(self.logcl_at_max),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "provenance": self.provenance,
        }


def constant_estimate(model, w, data, theta, provenance: int | None = None) -> EstimateResult:
    """Wrap a fixed parameter as an estimate, ignoring the data except to score it.

    Useful as a deliberately poor plug-in estimator: the split statistics stay
    valid for any estimator built from the other half, including a constant.
    """
    theta = model.check_params(theta)
    return EstimateResult(theta, cl_log_likelihood(model, w, data, theta), True, 0, provenance)


def golden_section_max(f, lo: float, hi: float, tol: float, max_iters: int):
    """Maximize a unimodal ``f`` on ``[lo, hi]``.

    Returns ``(x, f(x), iterations, converged)``; ``tol`` bounds the final
    bracket width relative to ``max(1, |x|)``.
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while (b - a) > tol * max(1.0, abs(c)):
        if it >= max_iters:
            break
        it += 1
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    converged = (b - a) <= tol * max(1.0, abs(c))
    x, fx = (c, fc) if fc >= fd else (d, fd)
    return x, fx, it, converged


def mcle_scalar(
    model: ConditionalModel,
    w: WeightScheme,
    data,
    settings: OptimizerSettings = OptimizerSettings(),
    provenance: int | None = None,
) -> EstimateResult:
    """MCLE of a single parameter constrained to ``[0, inf)``.

    The upper end of ``[0, 1]`` is multiplied by ``bracket_growth`` until the
    objective is decreasing there, then golden-section search narrows the
    bracket. The boundary ``theta = 0`` is compared explicitly at the end.
    """
    if model.param_dim != 1:
        raise ValueError(f"mcle_scalar needs a one-parameter model, {model.name} has {model.param_dim}")
    data = np.asarray(data, dtype=float)

    def f(t):
        return cl_log_likelihood(model, w, data, [t])

    g = settings.bracket_growth
    hi = 1.0
    expansions = 0
    while f(hi) >= f(hi / g):
        if expansions >= settings.max_iters or not math.isfinite(hi * g):
            return EstimateResult(np.array([hi]), f(hi), False, expansions, provenance)
        hi *= g
        expansions += 1
    x, fx, it, converged = golden_section_max(f, 0.0, hi, settings.rel_tol, settings.max_iters)
    f0 = f(0.0)
    if f0 >= fx:
        x, fx = 0.0, f0
    return EstimateResult(np.array([x]), fx, converged, expansions + it, provenance)


# -- log-normal conditionals ---------------------------------------------------


def _log_columns(data) -> np.ndarray:
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) dataset, got shape {X.shape}")
    if np.any(X <= 0):
        raise DegenerateDataError("log-normal data must be strictly positive")
    L = np.log(X)
    if X.shape[0] < 2 or np.any(np.ptp(L, axis=0) == 0):
        raise DegenerateDataError("a log-coordinate is constant; the variance MLE is zero")
    return L


def lognorm_null_estimate(data) -> np.ndarray:
    """Closed-form maximizer under ``c = 0``: per-coordinate mean and variance (divisor n) of logs."""
    L = _log_columns(data)
    m = L.mean(axis=0)
    v = L.var(axis=0)
    return np.array([m[0], v[0], m[1], v[1], 0.0])


def _to_free(theta: np.ndarray) -> np.ndarray:
    mu1, s1, mu2, s2, c = theta
    return np.array([mu1, math.log(s1), mu2, math.log(s2), math.log(c + C_OFFSET)])


def _from_free(u: np.ndarray) -> np.ndarray:
    c = max(math.exp(u[4]) - C_OFFSET, 0.0)
    return np.array([u[0], math.exp(u[1]), u[2], math.exp(u[3]), c])


_C_STARTS = (1.0, 0.1, 5.0, 0.5, 2.0, 0.02, 10.0)


def _start_point(null: np.ndarray, restart: int) -> np.ndarray:
    # deterministic in the restart index so extra restarts only add candidates
    u = _to_free(null)
    u[4] = math.log(_C_STARTS[restart % len(_C_STARTS)])
    if restart > 0:
        jitter = np.random.default_rng(restart).normal(0.0, 0.1, size=4)
        u[0] += jitter[0] * math.sqrt(null[1])
        u[1] += jitter[1]
        u[2] += jitter[2] * math.sqrt(null[3])
        u[3] += jitter[3]
    return u


def mcle_lognorm(
    model: ConditionalModel,
    w: WeightScheme,
    data,
    settings: OptimizerSettings = OptimizerSettings(),
    fix_c_to_zero: bool = False,
    provenance: int | None = None,
    first_restart: int = 0,
) -> EstimateResult:
    """MCLE for the log-normal conditionals model, optionally under ``c = 0``.

    The unconstrained search runs Nelder-Mead in ``(mu1, log s1sq, mu2,
    log s2sq, log(c + 1e-10))`` from ``settings.restarts`` starts around the
    null solution, restarting each simplex once from its own answer, and
    finally compares against the exact boundary point ``c = 0``. Start points
    depend only on the restart index, so raising ``restarts`` can only add
    candidates.

    ``first_restart`` offsets the start-point sequence, which lets a caller
    retry with fresh starts.
    """
    data = np.asarray(data, dtype=float)
    null = lognorm_null_estimate(data)
    null_ll = cl_log_likelihood(model, w, data, null)
    if fix_c_to_zero:
        return EstimateResult(null, null_ll, True, 0, provenance)
    n = data.shape[0]
    if n < 3:
        raise DegenerateDataError("unconstrained log-normal fit needs n >= 3")

    def objective(u):
        theta = _from_free(u)
        if not (np.all(np.isfinite(theta)) and theta[1] > 0 and theta[3] > 0):
            return math.inf
        return -cl_log_likelihood(model, w, data, theta) / n

    opts = {
        "maxiter": settings.max_iters * 5,
        "maxfev": settings.max_iters * 10,
        "xatol": 1e-7,
        "fatol": settings.rel_tol * 1e-2,
        "adaptive": False,
    }
    best = None
    total_iters = 0
    converged = False
    for r in range(first_restart, first_restart + settings.restarts):
        res = optimize.minimize(objective, _start_point(null, r), method="Nelder-Mead", options=opts)
        # a fresh simplex around the first answer catches premature collapse
        polish = optimize.minimize(objective, res.x, method="Nelder-Mead", options=opts)
        total_iters += res.nit + polish.nit
        cand = polish if polish.fun <= res.fun else res
        if best is None or cand.fun < best.fun:
            best = cand
            converged = bool(res.success or polish.success)
    theta = _from_free(best.x)
    ll = cl_log_likelihood(model, w, data, theta)
    if null_ll >= ll:
        theta, ll = null, null_ll
    return EstimateResult(theta, ll, converged and math.isfinite(ll), total_iters, provenance)


def fit(model, w, data, settings: OptimizerSettings = OptimizerSettings(), null: bool = False, provenance=None):
    """Dispatch to the right MCLE for ``model``.

    ``null=True`` requests the maximizer over the ``c = 0`` null set and is
    only meaningful for the log-normal model.
    """
    if model.name == "lognorm-cond":
        return mcle_lognorm(model, w, data, settings, fix_c_to_zero=null, provenance=provenance)
    if null:
        raise ValueError(f"{model.name} has no null constraint")
    if model.param_dim == 1:
        return mcle_scalar(model, w, data, settings, provenance=provenance)
    raise ValueError(f"no estimator registered for model {model.name!r}")
