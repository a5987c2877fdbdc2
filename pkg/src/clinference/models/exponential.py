"""Bivariate model with exponential conditionals.

Joint density ``kappa(theta) exp(-x1 - x2 - theta x1 x2)`` on the positive
quadrant, ``theta >= 0``. Each conditional is exponential:
``x_k | x_{3-k} ~ Exp(rate = 1 + theta x_{3-k})``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import ConditionalModel
from ..errors import CapabilityError
from ..indexing import DivisionIndex, SubsetIndex
from .quadrature import exp_kappa


@dataclass(frozen=True)
class ExpCondParams:
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and self.theta >= 0):
            raise ValueError(f"theta must be finite and >= 0, got {self.theta}")

    def to_array(self) -> np.ndarray:
        return np.array([self.theta])

    @classmethod
    def from_array(cls, values) -> "ExpCondParams":
        values = np.asarray(values, dtype=float).reshape(-1)
        if values.shape != (1,):
            raise ValueError(f"exp-cond takes one parameter [theta], got {values.tolist()}")
        return cls(float(values[0]))


def _theta(p) -> float:
    if isinstance(p, ExpCondParams):
        return p.theta
    return ExpCondParams.from_array(p).theta


def _conditional_rows(k: int, X: np.ndarray, theta: float) -> np.ndarray:
    xk = X[:, k - 1]
    other = X[:, 2 - k]
    rate = 1.0 + theta * other
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(rate) - rate * xk
    out[~((xk > 0) & (other > 0))] = -np.inf
    return out


def exp_conditional_logpdf(k: int, x, p) -> float:
    """``log f(x_k | x_{3-k})`` with rate ``1 + theta x_{3-k}``; ``-inf`` off the quadrant."""
    if k not in (1, 2):
        raise ValueError(f"k must be 1 or 2, got {k}")
    X = np.asarray(x, dtype=float).reshape(1, 2)
    return float(_conditional_rows(k, X, _theta(p))[0])


def exp_joint_logpdf(x, p) -> np.ndarray:
    """Joint log-density, vectorized over rows. Needs ``kappa`` unless ``theta == 0``."""
    theta = _theta(p)
    X = np.atleast_2d(np.asarray(x, dtype=float))
    log_kappa = 0.0 if theta == 0 else math.log(exp_kappa(theta))
    x1, x2 = X[:, 0], X[:, 1]
    out = log_kappa - x1 - x2 - theta * x1 * x2
    out[~((x1 > 0) & (x2 > 0))] = -np.inf
    return out


def exp_sample(p, count: int, rng: np.random.Generator) -> np.ndarray:
    """Exact IID draws by marginal rejection then an exact conditional draw.

    The first-coordinate marginal is proportional to ``exp(-x) / (1 + theta x)``:
    propose ``X1 ~ Exp(1)``, accept with probability ``1/(1 + theta X1)``, then
    draw ``X2 ~ Exp(1 + theta X1)``.
    """
    theta = _theta(p)
    count = int(count)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    out = np.empty((count, 2))
    filled = 0
    while filled < count:
        need = count - filled
        batch = 2 * need + 16
        x1 = rng.exponential(1.0, size=batch)
        u = rng.random(size=batch)
        accepted = x1[u * (1.0 + theta * x1) < 1.0][:need]
        m = accepted.size
        out[filled:filled + m, 0] = accepted
        out[filled:filled + m, 1] = rng.exponential(1.0, size=m) / (1.0 + theta * accepted)
        filled += m
    return out


class ExpConditionalModel(ConditionalModel):
    name = "exp-cond"
    param_names = ("theta",)
    param_bounds = ((0.0, math.inf),)
    param_open_lower = (False,)

    @property
    def dim(self) -> int:
        return 2

    def in_support(self, X):
        return np.all(np.asarray(X) > 0, axis=1)

    def log_conditional(self, division: DivisionIndex, X, theta):
        left, right = division.left.members, division.right.members
        if left == (1,) and right == (2,):
            return _conditional_rows(1, X, float(theta[0]))
        if left == (2,) and right == (1,):
            return _conditional_rows(2, X, float(theta[0]))
        raise CapabilityError(f"exp-cond has no conditional {division!r}")

    def log_marginal(self, subset: SubsetIndex, XS, theta):
        theta = float(theta[0])
        if subset.members == (1, 2):
            return exp_joint_logpdf(XS, theta)
        # integrating x_{3-k} out of the joint leaves kappa e^{-x}/(1 + theta x)
        x = XS[:, 0]
        log_kappa = 0.0 if theta == 0 else math.log(exp_kappa(theta))
        with np.errstate(invalid="ignore"):
            out = log_kappa - x - np.log1p(theta * x)
        out[~(x > 0)] = -np.inf
        return out

    def sample(self, theta, count, rng):
        return exp_sample(ExpCondParams.from_array(theta), count, rng)
