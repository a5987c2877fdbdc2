"""Bivariate model with log-normal conditionals.

With standardized log-coordinates ``z_k = (log x_k - mu_k) / sigma_k`` the
joint density is

    kappa(c) / (2 pi sigma1 sigma2 x1 x2) exp(-(z1^2 + z2^2 + c z1^2 z2^2) / 2),

for ``c >= 0``. Given ``x_{3-k}``, ``log x_k`` is normal with mean ``mu_k``
and variance ``sigma_k^2 / (1 + c z_{3-k}^2)``. Parameters are ordered
``[mu1, s1sq, mu2, s2sq, c]`` where ``s*sq`` are log-scale variances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import ConditionalModel
from ..errors import CapabilityError
from ..indexing import DivisionIndex, SubsetIndex
from .quadrature import lognorm_kappa

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class LogNormCondParams:
    mu1: float
    s1sq: float
    mu2: float
    s2sq: float
    c: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.mu1, self.s1sq, self.mu2, self.s2sq, self.c)):
            raise ValueError("log-normal parameters must be finite")
        if not (self.s1sq > 0 and self.s2sq > 0):
            raise ValueError(f"variances must be > 0, got {self.s1sq}, {self.s2sq}")
        if not self.c >= 0:
            raise ValueError(f"c must be >= 0, got {self.c}")

    def to_array(self) -> np.ndarray:
        return np.array([self.mu1, self.s1sq, self.mu2, self.s2sq, self.c])

    @classmethod
    def from_array(cls, values) -> "LogNormCondParams":
        values = np.asarray(values, dtype=float).reshape(-1)
        if values.shape != (5,):
            raise ValueError(f"lognorm-cond takes [mu1, s1sq, mu2, s2sq, c], got {values.tolist()}")
        return cls(*map(float, values))


def _params(p) -> LogNormCondParams:
    return p if isinstance(p, LogNormCondParams) else LogNormCondParams.from_array(p)


def _standardize(X, p: LogNormCondParams):
    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.log(X)
    z1 = (L[:, 0] - p.mu1) / math.sqrt(p.s1sq)
    z2 = (L[:, 1] - p.mu2) / math.sqrt(p.s2sq)
    return L, z1, z2


def _conditional_rows(k: int, X: np.ndarray, p: LogNormCondParams) -> np.ndarray:
    L, z1, z2 = _standardize(X, p)
    if k == 1:
        logx, mu, ssq, z_other = L[:, 0], p.mu1, p.s1sq, z2
    else:
        logx, mu, ssq, z_other = L[:, 1], p.mu2, p.s2sq, z1
    shrink = 1.0 + p.c * z_other * z_other
    var = ssq / shrink
    with np.errstate(invalid="ignore"):
        out = -logx - 0.5 * (LOG_2PI + np.log(var)) - 0.5 * (logx - mu) ** 2 / var
    out[~((X[:, 0] > 0) & (X[:, 1] > 0))] = -np.inf
    return out


def lognorm_conditional_logpdf(k: int, x, p) -> float:
    """Log-density of ``x_k`` given ``x_{3-k}``; ``-inf`` off the open quadrant."""
    if k not in (1, 2):
        raise ValueError(f"k must be 1 or 2, got {k}")
    X = np.asarray(x, dtype=float).reshape(1, 2)
    return float(_conditional_rows(k, X, _params(p))[0])


def lognorm_joint_logpdf(x, p) -> np.ndarray:
    p = _params(p)
    X = np.atleast_2d(np.asarray(x, dtype=float))
    L, z1, z2 = _standardize(X, p)
    log_kappa = 0.0 if p.c == 0 else math.log(lognorm_kappa(p.c))
    out = (
        log_kappa
        - LOG_2PI
        - 0.5 * math.log(p.s1sq * p.s2sq)
        - L[:, 0]
        - L[:, 1]
        - 0.5 * (z1 * z1 + z2 * z2 + p.c * z1 * z1 * z2 * z2)
    )
    out[~((X[:, 0] > 0) & (X[:, 1] > 0))] = -np.inf
    return out


def lognorm_sample(p, count: int, rng: np.random.Generator) -> np.ndarray:
    """Exact IID draws in standardized coordinates.

    The standardized marginal is proportional to ``phi(z) / sqrt(1 + c z^2)``:
    propose ``Z ~ N(0, 1)``, accept with probability ``(1 + c Z^2)^(-1/2)``,
    then draw the partner from ``N(0, 1/(1 + c Z^2))``. A fair coin assigns
    the accepted draw to coordinate 1 or 2.
    """
    p = _params(p)
    count = int(count)
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    Z = np.empty((count, 2))
    filled = 0
    while filled < count:
        need = count - filled
        batch = 2 * need + 16
        z = rng.standard_normal(batch)
        u = rng.random(batch)
        accepted = z[u * u * (1.0 + p.c * z * z) < 1.0][:need]
        m = accepted.size
        Z[filled:filled + m, 0] = accepted
        Z[filled:filled + m, 1] = rng.standard_normal(m) / np.sqrt(1.0 + p.c * accepted * accepted)
        filled += m
    flip = rng.random(count) < 0.5
    Z[flip] = Z[flip][:, ::-1]
    mu = np.array([p.mu1, p.mu2])
    sd = np.sqrt([p.s1sq, p.s2sq])
    return np.exp(mu + sd * Z)


class LogNormalConditionalModel(ConditionalModel):
    name = "lognorm-cond"
    param_names = ("mu1", "s1sq", "mu2", "s2sq", "c")
    param_bounds = (
        (-math.inf, math.inf),
        (0.0, math.inf),
        (-math.inf, math.inf),
        (0.0, math.inf),
        (0.0, math.inf),
    )
    param_open_lower = (False, True, False, True, False)

    @property
    def dim(self) -> int:
        return 2

    def in_support(self, X):
        return np.all(np.asarray(X) > 0, axis=1)

    def log_conditional(self, division: DivisionIndex, X, theta):
        left, right = division.left.members, division.right.members
        p = LogNormCondParams.from_array(theta)
        if left == (1,) and right == (2,):
            return _conditional_rows(1, X, p)
        if left == (2,) and right == (1,):
            return _conditional_rows(2, X, p)
        raise CapabilityError(f"lognorm-cond has no conditional {division!r}")

    def log_marginal(self, subset: SubsetIndex, XS, theta):
        p = LogNormCondParams.from_array(theta)
        if subset.members == (1, 2):
            return lognorm_joint_logpdf(XS, p)
        k = subset.members[0]
        mu, ssq = (p.mu1, p.s1sq) if k == 1 else (p.mu2, p.s2sq)
        x = XS[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            logx = np.log(x)
        z = (logx - mu) / math.sqrt(ssq)
        log_kappa = 0.0 if p.c == 0 else math.log(lognorm_kappa(p.c))
        out = log_kappa - logx - 0.5 * (LOG_2PI + math.log(ssq)) - 0.5 * z * z - 0.5 * np.log1p(p.c * z * z)
        out[~(x > 0)] = -np.inf
        return out

    def sample(self, theta, count, rng):
        return lognorm_sample(LogNormCondParams.from_array(theta), count, rng)
