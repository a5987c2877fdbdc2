"""Quadrature for the intractable normalizing constants.

Both bivariate models have joint densities whose normalizers involve special
functions. Inference never needs them (conditional-only weights cancel them),
so these routines exist for marginal densities, joint-recovery checks and
sampler verification. Each integral is split at the scale of its integrand
and handed to adaptive Gauss-Kronrod (QUADPACK via :func:`scipy.integrate.quad`).
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate

ABS_FLOOR = 1e-12
REL_TOL = 1e-12


def _quad(f, a, b, split=None, **kw):
    opts = dict(epsabs=ABS_FLOOR, epsrel=REL_TOL, limit=200)
    opts.update(kw)
    if split is not None and a < split < b:
        left, _ = integrate.quad(f, a, split, **opts)
        right, _ = integrate.quad(f, split, b, **opts)
        return left + right
    value, _ = integrate.quad(f, a, b, **opts)
    return value


def scaled_exp1(a: float) -> float:
    """``exp(a) * E1(a)`` where ``E1(a) = int_a^inf exp(-w)/w dw``, for ``a > 0``.

    Shifting ``w = a + s`` gives ``int_0^inf exp(-s)/(a + s) ds``, which stays
    finite for large ``a`` where ``E1`` alone underflows.
    """
    if not a > 0:
        raise ValueError(f"exponential integral needs a > 0, got {a}")
    return _quad(lambda s: math.exp(-s) / (a + s), 0.0, math.inf, split=1.0)


def exp1(a: float) -> float:
    """Exponential integral ``E1(a)``."""
    return math.exp(-a) * scaled_exp1(a)


def hyperu(a: float, b: float, z: float) -> float:
    """Tricomi's confluent hypergeometric function ``U(a, b, z)`` for ``a, z > 0``.

    Uses the integral representation

        U(a, b, z) = Gamma(a)^-1 int_0^inf exp(-z t) t^(a-1) (1+t)^(b-a-1) dt.

    Substituting ``t = (v / z^a)^(1/a)`` removes the endpoint singularity of
    ``t^(a-1)`` and rescales the decay to unit width, leaving

        U = z^-a / Gamma(a+1) * int_0^inf exp(-v^(1/a)) (1 + v^(1/a)/z)^(b-a-1) dv.
    """
    if not (a > 0 and z > 0):
        raise ValueError(f"hyperu integral representation needs a > 0 and z > 0, got a={a}, z={z}")
    p = 1.0 / a
    e = b - a - 1.0

    def integrand(v):
        t = v**p
        return math.exp(-t) * (1.0 + t / z) ** e

    integral = _quad(integrand, 0.0, math.inf, split=1.0)
    return math.exp(-a * math.log(z) - math.lgamma(a + 1.0)) * integral


@lru_cache(maxsize=4096)
def exp_kappa(theta: float) -> float:
    """Normalizer of ``exp(-x1 - x2 - theta x1 x2)`` on the positive quadrant.

    ``kappa(theta) = theta exp(-1/theta) / E1(1/theta)``. Rescaling the
    exponential-integral variable gives ``1 / int_0^inf exp(-s)/(1 + theta s) ds``,
    which has no ``1/theta`` and stays finite as ``theta -> 0``.
    """
    theta = float(theta)
    if not theta > 0:
        raise ValueError(f"exp_kappa needs theta > 0, got {theta}")
    return 1.0 / _quad(lambda s: math.exp(-s) / (1.0 + theta * s), 0.0, math.inf, split=1.0)


@lru_cache(maxsize=4096)
def lognorm_kappa(c: float) -> float:
    """Normalizer of the log-normal conditionals joint density.

    ``kappa(c) = sqrt(2c) / U(1/2, 1, 1/(2c))``. Writing ``U`` as an integral
    and substituting ``t = 2c v^2`` cancels the ``sqrt(2c)`` prefactor:
    ``kappa(c) = sqrt(pi) / (2 int_0^inf exp(-v^2) / sqrt(1 + 2c v^2) dv)``.
    """
    c = float(c)
    if not c > 0:
        raise ValueError(f"lognorm_kappa needs c > 0, got {c}")
    integral = _quad(lambda v: math.exp(-v * v) / math.sqrt(1.0 + 2.0 * c * v * v), 0.0, math.inf, split=1.0)
    return math.sqrt(math.pi) / (2.0 * integral)


# -- marginal CDFs (sampler oracles) ------------------------------------------


def _piecewise_cdf(pdf, points, lower, norm):
    """CDF at ``points`` by integrating ``pdf`` between consecutive sorted points."""
    x = np.asarray(points, dtype=float)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    acc = 0.0
    prev = lower
    cum = np.empty_like(xs)
    for i, xi in enumerate(xs):
        if xi > prev:
            acc += _quad(pdf, prev, xi)
            prev = xi
        cum[i] = acc
    out = np.empty_like(cum)
    out[order] = np.clip(cum * norm, 0.0, 1.0)
    return out


def exp_marginal_cdf(x, theta: float) -> np.ndarray:
    """CDF of either coordinate of the exponential conditionals model."""
    if theta == 0:
        return -np.expm1(-np.maximum(np.asarray(x, dtype=float), 0.0))
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return _piecewise_cdf(lambda t: math.exp(-t) / (1.0 + theta * t), x, 0.0, exp_kappa(theta))


def lognorm_marginal_cdf_std(z, c: float) -> np.ndarray:
    """CDF of a standardized coordinate ``(log x_k - mu_k)/sigma_k`` of the log-normal model.

    The standardized marginal density is ``kappa(c) phi(z) / sqrt(1 + c z^2)``.
    """
    z = np.asarray(z, dtype=float)
    if c == 0:
        from scipy.special import ndtr

        return ndtr(z)
    inv_root_2pi = 1.0 / math.sqrt(2.0 * math.pi)
    pdf = lambda t: inv_root_2pi * math.exp(-0.5 * t * t) / math.sqrt(1.0 + c * t * t)  # noqa: E731
    # start far enough in the tail that the neglected mass is below double eps
    return _piecewise_cdf(pdf, np.maximum(z, -40.0), -40.0, lognorm_kappa(c))


# -- 2-D normalization oracles ------------------------------------------------


def exp_total_mass(theta: float) -> float:
    """``int int kappa(theta) exp(-x1 - x2 - theta x1 x2) dx1 dx2`` by 2-D quadrature."""
    kappa = 1.0 if theta == 0 else exp_kappa(theta)
    f = lambda x2, x1: math.exp(-x1 - x2 - theta * x1 * x2)  # noqa: E731
    mass, _ = integrate.dblquad(f, 0.0, math.inf, 0.0, math.inf, epsabs=1e-13, epsrel=1e-11)
    return kappa * mass


def lognorm_total_mass(mu1: float, s1sq: float, mu2: float, s2sq: float, c: float) -> float:
    """2-D quadrature of the log-normal conditionals joint density over the quadrant.

    Integrated in log coordinates ``u_k = log x_k`` where the ``1/x_k``
    Jacobian factors cancel.
    """
    kappa = 1.0 if c == 0 else lognorm_kappa(c)
    s1, s2 = math.sqrt(s1sq), math.sqrt(s2sq)

    def f(u2, u1):
        z1 = (u1 - mu1) / s1
        z2 = (u2 - mu2) / s2
        return math.exp(-0.5 * (z1 * z1 + z2 * z2 + c * z1 * z1 * z2 * z2))

    width = 12.0  # tail mass beyond 12 sd is below 1e-30
    mass, _ = integrate.dblquad(
        f,
        mu1 - width * s1,
        mu1 + width * s1,
        mu2 - width * s2,
        mu2 + width * s2,
        epsabs=1e-13,
        epsrel=1e-11,
    )
    return kappa * mass / (2.0 * math.pi * s1 * s2)
