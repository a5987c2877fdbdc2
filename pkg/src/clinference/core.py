"""Model contract and composite likelihood evaluation.

The individual composite likelihood (ICL) of one observation ``x`` is

    log p_w(x; theta) = sum_S (sigma_S / v) log p(x_S; theta)
                      + sum_T (tau_T / v) log p(x_left(T) | x_right(T); theta)

with ``v`` the total weight. The composite likelihood of a dataset is the
product of ICLs over rows, so everything here works with log values.
"""

from __future__ import annotations

import abc
import csv
import io
import os
from typing import Sequence

import numpy as np

from .errors import CapabilityError, DataError
from .indexing import DivisionIndex, SubsetIndex, WeightScheme, total_weight


class ConditionalModel(abc.ABC):
    """Capability contract for a parametric model on ``R^dim``.

    Subclasses supply conditional log-densities and an exact sampler. Marginal
    densities are optional: the default :meth:`log_marginal` raises
    :class:`CapabilityError`, which is fine as long as no weight scheme with a
    nonzero marginal weight is used with the model.

    All density methods are vectorized over rows: ``X`` is ``(n, dim)`` and the
    return value has shape ``(n,)``. Points outside the support give ``-inf``.
    """

    #: identifier used by the CLI and config files
    name: str = ""
    #: names of the parameter coordinates, in file order
    param_names: tuple[str, ...] = ()
    #: ``(lower, upper)`` closed bounds per parameter coordinate
    param_bounds: tuple[tuple[float, float], ...] = ()
    #: per-coordinate flag: True if the lower bound itself is excluded
    param_open_lower: tuple[bool, ...] = ()

    @property
    @abc.abstractmethod
    def dim(self) -> int: ...

    @property
    def param_dim(self) -> int:
        return len(self.param_names)

    def in_param_space(self, theta) -> bool:
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.shape != (self.param_dim,) or not np.all(np.isfinite(theta)):
            return False
        opens = self.param_open_lower or (False,) * self.param_dim
        for value, (lo, hi), open_lo in zip(theta, self.param_bounds, opens):
            if value < lo or value > hi or (open_lo and value == lo):
                return False
        return True

    def check_params(self, theta) -> np.ndarray:
        arr = np.asarray(theta, dtype=float).reshape(-1)
        if not self.in_param_space(arr):
            raise ValueError(f"{self.name}: parameter {arr.tolist()} is outside the parameter space")
        return arr

    def log_marginal(self, subset: SubsetIndex, X: np.ndarray, theta) -> np.ndarray:
        raise CapabilityError(f"{self.name}: marginal density of {subset!r} is not available")

    @abc.abstractmethod
    def log_conditional(self, division: DivisionIndex, X: np.ndarray, theta) -> np.ndarray:
        """Log-density of ``X[:, left]`` given ``X[:, right]`` for each row."""

    @abc.abstractmethod
    def sample(self, theta, count: int, rng: np.random.Generator) -> np.ndarray:
        """Exact IID draws, shape ``(count, dim)``."""

    def in_support(self, X: np.ndarray) -> np.ndarray:
        return np.all(np.isfinite(X), axis=1)


def _as_rows(X, d: int) -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != d:
        raise ValueError(f"expected rows of length {d}, got array of shape {np.shape(X)}")
    return arr


def icl_log_terms(model: ConditionalModel, w: WeightScheme, X, theta) -> np.ndarray:
    """Per-row ICL log-densities, shape ``(n,)``.

    Zero-weight components are skipped and never evaluated.
    """
    if w.d != model.dim:
        raise ValueError(f"weight scheme has d={w.d} but model {model.name!r} has dim={model.dim}")
    X = _as_rows(X, model.dim)
    theta = model.check_params(theta)
    v = total_weight(w)
    out = np.zeros(X.shape[0])
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for subset, weight in w.sigma.items():
            if weight > 0:
                out += (weight / v) * model.log_marginal(subset, X[:, subset.columns], theta)
        for division, weight in w.tau.items():
            if weight > 0:
                out += (weight / v) * model.log_conditional(division, X, theta)
    # -inf * positive weight stays -inf; NaN only arises off-support
    out[np.isnan(out)] = -np.inf
    return out


def icl_log_density(model: ConditionalModel, w: WeightScheme, x, theta) -> float:
    """Log ICL of a single observation ``x`` (a length-``dim`` vector)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("icl_log_density takes a single observation; use cl_log_likelihood for datasets")
    return float(icl_log_terms(model, w, x, theta)[0])


def cl_log_likelihood(model: ConditionalModel, w: WeightScheme, data, theta) -> float:
    """Log composite likelihood of a dataset: the sum of row ICL log-densities."""
    terms = icl_log_terms(model, w, data, theta)
    if np.any(terms == -np.inf):
        return -np.inf
    return float(np.sum(terms))


# -- dataset I/O ---------------------------------------------------------------


def load_csv(path_or_file, d: int | None = None) -> np.ndarray:
    """Read a headerless CSV of real columns into an ``(n, d)`` array.

    Raises :class:`DataError` naming the offending line on ragged rows or
    unparseable numbers.
    """
    if hasattr(path_or_file, "read"):
        fh, close = path_or_file, False
    else:
        fh, close = open(path_or_file, newline=""), True
    rows: list[list[float]] = []
    try:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise DataError(f"line {lineno}: non-numeric value in {row!r}") from None
            if d is None:
                d = len(values)
            if len(values) != d:
                raise DataError(f"line {lineno}: expected {d} columns, got {len(values)}")
            if not all(np.isfinite(values)):
                raise DataError(f"line {lineno}: non-finite value in {row!r}")
            rows.append(values)
    finally:
        if close:
            fh.close()
    if not rows:
        raise DataError("dataset is empty")
    return np.array(rows, dtype=float)


def format_rows(X: np.ndarray, digits: int = 17) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(X, dtype=float):
        writer.writerow([f"{v:.{digits}g}" for v in row])
    return buf.getvalue()


def save_csv(path: str | os.PathLike, X: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_rows(X))


def parse_params(text: str) -> list[float]:
    """Parse a JSON parameter array given inline or as a path to a file."""
    import json

    source = text
    if not text.lstrip().startswith("[") and os.path.exists(text):
        with open(text) as fh:
            source = fh.read()
    try:
        values = json.loads(source)
    except json.JSONDecodeError as exc:
        raise DataError(f"parameters must be a JSON array: {exc}") from None
    if isinstance(values, (int, float)):
        values = [values]
    if not isinstance(values, Sequence) or not all(isinstance(v, (int, float)) for v in values):
        raise DataError(f"parameters must be a JSON array of numbers, got {values!r}")
    return [float(v) for v in values]
