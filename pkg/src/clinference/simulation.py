"""Monte Carlo harness for coverage/size and power experiments.

Each replicate draws its own generator from a seed derived from
``(base_seed, model, cell parameters, n1, replicate index)``, so a
replicate's data do not depend on which other replicates or cells run, and
results are reduced in replicate order whatever the worker scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import struct
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError
from .estimation import OptimizerSettings, fit, mcle_lognorm
from .indexing import WeightScheme, full_conditional_scheme
from .inference import METHODS, SearchSettings, confidence_set_1d, fit_halves, member, ratio_test, split
from .models import get_model

CSV_HEADER = ("method", "param", "n1", "metric", "value", "reps", "excluded")


def _float_key(v: float) -> int:
    return int.from_bytes(struct.pack("<d", float(v)), "little")


def derive_seed(base_seed: int, model: str, params: Sequence[float], n1: int, rep: int) -> np.random.SeedSequence:
    """Stable per-replicate seed; independent of grid order and replicate count."""
    key = (zlib.crc32(model.encode()), *(_float_key(p) for p in params), int(n1), int(rep))
    return np.random.SeedSequence(int(base_seed), spawn_key=key)


def _fmt(v: float) -> str:
    return f"{v:.6g}"


@dataclass
class CellResult:
    method: str
    param: float
    n1: int
    metric: str  # "CP" or "rejection"
    value: float
    average_size: float | None
    reps: int
    excluded: int
    wall_time: float = 0.0


@dataclass
class ExperimentReport:
    kind: str
    cells: list[CellResult] = field(default_factory=list)

    def rows(self):
        for c in self.cells:
            yield (c.method, c.param, c.n1, c.metric, c.value, c.reps, c.excluded)
            if c.average_size is not None:
                yield (c.method, c.param, c.n1, "AS", c.average_size, c.reps, c.excluded)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for method, param, n1, metric, value, reps, excluded in self.rows():
            writer.writerow([method, _fmt(param), n1, metric, _fmt(value), reps, excluded])
        return buf.getvalue()

    def lookup(self, method: str, param: float, n1: int) -> CellResult:
        for c in self.cells:
            if c.method == method and c.param == param and c.n1 == n1:
                return c
        raise KeyError((method, param, n1))


def _check_common(alpha, reps, methods, n1_grid):
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    bad = set(methods) - set(METHODS)
    if bad or not methods:
        raise ValueError(f"methods must be a nonempty subset of {METHODS}, got {methods}")
    if not n1_grid or any(int(n) < 1 for n in n1_grid):
        raise ValueError("n1_grid must hold positive integers")


@dataclass(frozen=True)
class CoverageConfig:
    model: str = "exp-cond"
    theta0_grid: tuple = ((1.0,), (5.0,), (10.0,))
    n1_grid: tuple = (100, 1000, 10000)
    alpha: float = 0.05
    reps: int = 100
    base_seed: int = 20201215
    methods: tuple = METHODS
    weights: WeightScheme | None = None
    optimizer: OptimizerSettings = OptimizerSettings()
    search: SearchSettings = SearchSettings()

    def __post_init__(self):
        grid = tuple(tuple(float(v) for v in np.atleast_1d(t)) for t in self.theta0_grid)
        object.__setattr__(self, "theta0_grid", grid)
        object.__setattr__(self, "n1_grid", tuple(int(n) for n in self.n1_grid))
        object.__setattr__(self, "methods", tuple(self.methods))
        _check_common(self.alpha, self.reps, self.methods, self.n1_grid)

    @classmethod
    def from_dict(cls, obj: dict) -> "CoverageConfig":
        return cls(**_decode_common(obj, {"model", "theta0_grid", "n1_grid", "alpha", "reps", "base_seed", "methods"}))


@dataclass(frozen=True)
class PowerConfig:
    model: str = "lognorm-cond"
    base_theta: tuple = (2.0, 1.0, 2.0, 1.0, 0.0)
    null_index: int = 4
    null_value: float = 0.0
    c0_grid: tuple = (0.0, 1.0, 5.0)
    n1_grid: tuple = (100, 1000, 10000)
    alpha: float = 0.05
    reps: int = 100
    base_seed: int = 20201215
    methods: tuple = METHODS
    weights: WeightScheme | None = None
    optimizer: OptimizerSettings = OptimizerSettings()

    def __post_init__(self):
        object.__setattr__(self, "base_theta", tuple(float(v) for v in self.base_theta))
        object.__setattr__(self, "c0_grid", tuple(float(c) for c in self.c0_grid))
        object.__setattr__(self, "n1_grid", tuple(int(n) for n in self.n1_grid))
        object.__setattr__(self, "methods", tuple(self.methods))
        _check_common(self.alpha, self.reps, self.methods, self.n1_grid)
        if not 0 <= self.null_index < len(self.base_theta):
            raise ValueError("null_index out of range for base_theta")

    def theta_for(self, c0: float) -> np.ndarray:
        theta = np.array(self.base_theta)
        theta[self.null_index] = c0
        return theta

    @classmethod
    def from_dict(cls, obj: dict) -> "PowerConfig":
        obj = dict(obj)
        if "null" in obj:
            null = obj.pop("null")
            obj["null_index"] = null.get("index", 4)
            obj["null_value"] = null.get("value", 0.0)
        keys = {"model", "base_theta", "null_index", "null_value", "c0_grid", "n1_grid", "alpha", "reps", "base_seed", "methods"}
        return cls(**_decode_common(obj, keys))


def _decode_common(obj: dict, keys: set) -> dict:
    unknown = set(obj) - keys - {"weights", "optimizer", "search"}
    if unknown:
        raise DataError(f"unknown config keys: {sorted(unknown)}")
    out = {k: obj[k] for k in keys if k in obj}
    if "weights" in obj:
        out["weights"] = WeightScheme.from_json(json.dumps(obj["weights"]))
    if "optimizer" in obj:
        out["optimizer"] = OptimizerSettings(**obj["optimizer"])
    if "search" in obj:
        out["search"] = SearchSettings(**obj["search"])
    return out


def load_config(path: str | os.PathLike, kind: str):
    """Read a coverage or power config from JSON."""
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise DataError(f"{path}: config must be a JSON object")
    try:
        return CoverageConfig.from_dict(obj) if kind == "coverage" else PowerConfig.from_dict(obj)
    except TypeError as exc:
        raise DataError(f"{path}: {exc}") from None


# -- replicate workers (top level so they pickle) --------------------------------


def coverage_replicate(cfg: CoverageConfig, theta0: tuple, n1: int, rep: int) -> dict:
    """One replicate: sample, split in half, fit each half, build both sets."""
    model = get_model(cfg.model)
    w = cfg.weights or full_conditional_scheme(model.dim)
    rng = np.random.default_rng(derive_seed(cfg.base_seed, cfg.model, theta0, n1, rep))
    data = model.sample(np.array(theta0), 2 * n1, rng)
    ss = split(data, "first-half")
    estimates = fit_halves(model, w, ss, cfg.optimizer)
    out = {}
    for method in cfg.methods:
        cs = confidence_set_1d(model, w, ss, cfg.alpha, estimates, method, cfg.search)
        covered = member(model, w, ss, cfg.alpha, estimates, method, np.array(theta0))
        out[method] = (covered, cs.diameter, cs.unbounded)
    return out


def power_replicate(cfg: PowerConfig, c0: float, n1: int, rep: int) -> dict:
    """One replicate: sample, split, null and free fits per half, both tests.

    A free fit that fails to converge is retried once from fresh starts; if it
    still fails the replicate counts as a non-rejection.
    """
    model = get_model(cfg.model)
    w = cfg.weights or full_conditional_scheme(model.dim)
    theta0 = cfg.theta_for(c0)
    rng = np.random.default_rng(derive_seed(cfg.base_seed, cfg.model, theta0, n1, rep))
    data = model.sample(theta0, 2 * n1, rng)
    ss = split(data, "first-half")
    nulls = fit_halves(model, w, ss, cfg.optimizer, null=True)
    frees = []
    failed = False
    for k in (1, 2):
        est = fit(model, w, ss.part(k), cfg.optimizer, provenance=k)
        if not est.converged and model.name == "lognorm-cond":
            est = mcle_lognorm(
                model, w, ss.part(k), cfg.optimizer, provenance=k, first_restart=cfg.optimizer.restarts
            )
        failed = failed or not est.converged
        frees.append(est)
    out = {}
    for method in cfg.methods:
        if failed:
            out[method] = (False, math.nan, True)
        else:
            res = ratio_test(model, w, ss, cfg.alpha, nulls, frees, method)
            out[method] = (res.reject, res.statistic_log, False)
    return out


def _run_cells(worker, cfg, cells, threads):
    """Evaluate ``worker(cfg, *cell, rep)`` for every cell and replicate, preserving order."""
    tasks = [(cell, rep) for cell in cells for rep in range(cfg.reps)]
    threads = threads or os.cpu_count() or 1
    if threads <= 1:
        results = [worker(cfg, *cell, rep) for cell, rep in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(worker, cfg, *cell, rep) for cell, rep in tasks]
            results = [f.result() for f in futures]
    grouped = {}
    for (cell, _), res in zip(tasks, results):
        grouped.setdefault(cell, []).append(res)
    return grouped


def run_coverage(cfg: CoverageConfig, threads: int | None = None) -> ExperimentReport:
    """Coverage proportion and average diameter of split and swap confidence sets."""
    model = get_model(cfg.model)
    if model.param_dim != 1:
        raise ValueError(f"coverage sweeps need a scalar-parameter model, got {cfg.model}")
    cells = [(theta0, n1) for theta0 in cfg.theta0_grid for n1 in cfg.n1_grid]
    report = ExperimentReport("coverage")
    start = time.perf_counter()
    grouped = _run_cells(coverage_replicate, cfg, cells, threads)
    elapsed = (time.perf_counter() - start) / max(len(cells), 1)
    for method in cfg.methods:
        for theta0, n1 in cells:
            reps = [r[method] for r in grouped[(theta0, n1)]]
            cp = sum(covered for covered, _, _ in reps) / len(reps)
            sizes = [d for _, d, unbounded in reps if not unbounded]
            excluded = len(reps) - len(sizes)
            avg = float(np.mean(sizes)) if sizes else math.inf
            report.cells.append(CellResult(method, theta0[0], n1, "CP", cp, avg, len(reps), excluded, elapsed))
    return report


def run_power(cfg: PowerConfig, threads: int | None = None) -> ExperimentReport:
    """Rejection proportions of the split and swap tests of the point null."""
    cells = [(c0, n1) for c0 in cfg.c0_grid for n1 in cfg.n1_grid]
    report = ExperimentReport("power")
    start = time.perf_counter()
    grouped = _run_cells(power_replicate, cfg, cells, threads)
    elapsed = (time.perf_counter() - start) / max(len(cells), 1)
    for method in cfg.methods:
        for c0, n1 in cells:
            reps = [r[method] for r in grouped[(c0, n1)]]
            rejections = sum(reject for reject, _, _ in reps)
            failures = sum(failed for _, _, failed in reps)
            report.cells.append(
                CellResult(method, c0, n1, "rejection", rejections / len(reps), None, len(reps), failures, elapsed)
            )
    return report


def config_to_dict(cfg) -> dict:
    """JSON-ready view of a config (weights and settings included)."""
    out = asdict(cfg)
    out["weights"] = None if cfg.weights is None else json.loads(cfg.weights.to_json())
    return out
