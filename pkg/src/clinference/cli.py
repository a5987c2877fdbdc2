"""Command-line interface.

Exit status: 0 on success, 2 on usage errors, 3 on data or model errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np

from .core import format_rows, load_csv, parse_params, save_csv
from .errors import CLError
from .estimation import fit
from .indexing import full_conditional_scheme
from .inference import METHODS, confidence_set_1d, fit_halves, ratio_test, split
from .models import MODELS, get_model
from .simulation import load_config, run_coverage, run_power

log = logging.getLogger("clinference")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


def _sig(v):
    """Round to 6 significant digits for reporting; keeps infinities as strings."""
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, (list, tuple)):
        return [_sig(x) for x in v]
    if isinstance(v, dict):
        return {k: _sig(x) for k, x in v.items()}
    if isinstance(v, (float, np.floating)):
        if not math.isfinite(v):
            return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
        return float(f"{v:.6g}")
    return v


def _emit(obj) -> None:
    print(json.dumps(_sig(obj)))


def _probability(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clinference", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    models = sorted(MODELS)

    p = sub.add_parser("sample", help="draw exact samples from a model")
    p.add_argument("--model", required=True, choices=models)
    p.add_argument("--params", required=True, help="JSON array inline or a path to one")
    p.add_argument("--n", required=True, type=_positive_int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output CSV (default: stdout)")

    p = sub.add_parser("fit", help="maximum composite likelihood estimate")
    p.add_argument("--model", required=True, choices=models)
    p.add_argument("--data", required=True)
    p.add_argument("--null-c0", action="store_true", help="fit under c = 0 (lognorm-cond only)")

    p = sub.add_parser("confint", help="split or swap confidence set for a scalar parameter")
    p.add_argument("--model", required=True, choices=["exp-cond"])
    p.add_argument("--data", required=True)
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.add_argument("--method", choices=METHODS, default="split")
    p.add_argument("--seed", type=int, help="shuffle rows with this seed before splitting")

    p = sub.add_parser("test", help="split or swap test of c = 0")
    p.add_argument("--model", required=True, choices=["lognorm-cond"])
    p.add_argument("--data", required=True)
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.add_argument("--method", choices=METHODS, default="split")
    p.add_argument("--seed", type=int, help="shuffle rows with this seed before splitting")

    for name, help_ in (("sim-coverage", "coverage/size sweep"), ("sim-power", "rejection-rate sweep")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True)
        p.add_argument("--out", help="output CSV (default: stdout)")
        p.add_argument("--threads", type=_positive_int, help="worker processes (default: all cores)")
    return parser


def _split_for(args, data):
    return split(data, "random", args.seed) if args.seed is not None else split(data, "first-half")


def _cmd_sample(args) -> int:
    model = get_model(args.model)
    theta = model.check_params(parse_params(args.params))
    X = model.sample(theta, args.n, np.random.default_rng(args.seed))
    if args.out:
        save_csv(args.out, X)
    else:
        sys.stdout.write(format_rows(X))
    return EXIT_OK


def _cmd_fit(args) -> int:
    model = get_model(args.model)
    if args.null_c0 and model.name != "lognorm-cond":
        raise _UsageError("--null-c0 only applies to lognorm-cond")
    data = load_csv(args.data, model.dim)
    est = fit(model, full_conditional_scheme(model.dim), data, null=args.null_c0)
    out = est.to_dict()
    out["params"] = dict(zip(model.param_names, out["theta_hat"]))
    _emit(out)
    return EXIT_OK


def _cmd_confint(args) -> int:
    model = get_model(args.model)
    w = full_conditional_scheme(model.dim)
    ss = _split_for(args, load_csv(args.data, model.dim))
    estimates = fit_halves(model, w, ss)
    cs = confidence_set_1d(model, w, ss, args.alpha, estimates, args.method)
    out = cs.to_dict()
    out["estimates"] = [float(e.theta_hat[0]) for e in estimates]
    _emit(out)
    return EXIT_OK


def _cmd_test(args) -> int:
    model = get_model(args.model)
    w = full_conditional_scheme(model.dim)
    ss = _split_for(args, load_csv(args.data, model.dim))
    nulls = fit_halves(model, w, ss, null=True)
    frees = fit_halves(model, w, ss)
    res = ratio_test(model, w, ss, args.alpha, nulls, frees, args.method)
    _emit(res.to_dict())
    return EXIT_OK


def _cmd_sim(args, kind: str) -> int:
    cfg = load_config(args.config, kind)
    report = run_coverage(cfg, args.threads) if kind == "coverage" else run_power(cfg, args.threads)
    for cell in report.cells:
        log.info("%s param=%g n1=%d %s=%.4g (%.1fs/cell)", cell.method, cell.param, cell.n1, cell.metric, cell.value, cell.wall_time)
    text = report.to_csv()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


class _UsageError(Exception):
    pass


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    handlers = {
        "sample": _cmd_sample,
        "fit": _cmd_fit,
        "confint": _cmd_confint,
        "test": _cmd_test,
        "sim-coverage": lambda a: _cmd_sim(a, "coverage"),
        "sim-power": lambda a: _cmd_sim(a, "power"),
    }
    try:
        return handlers[args.command](args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"clinference: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CLError, ValueError, OSError) as exc:
        print(f"clinference: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
