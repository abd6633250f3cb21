"""Command-line front end.

Every subcommand reads an optional YAML config (see :mod:`nehari.config`),
applies flag overrides, writes ``report.json`` (plus CSV profiles where
relevant) into ``--out`` and prints the report to stdout. Exit codes: 0 on
success, 1 for invalid input or missing geometry, 2 for infeasible
constraint sets, 3 for non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from . import __version__
from .config import RunConfig, parse_config
from .exceptions import InvalidInputError, NehariError
from .fibering import FiberingProfile, classify
from .grid import Grid1D
from .rayleigh import QuotientSpec, extremal_parameter
from .solver import minimize_relative_ground_state, second_solution_search
from .spectrum import (
    alpha_star,
    beta_star,
    eigen_p,
    kirchhoff_corner_values,
    kirchhoff_lambda_star,
    kirchhoff_mu1,
    kirchhoff_mu_star,
    pq_corner_values,
)

__all__ = ["main", "run", "build_parser", "sanitize"]

COMMANDS = ("solve", "eigen", "threshold", "extremal", "fibering", "sweep")
THRESHOLDS = (
    "beta_star",
    "alpha_star",
    "kirchhoff_mu_star",
    "kirchhoff_lambda_star",
    "pq_corners",
    "kirchhoff_corners",
)


# -- serialization ------------------------------------------------------------------


def sanitize(obj):
    """JSON-safe copy: numpy scalars and arrays unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [sanitize(v) for v in items]
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return sanitize(obj.to_dict())
    return repr(obj)


def _write_json(path: Path, payload: dict):
    text = json.dumps(sanitize(payload), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n")
    return text


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


# -- subcommands ----------------------------------------------------------------------


def _solve(cfg: RunConfig, out: Path):
    opts = cfg.section("solve")
    model = cfg.model()
    cone = opts.get("cone", "Y1")
    n_starts = int(opts.get("n_starts", 6))
    report = minimize_relative_ground_state(
        model, cone, seed=cfg.seed, n_starts=n_starts, tol=cfg.tol
    )
    result = {"ground": report.to_dict()}
    _solution_csv(out / "solution.csv", model, report.solution)
    if opts.get("second", False):
        second = second_solution_search(
            model, seed=cfg.seed, reference=report, n_starts=n_starts, tol=cfg.tol
        )
        result["second"] = second.to_dict()
        _solution_csv(out / "solution_second.csv", model, second.solution)
    return result


def _solution_csv(path, model, solution):
    x = model.grid.x
    if model.is_pair:
        _write_csv(path, ["x", "u", "v"], zip(x, solution.u.values, solution.v.values))
    else:
        _write_csv(path, ["x", "u"], zip(x, solution.values))


def _eigen(cfg: RunConfig, out: Path):
    opts = cfg.section("eigen")
    grid = Grid1D(cfg.grid_n)
    kind = opts.get("kind", "p")
    if kind == "kirchhoff":
        res = kirchhoff_mu1(grid)
    elif kind == "p":
        res = eigen_p(float(opts.get("p", 2.0)), grid)
    else:
        raise InvalidInputError(f"eigen kind must be 'p' or 'kirchhoff', got {kind!r}")
    _write_csv(out / "eigenfunction.csv", ["x", "u"], zip(grid.x, res.minimizer.values))
    return {"kind": kind, **res.to_dict(), "seed": cfg.seed}


def _need(opts, key, section="threshold"):
    if key not in opts:
        raise InvalidInputError(f"'{section}' needs option '{key}'")
    return float(opts[key])


def _threshold(cfg: RunConfig, out: Path):
    opts = cfg.section("threshold")
    grid = Grid1D(cfg.grid_n)
    kind = opts.get("kind")
    if kind not in THRESHOLDS:
        raise InvalidInputError(f"threshold kind must be one of {THRESHOLDS}, got {kind!r}")
    n_starts = int(opts.get("n_starts", 20))
    if kind == "pq_corners":
        return {"kind": kind, **pq_corner_values(_need(opts, "p"), _need(opts, "q"), grid)}
    if kind == "kirchhoff_corners":
        return {
            "kind": kind,
            **kirchhoff_corner_values(_need(opts, "a"), _need(opts, "b"), grid),
        }
    value = _need(opts, "value")
    kw = dict(grid=grid, seed=cfg.seed, n_starts=n_starts)
    if kind == "beta_star":
        res = beta_star(value, _need(opts, "p"), _need(opts, "q"), **kw)
    elif kind == "alpha_star":
        res = alpha_star(value, _need(opts, "p"), _need(opts, "q"), **kw)
    elif kind == "kirchhoff_mu_star":
        res = kirchhoff_mu_star(value, _need(opts, "a"), _need(opts, "b"), **kw)
    else:
        res = kirchhoff_lambda_star(value, _need(opts, "a"), _need(opts, "b"), **kw)
    return {"kind": kind, "argument": value, **res.to_dict(), "seed": cfg.seed}


def _extremal(cfg: RunConfig, out: Path):
    opts = cfg.section("extremal")
    spec = QuotientSpec(cfg.model())
    res = extremal_parameter(spec, seed=cfg.seed, n_starts=int(opts.get("n_starts", 20)))
    return {"quotient": spec.family, **res.to_dict()}


def _parse_terms(text):
    terms = []
    for chunk in str(text).split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            c, d = chunk.split(":")
            terms.append((float(c), float(d)))
        except ValueError:
            raise InvalidInputError(
                f"fibering term {chunk!r} is not of the form coefficient:degree"
            ) from None
    return terms


def _fibering(cfg: RunConfig, out: Path):
    opts = cfg.section("fibering")
    terms = opts.get("terms")
    if terms is None:
        raise InvalidInputError("'fibering' needs 'terms' (list of [c, d] or 'c:d,...')")
    if isinstance(terms, str):
        terms = _parse_terms(terms)
    try:
        profile = FiberingProfile([tuple(t) for t in terms])
    except (TypeError, ValueError) as exc:
        if isinstance(exc, NehariError):
            raise
        raise InvalidInputError(f"malformed fibering terms {terms!r}") from None
    geo = classify(profile)
    return {"terms": profile.to_list(), **geo.to_dict()}


# -- sweep ------------------------------------------------------------------------------


def parse_sweep(text: str) -> dict:
    """``key=lo:hi:steps`` -> ``{"key", "lo", "hi", "steps"}``."""
    try:
        key, rng = text.split("=", 1)
        lo, hi, steps = rng.split(":")
        out = {"key": key.strip(), "lo": float(lo), "hi": float(hi), "steps": int(steps)}
    except ValueError:
        raise InvalidInputError(f"--sweep expects key=lo:hi:steps, got {text!r}") from None
    return out


def _sweep_point(cfg: RunConfig, key, value, task, cone, n_starts):
    row = {key: value, "status": "ok", "exit_code": 0}
    try:
        model = cfg.model(**{key: value})
        if task == "solve":
            rep = minimize_relative_ground_state(
                model, cone, seed=cfg.seed, n_starts=n_starts, tol=cfg.tol
            )
            row.update(
                level=rep.level,
                residual=rep.residual,
                classification=rep.classification,
                geometry=rep.fibering.label,
            )
        else:
            res = extremal_parameter(QuotientSpec(model), seed=cfg.seed, n_starts=n_starts)
            row.update(value=res.value, oracle_gap=res.oracle_gap)
    except NehariError as exc:
        row.update(status=type(exc).__name__, exit_code=exc.exit_code, message=str(exc))
    return row


def _sweep(cfg: RunConfig, out: Path, jobs: int = 1):
    opts = cfg.section("sweep")
    for k in ("key", "lo", "hi", "steps"):
        if k not in opts:
            raise InvalidInputError(f"sweep needs '{k}' (use --sweep key=lo:hi:steps)")
    key = str(opts["key"])
    steps = int(opts["steps"])
    if steps < 1:
        raise InvalidInputError("sweep steps must be >= 1")
    task = opts.get("task", "solve")
    if task not in ("solve", "extremal"):
        raise InvalidInputError(f"sweep task must be 'solve' or 'extremal', got {task!r}")
    cone = opts.get("cone", "Y1")
    n_starts = int(opts.get("n_starts", 6 if task == "solve" else 20))
    cfg.model(**{key: float(opts["lo"])})  # rejects unknown keys before the loop
    values = np.linspace(float(opts["lo"]), float(opts["hi"]), steps)
    rows = Parallel(n_jobs=jobs)(
        delayed(_sweep_point)(cfg, key, float(v), task, cone, n_starts) for v in values
    )
    if task == "solve":
        header = [key, "level", "residual", "classification", "geometry", "status"]
    else:
        header = [key, "value", "oracle_gap", "status"]
    _write_csv(out / "sweep.csv", header, ([r.get(h, "") for h in header] for r in rows))
    failed = [r for r in rows if r["exit_code"]]
    return {"key": key, "task": task, "rows": rows, "failed": len(failed)}


# -- driver ---------------------------------------------------------------------------------


def run(cfg: RunConfig, command: str, out, jobs: int = 1) -> dict:
    """Execute ``command`` and write its artifacts; returns the report payload."""
    if command not in COMMANDS:
        raise InvalidInputError(f"unknown command {command!r}; use one of {COMMANDS}")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    handlers = {
        "solve": _solve,
        "eigen": _eigen,
        "threshold": _threshold,
        "extremal": _extremal,
        "fibering": _fibering,
    }
    if command == "sweep":
        result = _sweep(cfg, out, jobs)
    else:
        result = handlers[command](cfg, out)
    return {"command": command, "status": "ok", "result": result}


def _report(cfg_dict, payload):
    return {
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config": cfg_dict,
        **payload,
    }


def _common(p):
    p.add_argument("--config", metavar="PATH", help="YAML run configuration")
    p.add_argument("--grid-n", type=int, metavar="N", help="interior grid nodes")
    p.add_argument("--seed", type=int, metavar="S", help="multi-start seed")
    p.add_argument("--tol", type=float, metavar="T", help="residual tolerance")
    p.add_argument("--out", metavar="DIR", default=".", help="output directory")
    p.add_argument("--family", help="model family (overrides the config)")
    p.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="family parameter; repeatable",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nehari", description="Nehari-manifold solvers on a 1D Dirichlet grid."
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="relative ground state (and optional second solution)")
    _common(p)
    p.add_argument("--cone", choices=["Y1", "Y2", "whole"])
    p.add_argument("--second", action="store_true", default=None)
    p.add_argument("--n-starts", type=int)

    p = sub.add_parser("eigen", help="first eigenvalue lambda_1(p) or mu_1")
    _common(p)
    p.add_argument("--kind", choices=["p", "kirchhoff"])
    p.add_argument("--p", type=float)

    p = sub.add_parser("threshold", help="cone-restricted thresholds and corner values")
    _common(p)
    p.add_argument("--kind", choices=THRESHOLDS)
    p.add_argument("--value", type=float)
    for name in ("p", "q", "a", "b"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--n-starts", type=int)

    p = sub.add_parser("extremal", help="extremal parameter of the nonlinear Rayleigh quotient")
    _common(p)
    p.add_argument("--n-starts", type=int)

    p = sub.add_parser("fibering", help="critical points and class of an explicit profile")
    _common(p)
    p.add_argument("--terms", help="comma separated coefficient:degree pairs")

    p = sub.add_parser("sweep", help="iterate a family parameter over a range")
    _common(p)
    p.add_argument("--sweep", metavar="KEY=LO:HI:STEPS")
    p.add_argument("--task", choices=["solve", "extremal"])
    p.add_argument("--cone", choices=["Y1", "Y2", "whole"])
    p.add_argument("--n-starts", type=int)
    p.add_argument("--jobs", type=int, default=1, help="parallel workers")
    return parser


def _inline_value(text):
    try:
        return float(text)
    except ValueError:
        return text


def _section_overrides(args) -> dict:
    skip = {"command", "config", "grid_n", "seed", "tol", "out", "family", "param", "jobs"}
    opts = {k: v for k, v in vars(args).items() if k not in skip and v is not None}
    if "sweep" in opts:
        opts.update(parse_sweep(opts.pop("sweep")))
    return opts


def _config_from_args(args) -> RunConfig:
    params = {}
    for item in args.param:
        if "=" not in item:
            raise InvalidInputError(f"--param expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        params[k.strip()] = _inline_value(v.strip())
    overrides = {
        "grid_n": args.grid_n,
        "seed": args.seed,
        "tol": args.tol,
        "family": args.family,
    }
    cfg = parse_config(args.config, overrides, params)
    section = _section_overrides(args)
    if section:
        cfg.options[args.command] = {**cfg.section(args.command), **section}
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    cfg_dict = None
    try:
        cfg = _config_from_args(args)
        cfg_dict = cfg.to_dict()
        payload = run(cfg, args.command, out, getattr(args, "jobs", 1))
        code = 0
    except NehariError as exc:
        payload = {
            "command": args.command,
            "status": "error",
            "error": {"type": type(exc).__name__, "message": str(exc)},
        }
        code = exc.exit_code
        print(f"nehari {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
    out.mkdir(parents=True, exist_ok=True)
    text = _write_json(out / "report.json", _report(cfg_dict, payload))
    if code == 0:
        print(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
