"""Command-line interface.

Subcommands: sample, estimate, simulate, summarize, basis.
Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from dvpcircle.circle import AngularGrid
from dvpcircle.dvp_basis import basis_matrix
from dvpcircle.estimators import DpmConfig, fit_fdbayes, fit_pc, fit_pd
from dvpcircle.harness import (
    METHODS,
    ConfigError,
    ExperimentConfig,
    read_records,
    run_experiment,
    summarize,
    write_summary,
)
from dvpcircle.nnts import nnts_eval, select_by_ic
from dvpcircle.targets import FAMILIES, make_target, sample_target

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dvpcircle")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw angles from a target density")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--alpha", required=True, type=float)
    p.add_argument("--count", required=True, type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("estimate", help="fit one estimator to an angle file")
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--data", required=True)
    p.add_argument("--config", default=None, help="JSON with method settings")
    p.add_argument("--grid", type=int, default=2048)
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", help="run the full comparison study")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("summarize", help="aggregate a records CSV")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("basis", help="dump basis density curves")
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--grid", type=int, default=512)
    p.add_argument("--out", required=True)
    return parser


def _load_json(path) -> dict:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    return raw


def _read_angles(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0].strip() != "angle":
            raise ConfigError(f"{path} must have an 'angle' header column")
        try:
            return np.array([float(row[0]) for row in reader if row])
        except ValueError as exc:
            raise ConfigError(f"{path} holds a non-numeric angle: {exc}") from exc


def _cmd_sample(args) -> int:
    target = make_target(args.family, args.alpha)
    draws = sample_target(target, args.count, np.random.default_rng(args.seed))
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["angle"])
        for a in draws:
            writer.writerow([repr(float(a))])
    return EXIT_OK


_ESTIMATE_KEYS = {
    "pd": {"concentration", "base", "rho_rate", "rho_form", "n_min", "n_max",
           "iters", "burn_in", "thin_to", "seed"},
    "pc": {"concentration", "base", "rho_rate", "rho_form", "n_min", "n_max",
           "iters", "burn_in", "thin_to", "seed"},
    "fdbayes": {"m_max", "iters", "burn_in", "thin_to", "seed"},
    "naic": {"m_range", "restarts", "seed"},
    "nbic": {"m_range", "restarts", "seed"},
}


def _cmd_estimate(args) -> int:
    block = _load_json(args.config) if args.config else {}
    unknown = set(block) - _ESTIMATE_KEYS[args.method]
    if unknown:
        raise ConfigError(f"unknown config keys for {args.method}: {sorted(unknown)}")
    data = _read_angles(args.data)
    if data.size == 0:
        raise ConfigError(f"{args.data} holds no angles")
    grid = AngularGrid(args.grid)
    try:
        if args.method in ("pd", "pc"):
            cfg = DpmConfig(**block)
            est = (fit_pd if args.method == "pd" else fit_pc)(data, cfg, grid)
            diag = est.diagnostics
            values = est.values
        elif args.method == "fdbayes":
            est = fit_fdbayes(data, grid=grid, **block)
            diag = est.diagnostics
            values = est.values
        else:
            m_range = range(*block.get("m_range", (0, 8)))
            fit = select_by_ic(
                data,
                m_range=m_range,
                criterion="aic" if args.method == "naic" else "bic",
                rng=np.random.default_rng(block.get("seed", 0)),
                restarts=block.get("restarts", 2),
            )
            values = nnts_eval(fit.model, grid.points)
            diag = {
                "seed": block.get("seed", 0),
                "selected_degree": fit.model.degree,
                "loglik": fit.loglik,
                "boundary_suspect": fit.boundary_suspect,
                "config": {"m_range": [m_range.start, m_range.stop],
                           "restarts": block.get("restarts", 2)},
            }
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if not np.all(np.isfinite(values)):
        print("estimate produced non-finite densities", file=sys.stderr)
        return EXIT_NUMERIC
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["angle", "density"])
        for a, d in zip(grid.points, values):
            writer.writerow([repr(float(a)), repr(float(d))])
    sidecar = str(args.out) + ".diag.json" if not str(args.out).endswith(".csv") else str(
        args.out
    )[: -len(".csv")] + ".diag.json"
    with open(sidecar, "w") as fh:
        json.dump({"method": args.method, **diag}, fh, indent=2)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = ExperimentConfig.from_dict(_load_json(args.config))
    run_experiment(cfg, args.out)
    return EXIT_OK


def _cmd_summarize(args) -> int:
    records = read_records(args.infile)
    write_summary(args.out, summarize(records))
    return EXIT_OK


def _cmd_basis(args) -> int:
    if args.n < 0:
        raise ConfigError("--n must be nonnegative")
    grid = AngularGrid(args.grid)
    mat = basis_matrix(args.n, grid.points)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["angle"] + [f"j{j}" for j in range(2 * args.n + 1)])
        for k in range(grid.size):
            writer.writerow([repr(float(grid.points[k]))] + [repr(float(x)) for x in mat[:, k]])
    return EXIT_OK


_COMMANDS = {
    "sample": _cmd_sample,
    "estimate": _cmd_estimate,
    "simulate": _cmd_simulate,
    "summarize": _cmd_summarize,
    "basis": _cmd_basis,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
