"""Command-line interface: ``shellrecon {forward,ndmap,invert,nonuniq,verify}``.

Exit codes: 0 ok, 1 verification failure, 2 usage or malformed input,
3 numeric degeneracy or uncertified truncation, 4 inconsistent measurement,
5 no nonuniqueness root.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings

import numpy as np

from . import io
from .errors import (
    BracketError,
    DomainError,
    IllPosedModeError,
    InconsistentMeasurementError,
    NoRootError,
    NumericDegeneracyError,
    TruncationError,
    TruncationWarning,
)
from .forward import BoundaryData, EvaluationGrid, dirichlet_trace, evaluate_wave, solve_coefficients
from .inverse import (
    Measurement,
    NonuniqOptions,
    RecoveryOptions,
    find_nonuniq_pairs,
    perturb_measurement,
    potential_report,
    recover_sigma,
)
from .nd_map import DEFAULT_NMAX, ShellConfig, norm_sweep, symbol_table

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC, EXIT_INCONSISTENT, EXIT_NOROOT = 0, 1, 2, 3, 4, 5


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc
    if not vals or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected finite numbers, got {text!r}")
    return vals


def _sweep_spec(text: str):
    axis, sep, pts = text.partition(":")
    if not sep or axis not in ("sigma1", "r1"):
        raise argparse.ArgumentTypeError("sweep must look like sigma1:2,1.5,1.25 or r1:0.4,0.2")
    return axis, _float_list(pts)


def _range(text: str):
    vals = _float_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("range must be lo,hi")
    return tuple(vals)


def _mode(text: str):
    parts = [int(p) for p in text.split(",")]
    return parts[0] if len(parts) == 1 else tuple(parts)


def _config(args, sigma1=None, r1=None) -> ShellConfig:
    r1 = args.r1 if r1 is None else r1
    sigma1 = args.sigma1 if sigma1 is None else sigma1
    if r1 is None or sigma1 is None:
        raise UsageError("--r1 and --sigma1 are required")
    return ShellConfig(args.dim, r1, sigma1)


# --- subcommands -------------------------------------------------------------------

def cmd_forward(args) -> int:
    cfg = _config(args)
    g = BoundaryData.from_dict(io.read_json(args.g))
    if g.dimension != cfg.dimension:
        raise UsageError(f"boundary data is {g.dimension}-D but --dim is {cfg.dimension}")
    trace = dirichlet_trace(cfg, g)
    io.write_json(args.out, trace.to_dict())
    if args.measurement:
        io.write_json(args.measurement, Measurement(g, trace).to_dict())
    if args.wave_csv:
        spec = args.wave_grid or ("4,8" if cfg.dimension == 2 else "4,8,4")
        try:
            dims = [int(v) for v in spec.split(",")]
        except ValueError:
            raise UsageError(f"bad --wave-grid {spec!r}") from None
        if len(dims) != cfg.dimension or min(dims) < 1:
            raise UsageError(f"--wave-grid needs {cfg.dimension} positive counts")
        radii = np.arange(1, dims[0] + 1) / dims[0]
        phis = 2.0 * np.pi * np.arange(dims[1]) / dims[1]
        if cfg.dimension == 2:
            pts = [(r, p) for r in radii for p in phis]
        else:
            thetas = np.pi * (np.arange(dims[2]) + 0.5) / dims[2]
            pts = [(r, p, t) for r in radii for t in thetas for p in phis]
        grid = EvaluationGrid(cfg.dimension, pts)
        vals = evaluate_wave(cfg, solve_coefficients(cfg, g), grid)
        io.write_text(args.wave_csv, io.wave_csv(cfg.dimension, grid.points, vals))
    return EXIT_OK


def cmd_ndmap(args) -> int:
    if args.nmax < 0:
        raise UsageError("--nmax must be non-negative")
    if args.sweep is None:
        io.write_text(args.out, io.symbol_table_csv(symbol_table(_config(args), args.nmax)))
        return EXIT_OK
    axis, points = args.sweep
    if axis == "sigma1":
        if args.r1 is None:
            raise UsageError("a sigma1 sweep needs --r1")
        template = ShellConfig(args.dim, args.r1, points[0])
    else:
        if args.sigma1 is None:
            raise UsageError("an r1 sweep needs --sigma1")
        template = ShellConfig(args.dim, points[0], args.sigma1)
    sweep = norm_sweep(template, axis, points, n_max=args.nmax)
    io.write_text(args.out, io.sweep_csv(sweep))
    if args.table_out:
        io.write_text(args.table_out, io.symbol_table_csv(symbol_table(_config(args), args.nmax)))
    if not sweep.certified:
        bad = [r.parameter for r in sweep.rows if not r.certified]
        raise TruncationError(f"tail not certified at {axis} = {', '.join(io.fmt(b) for b in bad)}")
    return EXIT_OK


def _load_measurement(args) -> Measurement:
    if args.measurement:
        return Measurement.from_dict(io.read_json(args.measurement))
    if not (args.g and args.trace):
        raise UsageError("give --measurement, or both --g and --trace")
    if args.g == "-" and args.trace == "-":
        raise UsageError("only one of --g/--trace may read stdin")
    return Measurement(BoundaryData.from_dict(io.read_json(args.g)), BoundaryData.from_dict(io.read_json(args.trace)))


def cmd_invert(args) -> int:
    meas = _load_measurement(args)
    if meas.dimension != args.dim:
        raise UsageError(f"measurement is {meas.dimension}-D but --dim is {args.dim}")
    if args.noise:
        meas = perturb_measurement(meas, args.noise, args.seed)
    opts = RecoveryOptions(mode=args.mode, cross_validate=not args.no_xval)
    try:
        result = recover_sigma(meas, args.r1, opts)
    except InconsistentMeasurementError as exc:
        report = {
            "error": "inconsistent measurement",
            "message": str(exc),
            "per_mode": [{"mode": {"n": e.mode} if not isinstance(e.mode, tuple) else {"n": e.mode[0], "m": e.mode[1]},
                          "sigma1": e.sigma1, "condition": e.condition} for e in exc.estimates],
        }
        io.write_json(args.out, report)
        raise
    doc = result.to_dict()
    if args.noise:
        doc["noise"] = {"relative": args.noise, "seed": args.seed}
    if args.e_tilde is not None:
        rep = potential_report(result.sigma1, args.e_tilde)
        doc["potential"] = {"e_tilde": rep.e_tilde, "u_tilde_core": rep.u_tilde_core, "u_tilde_shell": rep.u_tilde_shell}
    io.write_json(args.out, doc)
    return EXIT_OK


def cmd_nonuniq(args) -> int:
    cfg = _config(args)
    opts = NonuniqOptions(sigma_range=args.sigma2_range, n_scan=args.scan)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        pairs = find_nonuniq_pairs(cfg, args.r2, args.n, opts)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    docs = [p.to_dict() for p in pairs]
    io.write_json(args.out, docs[0] if len(docs) == 1 else docs)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import SUITES, format_table, run_suites

    names = None
    if args.suite:
        names = [s for spec in args.suite for s in spec.split(",") if s]
        unknown = [n for n in names if n not in SUITES]
        if unknown:
            raise UsageError(f"unknown suite(s) {', '.join(unknown)}; choose from {', '.join(SUITES)}")
    results = run_suites(names, quick=not args.full)
    io.write_text(args.out, format_table(results) + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


# --- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shellrecon", description="Core-shell ND maps, recovery and nonuniqueness.")
    sub = parser.add_subparsers(dest="command", required=True)

    def config_args(p, required=True):
        p.add_argument("--dim", type=int, choices=(2, 3), default=2)
        p.add_argument("--r1", type=float, required=required)
        p.add_argument("--sigma1", type=float, required=required)

    p = sub.add_parser("forward", help="Dirichlet trace (and optional wave samples) for Neumann data")
    config_args(p)
    p.add_argument("--g", required=True, help="boundary-data JSON, '-' for stdin")
    p.add_argument("--out", default="-")
    p.add_argument("--measurement", help="also write a measurement JSON (Neumann + Dirichlet)")
    p.add_argument("--wave-csv", help="write wave samples r,phi[,theta],re,im")
    p.add_argument("--wave-grid", help="nr,nphi[,ntheta] (default 4,8[,4])")
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("ndmap", help="symbol table CSV, or a difference-norm sweep")
    config_args(p, required=False)
    p.add_argument("--nmax", type=int, default=DEFAULT_NMAX)
    p.add_argument("--sweep", type=_sweep_spec, help="sigma1:v1,v2,... or r1:v1,v2,...")
    p.add_argument("--table-out", help="with --sweep, also write the symbol table here")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_ndmap)

    p = sub.add_parser("invert", help="recover sigma1 from a measurement")
    p.add_argument("--dim", type=int, choices=(2, 3), default=2)
    p.add_argument("--r1", type=float, required=True)
    p.add_argument("--measurement", help="measurement JSON with neumann and dirichlet")
    p.add_argument("--g", help="Neumann boundary-data JSON")
    p.add_argument("--trace", help="Dirichlet boundary-data JSON ('-' for stdin)")
    p.add_argument("--mode", type=_mode, help="force one mode: n (2-D) or n,m (3-D)")
    p.add_argument("--no-xval", action="store_true", help="use only the primary mode")
    p.add_argument("--noise", type=float, default=0.0, help="relative Gaussian noise on the trace")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--e-tilde", type=float, help="report potential levels for this reduced energy")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("nonuniq", help="find sigma2 so (r2, sigma2) matches (r1, sigma1) in mode n")
    config_args(p)
    p.add_argument("--r2", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma2-range", type=_range, default=(1e-6, 1e6))
    p.add_argument("--scan", type=int, default=64)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_nonuniq)

    p = sub.add_parser("verify", help="run self-check suites")
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--quick", action="store_true", help="reduced grids (default)")
    grp.add_argument("--full", action="store_true", help="full grids")
    p.add_argument("--suite", action="append", help="suite name(s), comma separated; repeatable")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    warnings.simplefilter("ignore", TruncationWarning)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, json.JSONDecodeError, OSError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericDegeneracyError, TruncationError, IllPosedModeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InconsistentMeasurementError, BracketError) as exc:
        print(f"error: inconsistent measurement: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except NoRootError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOROOT


if __name__ == "__main__":
    sys.exit(main())
