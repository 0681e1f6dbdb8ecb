"""Command-line front end.

Exit codes: 0 success, 2 invalid input or failed validation, 3 numeric
failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import report
from .asymptotics import SolverConfig, full_spectrum
from .circle import grid_size_for
from .errors import NumericFailure, TsleigError
from .oracle import build_toeplitz, eigenvalues, pair_spectra
from .phase import eta_table
from .symbol import resolve_symbol, validate_simple_loop

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("expected a nonempty list of positive integers")
    return values


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsleig",
        description="Eigenvalue asymptotics of Toeplitz matrices with simple-loop symbols.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--symbol", default="example-a1",
                        help="builtin name (tridiagonal, example-a1) or JSON file")
    common.add_argument("--oversample", type=_positive_int, default=None,
                        help="grid points per matrix dimension (power-of-two rounded)")
    common.add_argument("--tol", type=float, default=1e-12)
    common.add_argument("--max-iter", type=_positive_int, default=50)
    common.add_argument("--out", default="-", help="output file, '-' for stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--parallel", type=int, default=1, help="worker threads")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check the simple-loop conditions")

    p = sub.add_parser("eta-table", parents=[common], help="phase function on (0, pi)")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--count", type=_positive_int, default=64)

    p = sub.add_parser("spectrum", parents=[common], help="asymptotic eigenvalues")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--order", choices=("0", "1", "2", "fixed", "all"), default="all")

    p = sub.add_parser("oracle", parents=[common], help="dense eigenvalues")
    p.add_argument("--n", type=_positive_int, required=True)

    p = sub.add_parser("compare", parents=[common], help="pair estimates with the oracle")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--orders", default="1,2")

    p = sub.add_parser("table1", parents=[common], help="error table over several n")
    p.add_argument("--n-list", type=_int_list, default=list(report.TABLE_NS))
    p.add_argument("--figure", default=None, help="PNG path (default: next to --out)")

    p = sub.add_parser("plotdata", parents=[common], help="curve and eigenvalue scatter")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--samples", type=_positive_int, default=1024)
    p.add_argument("--figure", default=None, help="PNG path (default: next to --out)")
    return parser


def _config(args) -> SolverConfig:
    return SolverConfig(tol=args.tol, max_iter=args.max_iter,
                        grid_oversample=args.oversample, workers=max(1, args.parallel))


def _write(args, columns: dict, payload: dict | None = None) -> None:
    if args.format == "json":
        body = payload if payload is not None else report.expand_complex(columns)
        report.emit(report.json_text(body), args.out)
    else:
        report.emit(report.csv_text(columns), args.out)


def _figure_path(args) -> Path | None:
    if args.figure:
        return Path(args.figure)
    if args.out not in (None, "-"):
        return Path(args.out).with_suffix(".png")
    return None


def cmd_validate(args, sym) -> int:
    rep = validate_simple_loop(sym)
    payload = {"symbol": sym.name, "valid": rep.valid, "failures": list(rep.failures),
               "M0": rep.M0, "M1": rep.M1,
               "min_abs_g_prime_interior": rep.min_abs_g_prime_interior,
               "g_pp_at_0": rep.g_pp_at_0, "g_pp_at_pi": rep.g_pp_at_pi}
    if args.format == "json":
        report.emit(report.json_text(payload), args.out)
    else:
        lines = [f"symbol {sym.name or '?'}: {'pass' if rep.valid else 'FAIL'}"]
        lines += [f"  {msg}" for msg in rep.failures]
        report.emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if rep.valid else EXIT_INVALID


def cmd_eta_table(args, sym) -> int:
    grid = grid_size_for(args.n, args.oversample) if args.oversample else None
    s, values, slopes, jumps = eta_table(sym, args.n, args.count, grid_size=grid)
    for where in jumps:
        print(f"warning: phase jump near s = {where:.6g}", file=sys.stderr)
    _write(args, {"s": s, "eta": values, "eta_prime": slopes})
    return EXIT_OK


def cmd_spectrum(args, sym) -> int:
    est = full_spectrum(sym, args.n, _config(args))
    cols = report.spectrum_columns(est, args.order)
    _write(args, cols, {"n": est.n, "source": est.source, **report.expand_complex(cols)})
    return EXIT_OK


def cmd_oracle(args, sym) -> int:
    dense = eigenvalues(build_toeplitz(sym, args.n))
    ev = dense.eigenvalues[np.lexsort((dense.eigenvalues.imag, dense.eigenvalues.real))]
    _write(args, {"k": np.arange(1, ev.size + 1), "lambda": ev},
           {"n": dense.n, "eigenvalues": ev, "trace_residual": dense.trace_residual,
            "det_residual": dense.det_residual})
    return EXIT_OK


def cmd_compare(args, sym) -> int:
    est = full_spectrum(sym, args.n, _config(args))
    oracle = eigenvalues(build_toeplitz(sym, args.n))
    reports = {}
    for order in [o.strip() for o in args.orders.split(",") if o.strip()]:
        if order not in ("0", "1", "2", "fixed"):
            raise ValueError(f"unknown order {order!r}")
        rep = pair_spectra(oracle, est, order)
        reports[order] = {"delta": rep.delta, "pairing": rep.pairing,
                          "per_j_abs": rep.per_j_abs, "per_j_rel": rep.per_j_rel,
                          "ambiguous": rep.ambiguous}
    payload = {"n": args.n, "source": est.source, "reports": reports}
    report.emit(report.json_text(payload), args.out)
    return EXIT_OK


def cmd_table1(args, sym) -> int:
    rows = report.table1(sym, args.n_list, _config(args), parallel=args.parallel)
    _write(args, report.rows_to_columns(rows), {"rows": rows})
    fig = _figure_path(args)
    if fig is not None:
        report.plot_table(rows, fig)
    return EXIT_OK


def cmd_plotdata(args, sym) -> int:
    cols, (curve, oracle, est) = report.plotdata(sym, args.n, _config(args), args.samples)
    _write(args, cols)
    fig = _figure_path(args)
    if fig is not None:
        report.plot_spectrum(curve, oracle, est, fig, title=f"{sym.name}, n = {args.n}")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "eta-table": cmd_eta_table,
    "spectrum": cmd_spectrum,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "table1": cmd_table1,
    "plotdata": cmd_plotdata,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sym = resolve_symbol(args.symbol)
        return COMMANDS[args.command](args, sym)
    except NumericFailure as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TsleigError, ValueError, json.JSONDecodeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
