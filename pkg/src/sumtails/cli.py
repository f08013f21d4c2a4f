"""Command line for bound tables, verification sweeps, calibration and MC runs.

Every stochastic command takes a mandatory ``--seed`` and produces
byte-identical output for identical configurations, so runs are usable as
reproducible evidence.  Exit status is 0 iff no exact inequality violation
and no statistically significant Monte Carlo flag was found.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from io import StringIO
from typing import Sequence

import numpy as np

from . import __version__
from .bounds import (
    CONSTANT_NAMES,
    BoundParams,
    SystemOracle,
    bound_reports_to_csv,
    bound_reports_to_json,
    p_bounds,
)
from .discrete import ConvolutionCapError, load_system
from .mc import FAMILIES, SamplerSpec, mc_check_bounds, mc_tails
from .scalars import LemmaGrid, check_pointwise_lemmas, young_delta, young_grid_scan
from .verify import (
    CALIBRATION_BOUNDS,
    CorpusSpec,
    calibrate,
    extremal_report,
    gen_corpus,
    verify_corpus,
)


def _parse_grid(spec: str) -> list[Fraction]:
    """Parse "start:step:stop" into an inclusive exact grid."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be start:step:stop, got {spec!r}")
    try:
        start, step, stop = (Fraction(p) for p in parts)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad grid {spec!r}: {exc}") from None
    if step <= 0:
        raise argparse.ArgumentTypeError(f"grid step must be positive, got {step}")
    out = []
    value = start
    while value <= stop:
        out.append(value)
        value += step
    return out


def _parse_fraction_list(spec: str) -> list[Fraction]:
    try:
        return [Fraction(part) for part in spec.split(",") if part]
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad list {spec!r}: {exc}") from None


def _parse_constant(spec: str) -> tuple[str, float]:
    name, _, value = spec.partition("=")
    if name not in CONSTANT_NAMES:
        raise argparse.ArgumentTypeError(
            f"unknown constant {name!r}; expected one of {CONSTANT_NAMES}"
        )
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad constant value in {spec!r}") from None


def _bound_params(args: argparse.Namespace) -> BoundParams:
    constants = dict(args.constant or [])
    return BoundParams(
        v=args.v, w=args.w, lam=args.lam, p=args.p, c=args.c, y=args.y, constants=constants
    )


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _y_value(text: str) -> Fraction | str:
    if text == "auto":
        return "auto"
    return Fraction(text)


def _add_bound_param_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--v", type=Fraction, default=Fraction(1), help="moment scale v > 0")
    parser.add_argument("--w", type=Fraction, default=Fraction(1), help="cap level w > 0")
    parser.add_argument(
        "--lambda", dest="lam", type=float, default=0.5, help="exponential rate lambda > 0"
    )
    parser.add_argument("--p", type=float, default=2.0, help="moment exponent p > 0")
    parser.add_argument("--c", type=float, default=1.0, help="shift c > 0 in (c+z)^p")
    parser.add_argument(
        "--y", type=_y_value, default="auto", help="y for P2/P3, or 'auto' to minimize"
    )
    parser.add_argument(
        "--constant",
        action="append",
        type=_parse_constant,
        metavar="NAME=VALUE",
        help=f"caller-supplied constant, one of {', '.join(CONSTANT_NAMES)} (repeatable)",
    )


def _cmd_bounds(args: argparse.Namespace) -> int:
    system = load_system(args.system)
    params = _bound_params(args)
    oracle = SystemOracle(system)
    reports = []
    for z in args.z_grid:
        try:
            reports.append(p_bounds(system, z, params, args.mode, oracle=oracle))
        except ConvolutionCapError as exc:
            print(f"error: {exc}", file=sys.stderr)
            print("hint: use the 'mc' subcommand for systems of this size", file=sys.stderr)
            return 2
    if args.format == "csv":
        buf = StringIO()
        bound_reports_to_csv(reports, buf)
        _emit(buf.getvalue(), args.out)
    else:
        _emit(bound_reports_to_json(reports) + "\n", args.out)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    spec = CorpusSpec(
        seed=args.seed, count=args.count, n_max=args.n_max, atoms_max=args.atoms_max
    )
    corpus = gen_corpus(spec)
    modes = ("winsorize", "truncate") if args.mode == "both" else (args.mode,)
    sweep = verify_corpus(corpus, modes=modes)
    lemma_violations = check_pointwise_lemmas(LemmaGrid())
    young_violations, young_gap = young_grid_scan()

    total = len(sweep.violations) + len(lemma_violations) + len(young_violations)
    report = {
        "corpus": {"seed": args.seed, "count": len(corpus)},
        "tail_difference": {
            "cells": sweep.cells,
            "skipped": sweep.skipped,
            "violations": [
                {
                    "system": idx,
                    "mode": mode,
                    "bound": v.bound,
                    "z": v.z,
                    "w": v.w,
                    "y": v.y,
                }
                for idx, mode, v in sweep.violations
            ],
        },
        "pointwise_lemmas": {
            "violations": [
                {"name": v.name, "point": v.point, "lhs": v.lhs, "rhs": v.rhs}
                for v in lemma_violations
            ]
        },
        "young": {
            "violations": [
                {"point": v.point, "delta": v.lhs} for v in young_violations
            ],
            "closed_form_max_gap": young_gap,
        },
        "total_violations": total,
    }
    if args.out:
        _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    print(
        f"checked {sweep.cells} tail-difference cells over {len(corpus)} systems "
        f"({sweep.skipped} skipped), pointwise lemmas, and the Young grid: "
        f"{total} violations"
    )
    return 0 if total == 0 else 1


def _cmd_calibrate(args: argparse.Namespace) -> int:
    spec = CorpusSpec(
        seed=args.seed, count=args.count, n_max=args.n_max, atoms_max=args.atoms_max
    )
    corpus = gen_corpus(spec)
    params = _bound_params(args)
    result = calibrate(
        corpus,
        args.bound,
        params=params,
        z_grid=args.z_grid,
        mode=args.mode,
        workers=args.workers,
    )
    _emit(result.to_json() + "\n", args.out)
    print(f"{args.bound}: a_min = {result.a_min!r} over {result.n_cells} cells")
    return 0


def _cmd_extremal(args: argparse.Namespace) -> int:
    reports = [extremal_report(n, float(args.v)) for n in args.n_list]
    rows = [
        {
            "n": r.n,
            "x": r.x,
            "y": r.y,
            "sum_var": r.sum_var,
            "beta": r.beta,
            "mean_abs_first": r.mean_abs_first,
            "bound": r.bound,
            "ratio": r.ratio,
            "ratio_closed_form": r.ratio_closed_form,
            "in_regime": r.in_regime,
        }
        for r in reports
    ]
    if args.format == "csv":
        buf = StringIO()
        keys = list(rows[0].keys())
        buf.write(",".join(keys) + "\n")
        for row in rows:
            buf.write(",".join(repr(row[k]) if isinstance(row[k], float) else str(row[k]) for k in keys) + "\n")
        _emit(buf.getvalue(), args.out)
    else:
        _emit(json.dumps(rows, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def _cmd_mc(args: argparse.Namespace) -> int:
    if args.family == "discrete-system":
        if not args.system:
            print("error: --system is required for family 'discrete-system'", file=sys.stderr)
            return 2
        spec = SamplerSpec(family=args.family, system=load_system(args.system))
    else:
        spec = SamplerSpec(family=args.family, n=args.n, q=args.q, alpha=args.alpha)
    z_grid = [float(z) for z in args.z_grid]
    params = _bound_params(args)

    if args.check_bounds:
        report = mc_check_bounds(
            spec,
            params,
            z_grid,
            args.samples,
            args.seed,
            mode="winsorize" if args.mode == "raw" else args.mode,
            workers=args.workers,
            bound_scale=args.bound_scale,
        )
        lines = ["z,p_hat_raw,p_hat_bar,delta_hat,ci_lo,ci_hi,p1,p2,p3,bound,flag"]
        for r in report.rows:
            lines.append(
                ",".join(
                    [
                        repr(r.z),
                        repr(r.p_hat_raw),
                        repr(r.p_hat_bar),
                        repr(r.delta_hat),
                        repr(r.ci_lo),
                        repr(r.ci_hi),
                        repr(r.p1),
                        "" if r.p2 is None else repr(r.p2),
                        "" if r.p3 is None else repr(r.p3),
                        repr(r.bound),
                        str(int(r.flag)),
                    ]
                )
            )
        _emit("\n".join(lines) + "\n", args.out)
        print(f"{report.n_flags} statistically significant flags")
        return 0 if report.ok else 1

    estimates = mc_tails(
        spec, z_grid, args.samples, args.seed, mode=args.mode, w=args.mc_w, workers=args.workers
    )
    lines = ["z,p_hat,ci_lo,ci_hi,n_samples,seed"]
    for e in estimates:
        lines.append(
            f"{e.z!r},{e.p_hat!r},{e.ci_lo!r},{e.ci_hi!r},{e.n_samples},{e.seed}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_young(args: argparse.Namespace) -> int:
    if args.k is not None:
        us = np.arange(args.u_min, args.u_max + args.u_step / 2, args.u_step)
        deltas = np.array([young_delta(args.k, float(u)).delta for u in us])
        i_min = int(np.argmin(deltas))
        report = {
            "k": args.k,
            "u_grid": {"min": args.u_min, "max": args.u_max, "step": args.u_step},
            "min_delta": float(deltas[i_min]),
            "argmin_u": float(us[i_min]),
            "negative": bool(deltas[i_min] < -1e-12),
        }
        _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
        print(
            f"k={args.k}: min Delta = {report['min_delta']!r} at u = {report['argmin_u']!r}"
        )
        # a negative minimum for k > 8/9 documents the boundary, not a failure
        violated = args.k <= 8.0 / 9.0 and report["negative"]
        return 1 if violated else 0
    violations, gap = young_grid_scan()
    report = {
        "k_grid": "0.01..8/9 step 0.001 plus the endpoint 8/9",
        "u_grid": "0..10 step 0.001",
        "violations": [{"point": v.point, "delta": v.lhs} for v in violations],
        "closed_form_max_gap": gap,
    }
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    print(f"{len(violations)} violations; closed-form max gap {gap!r}")
    return 0 if not violations else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sumtails",
        description="Tail bounds for sums of independent random variables: "
        "exact verification, calibration, Monte Carlo.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_bounds_cmd = sub.add_parser("bounds", help="bound table over a z grid for one system")
    p_bounds_cmd.add_argument("--system", required=True, help="system JSON path")
    p_bounds_cmd.add_argument(
        "--mode", choices=("winsorize", "truncate"), default="winsorize"
    )
    p_bounds_cmd.add_argument("--z-grid", type=_parse_grid, default=_parse_grid("0:0.25:8"))
    _add_bound_param_flags(p_bounds_cmd)
    p_bounds_cmd.add_argument("--out", help="output path (default stdout)")
    p_bounds_cmd.add_argument("--format", choices=("csv", "json"), default="csv")
    p_bounds_cmd.set_defaults(func=_cmd_bounds)

    p_verify = sub.add_parser(
        "verify", help="exact verification suite over a seeded corpus"
    )
    p_verify.add_argument("--seed", type=int, required=True)
    p_verify.add_argument("--count", type=int, default=200)
    p_verify.add_argument("--n-max", type=int, default=4)
    p_verify.add_argument("--atoms-max", type=int, default=4)
    p_verify.add_argument(
        "--mode", choices=("winsorize", "truncate", "both"), default="both"
    )
    p_verify.add_argument("--out", help="JSON report path")
    p_verify.set_defaults(func=_cmd_verify)

    p_cal = sub.add_parser("calibrate", help="empirical minimal constant for one bound")
    p_cal.add_argument("--seed", type=int, required=True)
    p_cal.add_argument("--count", type=int, default=200)
    p_cal.add_argument("--n-max", type=int, default=4)
    p_cal.add_argument("--atoms-max", type=int, default=4)
    p_cal.add_argument("--bound", choices=CALIBRATION_BOUNDS, required=True)
    p_cal.add_argument(
        "--mode", choices=("winsorize", "truncate"), default="winsorize"
    )
    p_cal.add_argument("--z-grid", type=_parse_grid, default=_parse_grid("0:0.25:8"))
    p_cal.add_argument("--workers", type=int, default=1)
    _add_bound_param_flags(p_cal)
    p_cal.add_argument("--out", help="JSON output path (default stdout)")
    p_cal.set_defaults(func=_cmd_calibrate)

    p_ext = sub.add_parser("extremal", help="sharpness report for the two-scale family")
    p_ext.add_argument(
        "--n-list",
        type=lambda s: [int(x) for x in s.split(",") if x],
        default=[2, 101, 10001, 100000001],
        help="comma-separated n values (each >= 2)",
    )
    p_ext.add_argument("--v", type=Fraction, default=Fraction(1))
    p_ext.add_argument("--out", help="output path (default stdout)")
    p_ext.add_argument("--format", choices=("csv", "json"), default="json")
    p_ext.set_defaults(func=_cmd_extremal)

    p_mc = sub.add_parser("mc", help="Monte Carlo tail estimates and bound flags")
    p_mc.add_argument("--family", choices=FAMILIES, required=True)
    p_mc.add_argument("--system", help="system JSON path (discrete-system family)")
    p_mc.add_argument("--n", type=int, default=1, help="number of summands (iid families)")
    p_mc.add_argument("--q", type=float, default=0.5, help="two-point upper mass")
    p_mc.add_argument("--alpha", type=float, default=4.0, help="Pareto shape (> 2)")
    p_mc.add_argument("--z-grid", type=_parse_grid, default=_parse_grid("0:0.5:4"))
    p_mc.add_argument("--samples", type=int, required=True)
    p_mc.add_argument("--seed", type=int, required=True)
    p_mc.add_argument(
        "--mode", choices=("raw", "winsorize", "truncate"), default="raw"
    )
    p_mc.add_argument(
        "--mc-w", type=float, default=None, help="cap level for winsorize/truncate modes"
    )
    p_mc.add_argument("--workers", type=int, default=1)
    p_mc.add_argument(
        "--check-bounds", action="store_true", help="flag significant bound violations"
    )
    p_mc.add_argument(
        "--bound-scale",
        type=float,
        default=1.0,
        help="multiply bounds by this factor (negative-control self-test)",
    )
    _add_bound_param_flags(p_mc)
    p_mc.add_argument("--out", help="CSV output path (default stdout)")
    p_mc.set_defaults(func=_cmd_mc)

    p_young = sub.add_parser("young", help="Delta(k, u) grid scan and boundary study")
    p_young.add_argument("--k", type=float, default=None, help="scan one k (default: full grid)")
    p_young.add_argument("--u-min", type=float, default=0.0)
    p_young.add_argument("--u-max", type=float, default=10.0)
    p_young.add_argument("--u-step", type=float, default=1e-3)
    p_young.add_argument("--out", help="JSON output path (default stdout)")
    p_young.set_defaults(func=_cmd_young)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except json.JSONDecodeError as exc:
        print(
            f"error: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            file=sys.stderr,
        )
        return 2
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
