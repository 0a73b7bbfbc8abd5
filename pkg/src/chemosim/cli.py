"""Command-line entry points: simulate, classify, sweep, constants, lane-emden, plot.

Exit codes for `simulate`: 0 when the run reaches its horizon, 2 when the
blow-up detector fires, 1 on any error (including a step-floor stall).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .errors import ChemosimError
from .regimes import ModelParams, classify
from .stepper import RunStatus


def _cmd_simulate(args) -> int:
    from .harness import load_run_config, simulate

    config = load_run_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    art = simulate(config, out_dir=args.out, svg=args.svg)
    print(json.dumps(art.outcome.as_dict()))
    if art.outcome.status is RunStatus.REACHED_HORIZON:
        return 0
    if art.outcome.status is RunStatus.BLOW_UP_DETECTED:
        return 2
    return 1


def _cmd_classify(args) -> int:
    params = ModelParams(args.d, args.m1, args.m2)
    regime = classify(params, tol=args.tol)
    print(json.dumps({
        "tag": regime.tag.value,
        "slack1": regime.slack1,
        "slack2": regime.slack2,
        "d": params.d, "m1": params.m1, "m2": params.m2,
    }))
    return 0


def _cmd_sweep(args) -> int:
    from .harness import load_sweep_config, sweep

    config = load_sweep_config(args.config)
    out_path = args.out if args.out is not None else "sweep.csv"
    rows = sweep(config, out_path=out_path)
    failed = sum(1 for row in rows if row[5] == "Failed")
    print(f"wrote {len(rows)} rows to {out_path} ({failed} failed)")
    return 0 if failed < len(rows) else 1


def _cmd_constants(args) -> int:
    from .harness import constants_report

    report = constants_report(args.d, seed=args.seed, n_samples=args.samples,
                              c_d=args.c_d)
    print(json.dumps(report))
    return 0


def _cmd_lane_emden(args) -> int:
    from .variational import lane_emden_solve

    if (args.zeta0 is None) == (args.first_zero is None):
        print("give exactly one of --zeta0 or --first-zero", file=sys.stderr)
        return 1
    prof = lane_emden_solve(args.d, args.power, args.coeff,
                            zeta0=args.zeta0, first_zero=args.first_zero)
    print(json.dumps({
        "d": prof.d, "power": prof.power, "coeff": prof.coefficient,
        "zeta0": prof.zeta0, "first_zero": prof.first_zero,
        "boundary_residual": prof.boundary_residual,
    }))
    return 0


def _cmd_plot(args) -> int:
    from .energy import read_series_csv
    from .harness import plot_series
    from .stepper import DiagnosticsSeries

    records = read_series_csv(args.series)
    out = args.out if args.out is not None else "traces.svg"
    plot_series(DiagnosticsSeries(records=records), out)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chemosim",
        description="Radial two-species chemotaxis laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one configured experiment")
    p.add_argument("--config", required=True, help="path to the run config JSON")
    p.add_argument("--out", default=None, help="output directory override")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--svg", action="store_true", help="also emit traces.svg")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("classify", help="classify a parameter point")
    p.add_argument("m1", type=float)
    p.add_argument("m2", type=float)
    p.add_argument("d", type=int)
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("sweep", help="run a Cartesian parameter sweep")
    p.add_argument("--config", required=True, help="path to the sweep config JSON")
    p.add_argument("--out", default=None, help="output CSV path")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("constants", help="estimate sharp constants and critical masses")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--c-d", type=float, default=None, dest="c_d",
                   help="override the kernel constant in threshold formulas")
    p.set_defaults(func=_cmd_constants)

    p = sub.add_parser("lane-emden", help="shooting solver for the radial profile ODE")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--power", type=float, required=True)
    p.add_argument("--coeff", type=float, required=True)
    p.add_argument("--zeta0", type=float, default=None)
    p.add_argument("--first-zero", type=float, default=None, dest="first_zero")
    p.set_defaults(func=_cmd_lane_emden)

    p = sub.add_parser("plot", help="render SVG traces from a series CSV")
    p.add_argument("--series", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ChemosimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
