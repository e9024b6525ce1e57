"""Command-line interface.

Subcommands: bound, partition, phi, cycles, analyze.  Coefficients ascend
from degree one (constant term omitted); --fprime switches the input to F'
coefficients ascending from degree zero.  Exit codes: 0 success, 2 invalid
configuration, 3 numerical failure (a partial report is still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import oracle as oracle_mod
from . import phi as phi_mod
from .errors import DegenerateInput, LienardLabError
from .partition import build_partition, degree_bound, partition_bound
from .report import (
    AnalysisConfig,
    emit_csv,
    report_json,
    run_analysis,
    serialize_report,
    _render_json,
)


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lienard-lab",
        description="Locate and count limit cycles of polynomial Lienard systems.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--coeffs", help="comma-separated coefficients, ascending, constant omitted")
        sp.add_argument("--config", help="JSON config file (overridden by other flags)")
        sp.add_argument("--fprime", action="store_true", help="coefficients describe F' instead of F")
        sp.add_argument("--x-max", type=float, default=None, help="truncation of the last interval")
        sp.add_argument("--out", help="write JSON output to this path")

    for name, desc in [
        ("bound", "cycle-count bounds from the degree and the partition"),
        ("partition", "critical points and the induced intervals"),
        ("phi", "amplitude candidates from the first-integral route"),
        ("cycles", "limit cycles from direct simulation"),
        ("analyze", "full two-route analysis and cross-check"),
    ]:
        sp = sub.add_parser(name, help=desc)
        common(sp)
        if name == "phi":
            sp.add_argument("--interval", type=int, default=None, help="scan one interval only")
        if name in ("cycles", "analyze"):
            sp.add_argument("--scan", help="amplitude scan range lo,hi")
            sp.add_argument("--grid-n", type=int, default=200)
            sp.add_argument("--csv-dir", help="write orbit and branch CSV files here")
    return p


def _config_from_args(args) -> AnalysisConfig:
    base: dict = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    if args.coeffs:
        base["coefficients"] = tuple(float(v) for v in args.coeffs.split(","))
    if args.fprime:
        base["input_kind"] = "F_prime"
    if args.x_max is not None:
        base["x_max"] = args.x_max
    if getattr(args, "scan", None):
        lo, hi = (float(v) for v in args.scan.split(","))
        base["scan_lo"], base["scan_hi"] = lo, hi
    if getattr(args, "grid_n", None):
        base["grid_n"] = args.grid_n
    if "coefficients" not in base:
        raise DegenerateInput("no coefficients given (use --coeffs or --config)")
    base["coefficients"] = tuple(base["coefficients"])
    return AnalysisConfig(**base)


def _emit(payload: str, out: str | None) -> None:
    if out:
        Path(out).write_text(payload + "\n")
    else:
        print(payload)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        F, _ = cfg.build_F()
    except (DegenerateInput, ValueError, OSError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    try:
        if args.command == "bound":
            part = build_partition(F, cfg.x_max)
            _emit(
                _render_json(
                    {
                        "degree": F.degree,
                        "degree_bound": degree_bound(F.degree),
                        "partition_bound": partition_bound(part),
                        "critical_points": list(part.critical_points),
                    }
                ),
                args.out,
            )
            return 0

        if args.command == "partition":
            part = build_partition(F, cfg.x_max)
            _emit(
                _render_json(
                    {
                        "critical_points": list(part.critical_points),
                        "intervals": [
                            {"lo": iv.lo, "hi": iv.hi, "unbounded": iv.unbounded}
                            for iv in part.intervals
                        ],
                        "x_max": part.x_max,
                    }
                ),
                args.out,
            )
            return 0

        if args.command == "phi":
            part = build_partition(F, cfg.x_max)
            indices = (
                [args.interval] if args.interval is not None else range(len(part.intervals))
            )
            grid = phi_mod.default_phi_grid(cfg.phi_magnitudes)
            rows = []
            continuum = False
            for i in indices:
                scan = phi_mod.find_amplitude_candidates(
                    F, part, i, grid, a_grid_n=cfg.amplitude_grid_n
                )
                continuum = continuum or scan.continuum
                rows.extend(
                    {
                        "amplitude": c.A,
                        "interval_index": c.interval_index,
                        "at_border": c.at_border,
                        "initial_phi": c.initial_phi,
                    }
                    for c in scan.candidates
                )
            _emit(_render_json({"candidates": rows, "continuum": continuum}), args.out)
            return 0

        if args.command == "cycles":
            part = build_partition(F, cfg.x_max)
            lo, hi = oracle_mod.default_scan_range(part.critical_points)
            if cfg.scan_lo is not None:
                lo = cfg.scan_lo
            if cfg.scan_hi is not None:
                hi = cfg.scan_hi
            cycles = oracle_mod.find_limit_cycles(F, lo, hi, cfg.grid_n)
            if args.csv_dir:
                d = Path(args.csv_dir)
                d.mkdir(parents=True, exist_ok=True)
                for k, c in enumerate(cycles):
                    emit_csv(c.orbit, d / f"cycle_{k}_orbit.csv")
            _emit(
                _render_json(
                    {
                        "cycles": [
                            {
                                "amplitude": c.amplitude,
                                "period": c.period,
                                "stability": c.stability,
                                "return_slope": c.return_slope,
                            }
                            for c in cycles
                        ]
                    }
                ),
                args.out,
            )
            return 0

        # analyze
        report = run_analysis(cfg)
        if args.csv_dir:
            d = Path(args.csv_dir)
            d.mkdir(parents=True, exist_ok=True)
            cycles = oracle_mod.find_limit_cycles(
                F,
                cfg.scan_lo if cfg.scan_lo is not None else 0.05,
                cfg.scan_hi
                if cfg.scan_hi is not None
                else oracle_mod.default_scan_range(tuple(report.critical_points))[1],
                cfg.grid_n,
            )
            for k, c in enumerate(cycles):
                emit_csv(c.orbit, d / f"cycle_{k}_orbit.csv")
                emit_csv(
                    oracle_mod.extract_phi_from_orbit(F, c), d / f"cycle_{k}_phi.csv"
                )
        if args.out:
            serialize_report(report, args.out)
        else:
            print(report_json(report))
        return 3 if report.partial else 0

    except LienardLabError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
