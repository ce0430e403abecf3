"""Command-line entry point: ``xlsense {snr,alloc,scan,mc,sweep,figure}``.

Angles are in degrees, distances in metres and the composite gain
``P |kappa|^2 beta^2 / sigma^2`` in dB on every flag. Output is CSV on
stdout unless ``-o`` is given. Exit status: 0 success, 1 usage error,
2 when any point hit a domain error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace

import numpy as np

from .geometry import DomainError, validity_warnings
from .oracle import EQUAL, OPTIMAL, power_alloc, scan_grid
from .simkit import McConfig
from .sweeps import (
    PUBLISHED_GAIN_DB,
    PUBLISHED_RANGE,
    PUBLISHED_SPACING,
    ConfigError,
    Estimator,
    SweepSpec,
    build_point,
    emit_csv,
    figure_preset,
    load_config,
    parse_estimators,
    parse_modes,
    run_sweep,
)

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _point_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("scenario")
    g.add_argument("--elements", type=int, default=65, help="M = N (default 65)")
    g.add_argument("--tx-elements", type=int, help="M, overrides --elements")
    g.add_argument("--rx-elements", type=int, help="N, overrides --elements")
    g.add_argument("--spacing", type=float, default=PUBLISHED_SPACING, help="element spacing, m")
    g.add_argument("--tx-spacing", type=float)
    g.add_argument("--rx-spacing", type=float)
    g.add_argument("--wavelength", type=float, help="m (default 2 * spacing)")
    g.add_argument("--range", type=float, default=PUBLISHED_RANGE, help="r = l, m")
    g.add_argument("--tx-range", type=float)
    g.add_argument("--rx-range", type=float)
    g.add_argument("--angle", type=float, default=0.0, help="theta = phi, degrees")
    g.add_argument("--tx-angle", type=float)
    g.add_argument("--rx-angle", type=float)
    g.add_argument("--gain-db", type=float, default=PUBLISHED_GAIN_DB, help="P|kappa|^2 beta^2/sigma^2, dB")


def _point_cfg(args) -> dict:
    keys = ("elements", "tx_elements", "rx_elements", "spacing", "tx_spacing", "rx_spacing", "wavelength",
            "range", "tx_range", "rx_range", "angle", "tx_angle", "rx_angle", "gain_db")
    return {k: str(getattr(args, k)) for k in keys if getattr(args, k) is not None}


def _out_arg(p):
    p.add_argument("-o", "--output", default="-", help="CSV destination (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="xlsense", description="SNR scaling laws for radar with extremely large arrays.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("snr", help="SNR at a single point")
    _point_args(p)
    p.add_argument("--modes", default="all", help="comma list of mode:model, e.g. mimo:xl,phased_optimal:upw")
    p.add_argument("--estimators", default="closed_form,oracle")
    _out_arg(p)

    p = sub.add_parser("alloc", help="print a transmit power allocation")
    _point_args(p)
    p.add_argument("--policy", choices=(EQUAL, OPTIMAL), default=OPTIMAL)
    _out_arg(p)

    p = sub.add_parser("scan", help="beamformer response over a range/angle probe grid")
    _point_args(p)
    p.add_argument("--mode", choices=("mimo", "phased"), default="mimo")
    p.add_argument("--policy", choices=(EQUAL, OPTIMAL), default=OPTIMAL)
    p.add_argument("--range-span", type=float, default=10.0, help="probe range offsets +-span, m")
    p.add_argument("--angle-span", type=float, default=2.0, help="probe angle offsets +-span, degrees")
    p.add_argument("--points", type=int, default=21, help="grid points per axis")
    _out_arg(p)

    p = sub.add_parser("mc", help="Monte Carlo SNR at a single point")
    _point_args(p)
    p.add_argument("--modes", default="mimo:xl,phased_equal:xl,phased_optimal:xl")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--code-length", type=int)
    p.add_argument("--workers", type=int, default=1)
    _out_arg(p)

    p = sub.add_parser("sweep", help="run a sweep described by a key=value config file")
    p.add_argument("config")
    p.add_argument("--workers", type=int, default=1)
    _out_arg(p)

    p = sub.add_parser("figure", help="run a published-figure preset sweep")
    p.add_argument("name", choices=("fig2", "fig3", "fig4"))
    p.add_argument("--montecarlo", action="store_true", help="add the Monte Carlo estimator")
    p.add_argument("--allow-large-mc", action="store_true", help="lift the 257-element Monte Carlo guard")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _out_arg(p)
    return parser


def _emit_rows(rows, dest) -> int:
    emit_csv(rows, dest)
    errors = [r for r in rows if r.status == "error"]
    for r in errors:
        print(f"domain error at {r.variable}={r.value} {r.mode}:{r.model}: {r.provenance}", file=sys.stderr)
    return EXIT_DOMAIN if errors else EXIT_OK


def _single_point_sweep(args, modes, estimators, mc=None) -> SweepSpec:
    point = build_point(_point_cfg(args))
    for w in validity_warnings(point.scenario, point.tx, point.rx):
        print(f"warning: {w}", file=sys.stderr)
    spec = SweepSpec("tx_elements", (point.tx.elements,), point, modes=modes, estimators=estimators,
                     mc=mc or McConfig(), mc_max_elements=None, name="point")
    return spec


def _write_table(header, rows, dest):
    fh = sys.stdout if dest == "-" else open(dest, "w", encoding="utf-8", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()


def _cmd_alloc(args):
    p = build_point(_point_cfg(args))
    alloc = power_alloc(args.policy, p.tx, p.scenario, p.budget)
    powers = alloc.element_powers(p.budget.ref_gain)
    rows = [(int(m), format(d, ".12g"), format(c, ".12g"), format(pw, ".12g"))
            for m, d, c, pw in zip(p.tx.indices(), alloc.distances, alloc.coefficients, powers)]
    _write_table(("m", "distance", "coefficient", "power"), rows, args.output)
    return EXIT_OK


def _cmd_scan(args):
    p = build_point(_point_cfg(args))
    dr = np.linspace(-args.range_span, args.range_span, args.points)
    da = np.linspace(-args.angle_span, args.angle_span, args.points)
    grid = scan_grid(p.tx, p.rx, p.scenario, p.budget, dr, np.radians(da), args.mode, args.policy)
    rows = [(format(r, ".12g"), format(a, ".12g"), format(grid[i, j], ".12g"))
            for i, r in enumerate(dr) for j, a in enumerate(da)]
    _write_table(("range_offset", "angle_offset_deg", "response"), rows, args.output)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if args.command == "snr":
            spec = _single_point_sweep(args, parse_modes(args.modes), parse_estimators(args.estimators))
            return _emit_rows(run_sweep(spec), args.output)
        if args.command == "mc":
            mc = McConfig(args.trials, args.code_length, args.seed)
            spec = _single_point_sweep(args, parse_modes(args.modes), (Estimator.MONTE_CARLO,), mc)
            return _emit_rows(run_sweep(spec, args.workers), args.output)
        if args.command == "alloc":
            return _cmd_alloc(args)
        if args.command == "scan":
            return _cmd_scan(args)
        if args.command == "sweep":
            return _emit_rows(run_sweep(load_config(args.config), args.workers), args.output)
        if args.command == "figure":
            spec = figure_preset(args.name)
            if args.montecarlo:
                spec = replace(spec, estimators=spec.estimators + (Estimator.MONTE_CARLO,),
                               mc=McConfig(args.trials, seed=args.seed),
                               mc_max_elements=None if args.allow_large_mc else spec.mc_max_elements)
            return _emit_rows(run_sweep(spec, args.workers), args.output)
    except ConfigError as exc:
        print(f"xlsense: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"xlsense: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except BrokenPipeError:
        return EXIT_OK
    except OSError as exc:
        print(f"xlsense: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
