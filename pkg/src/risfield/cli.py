"""Command-line entry point.

Subcommands: `field` (single evaluation), `scan` (sweeps to CSV/PGM),
`regime` (classification report). Exit codes: 0 success, 1 I/O or config
errors, 2 contract/domain errors. The RIS_BUDGET environment variable
overrides the quadrature sample budget.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import replace

from .errors import ConfigError, ContractError
from .geometry import Side
from .em_core import incident_projection
from .fields import reflected_field, transmitted_field, discretized_field
from .asymptotics import Regime, classify_regime, closed_form_scattered, focusing_bound
from .experiments import (
    emit_csv,
    parse_method,
    peak_row,
    run_scan,
    write_pgm,
)
from .config import parse_config


def _fmt_component(label, value):
    mag = abs(value)
    db = 20.0 * math.log10(mag) if mag > 0 else -math.inf
    return f"{label:>10}: re={value.real: .10e}  im={value.imag: .10e}  |F|={mag:.10e}  {db:8.3f} dB"


def _regime_lines(report):
    lines = []
    lines.append(f"r_ES = {report.r_es:.6g} m, r_EL = {report.r_el:.6g} m")
    lines.append(f"d_Tx0 = {report.d_tx0:.6g} m, d_Rx0 = {report.d_rx0:.6g} m")
    if report.stationary:
        sp = report.stationary[0]
        where = "inside" if sp.inside_surface else "outside"
        lines.append(
            f"stationary point: ({sp.x:.6g}, {sp.y:.6g}) m, {where} the surface, "
            f"det = {sp.det:.6g}, signature = {sp.signature:+d}"
        )
    else:
        lines.append("stationary point: none")
    small = "yes" if report.electrically_small else "no"
    lines.append(
        f"electrically-small: {small} (r_ES ≈ {report.r_es:.4g} m, "
        f"needs d_Tx0 and d_Rx0 above it)"
    )
    if report.el_condition_value is not None:
        verdict = "yes" if report.electrically_large else "no"
        lines.append(
            f"electrically-large: {verdict} "
            f"(condition ≈ {report.el_condition_value:.4g} {'≥' if report.electrically_large else '<'} 10)"
        )
    else:
        lines.append(
            f"electrically-large: {'yes' if report.electrically_large else 'no'} "
            f"(focusing profile, distance-vs-diagonal branch: {report.type2_branch})"
        )
    return lines


def _report_json(report):
    return {
        "r_es": report.r_es,
        "r_el": report.r_el,
        "d_tx0": report.d_tx0,
        "d_rx0": report.d_rx0,
        "stationary": [
            {
                "x": sp.x,
                "y": sp.y,
                "inside_surface": sp.inside_surface,
                "det": sp.det,
                "signature": sp.signature,
            }
            for sp in report.stationary
        ],
        "electrically_small": report.electrically_small,
        "electrically_large": report.electrically_large,
        "el_condition_value": report.el_condition_value,
        "type2_branch": report.type2_branch,
    }


def _apply_budget_env(quad):
    raw = os.environ.get("RIS_BUDGET")
    if raw is None:
        return quad
    try:
        budget = int(raw)
    except ValueError:
        raise ConfigError(f"RIS_BUDGET must be an integer, got {raw!r}")
    return replace(quad, budget=budget)


def cmd_field(args):
    cfg = parse_config(args.config)
    quad = _apply_budget_env(cfg.quad)
    name, step = parse_method(args.method)
    geom, profile, source, rec_pol, carrier = (
        cfg.geometry,
        cfg.profile,
        cfg.source,
        cfg.rec_pol,
        cfg.carrier,
    )
    if name == "quadrature":
        fn = reflected_field if geom.side is Side.REFLECTION else transmitted_field
        res = fn(geom, profile, source, rec_pol, carrier, quad)
        parts = [("incident", res.incident), ("scattered", res.scattered), ("total", res.value)]
        extra = f"samples = {res.samples}" + (f", flags = {res.flags}" if res.flags else "")
    elif name == "discretized":
        res = discretized_field(geom, profile, source, rec_pol, carrier, step, quad)
        parts = [("incident", res.incident), ("scattered", res.scattered), ("total", res.value)]
        extra = f"elements = {res.samples}"
    elif name in ("closed-small", "closed-large"):
        regime = Regime.SMALL if name == "closed-small" else Regime.LARGE
        f = closed_form_scattered(geom, profile, source, rec_pol, carrier, regime)
        inc = incident_projection(source, geom.rx, rec_pol, carrier)
        parts = [("incident", inc), ("scattered", f), ("total", inc + f)]
        extra = None
    elif name == "bound":
        b = focusing_bound(geom, profile, source, carrier)
        parts = [("bound", complex(b))]
        extra = None
    else:
        raise ContractError(f"unknown method {name!r}")
    for label, value in parts:
        print(_fmt_component(label, value))
    if extra:
        print(extra)
    print("-- regime --")
    for line in _regime_lines(classify_regime(geom, profile, cfg.carrier)):
        print(line)
    return 0


def cmd_scan(args):
    cfg = parse_config(args.config)
    if cfg.scan is None:
        raise ConfigError("missing key: scan (this command needs a scan block)")
    if not args.out:
        raise ConfigError("scan requires --out <path>")
    quad = _apply_budget_env(cfg.quad)
    rows = run_scan(
        cfg.geometry,
        cfg.profile,
        cfg.source,
        cfg.rec_pol,
        cfg.carrier,
        cfg.scan,
        quad=quad,
        threads=args.threads,
    )
    emit_csv(rows, args.out)
    if cfg.scan_pgm:
        write_pgm(rows, os.path.splitext(args.out)[0] + ".pgm", method=cfg.scan.methods[0])
    best = peak_row(rows, method=cfg.scan.methods[0])
    where = f"axis0={best.axis0:.6g}" + (
        f", axis1={best.axis1:.6g}" if best.axis1 is not None else ""
    )
    print(
        f"wrote {len(rows)} rows to {args.out}; peak |F| = {abs(best.value):.6e} "
        f"({best.magnitude_db:.2f} dB) for {best.method} at {where}"
    )
    return 0


def cmd_regime(args):
    cfg = parse_config(args.config)
    report = classify_regime(cfg.geometry, cfg.profile, cfg.carrier)
    for line in _regime_lines(report):
        print(line)
    print("-- machine-readable --")
    print(json.dumps(_report_json(report), indent=2, sort_keys=True))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="risfield",
        description="Field and path-loss computations for a link aided by a "
        "reconfigurable reflecting or transmitting surface.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    p_field = sub.add_parser("field", parents=[common], help="evaluate the field once")
    p_field.add_argument(
        "--method",
        default="quadrature",
        help="quadrature | discretized:<step_m> | closed-small | closed-large | bound",
    )
    p_field.set_defaults(fn=cmd_field)
    p_scan = sub.add_parser("scan", parents=[common], help="run the configured sweep")
    p_scan.add_argument("--out", required=True, help="output CSV path")
    p_scan.set_defaults(fn=cmd_scan)
    p_regime = sub.add_parser("regime", parents=[common], help="print the regime report")
    p_regime.set_defaults(fn=cmd_regime)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
