"""Command-line entry point: ``gaptrap {preset,run,validate,limits}``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .analytic import AnalyticUnavailableError, trapping_limits
from .core import derive_constants, validate_spec
from .scenario import (EXIT_CONFIG, EXIT_OK, EXIT_PRECONDITION, PRESETS, ConfigError,
                       UnknownPresetError, check_config, load_config, preset_config,
                       run_scenario)


def _overrides(args) -> dict:
    return {"output_dir": args.out_dir, "tol": args.tol, "n_modes": args.modes,
            "cutoff": args.cutoff, "t_max": args.t_max}


def _add_overrides(p):
    p.add_argument("--out-dir", help="directory for CSV files and report.json")
    p.add_argument("--tol", type=float, help="integrator tolerance")
    p.add_argument("--modes", type=int, help="number of discretized bath modes")
    p.add_argument("--cutoff", type=float, help="bath half-width around omega_c")
    p.add_argument("--t-max", type=float, help="final time in units of 1/omega_big0")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaptrap",
        description="Atom in a band-gap reservoir: populations, spectra, currents "
                    "and entanglement from closed forms, pseudomodes or a discretized bath.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preset", help="reproduce the data behind one figure")
    p.add_argument("name", help="one of: " + ", ".join(PRESETS))
    _add_overrides(p)

    p = sub.add_parser("run", help="run a JSON scenario config")
    p.add_argument("config")
    _add_overrides(p)

    p = sub.add_parser("validate", help="check a config and print the validation report")
    p.add_argument("config")

    p = sub.add_parser("limits", help="print the long-time trapping populations")
    p.add_argument("config")
    return parser


def _print_report(report) -> None:
    status = "ok" if report.exit_code == EXIT_OK else "FAILED"
    print(f"{status}: {len(report.files)} file(s) in {report.wall_time_s:.2f} s")
    for w in report.warnings:
        print(f"warning: {w}")
    for e in report.errors:
        print(f"error: {e['type']}: {e['message']}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "preset":
            cfg = preset_config(args.name, **_overrides(args))
        else:
            cfg = load_config(args.config)
    except UnknownPresetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "run":
        overrides = {k: v for k, v in _overrides(args).items() if v is not None}
        cfg = replace(cfg, **overrides)
        try:
            check_config(cfg)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG

    if args.command in ("preset", "run"):
        report = run_scenario(cfg)
        _print_report(report)
        return report.exit_code

    report = validate_spec(cfg.spec)
    if args.command == "validate":
        out = {"valid": report.ok, "violations": list(report.violations),
               "perfect_gap": report.perfect_gap, "resonant": report.resonant,
               "oscillatory_regime": report.oscillatory_regime}
        if report.ok:
            k = derive_constants(cfg.spec)
            out["derived"] = {"gamma_p1": k.gamma_p1, "gamma_p2": k.gamma_p2, "v": k.v,
                              "big_gamma": k.big_gamma,
                              "big_omega": [k.big_omega.real, k.big_omega.imag],
                              "eta": k.eta}
        print(json.dumps(out, indent=2))
        return EXIT_OK if report.ok else EXIT_CONFIG

    if not report.ok:
        print("config error: " + "; ".join(report.violations), file=sys.stderr)
        return EXIT_CONFIG
    try:
        c, a1, pi = trapping_limits(cfg.spec)
    except AnalyticUnavailableError as exc:
        print(f"precondition: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    eta = derive_constants(cfg.spec).eta
    print(f"eta           = {eta:.12g}")
    print(f"c_a(inf)      = {c:.12g}   |c_a(inf)|^2 = {c * c:.12g}")
    print(f"a_1(inf)      = {a1:.12g}   |a_1(inf)|^2 = {a1 * a1:.12g}")
    print(f"pi_j(inf)     = {pi:.12g}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
