"""``taunav`` command line.

Exit codes: 0 success, 2 configuration error, 3 aborted run.  The output
directory is ``--out`` if given, else ``$TAU_NAV_OUT``, else the config's
``out`` key.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import PRESETS, ExperimentConfig
from .errors import ConfigError, FeatureLost, TauNavError
from .experiments import (
    map_analysis,
    parse_vary,
    simulate,
    summary_text,
    sweep,
    tau_compare,
    write_map,
    write_simulation,
    write_table,
)
from .sampled import PHI_MAX

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORTED = 3


def _out_dir(args, exp: ExperimentConfig | None = None) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    env = os.environ.get("TAU_NAV_OUT")
    if env:
        return Path(env)
    return Path(exp["out"] if exp is not None else "taunav_out")


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", help="named scenario (see `taunav presets`)")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key (repeatable)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")


def _experiment(args) -> ExperimentConfig:
    return ExperimentConfig.build(args.preset, args.config, args.set, args.seed)


def cmd_simulate(args) -> int:
    exp = _experiment(args)
    record, metrics, target = simulate(exp)
    out = _out_dir(args, exp)
    write_simulation(out, exp, record, metrics, target, gnuplot=args.gnuplot)
    sys.stdout.write(summary_text(exp, record, metrics, target))
    if record.aborted:
        print(f"run aborted: {record.abort_reason}", file=sys.stderr)
        return EXIT_ABORTED
    return EXIT_OK


def cmd_map(args) -> int:
    result = map_analysis(
        args.h, args.k, args.R, args.phi0, args.x, args.n, args.pitch,
        PHI_MAX if args.phi_max is None else args.phi_max, args.x_max,
    )
    write_map(_out_dir(args), result)
    print(f"hk: {result['hk']:.6g}")
    print(f"max_abs_gprime: {result['max_abs_gprime']:.6g}")
    print(f"contractive: {result['contractive']}")
    print(f"gprime_at_zero: {result['gprime_at_zero']:.6g}")
    print(f"k_crit: {result['k_crit']:.6g}")
    print(f"behaviour: {result['behaviour']}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    exp = _experiment(args)
    if not args.vary:
        raise ConfigError("sweep needs at least one --vary KEY=VALUES")
    varies = [parse_vary(v) for v in args.vary]
    header, rows = sweep(exp, varies, jobs=args.jobs)
    out = _out_dir(args, exp)
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "sweep.csv", header, rows)
    failed = sum(1 for r in rows if r[-2])
    print(f"runs: {len(rows)}  aborted/failed: {failed}")
    if rows and failed == len(rows):
        return EXIT_ABORTED
    return EXIT_OK


def cmd_tau_compare(args) -> int:
    if args.preset is None and args.config is None:
        args.preset = "turn_exaggeration"
    exp = _experiment(args)
    try:
        header, rows = tau_compare(exp)
    except FeatureLost as exc:
        print(f"tau-compare aborted: {exc}", file=sys.stderr)
        return EXIT_ABORTED
    out = _out_dir(args, exp)
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "tau_compare.csv", header, rows)
    print(f"wrote {len(rows)} rows to {out / 'tau_compare.csv'}")
    return EXIT_OK


def cmd_presets(args) -> int:
    for name in sorted(PRESETS):
        keys = ", ".join(f"{k}={v}" for k, v in PRESETS[name].items())
        print(f"{name}: {keys}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="taunav", description="Time-to-transit steering experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one closed-loop simulation")
    _add_config_args(p)
    p.add_argument("--gnuplot", action="store_true", help="also write plot.gp")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("map", help="iterate the sampled heading map and scan g'")
    p.add_argument("--h", type=float, default=0.05)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--phi0", type=float, default=0.2)
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--pitch", type=float, default=0.01)
    p.add_argument("--x-max", type=float, help="scan |x| <= X_MAX (default R)")
    p.add_argument("--phi-max", type=float, help="scan |phi| <= PHI_MAX (default pi/4 - 0.02)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("sweep", help="run a parameter grid")
    _add_config_args(p)
    p.add_argument("--vary", action="append", default=[], metavar="KEY=V1,V2|A:B:N")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tau-compare", help="tau notions along straight and arc paths")
    _add_config_args(p)
    p.set_defaults(func=cmd_tau_compare)

    p = sub.add_parser("presets", help="list named presets")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        if "unknown preset" in str(exc):
            print("available presets: " + ", ".join(sorted(PRESETS)), file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, TauNavError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
