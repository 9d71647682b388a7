"""Command line: ``opinion-oc {forward,optimize,mc,preset NAME} [--config F] [--out D] [--seed N]``.

Exit codes: 0 success, 2 configuration error, 3 solver or output failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, ExperimentConfig, load_config
from .forward import SolverError
from .kinetic import KineticError
from .runner import PRESET_DESCRIPTIONS, PRESETS, OutputError, preset_config, run_forward, run_mc, run_optimize

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value config file")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides 'out')")
    common.add_argument("--seed", type=int, metavar="N", help="random seed (overrides 'seed')")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress")
    p = argparse.ArgumentParser(prog="opinion-oc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("forward", parents=[common], help="uncontrolled forward solve")
    sub.add_parser("optimize", parents=[common], help="optimal control by the sweeping algorithm")
    sub.add_parser("mc", parents=[common], help="kinetic Monte Carlo simulation")
    pp = sub.add_parser("preset", parents=[common], help="run a reference experiment",
                        epilog="; ".join(f"{k}: {v}" for k, v in PRESET_DESCRIPTIONS.items()))
    pp.add_argument("name", choices=sorted(PRESETS))
    return p


def _resolve(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config:
        cfg = load_config(args.config, base=cfg)
    if args.command == "preset":
        cfg = preset_config(args.name, cfg)
    if args.out is not None:
        cfg.set("out", args.out)
    if args.seed is not None:
        cfg.set("seed", args.seed)
    return cfg.validate()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    cmd = args.command
    if cmd == "preset":
        cmd = "forward" if cfg.cost == "none" else "optimize"
    if cmd == "optimize" and cfg.cost == "none":
        print("config error: cost = none leaves nothing to optimize", file=sys.stderr)
        return EXIT_CONFIG
    runner = {"forward": run_forward, "optimize": run_optimize, "mc": run_mc}[cmd]
    try:
        res = runner(cfg, out=cfg.out)
    except (SolverError, KineticError, OutputError, OSError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if res.report is not None:
        h = res.report.cost_history
        print(f"J: {h[0]:.6g} -> {h[-1]:.6g} after {res.report.iterations} sweeps"
              f" ({'converged' if res.report.converged else 'not converged'})")
    print(f"wrote {len(res.files)} files to {cfg.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
