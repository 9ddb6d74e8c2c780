"""Command line entry point: ``maxreg <experiment> [--config path] [flags]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, parse_number, run
from .norms import parse_norm

log = logging.getLogger("maxreg")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="maxreg",
        description="Grid experiments on the uncentered maximal operator and total variation.",
    )
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", type=Path, help="key = value configuration file")
    p.add_argument("--out", type=Path, help="output directory (default: <out>/<experiment>)")
    p.add_argument("--grid-h", type=str, help="grid spacing, e.g. 0.015625 or 1/64")
    p.add_argument("--norm", type=str, help="linf | l1 | l2 | lp:<p> | rect:<w1,w2,...>")
    p.add_argument("--radius-cap", type=str, help="largest ball radius (local operator)")
    p.add_argument("--threads", type=int, help="worker threads for corpus items")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def load_config(args) -> ExperimentConfig:
    text = args.config.read_text() if args.config else ""
    overrides = {
        "experiment": args.experiment,
        "h": parse_number(args.grid_h) if args.grid_h else None,
        "norms": [parse_norm(args.norm)] if args.norm else None,
        "radius_cap": parse_number(args.radius_cap) if args.radius_cap else None,
        "threads": args.threads,
    }
    cfg = ExperimentConfig.from_text(text, **overrides)
    cfg.out = args.out or cfg.out or Path("maxreg-out") / args.experiment
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"maxreg: configuration error: {exc}", file=sys.stderr)
        return 2
    log.info("running %s", cfg.experiment)
    result = run(cfg)
    path = result.write(cfg.out, cfg)
    for c in result.checks:
        status = "PASS" if c.passed else "FAIL"
        line = f"{status} {c.name}: {c.value!r} (target {c.target})"
        if c.detail and not c.passed:
            line += f" -- {c.detail}"
        print(line)
    print(f"summary: {path}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
