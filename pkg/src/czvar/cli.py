"""Command line entry point.

Exit status: 0 when every criterion passes, 2 when some criterion fails,
1 on errors (bad config, I/O).
"""
from __future__ import annotations

import argparse
import logging
import sys

from .harness.config import ExperimentConfig
from .harness.experiments import EXPERIMENTS
from .harness.plotting import render_figures
from .harness.report import emit_report, format_criteria, load_report

log = logging.getLogger("czvar")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="czvar", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", help="JSON experiment config (defaults apply otherwise)")
        sp.add_argument("--out", default=f"out/{name}", help="output directory")
        sp.add_argument("--seed", type=int, help="master seed (overrides the config)")
        sp.add_argument("--threads", type=int, default=1, help="worker threads")
        sp.add_argument("--grid-doubling", type=int, dest="grid_doubling",
                        help="grid refinements after the base grid (overrides the config)")
        sp.add_argument("--figures", action="store_true", help="also render figures")
    rp = sub.add_parser("report", help="render figures and criteria from a saved report")
    rp.add_argument("--out", required=True, help="directory holding report.json")
    rp.add_argument("--config", help="ignored; accepted for a uniform interface")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.grid_doubling is not None:
        changes["grid_doubling"] = args.grid_doubling
    if changes:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), **changes})
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "report":
            report = load_report(args.out)
            for path in render_figures(report, args.out):
                log.info("wrote %s", path)
        else:
            cfg = _load_config(args)
            report = EXPERIMENTS[args.command](cfg, threads=max(1, args.threads))
            for path in emit_report(report, args.out):
                log.info("wrote %s", path)
            if args.figures:
                render_figures(report, args.out)
    except (OSError, ValueError, KeyError) as exc:
        print(f"czvar: error: {exc}", file=sys.stderr)
        return 1
    print(format_criteria(report))
    return 0 if report.passed else 2


if __name__ == "__main__":
    sys.exit(main())
