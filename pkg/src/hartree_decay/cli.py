"""Command-line entry point.

    hartree-decay run CONFIG [--out DIR] [--set key=value]... [--only SCENARIO] [--seed N] [--workers N]
    hartree-decay suite [--only SCENARIO] [--dimension D] [--fast] [--seed N] [--workers N]

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 numerical abort.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import scipy.fft as sfft

from .config import SCENARIOS, ConfigError, load_config

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3

log = logging.getLogger("hartree_decay")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hartree-decay", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one scenario from a TOML config")
    r.add_argument("config", help="path to the TOML config")
    r.add_argument("--out", help="output directory (default: output.directory from the config)")
    r.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config value, e.g. --set time.dt=0.05 (repeatable)")
    r.add_argument("--only", choices=SCENARIOS, help="run this scenario with the config layered on its preset")
    r.add_argument("--seed", type=int, help="seed for randomised corpora")
    r.add_argument("--workers", type=int, default=1, help="FFT worker threads")

    s = sub.add_parser("suite", help="evaluate the acceptance matrix")
    s.add_argument("--only", help="restrict to criteria exercising this scenario (or a criterion number)")
    s.add_argument("--dimension", type=int, choices=(1, 2, 3), help="restrict to criteria in this dimension")
    s.add_argument("--fast", action="store_true", help="use the cheap d=3 grids")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1, help="FFT worker threads")
    s.add_argument("--json", dest="json_out", help="write the criterion results to this file")
    return p


def _cmd_run(args: argparse.Namespace) -> int:
    from .scenarios import run_scenario

    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    try:
        cfg = load_config(args.config, overrides, scenario=args.only)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out or cfg.get("output.directory", "out"))
    log.info("running %s from %s into %s", cfg.scenario, cfg.source, out)
    try:
        summary = run_scenario(cfg, out)
    except ValueError as exc:
        # precondition violations raised by the modules (e.g. unresolved mollifier)
        print(f"precondition error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RuntimeError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    for name, ok in summary.checks.items():
        print(f"{summary.scenario}.{name}: {'PASS' if ok else 'FAIL'}")
    for name, fit in summary.exponents.items():
        print(f"{summary.scenario}.{name}: exponent {fit['exponent']:.4f}, r2 {fit['r2']:.5f}")
    if summary.aborted:
        print(f"numerical abort: {summary.aborted}", file=sys.stderr)
    print(f"summary written to {out / 'summary.json'} ({summary.wall_seconds:.1f} s)")
    return summary.exit_code


def _cmd_suite(args: argparse.Namespace) -> int:
    from .acceptance import run_criteria, select_criteria
    from .config import SCENARIOS as names

    if args.only is not None and args.only not in names and not args.only.isdigit():
        print(f"config error: unknown scenario {args.only!r}", file=sys.stderr)
        return EXIT_CONFIG
    if not select_criteria(args.only, args.dimension):
        print("no criteria match the selection", file=sys.stderr)
        return EXIT_CONFIG

    def report(r):
        print(r.line(), flush=True)

    results = run_criteria(args.only, args.dimension, args.fast, args.seed, report)
    if args.json_out:
        payload = [{"number": r.number, "title": r.title, "passed": r.passed, "parts": r.parts,
                    "metrics": r.metrics} for r in results]
        Path(args.json_out).write_text(json.dumps(payload, indent=2, default=str) + "\n")
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_CHECK if failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    with sfft.set_workers(max(1, args.workers)):
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_suite(args)


if __name__ == "__main__":
    sys.exit(main())
