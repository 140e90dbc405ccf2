"""Command line interface: ``slantlab run | catalog | check``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import catalog
from .config import ChartSpec, RunConfig, load_config
from .errors import ConfigError
from .runner import CHECKS, exit_status, report_json, report_text, run_catalog

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _render(config, entries, seed, fmt):
    return report_json(config, entries, seed) if fmt == "json" else report_text(config, entries, seed)


def cmd_run(args):
    try:
        config = load_config(args.config, known_checks=CHECKS)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seed = config.seed if args.seed is None else args.seed
    fmt = args.format or config.format
    entries = run_catalog(config, seed=seed, jobs=args.jobs)
    _emit(_render(config, entries, seed, fmt), args.out or config.output)
    return exit_status(entries, args.strict)


def cmd_catalog(args):
    for name in catalog.names():
        entry = catalog.CATALOG[name]
        tags = ",".join(entry.tags)
        print(f"{name:<22} {entry.description} [{tags}]")
    return EXIT_OK


def cmd_check(args):
    if args.chart not in catalog.CATALOG:
        print(f"config error: unknown catalog chart {args.chart!r}", file=sys.stderr)
        return EXIT_CONFIG
    names = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = [c for c in names if c not in CHECKS]
    if not names or unknown:
        print(f"config error: unknown or empty checks {unknown or names}", file=sys.stderr)
        return EXIT_CONFIG
    if args.resolution is not None and args.resolution < 2:
        print("config error: grid resolution must be at least 2", file=sys.stderr)
        return EXIT_CONFIG
    spec = ChartSpec(args.chart, args.chart, resolution=args.resolution)
    source = f"check {args.chart} {','.join(names)} {args.resolution}"
    config = RunConfig([spec], names, seed=args.seed, source=source)
    entries = run_catalog(config, seed=args.seed, jobs=args.jobs)
    _emit(_render(config, entries, args.seed, args.format), args.out)
    return exit_status(entries, args.strict)


def build_parser():
    p = argparse.ArgumentParser(prog="slantlab",
                                description="Numerical checks for slant-type submanifolds of R^{4m}.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the checks listed in a config file")
    r.add_argument("config")
    r.add_argument("--strict", action="store_true", help="treat skipped and non-conforming entries as failures")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--format", choices=("json", "text"), default=None)
    r.add_argument("--out", default=None)
    r.add_argument("--jobs", type=int, default=1, help="worker processes")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("catalog", help="list built-in charts")
    c.set_defaults(func=cmd_catalog)

    k = sub.add_parser("check", help="run checks on one catalog chart")
    k.add_argument("chart")
    k.add_argument("--checks", required=True, help="comma-separated check names")
    k.add_argument("--resolution", type=int, default=None)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--format", choices=("json", "text"), default="text")
    k.add_argument("--out", default=None)
    k.add_argument("--strict", action="store_true")
    k.add_argument("--jobs", type=int, default=1)
    k.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
