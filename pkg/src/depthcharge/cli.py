"""Command line: ``python -m depthcharge run|list|show|serve``."""
from __future__ import annotations

import argparse
import asyncio
import logging
import os
import sys
from pathlib import Path

import yaml

from . import scenarios
from .scenarios import ScenarioError

OUT_DIR_ENV = "DEPTHCHARGE_OUT_DIR"

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INVALID = 2


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="depthcharge", description="Depth-priced hash table scenarios and endpoint.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario file or builtin and check its bounds")
    r.add_argument("scenario", help="path to a scenario YAML file, or a builtin name")
    r.add_argument("--seed", type=int, default=None, help="run seed (default: the scenario's workload.rng_seed)")
    r.add_argument("--backend", choices=("ledger", "pow"), default=None, help="override the scenario's RB backend")
    r.add_argument("--trace", type=Path, default=None, help="write the per-request trace CSV here")
    r.add_argument("--out", type=Path, default=None,
                   help=f"write the summary here (default: ${OUT_DIR_ENV}/<name>-seed<N>.<ext>, else stdout)")
    r.add_argument("--format", choices=("structured", "csv"), default="structured")

    sub.add_parser("list", help="list builtin scenarios")
    s = sub.add_parser("show", help="print a builtin scenario as YAML")
    s.add_argument("name")

    v = sub.add_parser("serve", help="run the network endpoint")
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--port", type=int, default=7878)
    v.add_argument("--index-count", type=int, default=1024)
    v.add_argument("--hash-seed", type=int, default=0)
    v.add_argument("--backend", choices=("ledger", "pow"), default="pow")
    v.add_argument("--unit-work", type=int, default=256)
    v.add_argument("--ttl", type=float, default=300.0, help="challenge expiry in seconds")
    return p


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as e:
        raise ScenarioError(f"cannot write {path}: {e}") from None


def cmd_run(args) -> int:
    sc = scenarios.resolve(args.scenario)
    summary = scenarios.run(sc, seed=args.seed, backend=args.backend, trace=args.trace is not None)
    text = scenarios.report(summary, args.format)
    out = args.out
    if out is None and os.environ.get(OUT_DIR_ENV):
        ext = "json" if args.format == "structured" else "csv"
        out = Path(os.environ[OUT_DIR_ENV]) / f"{sc.name}-seed{summary.seed}.{ext}"
    if out is None:
        sys.stdout.write(text)
    else:
        _write(out, text)
    if args.trace is not None:
        _write(args.trace, scenarios.trace_csv(summary))
    for c in summary.checks:
        if not c["pass"]:
            print(f"check failed: {c['name']} measured={c['measured']} bound={c['bound']}", file=sys.stderr)
    return EXIT_OK if summary.passed else EXIT_VIOLATION


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "list":
            for name in sorted(scenarios.BUILTINS):
                print(name)
            return EXIT_OK
        if args.command == "show":
            scenarios.builtin(args.name)
            sys.stdout.write(yaml.safe_dump(scenarios.BUILTINS[args.name], sort_keys=False))
            return EXIT_OK
        from .service import run_endpoint

        asyncio.run(run_endpoint(args.index_count, args.host, args.port, args.backend,
                                 args.unit_work, args.ttl, args.hash_seed))
        return EXIT_OK
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except KeyboardInterrupt:
        return EXIT_OK
