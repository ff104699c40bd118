"""Command line entry point: ``pesevo run|resume|inspect|compare``.

Exit codes: 0 success, 1 runtime error, 2 configuration/usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .engine import EVENTS_FILE, CheckpointError, Engine, read_events
from .report import InspectError, build_report, compare, format_table, inspect

log = logging.getLogger("pesevo")


def _finish(engine: Engine, result) -> int:
    engine.log.offsets()
    report = build_report(read_events(engine.output_dir / EVENTS_FILE), result.wall_time)
    engine.write_outputs(report)
    print(f"best {report['best']['solution_id']} score {report['best']['score']!r}")
    return 0


def cmd_run(args) -> int:
    config = load_config(args.config)
    seed = args.seed if args.seed is not None else os.environ.get("ENGINE_SEED")
    out = args.out or os.environ.get("ENGINE_OUT") or config.output_dir
    try:
        changes = {"output_dir": str(out)}
        if seed is not None:
            changes["seed"] = int(seed)
        config = config.with_overrides(**changes)
        engine = Engine(config, output_dir=out, keep_events=False)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), source=args.config) from None
    try:
        return _finish(engine, engine.run())
    finally:
        engine.close()


def cmd_resume(args) -> int:
    engine = Engine.resume(args.checkpoint)
    try:
        return _finish(engine, engine.run())
    finally:
        engine.close()


def cmd_inspect(args) -> int:
    print(inspect(args.run_dir, args.query), end="" if args.query.startswith(("entropy", "score")) else "\n")
    return 0


def cmd_compare(args) -> int:
    config = load_config(args.config)
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    try:
        rows = compare(config, strategies, args.seeds)
    except ValueError as exc:
        raise ConfigError(str(exc), source=args.config) from None
    print(format_table(rows))
    if args.json:
        Path(args.json).write_text(json.dumps(rows, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pesevo", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an evolution from a config file")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    r = sub.add_parser("resume", help="continue a run from a checkpoint")
    r.add_argument("--checkpoint", required=True)
    r.set_defaults(func=cmd_resume)

    r = sub.add_parser("inspect", help="query a finished run directory")
    r.add_argument("run_dir")
    r.add_argument("--query", required=True, help="best | lineage <id> | cell <i,j> | entropy-series | score-series")
    r.set_defaults(func=cmd_inspect)

    r = sub.add_parser("compare", help="compare strategies over several seeds")
    r.add_argument("--config", required=True)
    r.add_argument("--strategies", default="hybrid,greedy-topk")
    r.add_argument("--seeds", type=int, default=5)
    r.add_argument("--json", help="also write the table as JSON here")
    r.set_defaults(func=cmd_compare)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CheckpointError, InspectError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        log.debug("run failed", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
