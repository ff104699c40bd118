"""Run reports, offline inspection of run directories and strategy comparison.

Everything here is derived from the event log; ``report.json`` is a cache of
:func:`build_report` and can always be regenerated.
"""

from __future__ import annotations

import io
import json
import statistics
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

from .config import STRATEGIES, RunConfig
from .engine import EVENTS_FILE, Engine, read_events
from .memory import Solution

ARCHIVED = ("inserted", "replaced")


class InspectError(LookupError):
    pass


def build_report(events: Sequence[dict[str, Any]], wall_time: float | None = None) -> dict[str, Any]:
    best: dict[str, Any] | None = None
    filled: dict[int, int] = {}
    last_sel: dict[int, dict[str, Any]] = {}
    totals = {
        "iterations": 0,
        "generations": 0,
        "evaluations": 0,
        "verify_failures": 0,
        "operator_failures": 0,
        "migration_offers": 0,
        "migration_accepted": 0,
    }

    def consider(sid, score, iteration):
        nonlocal best
        if best is None or score > best["score"]:
            best = {"solution_id": sid, "score": score, "iteration": iteration}

    for ev in events:
        kind = ev["event"]
        if kind == "init":
            filled = {i: 1 for i in range(ev["islands"])}
            consider(ev["seed_id"], ev["score"], 0)
        elif kind == "selection":
            last_sel[ev["island_id"]] = ev
        elif kind == "generation":
            totals["generations"] += 1
            status = ev["status"]
            if status == "evaluated":
                totals["evaluations"] += 1
                if ev["archive_action"] in ARCHIVED:
                    consider(ev["child_id"], ev["score"], ev["iteration"])
                if ev["archive_action"] == "inserted":
                    filled[ev["island_id"]] = filled.get(ev["island_id"], 0) + 1
            elif status == "verify-failed":
                totals["verify_failures"] += 1
            else:
                totals["operator_failures"] += 1
        elif kind == "migration":
            totals["migration_offers"] += len(ev["moves"])
            for m in ev["moves"]:
                if m["action"] != "rejected":
                    totals["migration_accepted"] += 1
                if m["action"] == "inserted":
                    filled[m["to"]] = filled.get(m["to"], 0) + 1
        elif kind == "iteration":
            totals["iterations"] = ev["iteration"]

    islands = []
    for i in sorted(filled):
        sel = last_sel.get(i)
        islands.append(
            {
                "island_id": i,
                "filled_cells": filled[i],
                "final_entropy": sel["entropy"] if sel else 0.0,
                "final_tau": sel["tau"] if sel else None,
            }
        )
    report = {"best": best, "islands": islands, "totals": totals}
    if wall_time is not None:
        report["wall_time"] = wall_time
    return report


def evaluations_to_target(events: Iterable[dict[str, Any]], target: float) -> int | None:
    """Evaluation count at which ``target`` was first reached (0 if the seed already meets it)."""
    for ev in events:
        if ev["event"] == "init" and ev["score"] >= target:
            return 0
        if ev["event"] == "generation" and ev["status"] == "evaluated" and ev["score"] >= target:
            return ev["evaluation_index"]
    return None


# -- inspection --------------------------------------------------------------


def _load_run(run_dir: Path) -> list[dict[str, Any]]:
    path = run_dir / EVENTS_FILE
    if not path.exists():
        raise InspectError(f"no {EVENTS_FILE} in {run_dir}")
    return read_events(path)


def _load_solutions(run_dir: Path) -> dict[str, Solution]:
    path = run_dir / "solutions.jsonl"
    if not path.exists():
        raise InspectError(f"no solutions.jsonl in {run_dir}")
    with open(path) as fh:
        sols = [Solution.from_dict(json.loads(line)) for line in fh if line.strip()]
    return {s.solution_id: s for s in sols}


def lineage(run_dir: str | Path, solution_id: str) -> list[dict[str, Any]]:
    """Ancestor chain of ``solution_id``, seed first, ending with the solution itself."""
    sols = _load_solutions(Path(run_dir))
    if solution_id not in sols:
        raise InspectError(f"unknown solution id {solution_id!r}")
    chain = []
    node: Solution | None = sols[solution_id]
    while node is not None:
        chain.append(
            {
                "solution_id": node.solution_id,
                "generation": node.generation,
                "score": node.score,
                "generate_plan": node.generate_plan,
                "summary": node.summary,
            }
        )
        node = sols[node.parent_id] if node.parent_id is not None else None
    return chain[::-1]


def cell(run_dir: str | Path, index: Sequence[int]) -> list[dict[str, Any]]:
    path = Path(run_dir) / "archives.json"
    if not path.exists():
        raise InspectError(f"no archives.json in {run_dir}")
    data = json.loads(path.read_text())
    out = []
    for isl in data["islands"]:
        for entry in isl["cells"]:
            if entry["index"] == list(index):
                out.append({"island_id": isl["island_id"], **entry})
    return out


def entropy_series(events: Iterable[dict[str, Any]]) -> list[tuple[int, int, float, float]]:
    return [
        (ev["iteration"], ev["island_id"], ev["entropy"], ev["tau"])
        for ev in events
        if ev["event"] == "selection"
    ]


def score_series(events: Iterable[dict[str, Any]]) -> list[tuple[int, float]]:
    return [(ev["iteration"], ev["best_score"]) for ev in events if ev["event"] == "iteration"]


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")
    return buf.getvalue()


def inspect(run_dir: str | Path, query: str) -> str:
    """Answer ``best``, ``lineage <id>``, ``cell <i,j>``, ``entropy-series`` or ``score-series``."""
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise InspectError(f"missing run directory {run_dir}")
    words = query.split(maxsplit=1)
    if not words:
        raise InspectError("empty query")
    head, arg = words[0], (words[1].strip() if len(words) > 1 else "")
    if head == "best":
        return json.dumps(build_report(_load_run(run_dir))["best"])
    if head == "lineage":
        return json.dumps(lineage(run_dir, arg), indent=2)
    if head == "cell":
        try:
            index = [int(v) for v in arg.replace(" ", "").split(",")]
        except ValueError:
            raise InspectError(f"bad cell index {arg!r}") from None
        return json.dumps(cell(run_dir, index), indent=2)
    if head == "entropy-series":
        return to_csv(("iteration", "island", "entropy", "tau"), entropy_series(_load_run(run_dir)))
    if head == "score-series":
        return to_csv(("iteration", "best_score"), score_series(_load_run(run_dir)))
    raise InspectError(f"unknown query {head!r}")


# -- comparison ----------------------------------------------------------------


def compare(config: RunConfig, strategies: Sequence[str], seeds: int, base_seed: int | None = None) -> list[dict[str, Any]]:
    """Run each strategy on seeds ``base_seed .. base_seed + seeds - 1``.

    Success means reaching ``config.target_score`` within
    ``config.max_evaluations`` offspring evaluations (or within the run when
    no budget is set). Runs stop early once the target is hit.
    """
    for s in strategies:
        if s not in STRATEGIES:
            raise ValueError(f"unknown strategy {s!r}; choose from {STRATEGIES}")
    if seeds < 1:
        raise ValueError("need at least one seed")
    base = config.seed if base_seed is None else base_seed
    rows = []
    for strategy in strategies:
        hits: list[int] = []
        bests: list[float] = []
        for k in range(seeds):
            cfg = config.with_overrides(strategy=strategy, seed=base + k, stop_at_target=True, scheduler="deterministic")
            engine = Engine(cfg)
            try:
                result = engine.run()
            finally:
                engine.close()
            n = evaluations_to_target(result.events, cfg.target_score)
            if n is not None and (cfg.max_evaluations is None or n <= cfg.max_evaluations):
                hits.append(n)
            bests.append(result.best.score)
        rows.append(
            {
                "strategy": strategy,
                "seeds": seeds,
                "success_rate": len(hits) / seeds,
                "median_evaluations_to_target": statistics.median(hits) if hits else None,
                "best_score": max(bests),
                "median_best_score": statistics.median(bests),
            }
        )
    return rows


def format_table(rows: Sequence[dict[str, Any]]) -> str:
    header = ("strategy", "seeds", "success_rate", "median_evals", "best_score")
    lines = ["  ".join(f"{h:>14}" for h in header)]
    for r in rows:
        med = r["median_evaluations_to_target"]
        lines.append(
            "  ".join(
                f"{v:>14}"
                for v in (
                    r["strategy"],
                    r["seeds"],
                    f"{r['success_rate']:.2f}",
                    "-" if med is None else f"{med:g}",
                    f"{r['best_score']:.6f}",
                )
            )
        )
    return "\n".join(lines)
