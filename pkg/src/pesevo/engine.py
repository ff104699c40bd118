"""The main evolutionary loop with event logging, checkpointing and resume."""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .archive import FeatureDescriptor, single_cell_descriptor
from .config import RunConfig, config_from_dict
from .islands import (
    IslandState,
    StepContext,
    StepResult,
    accepted,
    cell_of,
    evolve_step,
    init_islands,
    migrate,
    union_best,
)
from .memory import Solution, SolutionStore
from .pipeline import OperatorContract
from .tasks import TaskSpec, make_task, model_endpoint_operators, synthetic_operators
from .tasks.endpoint import load_templates

logger = logging.getLogger(__name__)

EVENTS_FILE = "events.jsonl"
TIMINGS_FILE = "timings.jsonl"


class TaskError(RuntimeError):
    """The task cannot be evaluated (e.g. the seed fails verification)."""


class CheckpointError(RuntimeError):
    pass


def dumps(obj: Any) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


class EventLog:
    """Append-only JSON-lines log.

    With ``path=None`` records are only kept in memory; otherwise they are
    also written through to disk. Wall-clock durations go to a separate sink
    so the main log stays byte-reproducible.
    """

    def __init__(self, path: str | Path | None = None, timings_path: str | Path | None = None, keep: bool = True):
        self.records: list[dict[str, Any]] = []
        self.keep = keep or path is None
        self._fh = open(path, "ab") if path is not None else None
        self._th = open(timings_path, "ab") if timings_path is not None else None

    def emit(self, record: dict[str, Any]) -> None:
        if self.keep:
            self.records.append(record)
        if self._fh is not None:
            self._fh.write((dumps(record) + "\n").encode())

    def timing(self, record: dict[str, Any]) -> None:
        if self._th is not None:
            self._th.write((dumps(record) + "\n").encode())

    def offsets(self) -> tuple[int, int]:
        for fh in (self._fh, self._th):
            if fh is not None:
                fh.flush()
        return (
            self._fh.tell() if self._fh is not None else 0,
            self._th.tell() if self._th is not None else 0,
        )

    def close(self) -> None:
        for fh in (self._fh, self._th):
            if fh is not None:
                fh.close()


def read_events(path: str | Path) -> list[dict[str, Any]]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def build_task(config: RunConfig) -> TaskSpec:
    return make_task(config.task.name, config.task.params)


def build_operators(config: RunConfig, task: TaskSpec) -> OperatorContract:
    op = config.operators
    if op.kind == "synthetic":
        return synthetic_operators(task, op.sigma0, op.coord_prob)
    templates = load_templates(op.templates) if op.templates else None
    return model_endpoint_operators(op.url, task, templates, timeout=op.timeout, max_in_flight=op.max_in_flight)


def _constant_feature(genome) -> tuple[float]:
    return (0.0,)


@dataclass
class RunResult:
    best: Solution
    islands: list[IslandState]
    store: SolutionStore
    events: list[dict[str, Any]]
    iteration: int
    wall_time: float


class Engine:
    """Drives ``iterations`` rounds of island steps with periodic migration.

    ``task`` and ``contract`` may be passed directly to run custom tasks or
    operators; otherwise they are built from the config.
    """

    def __init__(
        self,
        config: RunConfig,
        *,
        task: TaskSpec | None = None,
        contract: OperatorContract | None = None,
        output_dir: str | Path | None = None,
        keep_events: bool = True,
    ):
        self.config = config
        self.task = task or build_task(config)
        self.contract = contract or build_operators(config, self.task)
        self.descriptor = self._descriptor()
        self.features = _constant_feature if config.strategy == "no-map-elites" else self.task.features
        self.k = 1 if config.strategy == "no-islands" else config.islands
        self.output_dir = Path(output_dir) if output_dir is not None else None
        self.keep_events = keep_events
        self.store = SolutionStore()
        self.islands: list[IslandState] = []
        self.iteration = 0
        self.evaluations = 0
        self.log: EventLog | None = None
        self.ctx = StepContext(
            store=self.store,
            contract=self.contract,
            task=self.task,
            selection=config.selection,
            descriptor=self.descriptor,
            features=self.features,
            greedy=config.strategy == "greedy-topk",
            lineage_depth=config.lineage_depth,
            context_attempts=config.context_attempts,
        )

    def _descriptor(self) -> FeatureDescriptor:
        if self.config.strategy == "no-map-elites":
            return single_cell_descriptor()
        return self.config.descriptor or self.task.descriptor

    # -- lifecycle -------------------------------------------------------

    def _open_log(self, truncate_at: tuple[int, int] | None = None) -> None:
        if self.output_dir is None:
            self.log = EventLog(None)
            return
        self.output_dir.mkdir(parents=True, exist_ok=True)
        events = self.output_dir / EVENTS_FILE
        timings = self.output_dir / TIMINGS_FILE
        if truncate_at is None:
            for p in (events, timings):
                p.unlink(missing_ok=True)
        else:
            for p, size in zip((events, timings), truncate_at):
                if not p.exists() or p.stat().st_size < size:
                    raise CheckpointError(f"{p} is shorter than the checkpoint offset {size}")
                with open(p, "r+b") as fh:
                    fh.truncate(size)
        self.log = EventLog(events, timings, keep=self.keep_events)

    def initialize(self) -> None:
        self._open_log()
        genome = self.task.seed_genome()
        ok, why = self.task.verify(genome)
        if not ok:
            raise TaskError(f"seed genome fails verification: {why}")
        try:
            result = self.task.evaluate(genome)
        except Exception as exc:
            raise TaskError(f"seed evaluation failed: {exc}") from exc
        seed = Solution(
            solution=genome,
            solution_id=self.store.next_id(),
            generate_plan="seed",
            summary="initial solution",
            score=result.score,
            evaluation=result.logs,
            iteration=0,
            generation=0,
        )
        self.store.insert(seed)
        self.islands = init_islands(
            self.k, seed, self.descriptor, self.config.seed, self.features, self.config.selection.entropy_window
        )
        cell = self.islands[0].archive.contents()[0][0]
        self.log.emit(
            {
                "event": "init",
                "iteration": 0,
                "islands": self.k,
                "seed_id": seed.solution_id,
                "score": seed.score,
                "cell": list(cell),
                "strategy": self.config.strategy,
            }
        )

    # -- main loop -------------------------------------------------------

    def _record(self, step: StepResult) -> None:
        gen = step.generation_event
        if gen["status"] == "evaluated":
            self.evaluations += 1
        gen["evaluation_index"] = self.evaluations if gen["status"] == "evaluated" else None
        self.log.emit(step.selection_event)
        self.log.emit(gen)
        self.log.timing({"iteration": gen["iteration"], "island_id": gen["island_id"], "durations": step.durations})

    def _step_islands(self, iteration: int) -> None:
        if self.config.scheduler == "parallel" and self.k > 1:
            with ThreadPoolExecutor(max_workers=self.k) as pool:
                steps = list(pool.map(lambda isl: evolve_step(isl, self.ctx, iteration), self.islands))
            for step in steps:
                self._record(step)
        else:
            for isl in self.islands:
                self._record(evolve_step(isl, self.ctx, iteration))

    def _recell(self, solution_id: str, dst: IslandState):
        return cell_of(self.store.get(solution_id).solution, dst.archive.descriptor, self.features)

    def _migrate(self, iteration: int) -> None:
        before = union_best(self.islands)
        moves = migrate(self.islands, self.config.migration, iteration, self._recell)
        after = union_best(self.islands)
        self.log.emit(
            {
                "event": "migration",
                "iteration": iteration,
                "moves": moves,
                "accepted": len(accepted(moves)),
                "best_before": before[1],
                "best_after": after[1],
            }
        )

    def _done(self, best_score: float) -> bool:
        cfg = self.config
        if cfg.stop_at_target and best_score >= cfg.target_score:
            return True
        return cfg.max_evaluations is not None and self.evaluations >= cfg.max_evaluations

    def run(self, stop_after: int | None = None) -> RunResult:
        """Run (or continue) to the configured iteration count.

        ``stop_after`` halts after that iteration as if the process had been
        interrupted; used to exercise checkpoint/resume.
        """
        if not self.islands:
            self.initialize()
        t0 = time.perf_counter()
        cfg = self.config
        best_id, best_score = union_best(self.islands)
        try:
            if self.iteration == 0 and self._done(best_score):
                return self._result(t0)
            for it in range(self.iteration + 1, cfg.iterations + 1):
                self._step_islands(it)
                if cfg.migration.enabled and self.k > 1 and it % cfg.migration.period == 0:
                    self._migrate(it)
                best_id, best_score = union_best(self.islands)
                self.log.emit({"event": "iteration", "iteration": it, "best_id": best_id, "best_score": best_score})
                self.iteration = it
                if cfg.checkpoint_every and it % cfg.checkpoint_every == 0 and self.output_dir is not None:
                    self.save_checkpoint(self.output_dir / f"checkpoint-{it}.json")
                if self._done(best_score) or (stop_after is not None and it >= stop_after):
                    break
            return self._result(t0)
        finally:
            self.log.offsets()

    def _result(self, t0: float) -> RunResult:
        best_id, _ = union_best(self.islands)
        return RunResult(
            best=self.store.get(best_id),
            islands=self.islands,
            store=self.store,
            events=self.log.records,
            iteration=self.iteration,
            wall_time=time.perf_counter() - t0,
        )

    def close(self) -> None:
        if self.log is not None:
            self.log.close()

    # -- persistence -----------------------------------------------------

    def state_dict(self) -> dict[str, Any]:
        events_offset, timings_offset = self.log.offsets()
        return {
            "version": 1,
            "run_config": self.config.to_dict(),
            "iteration": self.iteration,
            "evaluations": self.evaluations,
            "islands": [isl.to_dict() for isl in self.islands],
            "store": self.store.to_dict(),
            "events_offset": events_offset,
            "timings_offset": timings_offset,
        }

    def save_checkpoint(self, path: str | Path) -> Path:
        path = Path(path)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(dumps(self.state_dict()))
        os.replace(tmp, path)
        return path

    @classmethod
    def resume(
        cls,
        checkpoint: str | Path,
        *,
        task: TaskSpec | None = None,
        contract: OperatorContract | None = None,
        output_dir: str | Path | None = None,
    ) -> "Engine":
        """Rebuild an engine from a checkpoint; the event log is cut back to the checkpoint offset."""
        checkpoint = Path(checkpoint)
        try:
            state = json.loads(checkpoint.read_text())
            config = config_from_dict(state["run_config"])
            engine = cls(config, task=task, contract=contract, output_dir=output_dir or checkpoint.parent)
            engine.store = SolutionStore.from_dict(state["store"])
            engine.ctx.store = engine.store
            window = config.selection.entropy_window
            engine.islands = [IslandState.from_dict(d, window) for d in state["islands"]]
            engine.iteration = int(state["iteration"])
            engine.evaluations = int(state["evaluations"])
            offsets = (int(state["events_offset"]), int(state["timings_offset"]))
        except CheckpointError:
            raise
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CheckpointError(f"corrupt checkpoint {checkpoint}: {exc}") from exc
        if len(engine.islands) != engine.k:
            raise CheckpointError("checkpoint island count does not match its config")
        engine._open_log(truncate_at=offsets if engine.output_dir is not None else None)
        return engine

    def write_outputs(self, report: dict[str, Any] | None = None) -> None:
        """Write archives.json, solutions.jsonl and (if given) report.json."""
        if self.output_dir is None:
            return
        out = self.output_dir
        (out / "archives.json").write_text(
            json.dumps({"iteration": self.iteration, "islands": [
                {"island_id": isl.island_id, **isl.archive.to_dict()} for isl in self.islands
            ]}, indent=1)
        )
        with open(out / "solutions.jsonl", "w") as fh:
            for s in self.store:
                fh.write(dumps(s.to_dict()) + "\n")
        if report is not None:
            (out / "report.json").write_text(json.dumps(report, indent=2))


def run(config: RunConfig, output_dir: str | Path | None = None, **kwargs) -> RunResult:
    engine = Engine(config, output_dir=output_dir, **kwargs)
    try:
        return engine.run()
    finally:
        engine.close()


__all__ = ["CheckpointError", "Engine", "EventLog", "RunResult", "TaskError", "read_events", "run"]
