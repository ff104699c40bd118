"""Island states, the per-island evolution step and ring migration."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .archive import REJECTED, Archive, CellIndex, ExtractorError, FeatureDescriptor, compute_features, discretize
from .memory import Solution, SolutionStore
from .pipeline import EVALUATED, OperatorContract, digest, generate_offspring
from .selection import EntropyState, PoolEntry, SelectionParams, adaptive_temperature, boltzmann_select, greedy_select

RING_FORWARD = "ring-forward"
BIDIRECTIONAL = "bidirectional"


@dataclass(frozen=True)
class MigrationPolicy:
    period: int = 10
    elite_fraction: float = 0.1
    diversity_gate: float | None = None
    direction: str = RING_FORWARD
    enabled: bool = True

    def __post_init__(self):
        if self.period < 1:
            raise ValueError("migration period must be >= 1")
        if not 0 < self.elite_fraction <= 1:
            raise ValueError("elite_fraction must lie in (0, 1]")
        if self.diversity_gate is not None and self.diversity_gate < 0:
            raise ValueError("diversity_gate must be >= 0")
        if self.direction not in (RING_FORWARD, BIDIRECTIONAL):
            raise ValueError(f"unknown migration direction {self.direction!r}")


def island_rng(run_seed: int, island_id: int) -> np.random.Generator:
    """Independent, reproducible stream for one island."""
    ss = np.random.SeedSequence(run_seed, spawn_key=(island_id,))
    return np.random.Generator(np.random.PCG64(ss))


@dataclass
class IslandState:
    island_id: int
    archive: Archive
    entropy_state: EntropyState
    rng: np.random.Generator

    def to_dict(self) -> dict[str, Any]:
        return {
            "island_id": self.island_id,
            "archive": self.archive.to_dict(),
            "window": self.entropy_state.to_list(),
            "rng_state": self.rng.bit_generator.state,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], window_size: int) -> "IslandState":
        rng = np.random.Generator(np.random.PCG64())
        rng.bit_generator.state = data["rng_state"]
        window = EntropyState(window_size, [tuple(c) for c in data["window"]])
        return cls(int(data["island_id"]), Archive.from_dict(data["archive"]), window, rng)


def cell_of(genome, descriptor: FeatureDescriptor, extractor) -> CellIndex:
    return discretize(compute_features(genome, descriptor, extractor), descriptor)


def init_islands(
    k: int,
    seed_solution: Solution,
    descriptor: FeatureDescriptor,
    run_seed: int,
    extractor,
    window_size: int = 32,
) -> list[IslandState]:
    """Create ``k`` islands whose archives each hold the seed in its cell.

    The seed's cell also opens every entropy window, so the first
    temperature is computed from a (degenerate) non-empty window.
    """
    if k < 1:
        raise ValueError("need at least one island")
    cell = cell_of(seed_solution.solution, descriptor, extractor)
    islands = []
    for i in range(k):
        archive = Archive(descriptor)
        archive.try_insert(seed_solution.solution_id, seed_solution.score, cell)
        window = EntropyState(window_size)
        window.push(cell)
        islands.append(IslandState(i, archive, window, island_rng(run_seed, i)))
    return islands


@dataclass
class StepContext:
    """Everything an island step needs besides its own state."""

    store: SolutionStore
    contract: OperatorContract
    task: Any
    selection: SelectionParams
    descriptor: FeatureDescriptor
    features: Callable[[Any], Any] | None = None
    greedy: bool = False
    lineage_depth: int = 5
    context_attempts: int = 10


@dataclass
class StepResult:
    selection_event: dict[str, Any]
    generation_event: dict[str, Any]
    durations: dict[str, float] = field(default_factory=dict)
    child: Solution | None = None


def evolve_step(island: IslandState, ctx: StepContext, iteration: int) -> StepResult:
    """Select a parent, run one generation attempt, and update the island's archive."""
    if not len(island.archive):
        raise ValueError(f"island {island.island_id} has an empty archive")
    entropy = island.entropy_state.entropy
    tau = adaptive_temperature(entropy, ctx.selection)
    pool = [
        PoolEntry(sid, score, ctx.store.get(sid).sample_cnt)
        for _, sid, score in island.archive.contents()
    ]
    if ctx.greedy:
        chosen, probs = greedy_select(pool)
    else:
        chosen, probs = boltzmann_select(pool, tau, island.rng, ctx.selection.repetition_penalty)
    weight = float(probs[[e.solution_id for e in pool].index(chosen)])
    parent = ctx.store.record_sampled(chosen, weight)
    selection_event = {
        "event": "selection",
        "iteration": iteration,
        "island_id": island.island_id,
        "tau": tau,
        "entropy": entropy,
        "chosen_id": chosen,
        "probabilities": {e.solution_id: float(p) for e, p in zip(pool, probs)},
    }

    off = generate_offspring(
        parent,
        ctx.store,
        ctx.contract,
        ctx.task,
        island.rng,
        island_id=island.island_id,
        iteration=iteration,
        max_depth=ctx.lineage_depth,
        attempts=ctx.context_attempts,
    )
    gen = {
        "event": "generation",
        "iteration": iteration,
        "island_id": island.island_id,
        "parent_id": parent.solution_id,
        "status": off.status,
        "reason": off.reason,
        "plan_digest": digest(off.plan.blueprint) if off.plan else None,
        "verify_status": off.verify_status or None,
        "child_id": None,
        "score": None,
        "cell": None,
        "archive_action": None,
        "displaced_id": None,
        "summary_digest": None,
    }
    child = off.solution
    if off.status == EVALUATED and child is not None:
        gen.update(child_id=child.solution_id, score=child.score, summary_digest=digest(child.summary))
        try:
            cell = cell_of(child.solution, ctx.descriptor, ctx.features or ctx.task.features)
        except ExtractorError as exc:
            gen.update(archive_action="feature-error", reason=str(exc))
        else:
            island.entropy_state.push(cell)
            action, displaced = island.archive.try_insert(child.solution_id, child.score, cell)
            gen.update(cell=list(cell), archive_action=action, displaced_id=displaced)
    return StepResult(selection_event, gen, off.durations, child)


def _neighbours(i: int, k: int, direction: str) -> list[int]:
    if k == 1:
        return []
    out = [(i + 1) % k]
    if direction == BIDIRECTIONAL and (i - 1) % k not in out:
        out.append((i - 1) % k)
    return out


def migrate(
    islands: list[IslandState],
    policy: MigrationPolicy,
    iteration: int,
    recell: Callable[[str, IslandState], CellIndex] | None = None,
) -> list[dict[str, Any]]:
    """Copy each island's top elites into its ring neighbours.

    Offers are computed from a snapshot taken before any insertion, so one
    round never relays an elite further than one hop. ``recell`` maps a
    solution to its cell on the destination; by default the source cell is
    reused, which is correct whenever islands share a descriptor.

    Returns one move record per offer: ``{from, to, solution_id, action}``.
    """
    if iteration % policy.period != 0:
        raise ValueError(f"iteration {iteration} is not a migration iteration (period {policy.period})")
    k = len(islands)
    offers = []
    for src in islands:
        elites = sorted(src.archive.contents(), key=lambda e: (-e[2], e[0]))
        n = max(1, math.ceil(policy.elite_fraction * len(elites)))
        offers.append(elites[:n])
    entropies = [isl.entropy_state.entropy for isl in islands]

    moves = []
    for i, src in enumerate(islands):
        for j in _neighbours(i, k, policy.direction):
            if policy.diversity_gate is not None and not abs(entropies[i] - entropies[j]) > policy.diversity_gate:
                continue
            dst = islands[j]
            for cell, sid, score in offers[i]:
                target = recell(sid, dst) if recell is not None else cell
                action, displaced = dst.archive.try_insert(sid, score, target)
                moves.append(
                    {"from": i, "to": j, "solution_id": sid, "score": score, "action": action, "displaced_id": displaced}
                )
    return moves


def accepted(moves: list[dict[str, Any]]) -> list[dict[str, Any]]:
    return [m for m in moves if m["action"] != REJECTED]


def union_best(islands: list[IslandState]) -> tuple[str, float] | None:
    best = None
    for isl in islands:
        b = isl.archive.best()
        if b is not None and (best is None or b[2] > best[1]):
            best = (b[1], b[2])
    return best
