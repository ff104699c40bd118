"""Solution records and the lineage store.

The store is the evolutionary knowledge graph: every evaluated individual is
kept here with a ``parent_id`` pointer, whether or not an archive accepted it.
"""

from __future__ import annotations

import threading
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Any

Genome = str | list[float]


class StoreError(KeyError):
    """Base class for store errors."""


class DuplicateIdError(StoreError):
    pass


class UnknownParentError(StoreError):
    pass


class UnknownIdError(StoreError):
    pass


@dataclass
class Solution:
    """One individual of the population."""

    solution: Genome = ""
    solution_id: str = ""
    generate_plan: str = ""
    parent_id: str | None = None
    island_id: int = 0
    iteration: int = 0
    timestamp: float = field(default_factory=time.time)
    generation: int = 0
    sample_cnt: int = 0
    sample_weight: float = 0.0
    score: float = 0.0
    evaluation: str = ""
    summary: str = ""
    metadata: dict[str, str] = field(default_factory=dict)

    @property
    def genome_kind(self) -> str:
        return "code" if isinstance(self.solution, str) else "vector"

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        if not isinstance(self.solution, str):
            d["solution"] = [float(x) for x in self.solution]
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Solution":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown Solution fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class LineageEntry:
    solution_id: str
    generate_plan: str
    summary: str
    score: float
    metadata: dict[str, str] = field(default_factory=dict, compare=False)

    @classmethod
    def of(cls, s: Solution) -> "LineageEntry":
        return cls(s.solution_id, s.generate_plan, s.summary, s.score, dict(s.metadata))


@dataclass(frozen=True)
class LineageContext:
    """Ancestors of a solution, oldest first.

    ``attempts`` optionally lists the most recent direct children of the
    queried solution (oldest first); it is empty unless explicitly requested.
    """

    entries: tuple[LineageEntry, ...] = ()
    attempts: tuple[LineageEntry, ...] = ()

    @property
    def depth(self) -> int:
        return len(self.entries)


class SolutionStore:
    """Thread-safe, id-addressed store of solutions with lineage queries.

    Ids are assigned by :meth:`next_id` as ``sol-000001``, ``sol-000002``...
    so that runs with the same seed produce diffable logs.
    """

    def __init__(self) -> None:
        self._solutions: dict[str, Solution] = {}
        self._children: dict[str, list[str]] = {}
        self._counter = 0
        self._lock = threading.RLock()

    def __len__(self) -> int:
        return len(self._solutions)

    def __contains__(self, solution_id: str) -> bool:
        return solution_id in self._solutions

    def __iter__(self):
        with self._lock:
            return iter(list(self._solutions.values()))

    def next_id(self) -> str:
        with self._lock:
            self._counter += 1
            return f"sol-{self._counter:06d}"

    def insert(self, s: Solution) -> str:
        """Store ``s`` and return its id.

        Raises:
            DuplicateIdError: the id is already taken.
            UnknownParentError: ``parent_id`` is set but not stored.
        """
        with self._lock:
            if not s.solution_id:
                s.solution_id = self.next_id()
            if s.solution_id in self._solutions:
                raise DuplicateIdError(s.solution_id)
            if s.parent_id is not None:
                parent = self._solutions.get(s.parent_id)
                if parent is None:
                    raise UnknownParentError(s.parent_id)
                if s.generation != parent.generation + 1:
                    raise ValueError(
                        f"{s.solution_id}: generation {s.generation} != parent generation + 1"
                    )
                self._children.setdefault(s.parent_id, []).append(s.solution_id)
            elif s.generation != 0:
                raise ValueError(f"{s.solution_id}: seed must have generation 0")
            self._solutions[s.solution_id] = s
            return s.solution_id

    def get(self, solution_id: str) -> Solution:
        try:
            return self._solutions[solution_id]
        except KeyError:
            raise UnknownIdError(solution_id) from None

    def get_lineage(self, solution_id: str, max_depth: int = 5) -> LineageContext:
        """Return up to ``max_depth`` nearest ancestors of ``solution_id``, oldest first."""
        if max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        chain: list[LineageEntry] = []
        with self._lock:
            node = self.get(solution_id)
            while node.parent_id is not None and len(chain) < max_depth:
                node = self._solutions[node.parent_id]
                chain.append(LineageEntry.of(node))
        chain.reverse()
        return LineageContext(tuple(chain))

    def ancestor_chain(self, solution_id: str) -> list[Solution]:
        """Full chain from ``solution_id`` back to its seed, queried solution first."""
        with self._lock:
            node = self.get(solution_id)
            out = [node]
            while node.parent_id is not None:
                node = self._solutions[node.parent_id]
                out.append(node)
        return out

    def children(self, solution_id: str) -> list[str]:
        self.get(solution_id)
        with self._lock:
            return list(self._children.get(solution_id, ()))

    def recent_children(self, solution_id: str, limit: int) -> tuple[LineageEntry, ...]:
        """The ``limit`` most recently stored children of ``solution_id``, oldest first."""
        if limit <= 0:
            return ()
        with self._lock:
            ids = self.children(solution_id)[-limit:]
            return tuple(LineageEntry.of(self._solutions[i]) for i in ids)

    def record_sampled(self, solution_id: str, weight: float) -> Solution:
        with self._lock:
            s = self.get(solution_id)
            s.sample_cnt += 1
            s.sample_weight = float(weight)
            return s

    def to_dict(self) -> dict[str, Any]:
        with self._lock:
            return {
                "counter": self._counter,
                "solutions": [s.to_dict() for s in self._solutions.values()],
            }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SolutionStore":
        store = cls()
        # Insertion order in snapshots is creation order, so parents precede children.
        for d in data["solutions"]:
            store.insert(Solution.from_dict(d))
        store._counter = int(data["counter"])
        return store
