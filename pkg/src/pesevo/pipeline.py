"""The Plan -> Execute -> Verify -> Evaluate -> Summarize generation kernel.

Operators are plain callables bundled in an :class:`OperatorContract`:

* ``planner(parent, context, task, rng) -> Plan``
* ``executor(plan, parent, task, rng) -> Candidate``
* ``summarizer(plan, candidate, result, rng) -> str``

The engine never hands operators the store; lineage reaches the planner only
through :func:`assemble_context`.
"""

from __future__ import annotations

import ast
import hashlib
import logging
import math
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .memory import LineageContext, Solution, SolutionStore

logger = logging.getLogger(__name__)

VERIFY_FAILED = "verify-failed"
OPERATOR_FAILURE = "operator-failure"
EVALUATED = "evaluated"


@dataclass(frozen=True)
class Plan:
    blueprint: str
    hints: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.blueprint:
            raise ValueError("plan blueprint must be non-empty")


@dataclass(frozen=True)
class Candidate:
    genome: Any
    verify_log: str = ""


@dataclass(frozen=True)
class EvalResult:
    score: float
    logs: str = ""
    feasible: bool = True
    aux_metrics: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise ValueError("evaluation score must be finite")


class OperatorFailure(Exception):
    """An operator role raised or returned something unusable."""

    def __init__(self, role: str, reason: str):
        super().__init__(f"{role}: {reason}")
        self.role = role
        self.reason = reason


@dataclass
class OperatorContract:
    planner: Callable[..., Plan]
    executor: Callable[..., Candidate]
    summarizer: Callable[..., str]


# -- verification -----------------------------------------------------------


def verify_vector(genome: Any, dim: int, bounds: Sequence[tuple[float, float]]) -> tuple[bool, str]:
    if isinstance(genome, str):
        return False, "wrong-genome-kind"
    try:
        a = np.asarray(genome, dtype=float)
    except (TypeError, ValueError):
        return False, "not-numeric"
    if a.ndim != 1 or a.size != dim:
        return False, "dimension-mismatch"
    if not np.all(np.isfinite(a)):
        return False, "non-finite"
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    if np.any(a < lo) or np.any(a > hi):
        return False, "out-of-bounds"
    return True, ""


def verify_python_syntax(genome: Any) -> tuple[bool, str]:
    if not isinstance(genome, str):
        return False, "wrong-genome-kind"
    try:
        ast.parse(genome)
    except SyntaxError as exc:
        return False, f"syntax-error: line {exc.lineno}: {exc.msg}"
    return True, ""


def verify(candidate: Candidate, task) -> tuple[bool, str]:
    """Cheap pre-evaluation check; never raises."""
    try:
        return task.verify(candidate.genome)
    except Exception as exc:  # a broken checker counts as a failed check
        return False, f"verifier-error: {exc}"


# -- kernel -----------------------------------------------------------------


def digest(text: str) -> str:
    return hashlib.sha1(text.encode()).hexdigest()[:12]


def assemble_context(store: SolutionStore, parent: Solution, max_depth: int, attempts: int = 0) -> LineageContext:
    """Ancestors of ``parent`` (oldest first); the parent itself travels separately.

    With ``attempts > 0`` the parent's most recent children are attached as
    well, so a planner can see how earlier tries from this parent went.
    """
    ancestors = store.get_lineage(parent.solution_id, max_depth) if max_depth > 0 else LineageContext()
    return LineageContext(ancestors.entries, store.recent_children(parent.solution_id, attempts))


@dataclass
class Offspring:
    status: str
    parent_id: str
    solution: Solution | None = None
    plan: Plan | None = None
    result: EvalResult | None = None
    reason: str = ""
    verify_status: str = ""
    durations: dict[str, float] = field(default_factory=dict)


def _call(role: str, fn, *args):
    try:
        return fn(*args)
    except OperatorFailure:
        raise
    except Exception as exc:
        raise OperatorFailure(role, f"{type(exc).__name__}: {exc}") from exc


def generate_offspring(
    parent: Solution,
    store: SolutionStore,
    contract: OperatorContract,
    task,
    rng: np.random.Generator,
    *,
    island_id: int,
    iteration: int,
    max_depth: int = 5,
    attempts: int = 0,
) -> Offspring:
    """Run one full generation attempt from ``parent``.

    On success the child is stored (even if no archive will accept it later).
    Verification failures and operator failures store nothing.
    """
    out = Offspring(status=OPERATOR_FAILURE, parent_id=parent.solution_id)
    clock = time.perf_counter
    try:
        t0 = clock()
        context = assemble_context(store, parent, max_depth, attempts)
        plan = _call("planner", contract.planner, parent, context, task, rng)
        if not isinstance(plan, Plan):
            raise OperatorFailure("planner", "did not return a Plan")
        out.plan = plan
        t1 = clock()
        candidate = _call("executor", contract.executor, plan, parent, task, rng)
        if not isinstance(candidate, Candidate):
            raise OperatorFailure("executor", "did not return a Candidate")
        t2 = clock()
        ok, why = verify(candidate, task)
        t3 = clock()
        out.durations.update(plan=t1 - t0, execute=t2 - t1, verify=t3 - t2)
        if not ok:
            out.status, out.reason, out.verify_status = VERIFY_FAILED, why, f"fail:{why}"
            return out
        out.verify_status = "ok"
        result = task.evaluate(candidate.genome)
        t4 = clock()
        out.result = result
        summary = _call("summarizer", contract.summarizer, plan, candidate, result, rng)
        if not isinstance(summary, str) or not summary.strip():
            raise OperatorFailure("summarizer", "empty summary")
        t5 = clock()
        out.durations.update(evaluate=t4 - t3, summarize=t5 - t4)
    except OperatorFailure as exc:
        logger.info("operator failure on parent %s: %s", parent.solution_id, exc)
        out.status, out.reason = OPERATOR_FAILURE, f"{exc.role}:{exc.reason}"
        return out

    genome = candidate.genome if isinstance(candidate.genome, str) else [float(x) for x in candidate.genome]
    child = Solution(
        solution=genome,
        solution_id=store.next_id(),
        generate_plan=plan.blueprint,
        parent_id=parent.solution_id,
        island_id=island_id,
        iteration=iteration,
        generation=parent.generation + 1,
        score=float(result.score),
        evaluation=result.logs,
        summary=summary,
        metadata=dict(plan.hints),
    )
    store.insert(child)
    out.status, out.solution = EVALUATED, child
    return out
