"""Deterministic stand-in operators: adaptive Gaussian mutation driven by lineage history."""

from __future__ import annotations

import math

import numpy as np

from ..memory import LineageContext, Solution
from ..pipeline import Candidate, EvalResult, OperatorContract, Plan
from .base import TaskSpec

SIGMA_MIN = 1e-5
SIGMA_MAX = 0.5
HISTORY = 10
GROW, SHRINK = 1.5, 0.75


def next_sigma(previous: float, deltas) -> float:
    """Step-size rule over the last ``HISTORY`` score deltas.

    Grows by 1.5 when more than a fifth of them improved, otherwise shrinks
    by 0.75. With no history the previous value is kept.
    """
    deltas = np.asarray(deltas, dtype=float)[-HISTORY:]
    if deltas.size == 0:
        sigma = previous
    elif np.count_nonzero(deltas > 0) / deltas.size > 0.2:
        sigma = previous * GROW
    else:
        sigma = previous * SHRINK
    return min(SIGMA_MAX, max(SIGMA_MIN, sigma))


def lineage_deltas(parent: Solution, context: LineageContext) -> list[float]:
    """Recent score changes along the lineage graph around ``parent``.

    Once the parent has children these are its own attempts (parent -> child),
    since ancestors are survivors and would overstate the success rate.
    Before that, the ancestor chain into the parent stands in.
    """
    if context.attempts:
        return [a.score - parent.score for a in context.attempts]
    chain = [e.score for e in context.entries] + [parent.score]
    return list(np.diff(chain))


class SyntheticOperators:
    """Planner/executor/summarizer triple for vector genomes.

    Step sizes are relative to each coordinate's bound width. ``sigma0`` is
    used for seeds and for parents carrying no ``sigma`` hint. The planner
    reads both the ancestor chain and the parent's recent attempts (when the
    context carries them), so repeated failures from one parent shrink the
    step even though failed children never become ancestors.
    """

    def __init__(self, task: TaskSpec, sigma0: float = 0.1, coord_prob: float | None = None):
        if task.genome_kind != "vector":
            raise ValueError(f"synthetic operators do not support {task.genome_kind!r} genomes")
        self.task = task
        self.sigma0 = sigma0
        self.coord_prob = coord_prob
        self.lo = np.array([b[0] for b in task.bounds], dtype=float)
        self.hi = np.array([b[1] for b in task.bounds], dtype=float)

    def plan(self, parent: Solution, context: LineageContext, task, rng: np.random.Generator) -> Plan:
        deltas = lineage_deltas(parent, context)
        # continue from the step size of the latest attempt made from this parent
        last = context.attempts[-1].metadata if context.attempts else parent.metadata
        previous = float(last.get("sigma", self.sigma0))
        sigma = next_sigma(previous, deltas)
        d = len(self.lo)
        p = self.coord_prob if self.coord_prob is not None else min(1.0, 1.0 / math.sqrt(d))
        mask = rng.random(d) < p
        if not mask.any():
            mask[rng.integers(d)] = True
        dims = np.flatnonzero(mask)
        recent = np.asarray(deltas[-HISTORY:])
        improved, steps = int(np.count_nonzero(recent > 0)), recent.size
        blueprint = (
            f"Perturb coordinates {dims.tolist()} with Gaussian step sigma={sigma:.4g} "
            f"(lineage improved on {improved}/{steps} recent steps)."
        )
        hints = {
            "sigma": repr(sigma),
            "dims": ",".join(str(i) for i in dims),
            "parent_score": repr(parent.score),
        }
        return Plan(blueprint, hints)

    def execute(self, plan: Plan, parent: Solution, task, rng: np.random.Generator) -> Candidate:
        x = np.array(parent.solution, dtype=float)
        sigma = float(plan.hints["sigma"])
        dims = [int(i) for i in plan.hints["dims"].split(",") if i]
        if sigma > 0 and dims:
            width = self.hi[dims] - self.lo[dims]
            x[dims] += rng.normal(0.0, 1.0, len(dims)) * sigma * width
        np.clip(x, self.lo, self.hi, out=x)
        return Candidate(x.tolist())

    def summarize(self, plan: Plan, candidate: Candidate, result: EvalResult, rng) -> str:
        delta = result.score - float(plan.hints["parent_score"])
        verdict = "improved" if delta > 0 else "no improvement"
        return f"delta={delta:+.6g} sigma={float(plan.hints['sigma']):.4g} {verdict}"

    def contract(self) -> OperatorContract:
        return OperatorContract(self.plan, self.execute, self.summarize)


def synthetic_operators(task: TaskSpec, sigma0: float = 0.1, coord_prob: float | None = None) -> OperatorContract:
    return SyntheticOperators(task, sigma0, coord_prob).contract()
