"""Circle packing in the unit square: maximise the sum of radii of n disjoint circles.

A genome is a flat list ``[x0, y0, r0, x1, y1, r1, ...]``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

from ..archive import FeatureDescriptor, FeatureDim
from ..pipeline import EvalResult, verify_vector
from .base import TaskSpec

# Best published sum of radii per instance size; used as the score normaliser.
BEST_KNOWN = {26: 2.6359}


def as_circles(genome: Sequence[float], n: int) -> np.ndarray:
    a = np.asarray(genome, dtype=float)
    if a.size != 3 * n:
        raise ValueError(f"expected {n} circles ({3 * n} values), got {a.size} values")
    return a.reshape(n, 3)


def violations(circles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-circle containment deficit and per-pair (i<j) overlap depth."""
    x, y, r = circles[:, 0], circles[:, 1], circles[:, 2]
    contain = (
        np.maximum(0.0, r - x)
        + np.maximum(0.0, x + r - 1.0)
        + np.maximum(0.0, r - y)
        + np.maximum(0.0, y + r - 1.0)
    )
    n = len(circles)
    if n < 2:
        return contain, np.zeros(0)
    iu, ju = np.triu_indices(n, k=1)
    dist = np.hypot(x[iu] - x[ju], y[iu] - y[ju])
    overlap = np.maximum(0.0, r[iu] + r[ju] - dist)
    return contain, overlap


def eval_circle_packing(
    genome: Sequence[float],
    n: int,
    eps: float = 1e-9,
    target: float | None = None,
    penalty: float = 1.0,
) -> EvalResult:
    """Score a packing.

    A packing is feasible when every containment deficit and every pairwise
    overlap is at most ``eps``. Feasible packings score ``sum(r) / target``;
    infeasible ones lose ``penalty * total_violation`` from that, floored at 0.
    """
    circles = as_circles(genome, n)
    if target is None:
        target = BEST_KNOWN.get(n, 1.0)
    raw = float(np.sum(circles[:, 2]))
    contain, overlap = violations(circles)
    total = float(contain.sum() + overlap.sum())
    feasible = bool(np.all(contain <= eps) and np.all(overlap <= eps) and np.all(circles[:, 2] >= 0))
    score = raw / target if feasible else max(0.0, raw / target - penalty * total)
    logs = f"sum_radii={raw!r} violation={total!r} feasible={feasible}"
    return EvalResult(score=score, logs=logs, feasible=feasible, aux_metrics={"raw_sum": raw, "violation": total})


def radius_features(genome: Sequence[float]) -> tuple[float, float]:
    r = np.asarray(genome, dtype=float)[2::3]
    return float(r.mean()), float(r.std())


def grid_seed(n: int, radius: float | None = None) -> list[float]:
    """Feasible starting packing: n equal circles on a square lattice."""
    side = math.ceil(math.sqrt(n))
    cell = 1.0 / side
    if radius is None:
        radius = 0.25 * cell
    out: list[float] = []
    for k in range(n):
        i, j = divmod(k, side)
        out += [(j + 0.5) * cell, (i + 0.5) * cell, radius]
    return out


def circle_packing_task(n: int = 26, eps: float = 1e-9, target: float | None = None, penalty: float = 1.0) -> TaskSpec:
    if n < 1:
        raise ValueError("n must be >= 1")
    if target is None:
        target = BEST_KNOWN.get(n, 1.0)
    bounds = [(0.0, 1.0), (0.0, 1.0), (0.0, 0.5)] * n
    return TaskSpec(
        name="circle_packing",
        genome_kind="vector",
        evaluate=lambda g: eval_circle_packing(g, n, eps, target, penalty),
        verify=lambda g: verify_vector(g, 3 * n, bounds),
        features=radius_features,
        descriptor=FeatureDescriptor(
            (FeatureDim("mean_radius", 0.0, 0.5, 10), FeatureDim("radius_std", 0.0, 0.25, 10))
        ),
        seed_genome=lambda: grid_seed(n),
        target_score=1.0,
        description=(
            f"Place {n} disjoint circles inside the unit square to maximise the sum of radii. "
            "Genome: flat list [x0, y0, r0, x1, y1, r1, ...]."
        ),
        bounds=bounds,
        params={"n": n, "eps": eps, "target": target, "penalty": penalty},
    )
