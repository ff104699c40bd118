"""Rastrigin benchmark: f = 10d + sum(x_i^2 - 10 cos(2 pi x_i)), scored as 1/(1+f)."""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

from ..archive import FeatureDescriptor, FeatureDim, mean_std
from ..pipeline import EvalResult, verify_vector
from .base import TaskSpec

LIMIT = 5.12


def rastrigin(x: Sequence[float]) -> float:
    a = np.asarray(x, dtype=float)
    return float(10.0 * a.size + np.sum(a * a - 10.0 * np.cos(2.0 * math.pi * a)))


def eval_rastrigin(values: Sequence[float], d: int) -> EvalResult:
    a = np.asarray(values, dtype=float)
    if a.ndim != 1 or a.size != d:
        raise ValueError(f"expected {d} values, got shape {a.shape}")
    if np.any(np.abs(a) > LIMIT):
        raise ValueError(f"entries must lie in [-{LIMIT}, {LIMIT}]")
    f = rastrigin(a)
    # cos rounding can push f a hair below zero next to the optimum
    f = max(f, 0.0)
    score = 1.0 / (1.0 + f)
    return EvalResult(score=score, logs=f"f={f!r}", feasible=True, aux_metrics={"f": f})


def coordinate_features(values: Sequence[float]) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


def rastrigin_task(d: int = 2, start: float = 4.0, features: str = "auto", bins: int = 10) -> TaskSpec:
    """Rastrigin in ``d`` dims, seeded at ``(start, ..., start)``.

    ``features="coords"`` grids the raw coordinates (only for d <= 4);
    ``"mean_std"`` grids the coordinate mean and spread. ``"auto"`` picks
    coords when possible.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if not -LIMIT <= start <= LIMIT:
        raise ValueError("start must lie inside the bounds")
    if features == "auto":
        features = "coords" if d <= 4 else "mean_std"
    if features == "coords":
        if d > 4:
            raise ValueError("coordinate features need d <= 4")
        extractor = coordinate_features
        descriptor = FeatureDescriptor(tuple(FeatureDim(f"x{i}", -LIMIT, LIMIT, bins) for i in range(d)))
    elif features == "mean_std":
        extractor = mean_std
        descriptor = FeatureDescriptor(
            (FeatureDim("mean", -LIMIT, LIMIT, bins), FeatureDim("std", 0.0, LIMIT, bins))
        )
    else:
        raise ValueError(f"unknown feature set {features!r}")
    bounds = [(-LIMIT, LIMIT)] * d
    return TaskSpec(
        name="rastrigin",
        genome_kind="vector",
        evaluate=lambda g: eval_rastrigin(g, d),
        verify=lambda g: verify_vector(g, d, bounds),
        features=extractor,
        descriptor=descriptor,
        seed_genome=lambda: [float(start)] * d,
        target_score=1.0,
        description=f"Minimise the {d}-dimensional Rastrigin function on [-5.12, 5.12]^{d}.",
        bounds=bounds,
        params={"d": d, "start": start, "features": features, "bins": bins},
    )
