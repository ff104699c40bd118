"""Task definitions: genome kind, evaluator, verifier, features and seed."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

from ..archive import FeatureDescriptor
from ..pipeline import EvalResult


@dataclass
class TaskSpec:
    name: str
    genome_kind: str  # "vector" or "code"
    evaluate: Callable[[Any], EvalResult]
    verify: Callable[[Any], tuple[bool, str]]
    features: Callable[[Any], Sequence[float]]
    descriptor: FeatureDescriptor
    seed_genome: Callable[[], Any]
    target_score: float = 1.0
    description: str = ""
    bounds: list[tuple[float, float]] = field(default_factory=list)
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.genome_kind not in ("vector", "code"):
            raise ValueError(f"unknown genome kind {self.genome_kind!r}")
        if not self.target_score > 0:
            raise ValueError("target_score must be > 0")
        if self.genome_kind == "vector" and not self.bounds:
            raise ValueError("vector tasks need per-dimension bounds")
