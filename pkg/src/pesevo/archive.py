"""Behavioural feature mapping and the per-island MAP-Elites grid."""

from __future__ import annotations

import math
import re
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

CellIndex = tuple[int, ...]
FeatureExtractor = Callable[[Any], Sequence[float]]


class ExtractorError(ValueError):
    """The feature extractor could not process the genome."""


@dataclass(frozen=True)
class FeatureDim:
    name: str
    lo: float
    hi: float
    bins: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"dim {self.name!r}: lo must be < hi")
        if self.bins < 1:
            raise ValueError(f"dim {self.name!r}: bins must be >= 1")


@dataclass(frozen=True)
class FeatureDescriptor:
    dims: tuple[FeatureDim, ...]

    def __post_init__(self):
        if not 1 <= len(self.dims) <= 4:
            raise ValueError("a descriptor needs between 1 and 4 dims")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FeatureDescriptor":
        return cls(tuple(FeatureDim(**d) for d in data["dims"]))

    def to_dict(self) -> dict[str, Any]:
        return {
            "dims": [
                {"name": d.name, "lo": d.lo, "hi": d.hi, "bins": d.bins} for d in self.dims
            ]
        }

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(d.bins for d in self.dims)


def single_cell_descriptor() -> FeatureDescriptor:
    """A one-cell grid; the archive degenerates to keeping only the best solution."""
    return FeatureDescriptor((FeatureDim("none", 0.0, 1.0, 1),))


def compute_features(genome: Any, descriptor: FeatureDescriptor, extractor: FeatureExtractor) -> list[float]:
    try:
        v = [float(x) for x in extractor(genome)]
    except ExtractorError:
        raise
    except Exception as exc:
        raise ExtractorError(f"feature extraction failed: {exc}") from exc
    if len(v) != len(descriptor.dims):
        raise ExtractorError(f"extractor returned {len(v)} features, descriptor has {len(descriptor.dims)}")
    return v


def discretize(v: Sequence[float], descriptor: FeatureDescriptor) -> CellIndex:
    """Map a raw feature vector to its grid cell; out-of-range values clamp to edge bins."""
    if len(v) != len(descriptor.dims):
        raise ValueError("feature vector length does not match descriptor")
    out = []
    for x, d in zip(v, descriptor.dims):
        if math.isnan(x):
            i = 0
        else:
            t = (x - d.lo) / (d.hi - d.lo) * d.bins
            i = 0 if t < 0 else (d.bins - 1 if t >= d.bins else int(math.floor(t)))
        out.append(i)
    return tuple(out)


# -- built-in extractors ---------------------------------------------------

_BRANCH_RE = re.compile(r"\b(if|elif|for|while|and|or|except|case|with|assert)\b")


def code_length(source: str) -> float:
    if not isinstance(source, str):
        raise ExtractorError("code extractor needs a source-text genome")
    return float(len(source))


def decision_points(source: str) -> float:
    """Cyclomatic complexity proxy: 1 + branch/loop/boolean keyword count."""
    if not isinstance(source, str):
        raise ExtractorError("code extractor needs a source-text genome")
    return 1.0 + len(_BRANCH_RE.findall(source))


def code_features(source: str) -> tuple[float, float]:
    return code_length(source), decision_points(source)


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    if isinstance(values, str):
        raise ExtractorError("vector extractor needs a real-valued genome")
    a = np.asarray(values, dtype=float)
    if a.size == 0:
        raise ExtractorError("empty genome")
    return float(a.mean()), float(a.std())


def default_code_descriptor() -> FeatureDescriptor:
    return FeatureDescriptor(
        (FeatureDim("code_length", 0.0, 10_000.0, 10), FeatureDim("complexity", 1.0, 101.0, 10))
    )


# -- archive ----------------------------------------------------------------

INSERTED = "inserted"
REPLACED = "replaced"
REJECTED = "rejected"


@dataclass
class Elite:
    solution_id: str
    score: float


@dataclass
class Archive:
    """One elite per feature cell; an incumbent is only displaced by a strictly higher score."""

    descriptor: FeatureDescriptor
    cells: dict[CellIndex, Elite] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.cells)

    def try_insert(self, solution_id: str, score: float, cell: CellIndex) -> tuple[str, str | None]:
        """Offer a solution to ``cell``.

        Returns:
            ``(action, displaced_id)`` where action is ``"inserted"``,
            ``"replaced"`` or ``"rejected"``; ``displaced_id`` is set only on
            replacement.
        """
        if len(cell) != len(self.descriptor.dims) or any(
            not 0 <= i < d.bins for i, d in zip(cell, self.descriptor.dims)
        ):
            raise ValueError(f"cell {cell} is not valid for this descriptor")
        incumbent = self.cells.get(cell)
        if incumbent is None:
            self.cells[cell] = Elite(solution_id, float(score))
            return INSERTED, None
        if score > incumbent.score:
            self.cells[cell] = Elite(solution_id, float(score))
            return REPLACED, incumbent.solution_id
        return REJECTED, None

    def contents(self) -> list[tuple[CellIndex, str, float]]:
        """Elites as ``(cell, solution_id, score)`` sorted by cell."""
        return [(c, e.solution_id, e.score) for c, e in sorted(self.cells.items())]

    def best(self) -> tuple[CellIndex, str, float] | None:
        best = None
        for c, sid, score in self.contents():
            if best is None or score > best[2]:
                best = (c, sid, score)
        return best

    def holds(self, solution_id: str) -> bool:
        return any(e.solution_id == solution_id for e in self.cells.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "descriptor": self.descriptor.to_dict(),
            "cells": [
                {"index": list(c), "solution_id": sid, "score": score}
                for c, sid, score in self.contents()
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Archive":
        archive = cls(FeatureDescriptor.from_dict(data["descriptor"]))
        for entry in data["cells"]:
            archive.cells[tuple(entry["index"])] = Elite(entry["solution_id"], float(entry["score"]))
        return archive


def try_insert(archive: Archive, solution_id: str, score: float, cell: CellIndex):
    return archive.try_insert(solution_id, score, cell)


def archive_contents(archive: Archive):
    return archive.contents()
