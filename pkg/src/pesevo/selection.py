"""Entropy-driven temperature control and Boltzmann parent selection."""

from __future__ import annotations

import math
from collections import Counter, deque
from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SelectionParams:
    tau_base: float = 0.2
    alpha: float = 4.0
    beta: float = 1.0
    entropy_window: int = 32
    repetition_penalty: float = 0.0

    def __post_init__(self):
        if not self.tau_base > 0:
            raise ValueError("tau_base must be > 0")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        if self.entropy_window < 1:
            raise ValueError("entropy_window must be >= 1")
        if self.repetition_penalty < 0:
            raise ValueError("repetition_penalty must be >= 0")


def population_entropy(window: Iterable[Hashable]) -> float:
    """Shannon entropy (nats) of the cell distribution in ``window``."""
    counts = Counter(window)
    n = sum(counts.values())
    if n == 0:
        raise ValueError("entropy of an empty window is undefined")
    if len(counts) == 1:
        return 0.0
    h = 0.0
    for c in counts.values():
        p = c / n
        h -= p * math.log(p)
    return h


def adaptive_temperature(entropy: float, params: SelectionParams) -> float:
    """tau = tau_base * (1 + alpha * exp(-beta * H)); high when the window has collapsed."""
    if entropy < 0:
        raise ValueError("entropy must be >= 0")
    return params.tau_base * (1.0 + params.alpha * math.exp(-params.beta * entropy))


@dataclass
class EntropyState:
    """Ring buffer of the last W offspring cell assignments on an island."""

    size: int
    window: deque = field(default_factory=deque)

    def __post_init__(self):
        self.window = deque(self.window, maxlen=self.size)

    def push(self, cell: tuple[int, ...]) -> None:
        self.window.append(tuple(cell))

    @property
    def entropy(self) -> float:
        return population_entropy(self.window) if self.window else 0.0

    def to_list(self) -> list[list[int]]:
        return [list(c) for c in self.window]


@dataclass(frozen=True)
class PoolEntry:
    solution_id: str
    score: float
    sample_cnt: int = 0


def boltzmann_probabilities(
    scores: Sequence[float], tau: float, sample_counts: Sequence[int] | None = None, penalty: float = 0.0
) -> np.ndarray:
    if len(scores) == 0:
        raise ValueError("no candidates to select from")
    if not tau > 0:
        raise ValueError("temperature must be > 0")
    z = np.asarray(scores, dtype=float)
    if penalty and sample_counts is not None:
        z = z - penalty * np.log1p(np.asarray(sample_counts, dtype=float))
    z = z / tau
    z -= z.max()
    w = np.exp(z)
    return w / w.sum()


def boltzmann_select(
    candidates: Sequence[PoolEntry], tau: float, rng: np.random.Generator, penalty: float = 0.0
) -> tuple[str, np.ndarray]:
    """Draw one candidate with probability proportional to exp(score'/tau).

    ``score'`` is the score discounted by ``penalty * ln(1 + sample_cnt)``.
    Returns the chosen id and the full probability vector.
    """
    p = boltzmann_probabilities(
        [c.score for c in candidates], tau, [c.sample_cnt for c in candidates], penalty
    )
    cdf = np.cumsum(p)
    i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return candidates[min(i, len(candidates) - 1)].solution_id, p


def greedy_select(candidates: Sequence[PoolEntry]) -> tuple[str, np.ndarray]:
    """Always pick the top scorer (first in order on ties)."""
    if not candidates:
        raise ValueError("no candidates to select from")
    i = max(range(len(candidates)), key=lambda k: (candidates[k].score, -k))
    p = np.zeros(len(candidates))
    p[i] = 1.0
    return candidates[i].solution_id, p
