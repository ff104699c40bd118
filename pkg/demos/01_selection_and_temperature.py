"""How parent selection reacts to population diversity.

Walks through the three pieces that decide which elite gets mutated next:
the entropy of recent offspring cells, the temperature derived from it, and
the Boltzmann distribution over elite scores at that temperature.
"""

import numpy as np

from pesevo.selection import (
    PoolEntry,
    SelectionParams,
    adaptive_temperature,
    boltzmann_probabilities,
    boltzmann_select,
    population_entropy,
)

params = SelectionParams(tau_base=0.2, alpha=4.0, beta=1.0)
scores = [0.90, 0.85, 0.60, 0.30]

windows = {
    "collapsed (every child lands in one cell)": [(3, 3)] * 32,
    "two cells": [(3, 3)] * 16 + [(4, 3)] * 16,
    "spread over 16 cells": [(i % 4, i // 4) for i in range(16)] * 2,
}

print("entropy -> temperature -> selection probabilities")
for label, window in windows.items():
    h = population_entropy(window)
    tau = adaptive_temperature(h, params)
    p = boltzmann_probabilities(scores, tau)
    print(f"  {label:<42} H={h:.3f} tau={tau:.3f} p={np.round(p, 3)}")

print("\nA collapsed population runs hot (flatter probabilities), a diverse one runs")
print("close to tau_base and exploits the best elites.")

rng = np.random.default_rng(0)
pool = [PoolEntry(f"elite-{i}", s) for i, s in enumerate(scores)]
picks = [boltzmann_select(pool, 0.2, rng)[0] for _ in range(10_000)]
print("\nempirical picks at tau=0.2:", {e.solution_id: picks.count(e.solution_id) for e in pool})

# the optional repetition penalty discounts elites that were picked often
penalised = boltzmann_probabilities(scores, 0.2, sample_counts=[40, 0, 0, 0], penalty=0.05)
print("with 40 prior picks of elite-0 and penalty 0.05:", np.round(penalised, 3))
