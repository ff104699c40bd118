"""Packing 26 circles in the unit square.

Genomes are flat [x, y, r] triples. The archive is indexed by the mean and
spread of the radii, so packings built from equal circles and packings that
mix large and small circles are kept side by side.
"""

from pathlib import Path

import numpy as np

from pesevo import Engine, load_config
from pesevo.tasks.circle_packing import as_circles, eval_circle_packing

config = load_config(Path(__file__).parent / "configs" / "circle_packing.json")
config = config.with_overrides(iterations=300)

engine = Engine(config)
result = engine.run()

best = result.best
check = eval_circle_packing(best.solution, 26)
print(f"best score {best.score:.4f} (sum of radii {check.aux_metrics['raw_sum']:.4f}, feasible={check.feasible})")
print("filled cells per island:", [len(isl.archive) for isl in result.islands])
circles = as_circles(best.solution, 26)
print("radius range:", np.round([circles[:, 2].min(), circles[:, 2].max()], 4))

# Infeasible packings are penalised, not discarded, so the top score can be a
# slightly overlapping layout. The store keeps every offspring; pick the best
# layout that satisfies all constraints.
feasible = [s for s in result.store if eval_circle_packing(s.solution, 26).feasible]
top = max(feasible, key=lambda s: s.score)
print(f"best feasible packing: score {top.score:.4f} ({top.solution_id}, generation {top.generation})")
