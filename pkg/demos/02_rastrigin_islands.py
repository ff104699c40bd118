"""Evolving a 2-D Rastrigin minimum with four islands and synthetic operators.

The synthetic operators stand in for a language model: the planner reads the
lineage of the selected parent to adapt a Gaussian step size, the executor
applies it, and the summarizer records whether the step helped. Everything
runs offline and is fully reproducible from the seed.
"""

import logging
import sys
import tempfile
from pathlib import Path

from pesevo import Engine, build_report, load_config
from pesevo.report import evaluations_to_target, lineage

logging.basicConfig(level=logging.WARNING)

config = load_config(Path(__file__).parent / "configs" / "rastrigin.json")
config = config.with_overrides(stop_at_target=True, seed=int(sys.argv[1]) if len(sys.argv) > 1 else 0)

with tempfile.TemporaryDirectory() as out:
    engine = Engine(config, output_dir=out)
    result = engine.run()
    report = build_report(result.events, result.wall_time)
    engine.write_outputs(report)
    engine.close()

    print(f"best score {result.best.score:.5f} at iteration {result.iteration}")
    print(f"target {config.target_score} reached after {evaluations_to_target(result.events, config.target_score)} evaluations")
    for isl in report["islands"]:
        print(f"  island {isl['island_id']}: {isl['filled_cells']} cells filled, final tau {isl['final_tau']:.3f}")

    print("\nlineage of the best solution (seed first):")
    for step in lineage(out, result.best.solution_id)[-6:]:
        print(f"  gen {step['generation']:>3} score {step['score']:.4f}  {step['summary']}")
