"""Comparing the full configuration against its ablations.

Each strategy runs on the same seeds with a budget of 5,000 evaluations.
`greedy-topk` always mutates the best elite, `no-map-elites` keeps one elite
per island, and `no-islands` runs a single archive.
"""

from pathlib import Path

from pesevo import load_config
from pesevo.report import compare, format_table

config = load_config(Path(__file__).parent / "configs" / "rastrigin.json")
rows = compare(config, ["hybrid", "greedy-topk", "no-map-elites", "no-islands"], seeds=10)
print(format_table(rows))
