"""
Neighbours on a grid
====================

The same agents now sit on a 5x5 grid and only hear themselves and their
four neighbours. Local optima leave patches of different codes; each patch
should be a connected region of the grid.
"""

from pathlib import Path

from codevo.analysis import connected_components, group_codes
from codevo.model import grid_neighbours
from codevo.scenarios import ScenarioConfig, run

root = Path(__file__).resolve().parent
config = ScenarioConfig.load(root.parent / "configs" / "grid.json")
report, best = run(config, root / "out" / "grid")
print(f"best restart: {report.final_code_similarity:.6f} of {report.similarity_bound:.6f} bits")

# look at every restart, the stuck ones are more interesting
from codevo.scenarios import run_restarts

for k, result in enumerate(run_restarts(config)):
    clusters = group_codes(result.model.codes, config.cluster_tolerance)
    print(f"restart {k}: similarity {result.similarity:.4f}, {len(clusters)} code(s)")
    for c in clusters:
        index = {a: i for i, a in enumerate(c.members)}
        edges = [(index[i], index[j], 1.0) for i, j in grid_neighbours(*config.grid)
                 if i in index and j in index]
        pieces = len(connected_components(edges, c.count))
        cells = ["#" if a in index else "." for a in range(config.n_agents)]
        rows = ["".join(cells[r * 5:(r + 1) * 5]) for r in range(5)]
        print(f"   {c.count:2d} agents, {pieces} patch(es): {' '.join(rows)}")
