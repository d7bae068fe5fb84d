"""
Letting the interaction structure evolve
========================================

With fifteen agents, the pair distribution p(theta, theta') is optimized
together with the codes. Pairs that disagree lose their weight, and
whatever links survive join agents that share a code. Often the optimizer
goes further and piles all the weight onto a single agent listening to
itself: two independent readings of the same world through one code already
reach the bound.
"""

from pathlib import Path

import numpy as np

from codevo.analysis import connected_components, distance_matrix, structure_graph
from codevo.scenarios import ScenarioConfig, default_threshold, run

root = Path(__file__).resolve().parent
config = ScenarioConfig.load(root.parent / "configs" / "flexible.json")
out = root / "out" / "flexible"
report, best = run(config, out)
print(f"code similarity {report.final_code_similarity:.6f} of {report.similarity_bound:.6f}")

p = best.model.structure.pair_probabilities
i, j = (int(k) for k in np.unravel_index(p.argmax(), p.shape))
print(f"mass on self-pairs {np.trace(p):.3f}; largest pair weight {p.max():.3f} at ({i}, {j})")

graph = structure_graph(best.model.structure, default_threshold(config))
d = distance_matrix(list(best.model.codes)).values
for comp in connected_components(graph):
    if len(comp) > 1:
        idx = sorted(comp)
        print(f"component {idx}: largest code distance {d[np.ix_(idx, idx)].max():.2e}")
print(f"{len(graph.links)} links survive the threshold; graph in {out / 'structure.dot'}")
