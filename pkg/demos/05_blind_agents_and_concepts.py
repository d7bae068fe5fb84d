"""
What a blind agent can learn
============================

Nine world states form a 3x3 square. Four sensor types each see whether the
state lies in their own 2x2 corner, and a fifth type sees nothing. The
population optimizes code similarity; afterwards we ask how much a blind
observer learns from a pair of outputs, and which output pairs pin down
the centre state.
"""

from pathlib import Path

import numpy as np

from codevo.analysis import concept_table
from codevo.model import blind_info
from codevo.scenarios import ScenarioConfig, run

root = Path(__file__).resolve().parent
config = ScenarioConfig.load(root.parent / "configs" / "heterogeneous.json")
# fewer restarts than the full sweep keeps this to a couple of minutes
config = config.replace(optimizer={**config.to_dict()["optimizer"], "restarts": 3})
report, best = run(config, root / "out" / "heterogeneous")

print(f"|X| = {config.output_states}: I(mu; X, X') = {blind_info(best.model):.5f} bits "
      f"(out of {np.log2(9):.5f})")

table = concept_table(best.model)
pair, certainty = table.best_pair_for(4)
print(f"outputs {pair[0] + 1} and {pair[1] + 1} together say 'centre' with probability {certainty:.6f}")

# pairs whose posterior is spread evenly over a few states act as coarser concepts
for (x, xp), row in zip(table.pairs, table.pair_posterior):
    support = np.flatnonzero(row > 1e-6) + 1
    if x <= xp and 1 < len(support) <= 3 and np.allclose(row[row > 1e-6], 1 / len(support), atol=1e-4):
        print(f"pair ({x + 1},{xp + 1}) -> uniform over states {support.tolist()}")
