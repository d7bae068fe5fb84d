"""
A well-mixed population settles on one code
===========================================

Twenty-five agents observe a four-state world through two noisy bits and
optimize the similarity of their outputs. Everyone talks to everyone, so
the optimum is a single shared one-to-one code. This takes a few minutes.
"""

from pathlib import Path

from codevo.analysis import distance_matrix, group_codes
from codevo.scenarios import ScenarioConfig, run

root = Path(__file__).resolve().parent
config = ScenarioConfig.load(root.parent / "configs" / "well_mixed.json")
out = root / "out" / "well_mixed"
report, best = run(config, out)

print(f"code similarity {report.final_code_similarity:.6f} of a possible {report.similarity_bound:.6f}")
print(f"restarts reached {[round(s, 4) for s in report.restart_similarities]}")

d = distance_matrix(list(best.model.codes)).values
print(f"largest distance between two final codes: {d.max():.2e}")
code = group_codes(best.model.codes)[0].representative
print("shared code p(x|y), rows are sensor states:")
print(code.round(3))
print(f"MDS plot of initial and final codes: {out / 'mds.svg'}")
