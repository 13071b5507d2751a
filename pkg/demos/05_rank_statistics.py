"""Rank-based model comparison: Friedman gate, Wilcoxon-Holm, CD groups.

Given a methods-by-datasets score matrix, the Friedman test gates the
analysis; pairwise Wilcoxon signed-rank tests with Holm correction then
decide which methods differ, and methods with no significant internal
difference share a thick bar in the critical-difference diagram.
"""
import numpy as np

from specbench import ScoreMatrix, cd_analysis, friedman, holm_correct, wilcoxon_signed_rank
from specbench.harness import cd_diagram_svg

rng = np.random.default_rng(3)
datasets = [f"d{i}" for i in range(10)]
base = rng.uniform(1.0, 2.0, size=10)
scores = np.stack([
    base,                                        # strong
    base + rng.normal(size=10) * 0.02,           # statistically tied with it
    base + 0.4,                                  # consistently worse
    base + 0.4 + rng.normal(size=10) * 0.02,     # tied with the worse one
])
sm = ScoreMatrix(["alpha", "beta", "gamma", "delta"], datasets, scores)

gate = friedman(sm)
print(f"Friedman chi2={gate.statistic:.3f} p={gate.p_value:.3g} reject={gate.reject}")

raw = [wilcoxon_signed_rank(scores[i], scores[j]) for i in range(4) for j in range(i + 1, 4)]
print("raw pairwise p:", [round(p, 4) for p in raw])
print("holm-adjusted :", [round(p, 4) for p in holm_correct(raw)])

cd = cd_analysis(sm, alpha=0.05)
print("average ranks:", {m: round(r, 2) for m, r in zip(cd.methods, cd.avg_ranks)})
print("groups (no significant internal difference):", cd.groups)

path = "cd_diagram.svg"
cd_diagram_svg(cd, path)
print(f"wrote {path}")
