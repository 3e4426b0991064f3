"""
Cutting a ranking under an effort budget
========================================

The same ranking inspected with an equal module count (SNM) or an equal
amount of code (SSC). Neither cut ever exceeds its budget.
"""

import numpy as np

from matter.dataset import release_from_columns
from matter.ranking import Ranking, cut_snm, cut_ssc

rng = np.random.default_rng(0)
k = 30
slocs = rng.integers(5, 400, k)
labels = rng.random(k) < 0.3
ids = [f"m{i:02d}" for i in range(k)]
release = release_from_columns(ids, slocs.tolist(), labels.tolist())

# a random ranking stands in for a model
order = [ids[i] for i in rng.permutation(k)]
ranking = Ranking.from_order(release.release_id, order, "random")

print(" frac | snm x  pii   pci  | ssc x  pii   pci")
for fraction in np.linspace(0.1, 1.0, 10):
    a, b = cut_snm(ranking, release, fraction), cut_ssc(ranking, release, fraction)
    print(f" {fraction:.1f}  | {a.x:5d} {a.pii:.2f} {a.pci:.2f} | {b.x:5d} {b.pii:.2f} {b.pci:.2f}")
    assert a.pii <= fraction and b.pci <= fraction
