"""
The ONE baseline on a toy release
=================================

Rank modules by size, then push the very largest ones to the bottom.
"""

from matter.dataset import release_from_columns
from matter.models import manual_down
from matter.one import OneConfig, excluded_set, one_classify, one_ranking
from matter.ranking import EffortBudget

# seven modules; the largest (g) holds 10 of 50 lines
slocs = dict(a=9, b=8, c=7, d=6, e=5, f=5, g=10)
labels = dict(a=1, b=0, c=1, d=0, e=0, f=1, g=0)
release = release_from_columns(list(slocs), list(slocs.values()), list(labels.values()), project="toy")

# the excluded set: largest-first modules fitting in 20% of the code
print("excluded:", excluded_set(release, OneConfig(0.2)))

# ONE keeps descending size for the rest and appends the excluded set ascending
print("ONE:       ", one_ranking(release).order)
print("ManualDown:", manual_down(release).ranking.order)

# with nothing excluded the two orders coincide
assert one_ranking(release, OneConfig(0.0)).order == manual_down(release).ranking.order

# classify by cutting the ranking at 20% of the modules
result = one_classify(release, budget=EffortBudget("snm", 0.2))
print(f"x={result.x} tp={result.confusion.tp} pii={result.pii:.2f} pci={result.pci:.2f}")
