"""
Core indicators for size-based rankings
=======================================

MCC, ROI and eIFA for ONE, ManualDown and ManualUp on a synthetic release.
"""

from matter.indicators import evaluate
from matter.models import manual_down, manual_up
from matter.one import one_ranking
from matter.ranking import EffortBudget
from matter.synthetic import make_release

release = make_release(200, seed=4, project="demo")
print(f"k={release.k} n={release.n} s={release.s}")

rankings = {"one": one_ranking(release), "manualdown": manual_down(release).ranking,
            "manualup": manual_up(release).ranking}

for kind in ("snm", "ssc"):
    print(f"\nbudget {kind} 0.2")
    for name, ranking in rankings.items():
        r = evaluate(ranking, release, EffortBudget(kind, 0.2))
        # undefined values print as Undefined(reason) rather than NaN
        print(f"  {name:<11} mcc={r.mcc:+.3f} roi={r.roi:7.2f} eifa={r.eifa:.3f} pci={r.pci:.2f}")
