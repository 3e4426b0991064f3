"""
Comparing models across releases
================================

Rank models within each release, then group them with Scott-Knott ESD.
"""

from matter.indicators import evaluate
from matter.pipeline import MODEL_NAMES, run_model, parse_config
from matter.ranking import EffortBudget
from matter.stats import PerformanceMatrix, cliffs_delta, kendall, scott_knott_esd, spearman
from matter.synthetic import make_release

releases = [make_release(120 + 10 * i, seed=i, project=f"p{i}") for i in range(8)]
config = parse_config({"corpus": ["unused.csv"], "models": list(MODEL_NAMES)})

budget = EffortBudget("snm", 0.2)
mcc = {name: [evaluate(run_model(name, rel, config), rel, budget).mcc for rel in releases]
       for name in MODEL_NAMES}

grouping = scott_knott_esd(PerformanceMatrix(MODEL_NAMES, [r.release_id for r in releases],
                                             [mcc[m] for m in MODEL_NAMES]))
for row in grouping.rows():
    print(f"group {row['group']}  {row['model']:<11} mean rank {row['mean_rank']:.2f}")

# effect size between the best and worst model's raw values
best, worst = grouping.models[0], grouping.models[-1]
d = cliffs_delta(mcc[best], mcc[worst])
print(f"\n{best} vs {worst}: delta={d.delta:+.2f} ({d.magnitude})")

# do ONE and ManualDown agree on which releases are easy?
print(f"spearman={spearman(mcc['one'], mcc['manualdown']):+.2f} "
      f"kendall={kendall(mcc['one'], mcc['manualdown']):+.2f}")
