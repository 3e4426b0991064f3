"""ONE, the size-only global baseline ranking.

Modules are ranked by SLOC, largest first, except that the very largest
modules (the set E, holding at most ``excluded_code_size_percentage`` of the
project's code) are demoted to the bottom and ranked smallest-first there.
Only SLOC is read; labels and other metrics are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass

from matter._exact import exact_fraction
from matter.dataset import ReleaseDataset
from matter.ranking import BudgetKind, EffortBudget, InspectionResult, Ranking, cut

PRODUCER = "one"


@dataclass(frozen=True)
class OneConfig:
    excluded_code_size_percentage: float = 0.20

    def __post_init__(self):
        if not (0.0 <= self.excluded_code_size_percentage < 1.0):
            raise ValueError("excluded_code_size_percentage must be in [0, 1)")


def size_descending(dataset: ReleaseDataset) -> list[str]:
    """Module ids by SLOC descending, equal SLOC by ascending id."""
    return sorted(dataset.ids, key=lambda mid: (-dataset.module(mid).sloc, mid))


def excluded_set(dataset: ReleaseDataset, config: OneConfig = OneConfig()) -> list[str]:
    """The largest modules whose total SLOC fits the exclusion budget.

    Taken greedily from the top of the descending order; the first module
    that would overflow the budget stops the scan, so if the single largest
    module is already over budget the set is empty.
    """
    budget = exact_fraction(config.excluded_code_size_percentage) * dataset.s
    taken, total = [], 0
    for mid in size_descending(dataset):
        total += dataset.module(mid).sloc
        if total > budget:
            break
        taken.append(mid)
    return taken


def one_ranking(dataset: ReleaseDataset, config: OneConfig = OneConfig()) -> Ranking:
    descending = size_descending(dataset)
    excluded = excluded_set(dataset, config)
    rest = descending[len(excluded):]
    # E at the bottom, smallest first; ties keep ascending id
    bottom = sorted(excluded, key=lambda mid: (dataset.module(mid).sloc, mid))
    return Ranking.from_order(dataset.release_id, rest + bottom, PRODUCER)


def one_classify(dataset: ReleaseDataset, config: OneConfig = OneConfig(),
                 budget: EffortBudget = EffortBudget(BudgetKind.SNM, 0.2)) -> InspectionResult:
    return cut(one_ranking(dataset, config), dataset, budget)
