"""Defect-proneness rankings and effort-aligned cuts.

A ranking is cut either at a fixed share of the modules (SNM, same number of
modules) or at a fixed share of the code (SSC, same size of code).  Both cuts
never exceed the budget: the prefix is the longest one that fits.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from matter._exact import exact_fraction
from matter.dataset import DatasetError, ReleaseDataset


class BudgetKind(str, Enum):
    SNM = "snm"
    SSC = "ssc"


@dataclass(frozen=True)
class EffortBudget:
    kind: BudgetKind
    fraction: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "kind", BudgetKind(self.kind))
        if not (0.0 < self.fraction <= 1.0):
            raise ValueError(f"budget fraction must be in (0, 1], got {self.fraction}")

    def __str__(self) -> str:
        return f"{self.kind.value}@{self.fraction:g}"


@dataclass(frozen=True)
class Ranking:
    """Modules ordered from most to least predicted defect-prone.

    ``scores`` must be non-increasing along ``order``; ties are allowed and
    the order between tied modules is whatever ``order`` says.
    """

    release_id: str
    order: tuple[str, ...]
    scores: Mapping[str, float]
    producer: str = ""

    def __post_init__(self):
        if len(set(self.order)) != len(self.order):
            raise ValueError("ranking order contains duplicate module ids")
        if set(self.scores) != set(self.order):
            raise ValueError("ranking scores must cover exactly the ordered modules")
        prev = math.inf
        for mid in self.order:
            sc = self.scores[mid]
            if not math.isfinite(sc):
                raise ValueError(f"non-finite score for module {mid!r}")
            if sc > prev:
                raise ValueError("ranking scores must be non-increasing along the order")
            prev = sc

    @classmethod
    def from_scores(cls, release_id: str, scores: Mapping[str, float], producer: str = "") -> "Ranking":
        """Sort by score descending; equal scores fall back to ascending module id."""
        order = sorted(scores, key=lambda mid: (-scores[mid], mid))
        return cls(release_id, tuple(order), dict(scores), producer)

    @classmethod
    def from_order(cls, release_id: str, order: Sequence[str], producer: str = "") -> "Ranking":
        """Wrap an explicit order, scoring positions with strictly decreasing ordinals."""
        k = len(order)
        return cls(release_id, tuple(order), {mid: float(k - i) for i, mid in enumerate(order)}, producer)

    def check_matches(self, dataset: ReleaseDataset) -> None:
        if self.release_id != dataset.release_id:
            raise ValueError(f"ranking is for {self.release_id!r}, not {dataset.release_id!r}")
        if set(self.order) != set(dataset.ids) or len(self.order) != dataset.k:
            raise ValueError("ranking order is not a permutation of the release's modules")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError(f"confusion counts must be nonnegative: {self}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class InspectionResult:
    release_id: str
    producer: str
    budget: EffortBudget | None
    x: int
    pii: float
    pci: float
    confusion: ConfusionMatrix
    degenerate: bool = False

    def as_row(self) -> dict:
        cm = self.confusion
        return {
            "model": self.producer,
            "release": self.release_id,
            "budget_kind": self.budget.kind.value if self.budget else "",
            "fraction": self.budget.fraction if self.budget else "",
            "x": self.x, "tp": cm.tp, "fp": cm.fp, "tn": cm.tn, "fn": cm.fn,
            "pii": self.pii, "pci": self.pci,
        }


def _labels_along(ranking: Ranking, dataset: ReleaseDataset) -> list[bool]:
    ranking.check_matches(dataset)
    dataset.require_labels()
    return [bool(dataset.module(mid).label) for mid in ranking.order]


def confusion_of_prefix(ranking: Ranking, dataset: ReleaseDataset, x: int) -> ConfusionMatrix:
    """Confusion matrix when the first ``x`` ranked modules are predicted defective."""
    labels = _labels_along(ranking, dataset)
    k = len(labels)
    if not (0 <= x <= k):
        raise ValueError(f"prefix length {x} outside [0, {k}]")
    n = sum(labels)
    tp = sum(labels[:x])
    fn = n - tp
    return ConfusionMatrix(tp=tp, fp=x - tp, tn=k - x - fn, fn=fn)


def inspect_prefix(ranking: Ranking, dataset: ReleaseDataset, x: int,
                   budget: EffortBudget | None = None) -> InspectionResult:
    cm = confusion_of_prefix(ranking, dataset, x)
    inspected = sum(dataset.module(mid).sloc for mid in ranking.order[:x])
    return InspectionResult(
        release_id=dataset.release_id,
        producer=ranking.producer,
        budget=budget,
        x=x,
        pii=x / dataset.k,
        pci=inspected / dataset.s,
        confusion=cm,
        degenerate=(x == 0),
    )


def snm_prefix_length(k: int, fraction: float) -> int:
    """Largest module count not exceeding ``fraction`` of ``k``."""
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"budget fraction must be in (0, 1], got {fraction}")
    return math.floor(exact_fraction(fraction) * k)


def ssc_prefix_length(slocs: Sequence[int], fraction: float) -> int:
    """Longest prefix of ``slocs`` whose total stays within ``fraction`` of the sum."""
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"budget fraction must be in (0, 1], got {fraction}")
    limit = exact_fraction(fraction) * sum(slocs)
    total = 0
    for i, size in enumerate(slocs):
        total += size
        if total > limit:
            return i
    return len(slocs)


def cut_snm(ranking: Ranking, dataset: ReleaseDataset, fraction: float = 0.2) -> InspectionResult:
    ranking.check_matches(dataset)
    x = snm_prefix_length(dataset.k, fraction)
    return inspect_prefix(ranking, dataset, x, EffortBudget(BudgetKind.SNM, fraction))


def cut_ssc(ranking: Ranking, dataset: ReleaseDataset, fraction: float = 0.2) -> InspectionResult:
    ranking.check_matches(dataset)
    x = ssc_prefix_length([dataset.module(mid).sloc for mid in ranking.order], fraction)
    return inspect_prefix(ranking, dataset, x, EffortBudget(BudgetKind.SSC, fraction))


def cut(ranking: Ranking, dataset: ReleaseDataset, budget: EffortBudget) -> InspectionResult:
    if budget.kind is BudgetKind.SNM:
        return cut_snm(ranking, dataset, budget.fraction)
    return cut_ssc(ranking, dataset, budget.fraction)


def import_external_ranking(path: str | Path, dataset: ReleaseDataset, producer: str | None = None) -> Ranking:
    """Read a third-party model's ``id,score`` CSV for one release.

    The file must score every module of the release exactly once.
    """
    path = Path(path)
    scores: dict[str, float] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip().lower() for h in next(reader, [])]
        if header[:2] != ["id", "score"]:
            raise DatasetError(f"{path}: score file header must be 'id,score'")
        for row_no, row in enumerate(reader, start=1):
            if not any(c.strip() for c in row):
                continue
            mid = row[0].strip()
            if mid in scores:
                raise DatasetError(f"{path}: duplicate id {mid!r} at row {row_no}")
            try:
                value = float(row[1])
            except (IndexError, ValueError):
                raise DatasetError(f"{path}: non-numeric score at row {row_no}") from None
            if not math.isfinite(value):
                raise DatasetError(f"{path}: non-finite score for id {mid!r} at row {row_no}")
            scores[mid] = value
    expected = set(dataset.ids)
    missing = sorted(expected - set(scores))
    extra = sorted(set(scores) - expected)
    if missing:
        raise DatasetError(f"{path}: score file is missing ids {', '.join(missing)}")
    if extra:
        raise DatasetError(f"{path}: score file has unknown ids {', '.join(extra)}")
    return Ranking.from_scores(dataset.release_id, scores, producer or f"external:{path}")


def write_inspections_json(results: Iterable[InspectionResult], path: str | Path) -> None:
    rows = [r.as_row() for r in results]
    Path(path).write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
