"""Performance indicators for rankings cut under an effort budget.

The three core indicators are MCC, ROI and eIFA.  Values that cannot be
computed (an empty prefix, no defective modules, ...) come back as
:class:`Undefined` carrying a reason code rather than as NaN or zero.  The
one exception is MCC, which is 0 when a confusion-matrix marginal is empty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence, Union

from matter.dataset import DatasetError, ReleaseDataset
from matter.ranking import (BudgetKind, ConfusionMatrix, EffortBudget, InspectionResult,
                            Ranking, cut, cut_ssc)

EIFA_WEIGHT = 0.5


@dataclass(frozen=True)
class Undefined:
    reason: str

    def __bool__(self) -> bool:
        return False


Value = Union[float, Undefined]


def is_defined(value: Any) -> bool:
    return not isinstance(value, Undefined)


def _ratio(num: float, den: float, reason: str) -> Value:
    return num / den if den else Undefined(reason)


def mcc(cm: ConfusionMatrix) -> float:
    """Matthews correlation coefficient; 0 when any marginal sum is zero."""
    tp, fp, tn, fn = cm.tp, cm.fp, cm.tn, cm.fn
    den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if den == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(den)


def mcc_zero_marginal(cm: ConfusionMatrix) -> bool:
    return 0 in (cm.tp + cm.fp, cm.tp + cm.fn, cm.tn + cm.fp, cm.tn + cm.fn)


def roi(cm: ConfusionMatrix, pii: float, pci: float, budget_kind: str | BudgetKind,
        a: float | None = None) -> Value:
    """Defective modules found per unit of inspection effort.

    Under SNM every model inspects the same number of modules, so effort is
    the inspected code share (``tp / pci``); under SSC it is the inspected
    module share (``tp / pii``).  ``"general"`` blends the two with weight
    ``a`` on code, which must then be given explicitly.
    """
    kind = budget_kind.value if isinstance(budget_kind, BudgetKind) else str(budget_kind).lower()
    if cm.tp + cm.fp == 0:
        return Undefined("empty-prefix")
    if kind == "snm":
        effort = pci
    elif kind == "ssc":
        effort = pii
    elif kind == "general":
        if a is None:
            raise ValueError("general ROI needs an explicit weight a")
        effort = a * pci + (1.0 - a) * pii
    else:
        raise ValueError(f"unknown budget kind {budget_kind!r}")
    return _ratio(cm.tp, effort, "empty-prefix")


@dataclass(frozen=True)
class IfaResult:
    eifa: float
    y: int
    pci_ifa: float
    pii_ifa: float


def _slocs_labels(ranking: Ranking, dataset: ReleaseDataset) -> tuple[list[int], list[bool]]:
    ranking.check_matches(dataset)
    dataset.require_labels()
    mods = [dataset.module(mid) for mid in ranking.order]
    return [m.sloc for m in mods], [bool(m.label) for m in mods]


def eifa(ranking: Ranking, dataset: ReleaseDataset, a: float = EIFA_WEIGHT) -> IfaResult:
    """Effort spent on initial false alarms before the first true defect.

    ``y`` modules precede the first defective one; the effort blends their
    module share (weight ``a``) and code share (weight ``1 - a``).
    """
    slocs, labels = _slocs_labels(ranking, dataset)
    if not any(labels):
        raise DatasetError("no defective modules: eIFA is undefined")
    y = labels.index(True)
    pii_ifa = y / len(labels)
    pci_ifa = sum(slocs[:y]) / sum(slocs)
    return IfaResult(a * pii_ifa + (1.0 - a) * pci_ifa, y, pci_ifa, pii_ifa)


def _harmonic(p: Value, q: Value) -> Value:
    if not is_defined(p):
        return p
    if not is_defined(q):
        return q
    if p + q == 0:
        return 0.0
    return 2.0 * p * q / (p + q)


def classic_set(cm: ConfusionMatrix) -> dict[str, Value]:
    recall = _ratio(cm.tp, cm.tp + cm.fn, "no-defective-modules")
    precision = _ratio(cm.tp, cm.tp + cm.fp, "empty-prefix")
    pf = _ratio(cm.fp, cm.fp + cm.tn, "no-clean-modules")
    spec = 1.0 - pf if is_defined(pf) else pf
    return {
        "recall": recall,
        "precision": precision,
        "pf": pf,
        "f1": _harmonic(recall, precision),
        "g1": _harmonic(recall, spec),
    }


def recall_at_effort(ranking: Ranking, dataset: ReleaseDataset, sloc_fraction: float = 0.2) -> float:
    """Share of defective modules found within ``sloc_fraction`` of the code (PofB20 at 0.2)."""
    dataset.require_labels()
    if dataset.n == 0:
        raise DatasetError("no defective modules: recall is undefined")
    result = cut_ssc(ranking, dataset, sloc_fraction)
    return result.confusion.tp / dataset.n


def _trapezoid(xs: Sequence[float], ys: Sequence[float]) -> float:
    return sum((xs[i + 1] - xs[i]) * (ys[i + 1] + ys[i]) / 2.0 for i in range(len(xs) - 1))


def auc_curves(ranking: Ranking, dataset: ReleaseDataset) -> dict[str, Value]:
    """Areas under the effort-vs-recall and PF-vs-recall curves of the ranking.

    The curves step through every prefix length, starting at (0, 0).
    """
    slocs, labels = _slocs_labels(ranking, dataset)
    k, n, s = len(labels), sum(labels), sum(slocs)
    negatives = k - n
    loc_x, pf_x, pd_y = [0.0], [0.0], [0.0]
    cum_sloc = tp = fp = 0
    for size, lab in zip(slocs, labels):
        cum_sloc += size
        tp += lab
        fp += not lab
        loc_x.append(cum_sloc / s)
        pd_y.append(tp / n if n else 0.0)
        pf_x.append(fp / negatives if negatives else 0.0)
    out: dict[str, Value] = {}
    out["auc_loc_pd"] = _trapezoid(loc_x, pd_y) if n else Undefined("no-defective-modules")
    if not n:
        out["auc_pf_pd"] = Undefined("no-defective-modules")
    elif not negatives:
        out["auc_pf_pd"] = Undefined("no-clean-modules")
    else:
        out["auc_pf_pd"] = _trapezoid(pf_x, pd_y)
    return out


@dataclass(frozen=True)
class EvalParams:
    eifa_weight: float = EIFA_WEIGHT
    recall_effort: float = 0.2


@dataclass(frozen=True)
class IndicatorReport:
    model: str
    release: str
    budget: EffortBudget
    a: float
    x: int
    tp: int
    fp: int
    tn: int
    fn: int
    pii: float
    pci: float
    degenerate: bool
    mcc: float
    roi: Value
    eifa: Value
    y: Value
    pci_ifa: Value
    pii_ifa: Value
    recall: Value
    precision: Value
    pf: Value
    f1: Value
    g1: Value
    recall_at_effort: Value
    ifa_count: Value
    auc_loc_pd: Value
    auc_pf_pd: Value
    notes: tuple[str, ...] = field(default=())

    def get(self, name: str) -> Value:
        if name not in INDICATOR_NAMES and name not in CUT_FIELDS:
            raise KeyError(f"unknown indicator {name!r}")
        return getattr(self, name)


CUT_FIELDS = ("x", "tp", "fp", "tn", "fn", "pii", "pci")
INDICATOR_NAMES = ("mcc", "roi", "eifa", "y", "pci_ifa", "pii_ifa", "recall", "precision", "pf",
                   "f1", "g1", "recall_at_effort", "ifa_count", "auc_loc_pd", "auc_pf_pd")
CORE_INDICATORS = ("mcc", "roi", "eifa")

HIGHER_IS_BETTER = {"mcc": True, "roi": True, "eifa": False, "y": False, "pci_ifa": False,
                    "pii_ifa": False, "recall": True, "precision": True, "pf": False, "f1": True,
                    "g1": True, "recall_at_effort": True, "ifa_count": False, "auc_loc_pd": True,
                    "auc_pf_pd": True, "tp": True, "fp": False, "tn": True, "fn": False}


def evaluate(model_output, dataset: ReleaseDataset, budget: EffortBudget,
             params: EvalParams = EvalParams()) -> IndicatorReport:
    """Cut the model's ranking under ``budget`` and compute every indicator.

    eIFA and the AUCs use the full ranking and therefore do not depend on the
    budget.  ``model_output`` may be a ModelOutput or a bare Ranking.
    """
    ranking = getattr(model_output, "ranking", model_output)
    dataset.require_labels()
    result: InspectionResult = cut(ranking, dataset, budget)
    cm = result.confusion
    notes = []
    if result.degenerate:
        notes.append("degenerate-empty-prefix")
    if mcc_zero_marginal(cm):
        notes.append("mcc=zero-marginal")

    if dataset.n:
        ifa = eifa(ranking, dataset, params.eifa_weight)
        ifa_vals: dict[str, Value] = {"eifa": ifa.eifa, "y": ifa.y, "pci_ifa": ifa.pci_ifa,
                                      "pii_ifa": ifa.pii_ifa, "ifa_count": ifa.y}
        rae: Value = recall_at_effort(ranking, dataset, params.recall_effort)
    else:
        none = Undefined("no-defective-modules")
        ifa_vals = dict.fromkeys(("eifa", "y", "pci_ifa", "pii_ifa", "ifa_count"), none)
        rae = none

    values: dict[str, Value] = {
        "mcc": mcc(cm),
        "roi": roi(cm, result.pii, result.pci, budget.kind),
        **ifa_vals,
        **classic_set(cm),
        "recall_at_effort": rae,
        **auc_curves(ranking, dataset),
    }
    for name in INDICATOR_NAMES:
        if not is_defined(values[name]):
            notes.append(f"{name}={values[name].reason}")
    return IndicatorReport(
        model=ranking.producer, release=dataset.release_id, budget=budget, a=params.eifa_weight,
        x=result.x, tp=cm.tp, fp=cm.fp, tn=cm.tn, fn=cm.fn, pii=result.pii, pci=result.pci,
        degenerate=result.degenerate, notes=tuple(notes), **values,
    )


def report_row(report: IndicatorReport, indicators: Sequence[str] = INDICATOR_NAMES) -> dict[str, Any]:
    """Flat row for CSV/JSON export; undefined values become ``None``."""
    row: dict[str, Any] = {
        "model": report.model,
        "release": report.release,
        "budget_kind": report.budget.kind.value,
        "fraction": report.budget.fraction,
    }
    for name in CUT_FIELDS:
        row[name] = getattr(report, name)
    for name in indicators:
        if name in CUT_FIELDS:
            continue
        value = report.get(name)
        row[name] = value if is_defined(value) else None
    row["notes"] = ";".join(report.notes)
    return row
