"""Consistent, effort-aware evaluation of software defect prediction models."""

__version__ = "0.1.0"

from matter.dataset import (ColumnSpec, DatasetError, ModuleRecord, ReleaseDataset, filter_corpus,
                            load_release, release_from_columns, standardize_metrics, write_release)
from matter.indicators import (IndicatorReport, Undefined, auc_curves, classic_set, eifa, evaluate,
                               mcc, recall_at_effort, roi)
from matter.models import ModelError, ModelOutput, cla, fcm, manual_down, manual_up, spectral_cluster
from matter.one import OneConfig, one_classify, one_ranking
from matter.ranking import (BudgetKind, ConfusionMatrix, EffortBudget, InspectionResult, Ranking,
                            confusion_of_prefix, cut, cut_snm, cut_ssc, import_external_ranking)
from matter.stats import (PerformanceMatrix, SkGrouping, cliffs_delta, kendall, rank_transform,
                          scott_knott_esd, spearman)

__all__ = [
    "__version__",
    "ColumnSpec",
    "DatasetError",
    "ModuleRecord",
    "ReleaseDataset",
    "filter_corpus",
    "load_release",
    "release_from_columns",
    "standardize_metrics",
    "write_release",
    "IndicatorReport",
    "Undefined",
    "auc_curves",
    "classic_set",
    "eifa",
    "evaluate",
    "mcc",
    "recall_at_effort",
    "roi",
    "ModelError",
    "ModelOutput",
    "cla",
    "fcm",
    "manual_down",
    "manual_up",
    "spectral_cluster",
    "OneConfig",
    "one_classify",
    "one_ranking",
    "BudgetKind",
    "ConfusionMatrix",
    "EffortBudget",
    "InspectionResult",
    "Ranking",
    "confusion_of_prefix",
    "cut",
    "cut_snm",
    "cut_ssc",
    "import_external_ranking",
    "PerformanceMatrix",
    "SkGrouping",
    "cliffs_delta",
    "kendall",
    "rank_transform",
    "scott_knott_esd",
    "spearman",
]
