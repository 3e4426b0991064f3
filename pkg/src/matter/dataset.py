"""Module-level defect datasets: loading, validation, corpus filtering and z-scoring.

A release is one CSV file.  Which columns carry the module id, its size and
its defect label is described by a :class:`ColumnSpec`, so exports from
different corpora can be read without code changes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from matter._exact import exact_fraction

ALL_REMAINING = "all-remaining"

_TRUE_WORDS = {"true", "yes", "buggy", "defective", "y", "t"}
_FALSE_WORDS = {"false", "no", "clean", "n", "f"}


class DatasetError(ValueError):
    """Raised when a release file or corpus violates the dataset schema."""


@dataclass(frozen=True)
class ColumnSpec:
    id_column: str = "id"
    sloc_column: str = "sloc"
    label_column: str | None = "bug"
    metric_columns: str | tuple[str, ...] = ALL_REMAINING
    exclude_columns: tuple[str, ...] = ()

    @classmethod
    def from_dict(cls, data: Mapping) -> "ColumnSpec":
        unknown = set(data) - {"id_column", "sloc_column", "label_column",
                               "metric_columns", "exclude_columns"}
        if unknown:
            raise DatasetError(f"unknown column spec keys: {sorted(unknown)}")
        metrics = data.get("metric_columns", ALL_REMAINING)
        if metrics != ALL_REMAINING:
            metrics = tuple(metrics)
        return cls(
            id_column=data.get("id_column", "id"),
            sloc_column=data.get("sloc_column", "sloc"),
            label_column=data.get("label_column", "bug"),
            metric_columns=metrics,
            exclude_columns=tuple(data.get("exclude_columns", ())),
        )


@dataclass(frozen=True)
class ModuleRecord:
    id: str
    sloc: int
    label: bool | None
    metrics: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ReleaseDataset:
    """One software release: an ordered list of modules.

    ``n`` (defective count) is ``None`` for unlabeled releases.
    """

    project: str
    version: str
    modules: tuple[ModuleRecord, ...]

    def __post_init__(self):
        if not self.modules:
            raise DatasetError("release has no modules")
        ids = [m.id for m in self.modules]
        if len(set(ids)) != len(ids):
            seen = set()
            dup = next(i for i in ids if i in seen or seen.add(i))
            raise DatasetError(f"duplicate module id {dup!r}")
        labeled = {m.label is not None for m in self.modules}
        if len(labeled) > 1:
            raise DatasetError("labels must be present on all modules or on none")
        keys = list(self.modules[0].metrics)
        for m in self.modules:
            if m.sloc < 1:
                raise DatasetError(f"non-positive sloc for module {m.id!r}")
            if list(m.metrics) != keys:
                raise DatasetError(f"metric columns of module {m.id!r} differ from the release")
            for name, v in m.metrics.items():
                if not math.isfinite(v):
                    raise DatasetError(f"non-finite metric {name!r} for module {m.id!r}")

    @property
    def release_id(self) -> str:
        return f"{self.project}-{self.version}" if self.version else self.project

    @property
    def k(self) -> int:
        return len(self.modules)

    @property
    def s(self) -> int:
        return sum(m.sloc for m in self.modules)

    @property
    def labeled(self) -> bool:
        return self.modules[0].label is not None

    @property
    def n(self) -> int | None:
        if not self.labeled:
            return None
        return sum(1 for m in self.modules if m.label)

    @property
    def metric_names(self) -> tuple[str, ...]:
        return tuple(self.modules[0].metrics)

    @property
    def ids(self) -> list[str]:
        return [m.id for m in self.modules]

    def module(self, module_id: str) -> ModuleRecord:
        return self._index[module_id]

    @property
    def _index(self) -> dict[str, ModuleRecord]:
        cache = self.__dict__.get("_index_cache")
        if cache is None:
            cache = {m.id: m for m in self.modules}
            object.__setattr__(self, "_index_cache", cache)
        return cache

    def metric_matrix(self) -> np.ndarray:
        """Raw metrics as a ``k x d`` float array in module order."""
        names = self.metric_names
        return np.array([[m.metrics[c] for c in names] for m in self.modules],
                        dtype=float).reshape(self.k, len(names))

    def require_labels(self) -> None:
        if not self.labeled:
            raise DatasetError(f"release {self.release_id} has no defect labels")


def _parse_float(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise DatasetError(f"non-numeric value {text!r} at row {row}, column {column!r}") from None
    if not math.isfinite(value):
        raise DatasetError(f"non-finite value {text!r} at row {row}, column {column!r}")
    return value


def _parse_label(text: str, row: int, column: str) -> bool:
    word = text.strip().lower()
    if word in _TRUE_WORDS:
        return True
    if word in _FALSE_WORDS:
        return False
    count = _parse_float(text, row, column)
    if count < 0:
        raise DatasetError(f"negative bug count at row {row}, column {column!r}")
    # bug counts are binarized: any fault makes the module defective
    return count > 0


def load_release(path: str | Path, schema: ColumnSpec | None = None, *,
                 project: str | None = None, version: str = "") -> ReleaseDataset:
    """Read one release CSV into a validated :class:`ReleaseDataset`.

    Rows are numbered from 1 (the first data row after the header) in error
    messages.  ``project`` defaults to the file stem.
    """
    schema = schema or ColumnSpec()
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError(f"{path}: empty file, header row required") from None
        rows = [r for r in reader if any(cell.strip() for cell in r)]

    if len(set(header)) != len(header):
        raise DatasetError(f"{path}: duplicate column names in header")
    required = [schema.id_column, schema.sloc_column]
    if schema.label_column is not None:
        required.append(schema.label_column)
    for col in required:
        if col not in header:
            raise DatasetError(f"{path}: missing column {col!r}")

    if schema.metric_columns == ALL_REMAINING:
        skip = set(required) | set(schema.exclude_columns)
        metric_cols = [h for h in header if h not in skip]
    else:
        metric_cols = list(schema.metric_columns)
        for col in metric_cols:
            if col not in header:
                raise DatasetError(f"{path}: missing metric column {col!r}")
    pos = {h: i for i, h in enumerate(header)}

    modules = []
    seen: set[str] = set()
    for row_no, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise DatasetError(f"{path}: row {row_no} has {len(row)} cells, expected {len(header)}")
        mid = row[pos[schema.id_column]].strip()
        if not mid:
            raise DatasetError(f"{path}: missing id at row {row_no}, column {schema.id_column!r}")
        if mid in seen:
            raise DatasetError(f"{path}: duplicate id {mid!r} at row {row_no}")
        seen.add(mid)
        sloc = _parse_float(row[pos[schema.sloc_column]], row_no, schema.sloc_column)
        if sloc <= 0:
            raise DatasetError(f"{path}: non-positive sloc at row {row_no}")
        if sloc != int(sloc):
            raise DatasetError(f"{path}: non-integer sloc at row {row_no}")
        label = None
        if schema.label_column is not None:
            label = _parse_label(row[pos[schema.label_column]], row_no, schema.label_column)
        metrics = {c: _parse_float(row[pos[c]], row_no, c) for c in metric_cols}
        modules.append(ModuleRecord(mid, int(sloc), label, metrics))

    if not modules:
        raise DatasetError(f"{path}: no data rows")
    return ReleaseDataset(project or path.stem, version, tuple(modules))


def write_release(dataset: ReleaseDataset, path: str | Path, schema: ColumnSpec | None = None) -> None:
    """Write a release in the canonical layout (labels as 0/1)."""
    schema = schema or ColumnSpec()
    header = [schema.id_column, schema.sloc_column]
    if dataset.labeled:
        header.append(schema.label_column or "bug")
    header.extend(dataset.metric_names)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for m in dataset.modules:
            row = [m.id, str(m.sloc)]
            if dataset.labeled:
                row.append("1" if m.label else "0")
            row.extend(repr(float(m.metrics[c])) for c in dataset.metric_names)
            writer.writerow(row)


def filter_corpus(releases: Iterable[ReleaseDataset], min_instances: int = 100,
                  min_defect_ratio: float = 0.05, min_defective: int = 10) -> list[ReleaseDataset]:
    """Keep releases large and defect-rich enough for a meaningful evaluation.

    The defaults are the thresholds used to prune the IND-JLMIV+R corpus:
    at least 100 modules, at least 5% defective and at least 10 defective.
    """
    kept = []
    for release in releases:
        if filter_reasons(release, min_instances, min_defect_ratio, min_defective):
            continue
        kept.append(release)
    return kept


def filter_reasons(release: ReleaseDataset, min_instances: int = 100,
                   min_defect_ratio: float = 0.05, min_defective: int = 10) -> list[str]:
    """Reasons a release fails the corpus filter (empty when it passes)."""
    release.require_labels()
    k, n = release.k, release.n
    reasons = []
    if k < min_instances:
        reasons.append(f"k={k} < {min_instances} instances")
    if n < min_defective:
        reasons.append(f"n={n} < {min_defective} defective")
    if n < exact_fraction(min_defect_ratio) * k:
        reasons.append(f"defect ratio {n / k:.4f} < {min_defect_ratio}")
    return reasons


@dataclass(frozen=True)
class StandardizedMetrics:
    module_ids: tuple[str, ...]
    names: tuple[str, ...]
    values: np.ndarray
    dropped: tuple[str, ...]


def standardize_metrics(dataset: ReleaseDataset) -> StandardizedMetrics:
    """Z-score every metric within the release using the population std.

    Zero-variance metrics are dropped and listed in ``dropped``.
    """
    if dataset.k < 2:
        raise DatasetError("standardization needs at least 2 modules")
    raw = dataset.metric_matrix()
    names = dataset.metric_names
    mean = raw.mean(axis=0)
    centered = raw - mean
    # second pass removes the rounding left in the first mean
    centered -= centered.mean(axis=0)
    std = np.sqrt((centered ** 2).mean(axis=0))
    # a constant column can leave rounding residue in its std
    keep = std > 1e-12 * np.maximum(1.0, np.abs(mean))
    if not keep.any():
        raise DatasetError("no usable metrics: every metric has zero variance")
    values = centered[:, keep] / std[keep]
    return StandardizedMetrics(
        module_ids=tuple(dataset.ids),
        names=tuple(n for n, kp in zip(names, keep) if kp),
        values=values,
        dropped=tuple(n for n, kp in zip(names, keep) if not kp),
    )


def release_from_columns(ids: Sequence[str], slocs: Sequence[int], labels: Sequence[bool] | None = None,
                         metrics: Mapping[str, Sequence[float]] | None = None, *,
                         project: str = "release", version: str = "") -> ReleaseDataset:
    """Build a release from parallel columns (handy for fixtures and notebooks)."""
    metrics = metrics or {}
    modules = []
    for i, mid in enumerate(ids):
        label = None if labels is None else bool(labels[i])
        modules.append(ModuleRecord(str(mid), int(slocs[i]), label,
                                    {name: float(col[i]) for name, col in metrics.items()}))
    return ReleaseDataset(project, version, tuple(modules))
