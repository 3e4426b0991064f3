"""Cross-dataset comparison of models: ranks, effect sizes, correlations, Scott-Knott ESD."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

NEGLIGIBLE = 0.147
SMALL = 0.33
MEDIUM = 0.474


@dataclass(frozen=True)
class PerformanceMatrix:
    """Indicator values for every (model, dataset) pair.

    ``values[i][j]`` belongs to ``models[i]`` on ``datasets[j]``; ``None``
    (or NaN) marks an undefined cell.
    """

    models: tuple[str, ...]
    datasets: tuple[str, ...]
    values: tuple[tuple[float | None, ...], ...]
    higher_is_better: bool = True

    def __post_init__(self):
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "values", tuple(tuple(row) for row in self.values))
        if len(set(self.models)) != len(self.models):
            raise ValueError("duplicate model names")
        if len(self.values) != len(self.models) or any(len(r) != len(self.datasets) for r in self.values):
            raise ValueError("value grid does not match models x datasets")


@dataclass(frozen=True)
class RankMatrix:
    models: tuple[str, ...]
    datasets: tuple[str, ...]
    ranks: np.ndarray  # models x datasets
    undefined: np.ndarray  # bool, same shape


def _is_undefined(v) -> bool:
    return v is None or (isinstance(v, float) and math.isnan(v))


def rank_transform(matrix: PerformanceMatrix) -> RankMatrix:
    """Rank models within each dataset, 1 = best, tied values sharing mid-ranks.

    Undefined cells rank below every defined value (tied among themselves).
    """
    m = len(matrix.models)
    if m < 2:
        raise ValueError("rank transform needs at least 2 models")
    ranks = np.empty((m, len(matrix.datasets)))
    undefined = np.zeros_like(ranks, dtype=bool)
    for j in range(len(matrix.datasets)):
        column = [matrix.values[i][j] for i in range(m)]
        undef = np.array([_is_undefined(v) for v in column])
        if (~undef).sum() < 2:
            raise ValueError(f"dataset {matrix.datasets[j]!r} has fewer than 2 defined values")
        defined = np.array([float(v) for v, u in zip(column, undef) if not u])
        keyed = -defined if matrix.higher_is_better else defined
        col_ranks = np.empty(m)
        col_ranks[~undef] = rankdata(keyed, method="average")
        n_def = len(defined)
        n_undef = int(undef.sum())
        col_ranks[undef] = n_def + (n_undef + 1) / 2.0
        ranks[:, j] = col_ranks
        undefined[:, j] = undef
    return RankMatrix(matrix.models, matrix.datasets, ranks, undefined)


def magnitude(delta: float) -> str:
    d = abs(delta)
    if d < NEGLIGIBLE:
        return "negligible"
    if d < SMALL:
        return "small"
    if d < MEDIUM:
        return "medium"
    return "large"


@dataclass(frozen=True)
class CliffsDelta:
    delta: float
    magnitude: str


def cliffs_delta_value(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.sort(np.asarray(xs, dtype=float))
    y = np.sort(np.asarray(ys, dtype=float))
    if len(x) == 0 or len(y) == 0:
        raise ValueError("Cliff's delta needs two non-empty samples")
    # for each x: #y below it minus #y above it
    below = np.searchsorted(y, x, side="left")
    above = len(y) - np.searchsorted(y, x, side="right")
    return float((below - above).sum()) / (len(x) * len(y))


def cliffs_delta(xs: Sequence[float], ys: Sequence[float]) -> CliffsDelta:
    """Dominance effect size ``(#{x > y} - #{x < y}) / (|xs| |ys|)``."""
    d = cliffs_delta_value(xs, ys)
    return CliffsDelta(d, magnitude(d))


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation of the mid-rank vectors."""
    x, y = _paired(xs, ys)
    return _pearson(rankdata(x), rankdata(y))


def kendall(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Kendall's tau-b (tie-corrected)."""
    x, y = _paired(xs, ys)
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    iu = np.triu_indices(len(x), k=1)
    dx, dy = dx[iu], dy[iu]
    s = float((dx * dy).sum())
    nx = float(np.count_nonzero(dx))
    ny = float(np.count_nonzero(dy))
    if nx == 0 or ny == 0:
        raise ValueError("Kendall's tau is undefined for a constant vector")
    return s / math.sqrt(nx * ny)


def _paired(xs, ys) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("correlation needs two equal-length 1-D samples")
    if len(x) < 2:
        raise ValueError("correlation needs at least 2 observations")
    return x, y


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    den = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if den == 0:
        raise ValueError("Spearman's rho is undefined for a constant vector")
    return max(-1.0, min(1.0, float(xc @ yc) / den))


@dataclass(frozen=True)
class SkGrouping:
    models: tuple[str, ...]  # best mean rank first
    mean_rank: Mapping[str, float]
    group: Mapping[str, int]
    ranks: RankMatrix = field(repr=False)

    def groups(self) -> list[list[str]]:
        out: dict[int, list[str]] = {}
        for name in self.models:
            out.setdefault(self.group[name], []).append(name)
        return [out[g] for g in sorted(out)]

    def rows(self) -> list[dict]:
        return [{"model": name, "mean_rank": self.mean_rank[name], "group": self.group[name]}
                for name in self.models]


def _pooled(ranks: RankMatrix, members: Sequence[int]) -> np.ndarray:
    return ranks.ranks[list(members)].ravel()


def _best_split(means: np.ndarray) -> int:
    """Split index maximizing the between-group sum of squares of ``means``."""
    total = means.mean()
    best, best_at = -1.0, 1
    for i in range(1, len(means)):
        a, b = means[:i], means[i:]
        bss = len(a) * (a.mean() - total) ** 2 + len(b) * (b.mean() - total) ** 2
        if bss > best + 1e-12:
            best, best_at = bss, i
    return best_at


def scott_knott_esd(matrix: PerformanceMatrix, threshold: float = NEGLIGIBLE) -> SkGrouping:
    """Group models whose per-dataset ranks differ only negligibly.

    Models are ordered by mean rank and split recursively where the
    between-group sum of squares of mean ranks peaks; a split stands only if
    Cliff's delta between the two sides' pooled ranks is at least
    ``threshold``.  Afterwards adjacent groups are merged, closest pair
    first, until every neighbouring pair differs non-negligibly.
    """
    if len(matrix.models) < 2 or len(matrix.datasets) < 2:
        raise ValueError("Scott-Knott ESD needs at least 2 models and 2 datasets")
    ranks = rank_transform(matrix)
    means = ranks.ranks.mean(axis=1)
    order = sorted(range(len(matrix.models)), key=lambda i: (means[i], matrix.models[i]))

    def split(members: list[int]) -> list[list[int]]:
        if len(members) < 2:
            return [members]
        at = _best_split(means[members])
        left, right = members[:at], members[at:]
        d = cliffs_delta_value(_pooled(ranks, left), _pooled(ranks, right))
        if abs(d) < threshold:
            return [members]
        return split(left) + split(right)

    groups = split(order)
    while len(groups) > 1:
        deltas = [abs(cliffs_delta_value(_pooled(ranks, groups[i]), _pooled(ranks, groups[i + 1])))
                  for i in range(len(groups) - 1)]
        i = int(np.argmin(deltas))
        if deltas[i] >= threshold:
            break
        groups[i:i + 2] = [groups[i] + groups[i + 1]]

    names = tuple(matrix.models[i] for i in order)
    group_of = {matrix.models[i]: g + 1 for g, members in enumerate(groups) for i in members}
    mean_rank = {matrix.models[i]: float(means[i]) for i in order}
    return SkGrouping(names, mean_rank, group_of, ranks)


def delta_matrix(ranks: RankMatrix) -> np.ndarray:
    """Pairwise Cliff's delta between models' per-dataset ranks.

    Entry ``[i, j]`` is positive when model ``i`` tends to rank worse
    (numerically larger) than model ``j``.
    """
    m = len(ranks.models)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i != j:
                out[i, j] = cliffs_delta_value(ranks.ranks[i], ranks.ranks[j])
    return out
