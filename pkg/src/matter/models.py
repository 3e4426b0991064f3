"""Unsupervised reference models that rank a release using only its own data.

ManualDown and ManualUp rank by size.  CLA, FCM and SC are classifiers; each
also yields a ranking so that effort-aligned cuts apply to them uniformly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from matter.dataset import DatasetError, ReleaseDataset, standardize_metrics
from matter.ranking import Ranking


class ModelError(RuntimeError):
    """A model could not produce an output for the given release."""


class DegenerateClusteringError(ModelError):
    pass


class EigenSolverError(ModelError):
    pass


@dataclass(frozen=True)
class ModelOutput:
    ranking: Ranking
    intrinsic_labels: Mapping[str, bool] | None = None
    diagnostics: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.intrinsic_labels is not None and set(self.intrinsic_labels) != set(self.ranking.order):
            raise ValueError("intrinsic labels must cover every ranked module exactly once")


def manual_down(dataset: ReleaseDataset) -> ModelOutput:
    scores = {m.id: float(m.sloc) for m in dataset.modules}
    return ModelOutput(Ranking.from_scores(dataset.release_id, scores, "manualdown"))


def manual_up(dataset: ReleaseDataset) -> ModelOutput:
    scores = {m.id: 1.0 / m.sloc for m in dataset.modules}
    # sort on sloc itself so equal sizes stay in id order without float ties
    order = sorted(dataset.ids, key=lambda mid: (dataset.module(mid).sloc, mid))
    return ModelOutput(Ranking(dataset.release_id, tuple(order), scores, "manualup"))


def cla(dataset: ReleaseDataset) -> ModelOutput:
    """Cluster modules by how many metrics exceed the release median, label the top half.

    ``K`` counts metrics strictly above their median.  With ``m`` distinct K
    values, the clusters holding the ``ceil(m/2)`` largest are defective.
    """
    if not dataset.metric_names:
        raise ModelError("CLA needs at least one metric")
    raw = dataset.metric_matrix()
    medians = np.median(raw, axis=0)
    kvals = (raw > medians).sum(axis=1)
    distinct = sorted(set(kvals.tolist()), reverse=True)
    defective_k = set(distinct[: math.ceil(len(distinct) / 2)])

    ids = dataset.ids
    order = sorted(range(dataset.k), key=lambda i: (-kvals[i], -dataset.modules[i].sloc, ids[i]))
    ranking = Ranking(
        dataset.release_id,
        tuple(ids[i] for i in order),
        {ids[i]: float(kvals[i]) for i in range(dataset.k)},
        "cla",
    )
    labels = {ids[i]: bool(kvals[i] in defective_k) for i in range(dataset.k)}
    sizes = {int(kv): int((kvals == kv).sum()) for kv in distinct}
    return ModelOutput(ranking, labels, {"k_values": sizes, "defective_k": sorted(defective_k)})


@dataclass(frozen=True)
class FcmParams:
    fuzzifier: float = 2.0
    tol: float = 1e-6
    max_iter: int = 300
    seed: int = 0


def _fcm_memberships(x: np.ndarray, centers: np.ndarray, m: float) -> np.ndarray:
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    u = np.empty_like(d2)
    at_center = d2 <= 0.0
    hit = at_center.any(axis=1)
    # points sitting on a center belong to it fully
    u[hit] = at_center[hit] / at_center[hit].sum(axis=1, keepdims=True)
    rest = ~hit
    if rest.any():
        # u_ij = 1 / sum_l (d_ij / d_il)^(2/(m-1)), written on squared distances
        inv = d2[rest] ** (-1.0 / (m - 1.0))
        u[rest] = inv / inv.sum(axis=1, keepdims=True)
    return u


def _fcm_objective(x: np.ndarray, centers: np.ndarray, u: np.ndarray, m: float) -> float:
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    return float((u ** m * d2).sum())


def _fcm_init(x: np.ndarray, seed: int) -> np.ndarray:
    # Extremes along a seeded random direction.  Choosing by value rather than
    # by row index keeps the start independent of module order.
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(x.shape[1])
    proj = x @ direction
    lo = x[proj == proj.min()]
    hi = x[proj == proj.max()]
    pick = lambda rows: rows[np.lexsort(rows.T[::-1])][0]
    return np.vstack([pick(lo), pick(hi)])


def fuzzy_cmeans(x: np.ndarray, params: FcmParams = FcmParams()) -> dict:
    """Two-cluster fuzzy c-means on the rows of ``x``.

    Returns the memberships (``k x 2``), centers, iteration count and the
    objective after every iteration.
    """
    m = params.fuzzifier
    if m <= 1.0:
        raise ValueError("fuzzifier must be > 1")
    centers = _fcm_init(x, params.seed)
    if np.allclose(centers[0], centers[1], rtol=0.0, atol=1e-12):
        raise DegenerateClusteringError("degenerate clustering: all modules coincide")
    u = _fcm_memberships(x, centers, m)
    history = [_fcm_objective(x, centers, u, m)]
    converged = False
    it = 0
    for it in range(1, params.max_iter + 1):
        w = u ** m
        centers = (w.T @ x) / w.sum(axis=0)[:, None]
        new_u = _fcm_memberships(x, centers, m)
        history.append(_fcm_objective(x, centers, new_u, m))
        delta = np.abs(new_u - u).max()
        u = new_u
        if delta < params.tol:
            converged = True
            break
    return {"u": u, "centers": centers, "iterations": it, "converged": converged, "objective": history}


def fcm(dataset: ReleaseDataset, params: FcmParams = FcmParams()) -> ModelOutput:
    """Fuzzy c-means with two clusters on z-scored metrics.

    Each module joins the cluster it belongs to more; the larger cluster is
    clean.  If both are the same size, the cluster whose center has the
    larger coordinate sum is defective.  Modules are ranked by membership in
    the defective cluster.
    """
    if dataset.k < 2:
        raise ModelError("FCM needs at least 2 modules")
    try:
        z = standardize_metrics(dataset)
    except DatasetError as exc:
        raise DegenerateClusteringError(f"degenerate clustering: {exc}") from exc
    fit = fuzzy_cmeans(z.values, params)
    u, centers = fit["u"], fit["centers"]
    if (np.linalg.norm(centers[0] - centers[1]) <= 1e-9 * (1.0 + np.abs(centers).max())
            or np.all(np.abs(u - 0.5) <= 1e-9)):
        raise DegenerateClusteringError("degenerate clustering: cluster centers coincide")

    assign = (u[:, 1] > u[:, 0]).astype(int)
    sizes = np.bincount(assign, minlength=2)
    if sizes[0] != sizes[1]:
        defective = int(np.argmin(sizes))
    else:
        sums = centers.sum(axis=1)
        defective = int(np.argmax(sums))
    ids = dataset.ids
    member = u[:, defective]
    scores = {ids[i]: float(member[i]) for i in range(dataset.k)}
    labels = {ids[i]: bool(assign[i] == defective) for i in range(dataset.k)}
    diagnostics = {
        "iterations": fit["iterations"],
        "converged": fit["converged"],
        "objective": fit["objective"],
        "cluster_sizes": {"defective": int(sizes[defective]), "clean": int(sizes[1 - defective])},
        "dropped_metrics": list(z.dropped),
        "memberships": u,
    }
    return ModelOutput(Ranking.from_scores(dataset.release_id, scores, "fcm"), labels, diagnostics)


@dataclass(frozen=True)
class ScParams:
    seed: int = 0
    eig_tol: float = 1e-9
    max_eig_iter: int = 20000


def similarity_graph(z: np.ndarray) -> np.ndarray:
    """Cosine similarity of z-scored rows, negatives clamped to 0, zero diagonal.

    Rows of all zeros (a module sitting exactly on the metric means) have no
    direction and get no edges.
    """
    norms = np.linalg.norm(z, axis=1)
    unit = np.zeros_like(z)
    nz = norms > 0
    unit[nz] = z[nz] / norms[nz, None]
    w = np.clip(unit @ unit.T, 0.0, None)
    np.fill_diagonal(w, 0.0)
    return w


def normalized_laplacian(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``I - D^-1/2 W D^-1/2`` and ``D^1/2 1`` (its eigenvalue-0 direction).

    Isolated vertices get a zero in ``D^-1/2``.
    """
    deg = w.sum(axis=1)
    inv_sqrt = np.zeros_like(deg)
    pos = deg > 0
    inv_sqrt[pos] = 1.0 / np.sqrt(deg[pos])
    lap = np.eye(len(w)) - inv_sqrt[:, None] * w * inv_sqrt[None, :]
    return lap, np.sqrt(deg)


def fiedler_vector(lap: np.ndarray, trivial: np.ndarray, params: ScParams = ScParams()) -> tuple[float, np.ndarray, int]:
    """Second-smallest eigenpair of a normalized Laplacian by deflated power iteration.

    The spectrum of a normalized Laplacian lies in [0, 2], so power iteration
    on ``2I - L`` with the known eigenvalue-0 direction projected out
    converges to the wanted pair.  Stops once ``||L v - lambda v|| <= eig_tol``.
    """
    k = len(lap)
    q = trivial / np.linalg.norm(trivial)
    shifted = 2.0 * np.eye(k) - lap
    rng = np.random.default_rng(params.seed)
    v = rng.standard_normal(k)
    v -= q * (q @ v)
    v /= np.linalg.norm(v)
    for it in range(1, params.max_eig_iter + 1):
        v = shifted @ v
        v -= q * (q @ v)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise EigenSolverError(f"eigensolver collapsed to zero after {it} iterations")
        v /= norm
        lv = lap @ v
        lam = float(v @ lv)
        if np.linalg.norm(lv - lam * v) <= params.eig_tol:
            # fix the sign so runs are reproducible: largest |component| positive
            j = int(np.argmax(np.abs(v)))
            if v[j] < 0:
                v = -v
            return lam, v, it
    raise EigenSolverError(f"eigensolver did not converge in {params.max_eig_iter} iterations "
                           f"(tol {params.eig_tol:g})")


def spectral_cluster(dataset: ReleaseDataset, params: ScParams = ScParams()) -> ModelOutput:
    """Normalized-cut bipartition of the metric-similarity graph.

    The side with the larger mean z-scored metric sum is defective; modules
    are ranked by their Fiedler component, signed toward the defective side.
    """
    if dataset.k < 2:
        raise ModelError("SC needs at least 2 modules")
    z = standardize_metrics(dataset)
    w = similarity_graph(z.values)
    if not (w > 0).any():
        raise ModelError("similarity graph has no edges")
    lap, trivial = normalized_laplacian(w)
    lam, v, iterations = fiedler_vector(lap, trivial, params)

    threshold = 0.0
    side = v > threshold
    if side.all() or not side.any():
        threshold = float(np.median(v))
        side = v > threshold
    if side.all() or not side.any():
        # every component equal: split the (component, id) order in half
        ids = dataset.ids
        ranked = sorted(range(dataset.k), key=lambda i: (-v[i], ids[i]))
        side = np.zeros(dataset.k, dtype=bool)
        side[ranked[: dataset.k // 2]] = True

    row_sums = z.values.sum(axis=1)
    positive_defective = row_sums[side].mean() >= row_sums[~side].mean()
    sign = 1.0 if positive_defective else -1.0
    defective = side if positive_defective else ~side

    ids = dataset.ids
    scores = {ids[i]: float(sign * (v[i] - threshold)) for i in range(dataset.k)}
    labels = {ids[i]: bool(defective[i]) for i in range(dataset.k)}
    diagnostics = {
        "eigenvalue": lam,
        "iterations": iterations,
        "fiedler": v,
        "threshold": threshold,
        "cluster_sizes": {"defective": int(defective.sum()), "clean": int((~defective).sum())},
        "dropped_metrics": list(z.dropped),
    }
    return ModelOutput(Ranking.from_scores(dataset.release_id, scores, "sc"), labels, diagnostics)
