"""Synthetic releases with size-driven defect-proneness.

SLOC is log-normal; the other metrics grow with size plus noise, and the
chance of a defect rises with size while defect *density* falls, so the
size-based models have something to find.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from matter.dataset import ModuleRecord, ReleaseDataset, write_release

METRICS = ("wmc", "cbo", "rfc", "lcom", "ca", "ce")

# (project, version, modules, seed) of the bundled corpus
BUNDLED = (
    ("alpha", "1.0", 160, 11),
    ("alpha", "2.0", 210, 12),
    ("beta", "0.9", 120, 13),
    ("gamma", "3.1", 260, 14),
    ("delta", "1.4", 180, 15),
)


def make_release(k: int, seed: int, project: str = "synthetic", version: str = "",
                 labeled: bool = True) -> ReleaseDataset:
    rng = np.random.default_rng(seed)
    log_size = rng.normal(4.6, 1.1, size=k)
    sloc = np.maximum(1, np.round(np.exp(log_size))).astype(int)
    z = (np.log(sloc) - 4.6) / 1.1
    metrics = {}
    for j, name in enumerate(METRICS):
        weight = 0.9 - 0.12 * j
        raw = np.exp(weight * z + rng.normal(0.0, 0.6, size=k)) * (3 + j)
        metrics[name] = np.round(raw, 2)
    risk = -1.6 + 0.9 * z + 0.5 * (np.log(metrics["cbo"]) - np.log(metrics["cbo"]).mean())
    prob = 1.0 / (1.0 + np.exp(-risk))
    labels = rng.random(k) < prob
    modules = []
    for i in range(k):
        label = bool(labels[i]) if labeled else None
        modules.append(ModuleRecord(f"m{i:04d}", int(sloc[i]), label,
                                    {name: float(metrics[name][i]) for name in METRICS}))
    return ReleaseDataset(project, version, tuple(modules))


def bundled_corpus_dir() -> Path:
    """Directory holding the bundled five-release corpus and its ``config.json``."""
    return Path(str(resources.files("matter") / "data" / "synthetic"))


def write_bundled_corpus(directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for project, version, k, seed in BUNDLED:
        release = make_release(k, seed, project, version)
        path = directory / f"{release.release_id}.csv"
        write_release(release, path)
        paths.append(path)
    return paths
