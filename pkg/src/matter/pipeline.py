"""End-to-end runs: load a corpus, run models, evaluate under budgets, compare, sweep."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from matter import __version__
from matter.dataset import (ColumnSpec, DatasetError, ReleaseDataset, filter_reasons,
                            load_release)
from matter.indicators import (CORE_INDICATORS, CUT_FIELDS, HIGHER_IS_BETTER, INDICATOR_NAMES,
                               EvalParams, IndicatorReport, evaluate, report_row)
from matter.models import (FcmParams, ModelError, ModelOutput, ScParams, cla, fcm, manual_down,
                           manual_up, spectral_cluster)
from matter.one import OneConfig, one_ranking
from matter.ranking import EffortBudget, import_external_ranking
from matter.stats import PerformanceMatrix, delta_matrix, scott_knott_esd

MODEL_NAMES = ("one", "manualdown", "manualup", "cla", "fcm", "sc")
DEFAULT_BUDGETS = (EffortBudget("snm", 0.2), EffortBudget("ssc", 0.2))
SWEEP_FIELDS = ("x", "tp", "pii", "pci")


class ConfigError(ValueError):
    """The run configuration is malformed."""


@dataclass(frozen=True)
class ReleaseEntry:
    path: Path
    columns: ColumnSpec
    project: str | None = None
    version: str = ""


@dataclass(frozen=True)
class RunConfig:
    corpus: tuple[ReleaseEntry, ...]
    models: tuple[str, ...] = ("one",)
    budgets: tuple[EffortBudget, ...] = DEFAULT_BUDGETS
    indicators: tuple[str, ...] = CORE_INDICATORS
    seed: int = 0
    output_dir: Path = Path("matter-out")
    params: Mapping[str, Any] = field(default_factory=dict)
    filter: Mapping[str, Any] = field(default_factory=dict)
    base_dir: Path | None = None  # paths hash relative to this, so checkouts agree

    def __post_init__(self):
        if not self.corpus:
            raise ConfigError("config needs at least one release")
        if not self.models:
            raise ConfigError("config needs at least one model")
        if not self.budgets:
            raise ConfigError("config needs at least one budget")
        for name in self.models:
            if name not in MODEL_NAMES and not name.startswith("external:"):
                raise ConfigError(f"unknown model {name!r}")
        for name in self.indicators:
            if name not in INDICATOR_NAMES and name not in CUT_FIELDS:
                raise ConfigError(f"unknown indicator {name!r}")

    def _portable(self, path: str | Path) -> str:
        if self.base_dir is None:
            return str(path)
        return Path(os.path.relpath(path, self.base_dir)).as_posix()

    def canonical(self) -> dict:
        """Everything that affects results (output location excluded)."""
        models = [f"external:{self._portable(m.split(':', 1)[1])}" if m.startswith("external:") else m
                  for m in self.models]
        return {
            "corpus": [{"path": self._portable(e.path), "project": e.project, "version": e.version,
                        "columns": _columns_dict(e.columns)} for e in self.corpus],
            "models": models,
            "budgets": [{"kind": b.kind.value, "fraction": b.fraction} for b in self.budgets],
            "indicators": list(self.indicators),
            "seed": self.seed,
            "params": dict(sorted(self.params.items())),
        }

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @property
    def one_config(self) -> OneConfig:
        return OneConfig(float(self.params.get("one.excluded", 0.2)))

    @property
    def fcm_params(self) -> FcmParams:
        p = self.params
        return FcmParams(fuzzifier=float(p.get("fcm.fuzzifier", 2.0)), tol=float(p.get("fcm.tol", 1e-6)),
                         max_iter=int(p.get("fcm.max_iter", 300)), seed=int(p.get("fcm.seed", self.seed)))

    @property
    def sc_params(self) -> ScParams:
        p = self.params
        return ScParams(seed=int(p.get("sc.seed", self.seed)), eig_tol=float(p.get("sc.eig_tol", 1e-9)),
                        max_eig_iter=int(p.get("sc.max_eig_iter", 20000)))

    @property
    def eval_params(self) -> EvalParams:
        return EvalParams(recall_effort=float(self.params.get("recall_effort", 0.2)))


def _columns_dict(spec: ColumnSpec) -> dict:
    metrics = spec.metric_columns if isinstance(spec.metric_columns, str) else list(spec.metric_columns)
    return {"id_column": spec.id_column, "sloc_column": spec.sloc_column,
            "label_column": spec.label_column, "metric_columns": metrics,
            "exclude_columns": list(spec.exclude_columns)}


def parse_config(data: Mapping, base_dir: Path = Path(".")) -> RunConfig:
    """Build a RunConfig from decoded JSON; relative paths resolve against ``base_dir``."""
    known = {"corpus", "columns", "models", "budgets", "indicators", "seed", "output_dir", "params", "filter"}
    params = dict(data.get("params", {}))
    for key, value in data.items():
        if "." in key:
            params[key] = value
        elif key not in known:
            raise ConfigError(f"unknown config key {key!r}")
    try:
        default_cols = ColumnSpec.from_dict(data.get("columns", {}))
        corpus = []
        for item in data.get("corpus", []):
            if isinstance(item, str):
                item = {"path": item}
            path = Path(item["path"])
            if not path.is_absolute():
                path = base_dir / path
            cols = ColumnSpec.from_dict(item["columns"]) if "columns" in item else default_cols
            corpus.append(ReleaseEntry(path, cols, item.get("project"), str(item.get("version", ""))))
        budgets = tuple(EffortBudget(b["kind"], float(b.get("fraction", 0.2)))
                        for b in data.get("budgets", [])) or DEFAULT_BUDGETS
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad config: {exc}") from exc
    models = []
    for name in data.get("models", ["one"]):
        name = name.strip()
        if name.startswith("external:"):
            target = Path(name.split(":", 1)[1])
            if not target.is_absolute():
                target = base_dir / target
            name = f"external:{target}"
        else:
            name = name.lower()
        models.append(name)
    out = Path(data.get("output_dir", "matter-out"))
    if not out.is_absolute():
        out = base_dir / out
    return RunConfig(
        corpus=tuple(corpus),
        models=tuple(models),
        budgets=budgets,
        indicators=tuple(data.get("indicators", CORE_INDICATORS)),
        seed=int(data.get("seed", 0)),
        output_dir=out,
        params=params,
        filter=dict(data.get("filter", {})),
        base_dir=base_dir,
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return parse_config(data, path.parent)


def load_corpus(config: RunConfig) -> list[ReleaseDataset]:
    releases = [load_release(e.path, e.columns, project=e.project, version=e.version) for e in config.corpus]
    seen: set[str] = set()
    for r in releases:
        if r.release_id in seen:
            raise DatasetError(f"release id {r.release_id!r} appears twice in the corpus")
        seen.add(r.release_id)
    return releases


def _external_path(target: str, release_id: str) -> Path:
    if "{release}" in target:
        return Path(target.format(release=release_id))
    path = Path(target)
    return path / f"{release_id}.csv" if path.is_dir() else path


def run_model(name: str, dataset: ReleaseDataset, config: RunConfig,
              one_config: OneConfig | None = None) -> ModelOutput:
    if name == "one":
        return ModelOutput(one_ranking(dataset, one_config or config.one_config))
    if name == "manualdown":
        return manual_down(dataset)
    if name == "manualup":
        return manual_up(dataset)
    if name == "cla":
        return cla(dataset)
    if name == "fcm":
        return fcm(dataset, config.fcm_params)
    if name == "sc":
        return spectral_cluster(dataset, config.sc_params)
    if name.startswith("external:"):
        path = _external_path(name.split(":", 1)[1], dataset.release_id)
        ranking = import_external_ranking(path, dataset, producer=name)
        return ModelOutput(ranking)
    raise ConfigError(f"unknown model {name!r}")


@dataclass(frozen=True)
class Failure:
    model: str
    release: str
    kind: str  # "data" or "model"
    message: str


@dataclass(frozen=True)
class _Task:
    index: int
    model: str
    dataset: ReleaseDataset
    budgets: tuple[EffortBudget, ...]
    config: RunConfig
    one_config: OneConfig | None = None


def _run_task(task: _Task) -> tuple[int, list[IndicatorReport], Failure | None]:
    try:
        out = run_model(task.model, task.dataset, task.config, task.one_config)
        reports = [evaluate(out, task.dataset, b, task.config.eval_params) for b in task.budgets]
        # external rankings carry a path-based producer; report the model name from the config
        reports = [replace(r, model=task.model) for r in reports]
        return task.index, reports, None
    except (DatasetError, OSError) as exc:
        return task.index, [], Failure(task.model, task.dataset.release_id, "data", str(exc))
    except (ModelError, ValueError, ArithmeticError) as exc:
        return task.index, [], Failure(task.model, task.dataset.release_id, "model", str(exc))


def _gather(tasks: Sequence[_Task], workers: int) -> list[tuple[int, list[IndicatorReport], Failure | None]]:
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        done = [_run_task(t) for t in tasks]
    # completion order varies with the pool; output order must not
    done.sort(key=lambda item: item[0])
    return done


def _execute(tasks: Sequence[_Task], workers: int) -> tuple[list[IndicatorReport], list[Failure]]:
    done = _gather(tasks, workers)
    reports = [r for _, rs, _ in done for r in rs]
    failures = [f for _, _, f in done if f is not None]
    return reports, failures


@dataclass
class EvaluationRun:
    config: RunConfig
    reports: list[IndicatorReport]
    failures: list[Failure]

    def rows(self) -> list[dict]:
        return [report_row(r, self.config.indicators) for r in self.reports]


def run_evaluate(config: RunConfig, workers: int = 1,
                 releases: Sequence[ReleaseDataset] | None = None) -> EvaluationRun:
    releases = list(releases) if releases is not None else load_corpus(config)
    tasks = [_Task(i, model, release, config.budgets, config)
             for i, (release, model) in enumerate((r, m) for r in releases for m in config.models)]
    reports, failures = _execute(tasks, workers)
    return EvaluationRun(config, reports, failures)


def provenance(config: RunConfig) -> dict:
    return {"tool": "matter", "version": __version__, "seed": config.seed,
            "config_sha256": config.config_hash}


def _provenance_line(prov: Mapping) -> str:
    return "# " + " ".join(f"{k}={v}" for k, v in prov.items()) + "\n"


def _csv_text(rows: Sequence[Mapping], columns: Sequence[str], prov: Mapping) -> str:
    buf = io.StringIO()
    buf.write(_provenance_line(prov))
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: "" if row.get(c) is None else row[c] for c in columns})
    return buf.getvalue()


def result_columns(indicators: Sequence[str]) -> list[str]:
    cols = ["model", "release", "budget_kind", "fraction", *CUT_FIELDS]
    cols += [i for i in indicators if i not in CUT_FIELDS]
    return cols + ["notes"]


def write_results(run: EvaluationRun, out_dir: str | Path | None = None) -> tuple[Path, Path]:
    """Write ``results.csv`` and ``results.json``; rows in corpus/model/budget order."""
    out = Path(out_dir or run.config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    prov = provenance(run.config)
    rows = run.rows()
    csv_path = out / "results.csv"
    csv_path.write_text(_csv_text(rows, result_columns(run.config.indicators), prov), encoding="utf-8")
    json_path = out / "results.json"
    payload = {"provenance": prov, "rows": rows,
               "failures": [f.__dict__ for f in run.failures]}
    json_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return csv_path, json_path


def read_results(path: str | Path) -> tuple[dict, list[dict]]:
    """Read a ``results.csv`` back as (provenance, rows); empty cells become None."""
    prov: dict = {}
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            for item in line[1:].split():
                key, _, value = item.partition("=")
                prov[key] = value
        else:
            body.append(line)
    rows = []
    for row in csv.DictReader(body):
        rows.append({k: (None if v == "" else v) for k, v in row.items()})
    return prov, rows


def _budget_key(row: Mapping) -> tuple[str, float]:
    return row["budget_kind"], float(row["fraction"])


@dataclass(frozen=True)
class Comparison:
    indicator: str
    budget_kind: str
    fraction: float
    matrix: PerformanceMatrix
    grouping: Any
    deltas: np.ndarray


def compare_rows(rows: Sequence[Mapping], indicator: str, higher_is_better: bool | None = None,
                 budget_kind: str | None = None, fraction: float | None = None) -> list[Comparison]:
    """Scott-Knott ESD grouping of models per budget found in ``rows``.

    Only releases on which every model has a row are compared.
    """
    if higher_is_better is None:
        if indicator not in HIGHER_IS_BETTER:
            raise ConfigError(f"no default polarity for {indicator!r}; pass one explicitly")
        higher_is_better = HIGHER_IS_BETTER[indicator]
    budgets = sorted({_budget_key(r) for r in rows})
    if budget_kind is not None:
        budgets = [b for b in budgets if b[0] == budget_kind]
    if fraction is not None:
        budgets = [b for b in budgets if abs(b[1] - fraction) < 1e-12]
    if not budgets:
        raise DatasetError("no result rows match the requested budget")
    out = []
    for kind, frac in budgets:
        sub = [r for r in rows if _budget_key(r) == (kind, frac)]
        if sub and indicator not in sub[0]:
            raise DatasetError(f"results have no column {indicator!r}")
        models = list(dict.fromkeys(r["model"] for r in sub))
        cells: dict[tuple[str, str], float | None] = {}
        for r in sub:
            v = r[indicator]
            cells[(r["model"], r["release"])] = None if v is None else float(v)
        releases = list(dict.fromkeys(r["release"] for r in sub))
        shared = [rel for rel in releases if all((m, rel) in cells for m in models)]
        if len(models) < 2 or len(shared) < 2:
            raise DatasetError("comparison needs at least 2 models sharing at least 2 releases")
        matrix = PerformanceMatrix(models, shared, [[cells[(m, rel)] for rel in shared] for m in models],
                                   higher_is_better)
        grouping = scott_knott_esd(matrix)
        out.append(Comparison(indicator, kind, frac, matrix, grouping, delta_matrix(grouping.ranks)))
    return out


def write_comparison(comp: Comparison, out_dir: str | Path, prov: Mapping) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{comp.indicator}_{comp.budget_kind}_{comp.fraction:g}"
    rows = comp.grouping.rows()
    g_csv = out / f"grouping_{stem}.csv"
    g_csv.write_text(_csv_text(rows, ["model", "mean_rank", "group"], prov), encoding="utf-8")
    g_json = out / f"grouping_{stem}.json"
    g_json.write_text(json.dumps({"provenance": dict(prov), "indicator": comp.indicator,
                                  "budget_kind": comp.budget_kind, "fraction": comp.fraction,
                                  "higher_is_better": comp.matrix.higher_is_better,
                                  "datasets": list(comp.matrix.datasets),
                                  "groups": rows}, indent=2) + "\n", encoding="utf-8")
    names = list(comp.grouping.ranks.models)
    d_rows = [{"model": a, **{b: float(comp.deltas[i, j]) for j, b in enumerate(names)}}
              for i, a in enumerate(names)]
    d_csv = out / f"delta_{stem}.csv"
    d_csv.write_text(_csv_text(d_rows, ["model", *names], prov), encoding="utf-8")
    return [g_csv, g_json, d_csv]


def load_result_files(paths: Sequence[str | Path], force: bool = False) -> tuple[dict, list[dict]]:
    provs, rows = [], []
    for p in paths:
        prov, r = read_results(p)
        provs.append(prov)
        rows.extend(r)
    hashes = {p.get("config_sha256") for p in provs}
    if len(hashes) > 1 and not force:
        raise DatasetError("result files come from different configs (config_sha256 differs); "
                           "use --force to compare anyway")
    merged = dict(provs[0]) if provs else {}
    if len(hashes) > 1:
        merged["config_sha256"] = "+".join(sorted(h or "?" for h in hashes))
    return merged, rows


def run_sweep(config: RunConfig, axis: str, grid: Sequence[float], workers: int = 1,
              releases: Sequence[ReleaseDataset] | None = None) -> list[dict]:
    """Long-format rows ``(axis, grid_value, model, release, budget_kind, fraction, indicator, value)``.

    ``axis`` is ``"budget-fraction"`` (every configured budget kind at each
    grid fraction) or ``"excluded-pct"`` (ONE's exclusion share; other
    models are evaluated unchanged at every point).
    """
    releases = list(releases) if releases is not None else load_corpus(config)
    if axis == "budget-fraction":
        for g in grid:
            if not 0.0 < g <= 1.0:
                raise ConfigError(f"budget fraction {g} outside (0, 1]")
    elif axis == "excluded-pct":
        for g in grid:
            if not 0.0 <= g < 1.0:
                raise ConfigError(f"excluded percentage {g} outside [0, 1)")
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}")

    tasks, points = [], []
    kinds = list(dict.fromkeys(b.kind for b in config.budgets))
    for g in grid:
        if axis == "budget-fraction":
            budgets = tuple(EffortBudget(kind, g) for kind in kinds)
            one_cfg = None
        else:
            budgets = config.budgets
            one_cfg = OneConfig(g)
        for release in releases:
            for model in config.models:
                tasks.append(_Task(len(tasks), model, release, budgets, config, one_cfg))
                points.append(g)
    done = _gather(tasks, workers)
    rows, failures = [], []
    for index, reports, failure in done:
        if failure is not None:
            failures.append(failure)
            continue
        for rep in reports:
            for name in (*SWEEP_FIELDS, *[i for i in config.indicators if i not in SWEEP_FIELDS]):
                value = rep.get(name)
                rows.append({"axis": axis, "grid_value": points[index], "model": rep.model,
                             "release": rep.release, "budget_kind": rep.budget.kind.value,
                             "fraction": rep.budget.fraction, "indicator": name,
                             "value": value if not hasattr(value, "reason") else None})
    if failures:
        raise ModelError("; ".join(f"{f.model} on {f.release}: {f.message}" for f in failures))
    return rows


SWEEP_COLUMNS = ["axis", "grid_value", "model", "release", "budget_kind", "fraction", "indicator", "value"]


def write_sweep(rows: Sequence[Mapping], config: RunConfig, out_dir: str | Path, axis: str) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"sweep_{axis}.csv"
    path.write_text(_csv_text(rows, SWEEP_COLUMNS, provenance(config)), encoding="utf-8")
    return path


@dataclass(frozen=True)
class ValidationLine:
    release: str
    path: Path
    ok: bool
    reasons: tuple[str, ...]


def run_validate(config: RunConfig) -> list[ValidationLine]:
    """Load every release and apply the corpus filter, collecting reasons per release."""
    limits = {"min_instances": 100, "min_defect_ratio": 0.05, "min_defective": 10}
    limits.update(config.filter)
    lines = []
    for entry in config.corpus:
        name = entry.project or entry.path.stem
        try:
            release = load_release(entry.path, entry.columns, project=entry.project, version=entry.version)
        except (DatasetError, OSError) as exc:
            lines.append(ValidationLine(name, entry.path, False, (f"load error: {exc}",)))
            continue
        try:
            reasons = filter_reasons(release, **limits)
        except DatasetError as exc:
            reasons = [str(exc)]
        lines.append(ValidationLine(release.release_id, entry.path, not reasons, tuple(reasons)))
    return lines
