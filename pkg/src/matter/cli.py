"""Command-line entry point: ``matter {evaluate,compare,sweep,validate,one-rank}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 model error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from matter.dataset import ColumnSpec, DatasetError, load_release
from matter.indicators import HIGHER_IS_BETTER
from matter.models import ModelError
from matter.one import OneConfig, one_ranking
from matter.pipeline import (ConfigError, compare_rows, load_config, load_result_files,
                             run_evaluate, run_sweep, run_validate, write_comparison,
                             write_results, write_sweep)
from matter.ranking import EffortBudget

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MODEL = 0, 1, 2, 3

log = logging.getLogger("matter")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fractions(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="matter", description="Consistent effort-aware evaluation of defect prediction models.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def run_flags(p):
        p.add_argument("--config", required=True, type=Path, help="run config (JSON)")
        p.add_argument("--seed", type=int)
        p.add_argument("--budget-kind", choices=["snm", "ssc"])
        p.add_argument("--budget", type=float, help="budget fraction in (0, 1]")
        p.add_argument("--models", help="comma-separated model names")
        p.add_argument("--indicator", action="append", help="indicator to report (repeatable)")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("evaluate", help="rank, cut and score every (model, release, budget)")
    run_flags(p)

    p = sub.add_parser("sweep", help="evaluate over a grid of budgets or ONE exclusion shares")
    run_flags(p)
    p.add_argument("--axis", choices=["budget-fraction", "excluded-pct"], required=True)
    p.add_argument("--grid", type=_fractions, required=True, help="comma-separated grid values")

    p = sub.add_parser("compare", help="Scott-Knott ESD grouping of models from results files")
    p.add_argument("results", nargs="+", type=Path)
    p.add_argument("--indicator", required=True)
    p.add_argument("--polarity", choices=["higher-better", "lower-better"])
    p.add_argument("--budget-kind", choices=["snm", "ssc"])
    p.add_argument("--budget", type=float)
    p.add_argument("--out", type=Path, default=Path("."))
    p.add_argument("--force", action="store_true", help="allow mixing results of different configs")

    p = sub.add_parser("validate", help="check that every release loads and passes the corpus filter")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--strict", action="store_true", help="exit nonzero if any release fails")

    p = sub.add_parser("one-rank", help="print the ONE ranking of a release as CSV (rank,id,sloc)")
    p.add_argument("release", type=Path)
    p.add_argument("--excluded", type=float, default=0.2)
    p.add_argument("--id-column", default="id")
    p.add_argument("--sloc-column", default="sloc")
    p.add_argument("--out", type=Path, help="write to a file instead of stdout")
    return parser


def _apply_overrides(config, args):
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.models:
        changes["models"] = tuple(m.strip().lower() if not m.strip().startswith("external:") else m.strip()
                                  for m in args.models.split(",") if m.strip())
    if args.budget_kind or args.budget is not None:
        kinds = [args.budget_kind] if args.budget_kind else list(dict.fromkeys(b.kind for b in config.budgets))
        fraction = args.budget if args.budget is not None else 0.2
        changes["budgets"] = tuple(EffortBudget(k, fraction) for k in kinds)
    if args.indicator:
        changes["indicators"] = tuple(args.indicator)
    if args.out:
        changes["output_dir"] = args.out
    return replace(config, **changes) if changes else config


def cmd_evaluate(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    run = run_evaluate(config, workers=args.workers)
    csv_path, _ = write_results(run)
    print(f"wrote {len(run.reports)} rows to {csv_path}")
    for f in run.failures:
        print(f"error: {f.model} on {f.release}: {f.message}", file=sys.stderr)
    if any(f.kind == "model" for f in run.failures):
        return EXIT_MODEL
    return EXIT_DATA if run.failures else EXIT_OK


def cmd_sweep(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    rows = run_sweep(config, args.axis, args.grid, workers=args.workers)
    path = write_sweep(rows, config, config.output_dir, args.axis)
    print(f"wrote {len(rows)} rows to {path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    prov, rows = load_result_files(args.results, force=args.force)
    if args.polarity:
        higher = args.polarity == "higher-better"
    elif args.indicator in HIGHER_IS_BETTER:
        higher = HIGHER_IS_BETTER[args.indicator]
    else:
        raise ConfigError(f"no default polarity for {args.indicator!r}; pass --polarity")
    comps = compare_rows(rows, args.indicator, higher, args.budget_kind, args.budget)
    for comp in comps:
        paths = write_comparison(comp, args.out, prov)
        print(f"{comp.indicator} {comp.budget_kind}@{comp.fraction:g}:")
        for row in comp.grouping.rows():
            print(f"  group {row['group']}  {row['model']:<14} mean rank {row['mean_rank']:.3f}")
        print(f"  wrote {', '.join(str(p) for p in paths)}")
    return EXIT_OK


def cmd_validate(args) -> int:
    config = load_config(args.config)
    lines = run_validate(config)
    for line in lines:
        status = "PASS" if line.ok else "FAIL"
        detail = "" if line.ok else ": " + "; ".join(line.reasons)
        print(f"{status} {line.release}{detail}")
    failed = sum(not line.ok for line in lines)
    print(f"{len(lines) - failed}/{len(lines)} releases pass")
    return EXIT_DATA if failed and args.strict else EXIT_OK


def cmd_one_rank(args) -> int:
    schema = ColumnSpec(id_column=args.id_column, sloc_column=args.sloc_column, label_column=None,
                        metric_columns=())
    release = load_release(args.release, schema)
    ranking = one_ranking(release, OneConfig(args.excluded))
    out = args.out.open("w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["rank", "id", "sloc"])
        for i, mid in enumerate(ranking.order, start=1):
            writer.writerow([i, mid, release.module(mid).sloc])
    finally:
        if args.out:
            out.close()
    return EXIT_OK


COMMANDS = {"evaluate": cmd_evaluate, "sweep": cmd_sweep, "compare": cmd_compare,
            "validate": cmd_validate, "one-rank": cmd_one_rank}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        if isinstance(exc, DatasetError):
            print(f"data error: {exc}", file=sys.stderr)
            return EXIT_DATA
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
