"""
Accuracy tables: overall, per VSR relation, per VSR category, rule coverage,
and mean/std aggregation over repeated runs.
"""

from __future__ import annotations

import csv
import io
import json
import statistics
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

from .ingest import VSRInstance, load_vsr_lexicon
from .solver import FailureReason, Prediction

UNCATEGORIZED = "uncategorized"


@dataclass(frozen=True)
class GroupStat:
    n: int
    accuracy: float


@dataclass(frozen=True)
class RuleCoverage:
    mappable_fraction: float
    solved_fraction: float
    solved_accuracy: Optional[float]
    failure_counts: Dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class EvalReport:
    n: int
    overall_accuracy: float
    per_relation: Dict[str, GroupStat]
    per_category: Dict[str, GroupStat]
    rule_coverage: Optional[RuleCoverage] = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        cov = d.get("rule_coverage")
        return cls(
            n=d["n"],
            overall_accuracy=d["overall_accuracy"],
            per_relation={k: GroupStat(**v) for k, v in d["per_relation"].items()},
            per_category={k: GroupStat(**v) for k, v in d["per_category"].items()},
            rule_coverage=RuleCoverage(**cov) if cov else None,
        )


@dataclass(frozen=True)
class RunAggregate:
    mean: float
    std: float
    runs: int


def _group(keys: Sequence[str], correct: Sequence[bool]) -> Dict[str, GroupStat]:
    n, hit = Counter(), Counter()
    for k, c in zip(keys, correct):
        n[k] += 1
        hit[k] += c
    return {k: GroupStat(n[k], hit[k] / n[k]) for k in sorted(n)}


def evaluate(
    predictions: Sequence[Prediction],
    gold: Sequence[VSRInstance],
    categories: Optional[Mapping[str, str]] = None,
) -> EvalReport:
    """
    Score aligned predictions against gold labels.

    Relations missing from ``categories`` (the packaged VSR lexicon by
    default) are counted under ``"uncategorized"``. Rule coverage is filled
    in only when every prediction says how it was produced.

    Raises:
        ValueError: If the two sequences differ in length.
    """
    if len(predictions) != len(gold):
        raise ValueError(f"{len(predictions)} predictions for {len(gold)} gold instances")
    if categories is None:
        categories = load_vsr_lexicon()
    correct = [p.answer == g.label for p, g in zip(predictions, gold)]
    relations = [g.relation for g in gold]
    cats = [categories.get(r, UNCATEGORIZED) for r in relations]
    total = len(gold)

    coverage = None
    if total and all(p.method is not None for p in predictions):
        failures = Counter(p.failure_reason.value for p in predictions if p.method == "random")
        solved = [c for p, c in zip(predictions, correct) if p.method == "rule"]
        coverage = RuleCoverage(
            mappable_fraction=1 - failures[FailureReason.UNMAPPED_RELATION.value] / total,
            solved_fraction=len(solved) / total,
            solved_accuracy=sum(solved) / len(solved) if solved else None,
            failure_counts=dict(sorted(failures.items())),
        )
    return EvalReport(
        n=total,
        overall_accuracy=sum(correct) / total if total else 0.0,
        per_relation=_group(relations, correct),
        per_category=_group(cats, correct),
        rule_coverage=coverage,
    )


def _metrics(report: EvalReport) -> Dict[str, float]:
    m = {"overall_accuracy": report.overall_accuracy}
    for k, s in report.per_relation.items():
        m[f"relation/{k}"] = s.accuracy
    for k, s in report.per_category.items():
        m[f"category/{k}"] = s.accuracy
    cov = report.rule_coverage
    if cov is not None:
        m["rule/mappable_fraction"] = cov.mappable_fraction
        m["rule/solved_fraction"] = cov.solved_fraction
        if cov.solved_accuracy is not None:
            m["rule/solved_accuracy"] = cov.solved_accuracy
    return m


def aggregate_runs(reports: Sequence[EvalReport]) -> Dict[str, RunAggregate]:
    """
    Mean and population standard deviation of every metric over runs.

    Only metrics present in all reports are aggregated.
    """
    if not reports:
        raise ValueError("need at least one report")
    per_run = [_metrics(r) for r in reports]
    shared = set(per_run[0]).intersection(*per_run[1:])
    out = {}
    for key in sorted(shared):
        vals = [m[key] for m in per_run]
        out[key] = RunAggregate(statistics.fmean(vals), statistics.pstdev(vals), len(vals))
    return out


def _table_rows(report: EvalReport, table: str, threshold: Optional[int]) -> List[tuple]:
    groups = {"relation": report.per_relation, "category": report.per_category}[table]
    rows = [(k, s.n, s.accuracy) for k, s in groups.items() if threshold is None or s.n > threshold]
    # most frequent first
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows


def render_csv(report: EvalReport, table: str = "relation", threshold: Optional[int] = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([table, "n", "accuracy"])
    for name, n, acc in _table_rows(report, table, threshold):
        w.writerow([name, n, f"{acc:.6f}"])
    return buf.getvalue()


def render_json(report: EvalReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def write_report(
    report: EvalReport,
    path,
    fmt: str = "json",
    table: str = "relation",
    threshold: Optional[int] = None,
) -> None:
    """
    Write a report as JSON (full, unfiltered) or as a CSV table.

    CSV rows are sorted by descending count; ``threshold`` keeps only groups
    with more than that many instances. Identical reports give identical bytes.
    """
    if fmt == "json":
        text = render_json(report)
    elif fmt == "csv":
        text = render_csv(report, table, threshold)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def read_report(path) -> EvalReport:
    with open(path, encoding="utf-8") as f:
        return EvalReport.from_dict(json.load(f))


def aggregate_to_dict(agg: Mapping[str, RunAggregate]) -> dict:
    return {k: asdict(v) for k, v in agg.items()}
