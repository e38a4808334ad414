"""Ranking comparison and ground-truth retrieval metrics.

Top-N rank correlation between two methods is anchored on the first table:
its top-N entities are paired with their full-list ranks in the other table
(entities missing there get rank ``len(other) + 1``), and the Spearman
coefficient is computed over those N pairs with average ranks for ties.
This alignment is asymmetric in the two tables, so method pairs are always
ordered.

Retrieval against a ground-truth set uses the plain definitions:
``recall@N = |top-N ∩ truth| / |truth|`` and
``precision@N = |top-N ∩ truth| / N``.  Truth members missing from a
ranking stay in the recall denominator unless explicitly excluded.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from scipy.stats import spearmanr

from .solver import RankingTable


@dataclass(frozen=True)
class GroundTruthSet:
    entity_class: str
    members: frozenset[str]
    label: str

    def __post_init__(self) -> None:
        if not self.members:
            raise ValueError(f"ground-truth set {self.label!r} is empty")


def load_truth(path: str | Path, entity_class: str, label: str | None = None) -> GroundTruthSet:
    """One entity identifier per line; ``#`` comments and blank lines skipped."""
    members = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            stripped = line.strip()
            if stripped and not stripped.startswith("#"):
                members.add(stripped)
    return GroundTruthSet(entity_class, frozenset(members), label or Path(path).stem)


def _require_same_class(a: RankingTable, b: RankingTable | GroundTruthSet) -> None:
    if a.entity_class != b.entity_class:
        raise ValueError(f"entity classes differ: {a.entity_class} vs {b.entity_class}")


def spearman_top_n(primary: RankingTable, other: RankingTable, n: int) -> float:
    """Spearman coefficient over the primary table's top ``n`` entities."""
    _require_same_class(primary, other)
    if n < 2:
        raise ValueError(f"the coefficient is undefined for n={n}")
    if n > len(primary):
        raise ValueError(f"n={n} exceeds table size {len(primary)}")

    absent = len(other) + 1
    primary_ranks = []
    other_ranks = []
    for identifier, _, rk in primary.top(n):
        primary_ranks.append(rk)
        other_ranks.append(other.rank_of.get(identifier, absent))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # constant input is reported as our own error
        rho = spearmanr(primary_ranks, other_ranks).statistic
    if math.isnan(rho):
        raise ValueError("coefficient undefined: other-table ranks have zero variance")
    return float(rho)


def recall_at_n(
    ranking: RankingTable, truth: GroundTruthSet, n: int, *, exclude_missing: bool = False
) -> float:
    """Fraction of the truth set retrieved in the top ``n``.

    With ``exclude_missing`` the denominator drops truth members absent from
    the ranking altogether; by default they count as misses.
    """
    _require_same_class(ranking, truth)
    members = truth.members
    if exclude_missing:
        members = frozenset(m for m in members if m in ranking.rank_of)
        if not members:
            raise ValueError(f"no member of {truth.label!r} appears in the ranking")
    hits = sum(1 for identifier, _, _ in ranking.top(n) if identifier in members)
    return hits / len(members)


def precision_at_n(ranking: RankingTable, truth: GroundTruthSet, n: int) -> float:
    """Fraction of the top ``n`` that belongs to the truth set."""
    _require_same_class(ranking, truth)
    if n <= 0:
        raise ValueError(f"n must be positive, got {n}")
    hits = sum(1 for identifier, _, _ in ranking.top(n) if identifier in truth.members)
    return hits / n


def rank_lookup(
    ranking: RankingTable, ids: Iterable[str]
) -> list[tuple[str, int | None]]:
    """Per-id rank in the table, ``None`` when absent; rows in input order."""
    return [(identifier, ranking.rank_of.get(identifier)) for identifier in ids]


@dataclass(frozen=True)
class EvalCell:
    metric: str
    methods: str
    n: int
    value: float


@dataclass
class EvalReport:
    cells: list[EvalCell]
    config: dict = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)
    # Truth members absent from a ranking, per (truth label, method).
    coverage: list[dict] = field(default_factory=list)


def compare_report(
    rankings: Sequence[RankingTable],
    truths: Sequence[GroundTruthSet],
    n_values: Sequence[int],
    metrics: Sequence[str] = ("spearman", "recall", "precision"),
    config: dict | None = None,
) -> EvalReport:
    """Cross-product of metrics x method pairs x N.

    Spearman runs over every ordered pair of same-class tables; recall and
    precision over every (table, same-class truth) pair.  Cells whose entity
    classes mismatch or whose metric is undefined are recorded as errors;
    the report is still produced for the valid cells.
    """
    if list(n_values) != sorted(set(n_values)):
        raise ValueError("n values must be strictly increasing")

    cells: list[EvalCell] = []
    errors: list[str] = []
    coverage = [
        {
            "truth": truth.label,
            "method": table.method,
            "missing": sorted(truth.members - set(table.rank_of)),
        }
        for truth in truths
        for table in rankings
        if truth.entity_class == table.entity_class
    ]

    def attempt(metric: str, methods: str, n: int, fn) -> None:
        try:
            cells.append(EvalCell(metric, methods, n, fn()))
        except ValueError as exc:
            errors.append(f"{metric} {methods} n={n}: {exc}")

    for n in n_values:
        if "spearman" in metrics:
            for primary in rankings:
                for other in rankings:
                    if primary is other:
                        continue
                    label = f"{primary.method}~{other.method}"
                    attempt("spearman", label, n, lambda p=primary, o=other, k=n: spearman_top_n(p, o, k))
        for truth in truths:
            for table in rankings:
                label = f"{table.method}/{truth.label}"
                if "recall" in metrics:
                    attempt("recall", label, n, lambda t=table, g=truth, k=n: recall_at_n(t, g, k))
                if "precision" in metrics:
                    attempt("precision", label, n, lambda t=table, g=truth, k=n: precision_at_n(t, g, k))

    return EvalReport(cells, config or {}, errors, coverage)


def write_report_tsv(report: EvalReport, path: str | Path) -> None:
    """One ``metric<TAB>methods<TAB>N<TAB>value`` row per cell."""
    with open(path, "w", encoding="utf-8") as fh:
        for cell in report.cells:
            fh.write(f"{cell.metric}\t{cell.methods}\t{cell.n}\t{cell.value:.12g}\n")


def write_report_json(report: EvalReport, path: str | Path) -> None:
    payload = {
        "config": report.config,
        "cells": [
            {"metric": c.metric, "methods": c.methods, "n": c.n, "value": c.value}
            for c in report.cells
        ],
        "errors": report.errors,
        "coverage": report.coverage,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_curves_csv(report: EvalReport, path: str | Path) -> None:
    """Plot-ready recall/precision curve data: metric,methods,n,value rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "methods", "n", "value"])
        for cell in report.cells:
            if cell.metric in ("recall", "precision"):
                writer.writerow([cell.metric, cell.methods, cell.n, f"{cell.value:.12g}"])
