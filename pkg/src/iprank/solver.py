"""Stationary random-walk scores by power iteration, and ranking tables.

The iteration solves

    PR(i) = (1 - alpha) / N + alpha * sum_{j in IN(i)} B(j, i) * PR(j)

over a row-stochastic operator B, starting from the uniform vector.  Mass
sitting on dangling nodes is redistributed uniformly over all N nodes every
iteration, so each iterate remains a probability distribution.  Convergence
is an L1 residual below ``tol``; the default mode is strictly sequential,
so identical inputs produce bit-identical score vectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .network import HeteroGraph, StochasticOperator

PAPER = "paper"
INSTITUTION = "institution"

METHOD_IPRANK = "IPRank"
METHOD_PAGERANK = "PageRank"
METHOD_IRANK = "IRank"

MASS_TOL = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 0.85
    tol: float = 1e-10
    max_iters: int = 200

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.tol <= 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")

    def as_dict(self) -> dict[str, float | int]:
        return {"alpha": self.alpha, "tol": self.tol, "max_iters": self.max_iters}


class ConvergenceError(RuntimeError):
    """Power iteration failed to reach ``tol`` within ``max_iters``."""

    def __init__(self, iterations: int, final_residual: float):
        super().__init__(
            f"no convergence after {iterations} iterations (residual {final_residual:.3e})"
        )
        self.iterations = iterations
        self.final_residual = final_residual


@dataclass
class ScoreVector:
    """Stationary scores indexed by node index; a probability distribution."""

    scores: np.ndarray = field(repr=False)
    iterations_used: int = 0
    final_residual: float = 0.0

    def __len__(self) -> int:
        return len(self.scores)

    @property
    def total(self) -> float:
        return float(self.scores.sum())


def power_step(op: StochasticOperator, vector: np.ndarray, alpha: float) -> np.ndarray:
    """One update: walk step, dangling redistribution, teleport."""
    n = op.n_nodes
    new = alpha * (op.transposed @ vector)
    dangling_mass = float(vector[op.dangling].sum())
    new += alpha * dangling_mass / n + (1.0 - alpha) / n
    return new


def pagerank(
    op: StochasticOperator,
    cfg: SolverConfig = SolverConfig(),
    on_iteration: Callable[[int, np.ndarray, float], None] | None = None,
) -> ScoreVector:
    """Iterate :func:`power_step` from the uniform vector until the L1
    residual drops below ``cfg.tol``.

    ``on_iteration(iteration, vector, residual)`` is invoked after every
    update.  Raises ConvergenceError (carrying the final residual) when
    ``cfg.max_iters`` is exhausted, and ValueError on an empty operator.
    """
    n = op.n_nodes
    if n == 0:
        raise ValueError("operator has no nodes")

    pr = np.full(n, 1.0 / n)
    residual = np.inf
    for iteration in range(1, cfg.max_iters + 1):
        new = power_step(op, pr, cfg.alpha)
        residual = float(np.abs(new - pr).sum())
        pr = new
        if on_iteration is not None:
            on_iteration(iteration, pr, residual)
        if residual < cfg.tol:
            _check_distribution(pr)
            return ScoreVector(pr, iteration, residual)
    raise ConvergenceError(cfg.max_iters, residual)


def _check_distribution(pr: np.ndarray) -> None:
    if not (pr > 0).all():
        raise AssertionError("score vector has non-positive entries")
    if abs(pr.sum() - 1.0) > MASS_TOL:
        raise AssertionError(f"score mass {pr.sum()!r} drifted from 1")


def split_scores(pr: ScoreVector, graph: HeteroGraph) -> tuple[ScoreVector, ScoreVector]:
    """Split joint scores into the paper and institution blocks.

    No renormalization: both views stay on the joint scale, so their masses
    still sum to 1.
    """
    if len(pr) != graph.n_nodes:
        raise ValueError(f"scores cover {len(pr)} nodes, graph has {graph.n_nodes}")
    papers = ScoreVector(pr.scores[: graph.n_papers], pr.iterations_used, pr.final_residual)
    insts = ScoreVector(pr.scores[graph.n_papers :], pr.iterations_used, pr.final_residual)
    return papers, insts


def merge_institution_scores(
    inst_scores: ScoreVector,
    ids: Sequence[str] | Sequence[int],
    merge_map: Mapping,
) -> tuple[ScoreVector, tuple]:
    """Sum the scores of aliased institutions onto their merge targets.

    ``merge_map`` sends source identifiers to target identifiers (identity
    for anything unmapped) and must be idempotent: chained or cyclic
    mappings raise ValueError.  Total mass is preserved; surviving
    identifiers keep first-appearance order.
    """
    if len(inst_scores) != len(ids):
        raise ValueError(f"{len(inst_scores)} scores for {len(ids)} identifiers")
    for src, dst in merge_map.items():
        if src != dst and dst in merge_map and merge_map[dst] != dst:
            raise ValueError(f"merge map chains {src!r} -> {dst!r} -> {merge_map[dst]!r}")

    order: dict = {}
    sums: dict = {}
    for identifier, score in zip(ids, inst_scores.scores):
        target = merge_map.get(identifier, identifier)
        if target not in order:
            order[target] = len(order)
            sums[target] = 0.0
        sums[target] += float(score)

    merged_ids = tuple(order)
    merged = np.array([sums[t] for t in merged_ids])
    return (
        ScoreVector(merged, inst_scores.iterations_used, inst_scores.final_residual),
        merged_ids,
    )


@dataclass
class RankingTable:
    """Entities of one class ordered by score: rows of (identifier, score,
    rank), ranks dense 1..n, ties broken by ascending identifier."""

    rows: list[tuple[str, float, int]]
    entity_class: str
    method: str

    def __post_init__(self) -> None:
        for i, (_, score, rk) in enumerate(self.rows):
            if rk != i + 1:
                raise ValueError(f"ranks must be dense 1..n, found {rk} at position {i}")
            if i and score > self.rows[i - 1][1]:
                raise ValueError("scores must be non-increasing with rank")

    def __len__(self) -> int:
        return len(self.rows)

    def top(self, n: int) -> list[tuple[str, float, int]]:
        return self.rows[:n]

    @cached_property
    def rank_of(self) -> dict[str, int]:
        return {identifier: rk for identifier, _, rk in self.rows}

    def ids(self) -> list[str]:
        return [identifier for identifier, _, _ in self.rows]


def rank(
    scores: ScoreVector,
    ids: Sequence[str],
    *,
    entity_class: str,
    method: str,
) -> RankingTable:
    """Order entities by descending score; ties break lexicographically."""
    if len(scores) != len(ids):
        raise ValueError(f"{len(scores)} scores for {len(ids)} identifiers")
    values = np.asarray(scores.scores, dtype=np.float64)
    order = np.lexsort((np.asarray(ids, dtype=object), -values))
    rows = [(str(ids[i]), float(values[i]), r + 1) for r, i in enumerate(order)]
    return RankingTable(rows, entity_class, method)


def write_table_tsv(table: RankingTable, path: str | Path) -> None:
    """``rank<TAB>id<TAB>score`` lines, scores at 12 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        for identifier, score, rk in table.rows:
            fh.write(f"{rk}\t{identifier}\t{score:.12g}\n")


def read_table_tsv(path: str | Path, *, entity_class: str, method: str) -> RankingTable:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rk, identifier, score = line.rstrip("\n").split("\t")
            rows.append((identifier, float(score), int(rk)))
    return RankingTable(rows, entity_class, method)


def write_table_json(
    table: RankingTable, path: str | Path, config: SolverConfig | None = None
) -> None:
    payload = {
        "method": table.method,
        "entity_class": table.entity_class,
        "config": config.as_dict() if config is not None else None,
        "rows": [[rk, identifier, score] for identifier, score, rk in table.rows],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_table_json(path: str | Path) -> RankingTable:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    rows = [(identifier, float(score), int(rk)) for rk, identifier, score in payload["rows"]]
    return RankingTable(rows, payload["entity_class"], payload["method"])
