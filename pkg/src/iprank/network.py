"""Sparse directed graphs over papers and institutions.

Three graphs are built from a :class:`~iprank.corpus.CorpusSlice`:

* :class:`HeteroGraph` -- the joint graph with paper nodes first and
  institution nodes after them.  Citation edges run paper -> paper only;
  affiliation edges run paper <-> institution in both directions; there are
  no institution -> institution edges.
* :class:`CitationGraph` -- papers only, citation edges only.
* :class:`InstitutionGraph` -- the weighted projection: each citation edge
  contributes one unit of weight from every institution signing the citing
  paper to every institution signing the cited paper (self-edges kept).

All adjacency is CSR.  Node order is deterministic (papers by first
appearance, institutions by first appearance), so identical slices yield
bit-identical graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterator

import numpy as np
import scipy.sparse as sp

from .corpus import CorpusSlice

CITATION = "citation"
AFFILIATION = "affiliation"

GRAPH_MAGIC = "#iprank-graph"
GRAPH_VERSION = "v1"

ROW_SUM_TOL = 1e-12


class GraphConstructionError(ValueError):
    """A slice violated a structural invariant during graph construction."""


def _dedupe(rows: np.ndarray, cols: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    if len(rows) == 0:
        return rows, cols
    keys = rows.astype(np.int64) * n + cols.astype(np.int64)
    keys = np.unique(keys)
    return (keys // n).astype(np.int64), (keys % n).astype(np.int64)


@dataclass
class HeteroGraph:
    n_papers: int
    n_institutions: int
    adjacency: sp.csr_matrix = field(repr=False)
    paper_ids: tuple[str, ...] = field(repr=False)
    institution_ids: tuple[int, ...] = field(repr=False)
    institution_names: tuple[str, ...] = field(repr=False)
    paper_index: dict[str, int] = field(repr=False)
    institution_index: dict[int, int] = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return self.n_papers + self.n_institutions

    def node_class(self, index: int) -> str:
        return "paper" if index < self.n_papers else "institution"

    def edge_class(self, src: int, dst: int) -> str:
        return CITATION if src < self.n_papers and dst < self.n_papers else AFFILIATION

    def edges(self) -> Iterator[tuple[int, int, str, float]]:
        A = self.adjacency
        for src in range(self.n_nodes):
            for k in range(A.indptr[src], A.indptr[src + 1]):
                dst = int(A.indices[k])
                yield src, dst, self.edge_class(src, dst), float(A.data[k])


@dataclass
class CitationGraph:
    n_papers: int
    adjacency: sp.csr_matrix = field(repr=False)
    paper_ids: tuple[str, ...] = field(repr=False)
    paper_index: dict[str, int] = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return self.n_papers

    def edges(self) -> Iterator[tuple[int, int, str, float]]:
        A = self.adjacency
        for src in range(self.n_nodes):
            for k in range(A.indptr[src], A.indptr[src + 1]):
                yield src, int(A.indices[k]), CITATION, float(A.data[k])


@dataclass
class InstitutionGraph:
    n_institutions: int
    adjacency: sp.csr_matrix = field(repr=False)
    institution_ids: tuple[int, ...] = field(repr=False)
    institution_names: tuple[str, ...] = field(repr=False)
    institution_index: dict[int, int] = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return self.n_institutions

    @property
    def total_weight(self) -> float:
        return float(self.adjacency.sum())

    def edges(self) -> Iterator[tuple[int, int, str, float]]:
        A = self.adjacency
        for src in range(self.n_nodes):
            for k in range(A.indptr[src], A.indptr[src + 1]):
                yield src, int(A.indices[k]), CITATION, float(A.data[k])


Graph = HeteroGraph | CitationGraph | InstitutionGraph


def _paper_order(slice_: CorpusSlice) -> tuple[tuple[str, ...], dict[str, int]]:
    ids = tuple(rec.paper_id for rec in slice_.papers())
    return ids, {pid: i for i, pid in enumerate(ids)}


def _institution_order(slice_: CorpusSlice) -> tuple[tuple[int, ...], tuple[str, ...], dict[int, int]]:
    cids = tuple(inst.canonical_id for inst in slice_.institutions)
    names = tuple(inst.canonical_name for inst in slice_.institutions)
    return cids, names, {cid: i for i, cid in enumerate(cids)}


def build_hetero_graph(slice_: CorpusSlice) -> HeteroGraph:
    """Assemble the joint paper/institution graph from a slice.

    Raises GraphConstructionError when the slice breaks an invariant: a
    citation endpoint that is not a slice paper, a paper with no affiliation,
    or an institution with no paper.
    """
    paper_ids, paper_index = _paper_order(slice_)
    inst_ids, inst_names, inst_index = _institution_order(slice_)
    n_papers, n_inst = len(paper_ids), len(inst_ids)
    n = n_papers + n_inst

    rows: list[int] = []
    cols: list[int] = []
    for src, dst in slice_.citation_edges:
        si = paper_index.get(src)
        di = paper_index.get(dst)
        if si is None or di is None:
            raise GraphConstructionError(f"citation edge ({src}, {dst}) leaves the slice")
        rows.append(si)
        cols.append(di)

    papers_covered = np.zeros(n_papers, dtype=bool)
    insts_covered = np.zeros(n_inst, dtype=bool)
    for pid, cid in slice_.affiliation_edges:
        pi = paper_index.get(pid)
        ii = inst_index.get(cid)
        if pi is None or ii is None:
            raise GraphConstructionError(f"affiliation edge ({pid}, {cid}) leaves the slice")
        papers_covered[pi] = True
        insts_covered[ii] = True
        rows.extend((pi, n_papers + ii))
        cols.extend((n_papers + ii, pi))

    if n_papers and not papers_covered.all():
        missing = paper_ids[int(np.flatnonzero(~papers_covered)[0])]
        raise GraphConstructionError(f"paper {missing!r} has no affiliation edge")
    if n_inst and not insts_covered.all():
        missing_cid = inst_ids[int(np.flatnonzero(~insts_covered)[0])]
        raise GraphConstructionError(f"institution {missing_cid} has no affiliation edge")

    r, c = _dedupe(np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64), max(n, 1))
    adj = sp.csr_matrix((np.ones(len(r)), (r, c)), shape=(n, n))
    adj.sort_indices()
    return HeteroGraph(n_papers, n_inst, adj, paper_ids, inst_ids, inst_names, paper_index, inst_index)


def build_citation_graph(slice_: CorpusSlice) -> CitationGraph:
    """Paper-only citation graph: nodes are the slice's papers, edges its
    citation list (citing -> cited)."""
    paper_ids, paper_index = _paper_order(slice_)
    n = len(paper_ids)
    rows = np.asarray([paper_index[s] for s, _ in slice_.citation_edges], dtype=np.int64)
    cols = np.asarray([paper_index[d] for _, d in slice_.citation_edges], dtype=np.int64)
    r, c = _dedupe(rows, cols, max(n, 1))
    adj = sp.csr_matrix((np.ones(len(r)), (r, c)), shape=(n, n))
    adj.sort_indices()
    return CitationGraph(n, adj, paper_ids, paper_index)


def project_institution_graph(slice_: CorpusSlice) -> InstitutionGraph:
    """Project citations onto institutions with multiplicity weights.

    weight(u -> v) counts (citing, cited) paper pairs where u signs the
    citing paper and v the cited one; self-edges are kept.
    """
    inst_ids, inst_names, inst_index = _institution_order(slice_)
    n = len(inst_ids)
    insts_of: dict[str, list[int]] = {
        rec.paper_id: [inst_index[c] for c in sorted(rec.institution_ids)]
        for rec in slice_.papers()
    }
    rows: list[int] = []
    cols: list[int] = []
    for src, dst in slice_.citation_edges:
        for u in insts_of[src]:
            for v in insts_of[dst]:
                rows.append(u)
                cols.append(v)
    adj = sp.csr_matrix(
        (np.ones(len(rows)), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(n, n),
    )
    adj.sum_duplicates()
    adj.sort_indices()
    return InstitutionGraph(n, adj, inst_ids, inst_names, inst_index)


@dataclass
class StochasticOperator:
    """Row-stochastic transition kernel of a graph.

    Non-dangling rows of ``matrix`` sum to 1 within 1e-12; dangling rows
    (no out-edges) are zero and flagged in ``dangling``.
    """

    matrix: sp.csr_matrix = field(repr=False)
    out_totals: np.ndarray = field(repr=False)
    dangling: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return self.matrix.shape[0]

    @property
    def dangling_nodes(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.dangling)]

    @cached_property
    def transposed(self) -> sp.csr_matrix:
        return self.matrix.T.tocsr()


def _check_row_sums(matrix: sp.csr_matrix, dangling: np.ndarray) -> None:
    sums = np.asarray(matrix.sum(axis=1)).ravel()
    bad = ~dangling & (np.abs(sums - 1.0) > ROW_SUM_TOL)
    if bad.any():
        worst = int(np.flatnonzero(bad)[0])
        raise AssertionError(f"row {worst} sums to {sums[worst]!r}, not 1")


def operator_from_adjacency(adjacency: sp.spmatrix | np.ndarray) -> StochasticOperator:
    """Row-normalize an arbitrary non-negative adjacency matrix."""
    A = sp.csr_matrix(adjacency, dtype=np.float64)
    out = np.asarray(A.sum(axis=1)).ravel()
    dangling = out == 0
    inv = np.where(dangling, 0.0, 1.0 / np.where(dangling, 1.0, out))
    matrix = A.multiply(inv[:, None]).tocsr()
    matrix.sort_indices()
    _check_row_sums(matrix, dangling)
    return StochasticOperator(matrix, out, dangling)


def transition_operator(graph: Graph, *, citation_share: float | None = None) -> StochasticOperator:
    """Row-normalize a graph's adjacency into a transition kernel.

    Unweighted graphs normalize by out-degree, the institution projection by
    total out-weight.  ``citation_share`` (HeteroGraph only) apportions each
    paper's probability between its citation and affiliation out-edges
    instead of spreading it uniformly; rows with a single edge class keep
    probability 1 on that class.
    """
    if citation_share is None:
        return operator_from_adjacency(graph.adjacency)

    if not isinstance(graph, HeteroGraph):
        raise ValueError("citation_share applies to heterogeneous graphs only")
    if not 0.0 < citation_share < 1.0:
        raise ValueError("citation_share must lie in (0, 1)")

    A = graph.adjacency.tocoo()
    n = graph.n_nodes
    is_cit = (A.row < graph.n_papers) & (A.col < graph.n_papers)
    cit_deg = np.bincount(A.row[is_cit], minlength=n)
    aff_deg = np.bincount(A.row[~is_cit], minlength=n)
    out = cit_deg + aff_deg
    mixed = (cit_deg > 0) & (aff_deg > 0)

    data = np.empty(len(A.data))
    rows = A.row
    pure = ~mixed[rows]
    data[pure] = 1.0 / out[rows[pure]]
    mixed_cit = mixed[rows] & is_cit
    mixed_aff = mixed[rows] & ~is_cit
    data[mixed_cit] = citation_share / cit_deg[rows[mixed_cit]]
    data[mixed_aff] = (1.0 - citation_share) / aff_deg[rows[mixed_aff]]

    matrix = sp.csr_matrix((data, (A.row, A.col)), shape=A.shape)
    matrix.sort_indices()
    dangling = out == 0
    _check_row_sums(matrix, dangling)
    return StochasticOperator(matrix, out.astype(np.float64), dangling)


def write_graph(graph: Graph, path: str | Path) -> None:
    """Serialize a graph as a sparse edge list.

    Header block (``#``-prefixed): magic line with node counts, then one
    ``#node`` line per node carrying its identifier.  Body: one
    ``src<TAB>dst<TAB>class<TAB>weight`` line per edge, CSR order.  The
    round trip is bit-exact.
    """
    lines: list[str] = []
    if isinstance(graph, HeteroGraph):
        lines.append(
            f"{GRAPH_MAGIC}\t{GRAPH_VERSION}\thetero\t"
            f"papers={graph.n_papers}\tinstitutions={graph.n_institutions}"
        )
        for i, pid in enumerate(graph.paper_ids):
            lines.append(f"#node\t{i}\tpaper\t{pid}")
        for k, (cid, name) in enumerate(zip(graph.institution_ids, graph.institution_names)):
            lines.append(f"#node\t{graph.n_papers + k}\tinstitution\t{cid}\t{name}")
    elif isinstance(graph, CitationGraph):
        lines.append(f"{GRAPH_MAGIC}\t{GRAPH_VERSION}\tcitation\tpapers={graph.n_papers}")
        for i, pid in enumerate(graph.paper_ids):
            lines.append(f"#node\t{i}\tpaper\t{pid}")
    elif isinstance(graph, InstitutionGraph):
        lines.append(
            f"{GRAPH_MAGIC}\t{GRAPH_VERSION}\tinstitution\tinstitutions={graph.n_institutions}"
        )
        for k, (cid, name) in enumerate(zip(graph.institution_ids, graph.institution_names)):
            lines.append(f"#node\t{k}\tinstitution\t{cid}\t{name}")
    else:
        raise TypeError(f"cannot serialize {type(graph).__name__}")

    for src, dst, cls, weight in graph.edges():
        lines.append(f"{src}\t{dst}\t{cls}\t{int(weight)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def read_graph(path: str | Path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty graph file")
    head = lines[0].split("\t")
    if head[0] != GRAPH_MAGIC or head[1] != GRAPH_VERSION:
        raise ValueError(f"{path}: not a graph file")
    kind = head[2]
    counts = {k: int(v) for k, v in (f.split("=") for f in head[3:])}

    paper_ids: list[str] = []
    inst_ids: list[int] = []
    inst_names: list[str] = []
    rows: list[int] = []
    cols: list[int] = []
    data: list[float] = []
    for line in lines[1:]:
        parts = line.split("\t")
        if parts[0] == "#node":
            if parts[2] == "paper":
                paper_ids.append(parts[3])
            else:
                inst_ids.append(int(parts[3]))
                inst_names.append(parts[4])
        else:
            rows.append(int(parts[0]))
            cols.append(int(parts[1]))
            data.append(float(parts[3]))

    if kind == "hetero":
        n = counts["papers"] + counts["institutions"]
    elif kind == "citation":
        n = counts["papers"]
    else:
        n = counts["institutions"]
    adj = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    adj.sort_indices()

    if kind == "hetero":
        return HeteroGraph(
            counts["papers"],
            counts["institutions"],
            adj,
            tuple(paper_ids),
            tuple(inst_ids),
            tuple(inst_names),
            {p: i for i, p in enumerate(paper_ids)},
            {c: i for i, c in enumerate(inst_ids)},
        )
    if kind == "citation":
        return CitationGraph(
            counts["papers"], adj, tuple(paper_ids), {p: i for i, p in enumerate(paper_ids)}
        )
    return InstitutionGraph(
        counts["institutions"],
        adj,
        tuple(inst_ids),
        tuple(inst_names),
        {c: i for i, c in enumerate(inst_ids)},
    )
