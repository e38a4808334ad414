"""Corpus cleaning, time-window slicing and summary statistics.

Raw :class:`~iprank.records.BibRecord` values pass through five cleaning
criteria:

1. the record is complete (id, parseable date, authors, references);
2. at least one institution resolves for the paper;
3. only the first affiliation of each author is kept;
4. affiliations reduce to their first-level unit; and
5. same-name institutions share one canonical id.

Criteria 1-2 drop records (counted in :class:`FilterReport`); criteria 3-5
transform them.  A :class:`CorpusSlice` then restricts a cleaned corpus to a
publication-year window together with every resolvable paper those in-window
papers cite, whatever its own date, plus the institutions of both groups.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .normalize import AliasTable, normalize_institution
from .records import BibRecord

logger = logging.getLogger(__name__)

STORE_MAGIC = "#iprank-clean"
STORE_VERSION = "1"


@dataclass(frozen=True)
class CanonicalInstitution:
    canonical_id: int
    canonical_name: str
    alias_set: frozenset[str]


@dataclass(frozen=True)
class CleanRecord:
    paper_id: str
    pub_date: date
    institution_ids: frozenset[int]
    references: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.institution_ids:
            raise ValueError(f"{self.paper_id}: a clean record needs >=1 institution")


@dataclass
class FilterReport:
    """Per-criterion drop counts; drops are reported, never raised."""

    n_input: int = 0
    n_kept: int = 0
    dropped_incomplete: int = 0
    dropped_no_institution: int = 0
    dropped_duplicate_id: int = 0

    @property
    def total_dropped(self) -> int:
        return (
            self.dropped_incomplete
            + self.dropped_no_institution
            + self.dropped_duplicate_id
        )

    def as_dict(self) -> dict[str, int]:
        return {
            "n_input": self.n_input,
            "n_kept": self.n_kept,
            "dropped_incomplete": self.dropped_incomplete,
            "dropped_no_institution": self.dropped_no_institution,
            "dropped_duplicate_id": self.dropped_duplicate_id,
        }


@dataclass
class CleanCorpus:
    """Cleaned records in input order plus the institution catalog."""

    records: list[CleanRecord]
    institutions: tuple[CanonicalInstitution, ...]
    by_id: dict[str, CleanRecord] = field(repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        if not self.by_id:
            self.by_id = {r.paper_id: r for r in self.records}

    def institution(self, canonical_id: int) -> CanonicalInstitution:
        return self.institutions[canonical_id]

    def name_of(self, canonical_id: int) -> str:
        return self.institutions[canonical_id].canonical_name

    def year_span(self) -> tuple[int, int] | None:
        if not self.records:
            return None
        years = [r.pub_date.year for r in self.records]
        return min(years), max(years)


def apply_filters(
    records: Iterable[BibRecord], aliases: AliasTable | None = None
) -> tuple[CleanCorpus, FilterReport]:
    """Run the five cleaning criteria over raw records.

    Conservation holds by construction:
    ``report.n_input == report.n_kept + report.total_dropped``.
    """
    report = FilterReport()
    name_to_id: dict[str, int] = {}
    alias_sets: list[set[str]] = []
    memo: dict[str, str] = {}
    clean: list[CleanRecord] = []
    by_id: dict[str, CleanRecord] = {}

    for rec in records:
        report.n_input += 1
        if not rec.paper_id or rec.pub_date is None:
            report.dropped_incomplete += 1
            continue
        if rec.paper_id in by_id:
            report.dropped_duplicate_id += 1
            continue

        inst_ids: set[int] = set()
        for author in rec.authors:
            # Criterion 3: the first affiliation of this author, if any.
            raw = next((a for a in author if a.strip()), None)
            if raw is None:
                continue
            name = memo.get(raw)
            if name is None:
                name = normalize_institution(raw, aliases)
                memo[raw] = name
            cid = name_to_id.get(name)
            if cid is None:
                cid = len(name_to_id)
                name_to_id[name] = cid
                alias_sets.append(set())
            alias_sets[cid].add(raw)
            inst_ids.add(cid)

        if not inst_ids:
            report.dropped_no_institution += 1
            continue

        record = CleanRecord(rec.paper_id, rec.pub_date, frozenset(inst_ids), rec.references)
        clean.append(record)
        by_id[record.paper_id] = record
        report.n_kept += 1

    institutions = tuple(
        CanonicalInstitution(cid, name, frozenset(alias_sets[cid]))
        for name, cid in sorted(name_to_id.items(), key=lambda kv: kv[1])
    )
    return CleanCorpus(clean, institutions, by_id), report


@dataclass(frozen=True)
class TimeWindow:
    """Inclusive publication-year range."""

    start_year: int
    end_year: int

    def __post_init__(self) -> None:
        if self.start_year > self.end_year:
            raise ValueError(f"window start {self.start_year} > end {self.end_year}")

    def contains(self, d: date) -> bool:
        return self.start_year <= d.year <= self.end_year

    @classmethod
    def parse(cls, text: str) -> "TimeWindow":
        """Parse ``start:end`` (inclusive years), e.g. ``2009:2013``."""
        parts = text.split(":")
        if len(parts) != 2:
            raise ValueError(f"expected start:end, got {text!r}")
        return cls(int(parts[0]), int(parts[1]))

    def __str__(self) -> str:
        return f"{self.start_year}:{self.end_year}"


@dataclass
class CorpusSlice:
    """A windowed corpus: in-window papers, their resolvable references,
    institutions of both, and the citation/affiliation edge lists.

    ``reference_papers`` excludes in-window papers; citation edges originate
    from in-window papers only and are deduplicated per citing paper.
    """

    in_window_papers: list[CleanRecord]
    reference_papers: list[CleanRecord]
    institutions: tuple[CanonicalInstitution, ...]
    citation_edges: list[tuple[str, str]]
    affiliation_edges: list[tuple[str, int]]
    n_unresolved_references: int = 0
    window: TimeWindow | None = None

    def papers(self) -> Iterator[CleanRecord]:
        yield from self.in_window_papers
        yield from self.reference_papers

    @property
    def n_papers(self) -> int:
        return len(self.in_window_papers) + len(self.reference_papers)


def slice_window(corpus: CleanCorpus, window: TimeWindow) -> CorpusSlice:
    """Restrict a cleaned corpus to ``window``.

    References that do not resolve in the corpus are dropped and counted
    (distinct ids per citing paper).  Node order is deterministic: in-window
    papers in cleaned order, then referenced papers by first citation, then
    institutions by first appearance over that paper sequence.
    """
    in_window = [r for r in corpus.records if window.contains(r.pub_date)]
    if not in_window:
        logger.warning("window %s matches no papers; slice is empty", window)

    in_ids = {r.paper_id for r in in_window}
    reference_papers: dict[str, CleanRecord] = {}
    citation_edges: list[tuple[str, str]] = []
    unresolved = 0

    for rec in in_window:
        seen: set[str] = set()
        for ref in rec.references:
            if ref in seen:
                continue
            seen.add(ref)
            target = corpus.by_id.get(ref)
            if target is None:
                unresolved += 1
                continue
            citation_edges.append((rec.paper_id, ref))
            if ref not in in_ids and ref not in reference_papers:
                reference_papers[ref] = target

    refs = list(reference_papers.values())
    inst_order: dict[int, None] = {}
    affiliation_edges: list[tuple[str, int]] = []
    for rec in in_window + refs:
        for cid in sorted(rec.institution_ids):
            inst_order.setdefault(cid, None)
            affiliation_edges.append((rec.paper_id, cid))

    institutions = tuple(corpus.institution(cid) for cid in inst_order)
    return CorpusSlice(
        in_window_papers=in_window,
        reference_papers=refs,
        institutions=institutions,
        citation_edges=citation_edges,
        affiliation_edges=affiliation_edges,
        n_unresolved_references=unresolved,
        window=window,
    )


@dataclass(frozen=True)
class StatsSummary:
    """Five corpus-level counts: papers, papers plus distinct references,
    institutions, citation links, paper-institution links."""

    n_papers: int
    n_papers_with_references: int
    n_institutions: int
    n_citation_links: int
    n_affiliation_links: int

    def __post_init__(self) -> None:
        values = (
            self.n_papers,
            self.n_papers_with_references,
            self.n_institutions,
            self.n_citation_links,
            self.n_affiliation_links,
        )
        if any(v < 0 for v in values):
            raise ValueError("counts must be non-negative")
        if self.n_papers_with_references < self.n_papers:
            raise ValueError("papers-with-references cannot undercount papers")

    def as_dict(self) -> dict[str, int]:
        return {
            "n_papers": self.n_papers,
            "n_papers_with_references": self.n_papers_with_references,
            "n_institutions": self.n_institutions,
            "n_citation_links": self.n_citation_links,
            "n_affiliation_links": self.n_affiliation_links,
        }


def corpus_stats(slice_: CorpusSlice) -> StatsSummary:
    return StatsSummary(
        n_papers=len(slice_.in_window_papers),
        n_papers_with_references=slice_.n_papers,
        n_institutions=len(slice_.institutions),
        n_citation_links=len(slice_.citation_edges),
        n_affiliation_links=len(slice_.affiliation_edges),
    )


def save_clean_corpus(corpus: CleanCorpus, path: str | Path) -> None:
    """Persist a cleaned corpus; ordering is deterministic so identical
    corpora serialize byte-identically."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{STORE_MAGIC}\t{STORE_VERSION}\n")
        fh.write(f"#institutions\t{len(corpus.institutions)}\n")
        for inst in corpus.institutions:
            aliases = "|".join(sorted(inst.alias_set))
            fh.write(f"{inst.canonical_id}\t{inst.canonical_name}\t{aliases}\n")
        fh.write(f"#records\t{len(corpus.records)}\n")
        for rec in corpus.records:
            insts = ",".join(str(c) for c in sorted(rec.institution_ids))
            refs = ",".join(rec.references)
            fh.write(f"{rec.paper_id}\t{rec.pub_date.isoformat()}\t{insts}\t{refs}\n")


def load_clean_corpus(path: str | Path) -> CleanCorpus:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith(STORE_MAGIC):
        raise ValueError(f"{path}: not a cleaned-corpus file")

    pos = 1
    head = lines[pos].split("\t")
    if head[0] != "#institutions":
        raise ValueError(f"{path}: missing #institutions header")
    n_inst = int(head[1])
    institutions = []
    for line in lines[pos + 1 : pos + 1 + n_inst]:
        cid, name, aliases = line.split("\t")
        alias_set = frozenset(a for a in aliases.split("|") if a)
        institutions.append(CanonicalInstitution(int(cid), name, alias_set))
    pos += 1 + n_inst

    head = lines[pos].split("\t")
    if head[0] != "#records":
        raise ValueError(f"{path}: missing #records header")
    n_rec = int(head[1])
    records = []
    for line in lines[pos + 1 : pos + 1 + n_rec]:
        pid, iso, insts, refs = line.split("\t")
        records.append(
            CleanRecord(
                pid,
                date.fromisoformat(iso),
                frozenset(int(c) for c in insts.split(",") if c),
                tuple(r for r in refs.split(",") if r),
            )
        )
    return CleanCorpus(records, tuple(institutions))
