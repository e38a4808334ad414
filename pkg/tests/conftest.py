from __future__ import annotations

import random
from datetime import date

import pytest

from iprank.corpus import CleanCorpus, TimeWindow, apply_filters, slice_window
from iprank.records import BibRecord, parse_records

# Three papers, four institutions: P1 (inst 1, 2) cites P2 (inst 2, 3) and
# P3 (inst 4).  This is the worked toy network used across the suite.
TOY_RECORDS = """\
P1\t1997-05-01\tInst One|Inst Two\tP2,P3
P2\t1996-03-02\tInst Two|Inst Three\t
P3\t1995-07-20\tInst Four\t
"""


@pytest.fixture
def toy_corpus() -> CleanCorpus:
    records, errors = parse_records(TOY_RECORDS.splitlines())
    assert not errors
    corpus, _ = apply_filters(records)
    return corpus


@pytest.fixture
def toy_slice(toy_corpus):
    return slice_window(toy_corpus, TimeWindow(1995, 1997))


def make_random_records(
    rng: random.Random,
    n_papers: int,
    n_institutions: int,
    max_refs: int = 4,
    max_authors: int = 3,
    years: tuple[int, int] = (1990, 2000),
) -> list[BibRecord]:
    """Random but well-formed records; every reference points into the corpus."""
    ids = [f"P{i}" for i in range(n_papers)]
    records = []
    for i, pid in enumerate(ids):
        year = rng.randint(*years)
        pub = date(year, rng.randint(1, 12), rng.randint(1, 28))
        authors = tuple(
            (f"Institution {rng.randrange(n_institutions)}",)
            for _ in range(rng.randint(1, max_authors))
        )
        refs = tuple(
            rng.choice(ids)
            for _ in range(rng.randint(0, max_refs))
        )
        refs = tuple(r for r in refs if r != pid)
        records.append(BibRecord(pid, pub, authors, refs))
    return records


def make_random_corpus(seed: int, n_papers: int = 6, n_institutions: int = 3) -> CleanCorpus:
    rng = random.Random(seed)
    corpus, _ = apply_filters(make_random_records(rng, n_papers, n_institutions))
    return corpus
