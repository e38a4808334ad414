"""Line-delimited bibliographic record format.

One record per line, UTF-8, four tab-separated fields::

    paper_id <TAB> pub_date <TAB> author-affiliation groups <TAB> references

* ``pub_date`` is ISO ``YYYY-MM-DD``.
* Author groups are ``|``-separated; within one author the raw affiliation
  strings are ``;``-separated.  An author may have no affiliation.
* References are ``,``-separated paper ids; the field may be empty.

Malformed lines never abort a parse: each one yields a :class:`ParseError`
with its line number and the stream continues.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, Iterator

FIELD_SEP = "\t"
AUTHOR_SEP = "|"
AFFILIATION_SEP = ";"
REFERENCE_SEP = ","


@dataclass(frozen=True)
class BibRecord:
    """One raw publication: identifier, date, per-author affiliations, references."""

    paper_id: str
    pub_date: date
    authors: tuple[tuple[str, ...], ...]
    references: tuple[str, ...]


@dataclass(frozen=True)
class ParseError:
    """A skipped input line: where it was and why it was rejected."""

    line_no: int
    reason: str


def parse_record_line(line: str, line_no: int = 0) -> BibRecord:
    """Parse one record line; raises ValueError on any malformation."""
    fields = line.rstrip("\n").split(FIELD_SEP)
    if len(fields) != 4:
        raise ValueError(f"expected 4 tab-separated fields, got {len(fields)}")
    raw_id, raw_date, raw_authors, raw_refs = fields

    paper_id = raw_id.strip()
    if not paper_id:
        raise ValueError("empty paper id")

    try:
        pub_date = date.fromisoformat(raw_date.strip())
    except ValueError as exc:
        raise ValueError(f"bad date {raw_date.strip()!r}: {exc}") from None

    authors: list[tuple[str, ...]] = []
    if raw_authors.strip():
        for group in raw_authors.split(AUTHOR_SEP):
            affs = tuple(
                sys.intern(a.strip()) for a in group.split(AFFILIATION_SEP) if a.strip()
            )
            authors.append(affs)

    references = tuple(
        sys.intern(r.strip()) for r in raw_refs.split(REFERENCE_SEP) if r.strip()
    )

    return BibRecord(sys.intern(paper_id), pub_date, tuple(authors), references)


def parse_records(lines: Iterable[str]) -> tuple[list[BibRecord], list[ParseError]]:
    """Parse a record stream, skipping and reporting malformed lines.

    Output order equals input order.  Blank lines are ignored.
    """
    records: list[BibRecord] = []
    errors: list[ParseError] = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            records.append(parse_record_line(line, line_no))
        except ValueError as exc:
            errors.append(ParseError(line_no, str(exc)))
    return records, errors


def format_record(record: BibRecord) -> str:
    authors = AUTHOR_SEP.join(AFFILIATION_SEP.join(a) for a in record.authors)
    refs = REFERENCE_SEP.join(record.references)
    return FIELD_SEP.join((record.paper_id, record.pub_date.isoformat(), authors, refs))


def write_records(records: Iterable[BibRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(format_record(record))
            fh.write("\n")


def read_records(path: str | Path) -> tuple[list[BibRecord], list[ParseError]]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_records(fh)


def iter_lines(path: str | Path) -> Iterator[str]:
    with open(path, "r", encoding="utf-8") as fh:
        yield from fh
