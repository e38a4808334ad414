"""Institution name normalization.

Two mechanisms, tried in order:

1. an explicit alias table (``raw_name<TAB>canonical_name`` lines) matched
   after case-folding, whitespace collapsing and stripping punctuation at
   the ends, and
2. a first-level-unit heuristic: the last comma-separated segment wins,
   after discarding sub-unit segments (laboratories, departments, ...) when
   some other segment names a university.

Alias targets are implicitly aliases of themselves, which makes
:func:`normalize_institution` idempotent: feeding a canonical name back in
returns it unchanged.
"""

from __future__ import annotations

import re
import string
from pathlib import Path
from typing import Iterable, Mapping

_WS = re.compile(r"\s+")
_WORD = re.compile(r"[a-z]+")

# Tokens marking an organizational sub-unit, dropped only when another
# segment of the same name looks like a top-level university.
_SUBUNIT_TOKENS = frozenset(
    {
        "lab",
        "labs",
        "laboratory",
        "laboratories",
        "dept",
        "department",
        "institute",
        "school",
        "center",
        "centre",
        "division",
        "faculty",
        "section",
        "group",
        "observatory",
    }
)
_UNIVERSITY_TOKENS = frozenset({"university", "college", "polytechnic", "academy"})
# Phrases that make an "institute" segment top-level in its own right.
_TOPLEVEL_PHRASES = ("institute of technology", "institute for advanced study")


def match_key(name: str) -> str:
    """Key under which alias lookups happen: case-folded, inner whitespace
    collapsed, punctuation stripped at the ends."""
    collapsed = _WS.sub(" ", name.strip())
    return collapsed.strip(string.punctuation + " ").casefold()


class AliasTable:
    """Explicit raw-name -> canonical-name merges, matched via :func:`match_key`."""

    def __init__(self, entries: Mapping[str, str] | Iterable[tuple[str, str]] = ()):
        pairs = entries.items() if isinstance(entries, Mapping) else entries
        self._targets: dict[str, str] = {}
        for raw, canonical in pairs:
            canonical = canonical.strip()
            if not canonical:
                raise ValueError(f"alias for {raw!r} has empty target")
            self._targets[match_key(raw)] = canonical
        # Targets self-map so that canonical names normalize to themselves.
        for canonical in list(self._targets.values()):
            self._targets.setdefault(match_key(canonical), canonical)

    def lookup(self, raw: str) -> str | None:
        return self._targets.get(match_key(raw))

    def __len__(self) -> int:
        return len(self._targets)

    @classmethod
    def from_path(cls, path: str | Path) -> "AliasTable":
        """Load ``raw_name<TAB>canonical_name`` lines; ``#`` comments and blank
        lines are skipped."""
        pairs: list[tuple[str, str]] = []
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                parts = line.rstrip("\n").split("\t")
                if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                    raise ValueError(f"{path}:{line_no}: expected raw<TAB>canonical")
                pairs.append((parts[0].strip(), parts[1].strip()))
        return cls(pairs)


def _words(segment: str) -> set[str]:
    return set(_WORD.findall(segment.casefold()))

def _names_university(segment: str) -> bool:
    lowered = segment.casefold()
    if any(phrase in lowered for phrase in _TOPLEVEL_PHRASES):
        return True
    return not _words(segment).isdisjoint(_UNIVERSITY_TOKENS)

def _is_subunit(segment: str) -> bool:
    if _names_university(segment):
        return False
    return not _words(segment).isdisjoint(_SUBUNIT_TOKENS)


def _title_case(name: str) -> str:
    # Capitalize fully-lowercase words only; acronyms and mixed case survive.
    out = []
    for word in name.split(" "):
        out.append(word[0].upper() + word[1:] if word and word.islower() else word)
    return " ".join(out)


def normalize_institution(raw: str, aliases: AliasTable | None = None) -> str:
    """Reduce a raw affiliation string to its canonical first-level unit.

    Raises ValueError when ``raw`` is empty after trimming.
    """
    trimmed = raw.strip()
    if not trimmed:
        raise ValueError("empty institution name")

    if aliases is not None:
        hit = aliases.lookup(trimmed)
        if hit is not None:
            return hit

    segments = [s.strip() for s in trimmed.split(",") if s.strip()]
    if not segments:
        segments = [trimmed]
    if any(_names_university(s) for s in segments):
        kept = [s for s in segments if not _is_subunit(s)]
        if kept:
            segments = kept
    unit = segments[-1].strip(string.punctuation + " ") or segments[-1]

    if aliases is not None:
        hit = aliases.lookup(unit)
        if hit is not None:
            return hit
    return _title_case(unit)
