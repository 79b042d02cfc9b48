"""Core domain types: parties, congress terms, phases, politicians.

Everything here is an immutable value record; construction happens once
during ingestion and the objects are shared read-only afterwards.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

FIRST_CONGRESS_YEAR = 1789
IN_SCOPE_LOW = 58
IN_SCOPE_HIGH = 117


class InvalidTermError(ValueError):
    """Congress ordinal outside the valid range."""


class NoPhaseError(ValueError):
    """Congress ordinal not covered by the phase table."""


class PartyKind(str, Enum):
    DEMOCRATIC = "democratic"
    REPUBLICAN = "republican"
    OTHER = "other"


@dataclass(frozen=True)
class Party:
    kind: PartyKind
    other_label: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind is PartyKind.OTHER:
            if not self.other_label:
                raise ValueError("Party.OTHER requires a non-empty other_label")
        elif self.other_label is not None:
            raise ValueError("other_label only allowed for Party.OTHER")

    @property
    def is_major(self) -> bool:
        return self.kind is not PartyKind.OTHER


DEMOCRATIC = Party(PartyKind.DEMOCRATIC)
REPUBLICAN = Party(PartyKind.REPUBLICAN)


class Chamber(str, Enum):
    SENATE = "senate"
    HOUSE = "house"


@dataclass(frozen=True)
class Phase:
    index: int
    congress_range: tuple[int, int]

    def __contains__(self, ordinal: int) -> bool:
        lo, hi = self.congress_range
        return lo <= ordinal <= hi


# Four chronological buckets over congresses 58..117. The last bucket is
# anchored to 104-117 (the 1995-2021 span); the remaining 46 congresses
# split 16/15/15.
DEFAULT_PHASES: tuple[Phase, ...] = (
    Phase(1, (58, 73)),
    Phase(2, (74, 88)),
    Phase(3, (89, 103)),
    Phase(4, (104, 117)),
)

PhaseTable = tuple[Phase, ...]


def congress_years(ordinal: int) -> tuple[int, int]:
    """Return the (start, end) calendar years of the n-th congress."""
    if ordinal < 1:
        raise InvalidTermError(f"congress ordinal must be >= 1, got {ordinal}")
    start = FIRST_CONGRESS_YEAR + 2 * (ordinal - 1)
    return start, start + 2


def assign_phase(ordinal: int, phases: PhaseTable = DEFAULT_PHASES) -> Phase:
    """Map a congress ordinal to the unique phase containing it."""
    for phase in phases:
        if ordinal in phase:
            return phase
    raise NoPhaseError(f"congress {ordinal} is not covered by the phase table")


# CategoryBundle / CleanBundle field names, in canonical order.
CATEGORIES = ("background", "political", "other")


@dataclass(frozen=True)
class CategoryBundle:
    background: str
    political: str
    other: str

    def get(self, category: str) -> str:
        return getattr(self, category)


@dataclass(frozen=True)
class CleanBundle:
    background: str
    political: str
    other: str
    policy_id: str

    def get(self, category: str) -> str:
        return getattr(self, category)


@dataclass(frozen=True)
class Politician:
    id: str
    display_name: str
    party: Party
    chamber: Chamber
    terms: frozenset[int]
    phases: frozenset[int]
    sections: Mapping[str, str]  # ordered heading -> body
    categories: Optional[CategoryBundle] = None
    clean: Optional[CleanBundle] = None

    def with_categories(self, bundle: CategoryBundle) -> "Politician":
        return _replace(self, categories=bundle)

    def with_clean(self, bundle: CleanBundle) -> "Politician":
        return _replace(self, clean=bundle)


def _replace(p: Politician, **kw) -> Politician:
    import dataclasses

    return dataclasses.replace(p, **kw)


_SLUG_RE = re.compile(r"[^a-z0-9]+")


def slugify(name: str) -> str:
    """Stable id slug: lowercased, punctuation collapsed to hyphens."""
    slug = _SLUG_RE.sub("-", name.lower()).strip("-")
    return slug or "unknown"


def derive_phases(terms: frozenset[int], phases: PhaseTable = DEFAULT_PHASES) -> frozenset[int]:
    return frozenset(assign_phase(t, phases).index for t in terms)


def validate_politician(p: Politician, phases: PhaseTable = DEFAULT_PHASES) -> list[str]:
    """Check record invariants; returns one message per violation, empty if clean."""
    violations: list[str] = []
    if not p.id:
        violations.append("id: must be non-empty")
    if not p.display_name:
        violations.append("display_name: must be non-empty")
    if not p.terms:
        violations.append("terms: must be non-empty")
    else:
        out_of_scope = sorted(t for t in p.terms if not IN_SCOPE_LOW <= t <= IN_SCOPE_HIGH)
        if out_of_scope:
            violations.append(f"terms: ordinals outside 58..117: {out_of_scope}")
        else:
            expected = derive_phases(p.terms, phases)
            if p.phases != expected:
                violations.append(
                    f"phases: inconsistent with terms (got {sorted(p.phases)}, "
                    f"expected {sorted(expected)})"
                )
    if not p.sections:
        violations.append("sections: must be non-empty after ingestion")
    else:
        seen: set[str] = set()
        for heading in p.sections:
            key = normalize_heading_key(heading)
            if key in seen:
                violations.append(f"sections: duplicate normalized heading {key!r}")
            seen.add(key)
    if p.clean is not None and p.categories is None:
        violations.append("clean: present without categories")
    return violations


_WS_RE = re.compile(r"\s+")


def normalize_heading_key(heading: str) -> str:
    """Uniqueness key for headings: lowercased, whitespace collapsed."""
    return _WS_RE.sub(" ", heading.strip().lower())
