"""Heading-to-category mapping and section merging.

Rules live in a JSON file so the mapping can be curated by hand; the shipped
default set covers the common biography headings. Unmapped headings fall to
"other" by default, or are excluded entirely in strict mode.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Union

from .corpus import CATEGORIES, CategoryBundle
from .ingest import LEAD_HEADING

UNMAPPED = "unmapped"


@dataclass(frozen=True)
class HeadingRule:
    pattern: str  # matched against the normalized heading
    match: str  # "exact" | "substring"
    category: str  # one of CATEGORIES
    priority: int  # lower wins

    def __post_init__(self) -> None:
        if not self.pattern:
            raise ValueError("rule pattern must be non-empty")
        if self.match not in ("exact", "substring"):
            raise ValueError(f"unknown match kind {self.match!r}")
        if self.category not in CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")

    def matches(self, normalized: str) -> bool:
        if self.match == "exact":
            return normalized == self.pattern
        return self.pattern in normalized


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[HeadingRule, ...]
    default_category: str = "other"  # or UNMAPPED (strict mode)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "rules", tuple(sorted(self.rules, key=lambda r: r.priority))
        )
        covered = {r.category for r in self.rules}
        if set(CATEGORIES) - covered:
            raise ValueError(f"rule set missing categories: {set(CATEGORIES) - covered}")


@dataclass
class AnnotationReport:
    total_headings: int = 0
    mapped: int = 0
    unmapped: dict[str, int] = field(default_factory=dict)  # normalized heading -> count
    per_category_counts: dict[str, int] = field(default_factory=dict)

    def merge(self, other: "AnnotationReport") -> None:
        self.total_headings += other.total_headings
        self.mapped += other.mapped
        for heading, n in other.unmapped.items():
            self.unmapped[heading] = self.unmapped.get(heading, 0) + n
        for cat, n in other.per_category_counts.items():
            self.per_category_counts[cat] = self.per_category_counts.get(cat, 0) + n


_PUNCT_RE = re.compile(r"[^\w\s]")
_SUFFIX_RE = re.compile(r"\s*\(\d+\)\s*$")
_WS_RE = re.compile(r"\s+")


def normalize_heading(heading: str) -> str:
    """Lowercase, strip punctuation and the "(n)" disambiguator, collapse spaces."""
    if heading == LEAD_HEADING:
        return LEAD_HEADING
    h = _SUFFIX_RE.sub("", heading)
    h = _PUNCT_RE.sub(" ", h.lower())
    return _WS_RE.sub(" ", h).strip()


def categorize_heading(heading: str, rules: RuleSet) -> str:
    """First matching rule by priority wins; returns the default otherwise."""
    normalized = normalize_heading(heading)
    for rule in rules.rules:
        if rule.matches(normalized):
            return rule.category
    return rules.default_category


def merge_categories(
    sections: Mapping[str, str], rules: RuleSet
) -> tuple[CategoryBundle, AnnotationReport]:
    """Concatenate section bodies per category, preserving page order.

    In strict mode (default_category == "unmapped") the bodies of unmapped
    headings are excluded from the bundle and surfaced in the report.
    """
    if not sections:
        raise ValueError("section map must be non-empty")
    parts: dict[str, list[str]] = {cat: [] for cat in CATEGORIES}
    report = AnnotationReport(per_category_counts={cat: 0 for cat in CATEGORIES})
    for heading, body in sections.items():
        report.total_headings += 1
        category = categorize_heading(heading, rules)
        matched = any(r.matches(normalize_heading(heading)) for r in rules.rules)
        if matched:
            report.mapped += 1
        else:
            key = normalize_heading(heading)
            report.unmapped[key] = report.unmapped.get(key, 0) + 1
        if category == UNMAPPED:
            continue
        report.per_category_counts[category] += 1
        if body:
            parts[category].append(body)
    bundle = CategoryBundle(**{cat: "\n".join(parts[cat]) for cat in CATEGORIES})
    return bundle, report


def load_rules(
    path: Union[str, Path], default_category: str = "other"
) -> RuleSet:
    raw = json.loads(Path(path).read_text("utf-8"))
    return _rules_from_obj(raw, default_category)


def _rules_from_obj(raw: list, default_category: str) -> RuleSet:
    rules = tuple(
        HeadingRule(
            pattern=r["pattern"],
            match=r.get("match", "exact"),
            category=r["category"],
            priority=int(r["priority"]),
        )
        for r in raw
    )
    return RuleSet(rules=rules, default_category=default_category)


def default_rules(strict: bool = False) -> RuleSet:
    raw = json.loads(
        resources.files("polariscope.data").joinpath("annotation_rules.json").read_text("utf-8")
    )
    return _rules_from_obj(raw, UNMAPPED if strict else "other")
