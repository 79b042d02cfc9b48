"""Bias-removal pipeline: entity masking, number/noise stripping, party terms.

Location entities are removed from political text but kept in background
text; person and organization entities are removed everywhere. The default
tagger is deterministic (gazetteers + title-case heuristics) so the pipeline
is reproducible; higher-quality annotations can be supplied from a sidecar
file without touching the pipeline.
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Protocol, Sequence, Union

from .corpus import CATEGORIES, CategoryBundle, CleanBundle

PERSON = "PERSON"
ORG = "ORG"
LOC = "LOC"
LABELS = (PERSON, ORG, LOC)

DEFAULT_PARTY_TERMS = (
    "democrat",
    "democrats",
    "democratic",
    "republican",
    "republicans",
    "gop",
    "dnc",
    "rnc",
)

DEFAULT_NOISE_PATTERNS = (
    r"https?://\S+",
    r"www\.\S+",
    r"\[\s*\d+\s*\]",
    r"\[citation needed\]",
    r"\{\{[^{}]*\}\}",
)


class SpanAlignmentError(ValueError):
    """External span offsets do not fit the text they annotate."""


@dataclass(frozen=True, order=True)
class EntitySpan:
    start: int
    end: int  # exclusive
    label: str

    def __post_init__(self) -> None:
        if not 0 <= self.start < self.end:
            raise ValueError(f"bad span bounds ({self.start}, {self.end})")
        if self.label not in LABELS:
            raise ValueError(f"unknown entity label {self.label!r}")


def resolve_overlaps(spans: Iterable[EntitySpan]) -> list[EntitySpan]:
    """Drop overlapping spans, longest first (ties: earlier, then PERSON>ORG>LOC)."""
    order = {PERSON: 0, ORG: 1, LOC: 2}
    ranked = sorted(spans, key=lambda s: (-(s.end - s.start), s.start, order[s.label]))
    kept: list[EntitySpan] = []
    for span in ranked:
        if all(span.end <= k.start or span.start >= k.end for k in kept):
            kept.append(span)
    kept.sort()
    return kept


class EntityTagger(Protocol):
    def tag(self, text: str, key: Optional[tuple[str, str]] = None) -> list[EntitySpan]:
        ...


_TOKEN_RE = re.compile(r"[A-Za-z]+(?:'[A-Za-z]+)*")
_WS_GAP_RE = re.compile(r"\s+")
_DOT_GAP_RE = re.compile(r"\.\s*")

HONORIFICS = frozenset(
    h.lower()
    for h in (
        "Senator", "Sen", "Representative", "Rep", "Congressman", "Congresswoman",
        "Governor", "Gov", "President", "Secretary", "Judge", "Justice",
        "Mr", "Mrs", "Ms", "Dr",
    )
)


def _load_wordlist(name: str) -> tuple[str, ...]:
    text = resources.files("polariscope.data.gazetteers").joinpath(name).read_text("utf-8")
    return tuple(line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#"))


class RuleBasedTagger:
    """Deterministic tagger: LOC gazetteer, honorific/given-name PERSON runs,
    org-suffix ORG runs. Matching is case-insensitive on token boundaries with
    possessive suffixes folded in."""

    def __init__(
        self,
        loc_gazetteer: Optional[Sequence[str]] = None,
        given_names: Optional[Sequence[str]] = None,
        org_suffixes: Optional[Sequence[str]] = None,
    ):
        locs = loc_gazetteer if loc_gazetteer is not None else _load_wordlist("loc.txt")
        self.loc_phrases = {tuple(p.lower().split()) for p in locs}
        self.max_loc_len = max((len(p) for p in self.loc_phrases), default=1)
        given = given_names if given_names is not None else _load_wordlist("person_given.txt")
        self.given_names = {g.lower() for g in given}
        suffixes = org_suffixes if org_suffixes is not None else _load_wordlist("org_suffix.txt")
        self.org_suffixes = {s.lower() for s in suffixes}

    def tag(self, text: str, key: Optional[tuple[str, str]] = None) -> list[EntitySpan]:
        tokens = [(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]
        spans: list[EntitySpan] = []
        spans.extend(self._loc_spans(tokens))
        runs = self._capword_runs(text, tokens)
        spans.extend(self._person_spans(text, tokens, runs))
        spans.extend(self._org_spans(text, tokens, runs))
        return resolve_overlaps(spans)

    @staticmethod
    def _base(token: str) -> str:
        low = token.lower()
        if low.endswith("'s"):
            return low[:-2]
        return low

    def _loc_spans(self, tokens) -> list[EntitySpan]:
        spans = []
        n = len(tokens)
        i = 0
        while i < n:
            matched = 0
            for length in range(min(self.max_loc_len, n - i), 0, -1):
                phrase = tuple(self._base(tokens[j][0]) for j in range(i, i + length))
                if phrase in self.loc_phrases:
                    spans.append(EntitySpan(tokens[i][1], tokens[i + length - 1][2], LOC))
                    matched = length
                    break
            i += matched or 1
        return spans

    def _capword_runs(self, text: str, tokens) -> list[tuple[int, int]]:
        """Maximal runs [i, j) of capitalized tokens.

        Plain whitespace always continues a run; a period does so only after
        an initial or an honorific abbreviation, so runs never glue across
        sentence boundaries.
        """
        runs = []
        i = 0
        n = len(tokens)
        while i < n:
            if not tokens[i][0][0].isupper():
                i += 1
                continue
            j = i
            while j + 1 < n and tokens[j + 1][0][0].isupper():
                gap = text[tokens[j][2] : tokens[j + 1][1]]
                if _WS_GAP_RE.fullmatch(gap):
                    pass
                elif _DOT_GAP_RE.fullmatch(gap) and (
                    len(tokens[j][0]) == 1 or self._base(tokens[j][0]) in HONORIFICS
                ):
                    pass
                else:
                    break
                j += 1
            runs.append((i, j + 1))
            i = j + 1
        return runs

    def _person_spans(self, text: str, tokens, runs) -> list[EntitySpan]:
        spans = []
        for lo, hi in runs:
            start = lo
            # An honorific introduces the run but stays outside the span.
            if self._base(tokens[lo][0]) in HONORIFICS:
                start = lo + 1
                if start >= hi:
                    continue
            elif self._base(tokens[lo][0]) not in self.given_names or hi - lo < 2:
                continue
            spans.append(EntitySpan(tokens[start][1], tokens[hi - 1][2], PERSON))
        return spans

    def _org_spans(self, text: str, tokens, runs) -> list[EntitySpan]:
        spans = []
        connectors = {"of", "for", "on", "and"}
        by_start = {lo: (lo, hi) for lo, hi in runs}
        for lo, hi in runs:
            if self._base(tokens[hi - 1][0]) not in self.org_suffixes:
                continue
            end_idx = hi - 1
            # "University of Dayton" style extension across one connector.
            extended = False
            if hi + 1 < len(tokens) and tokens[hi][0].lower() in connectors:
                nxt = by_start.get(hi + 1)
                if nxt:
                    end_idx = nxt[1] - 1
                    extended = True
            if hi - lo < 2 and not extended:
                continue  # a lone suffix word ("University") is not an entity
            spans.append(EntitySpan(tokens[lo][1], tokens[end_idx][2], ORG))
        return spans


class ExternalFileTagger:
    """Spans from a JSON Lines sidecar keyed by (politician id, category)."""

    def __init__(self, path: Union[str, Path]):
        self.spans: dict[tuple[str, str], list[tuple[int, int, str]]] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    key = (obj["id"], obj["category"])
                    self.spans[key] = [(int(s), int(e), str(l)) for s, e, l in obj["spans"]]
                except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                    raise ValueError(f"{path}:{lineno}: malformed span record: {exc}") from exc

    def tag(self, text: str, key: Optional[tuple[str, str]] = None) -> list[EntitySpan]:
        raw = self.spans.get(key, []) if key is not None else []
        spans = []
        for start, end, label in raw:
            if not 0 <= start < end <= len(text):
                raise SpanAlignmentError(
                    f"span ({start}, {end}) out of bounds for text of length {len(text)}"
                )
            spans.append(EntitySpan(start, end, label))
        return resolve_overlaps(spans)


def tag_entities(
    text: str, tagger: EntityTagger, key: Optional[tuple[str, str]] = None
) -> list[EntitySpan]:
    """Run a tagger and enforce the span invariants on its output."""
    if not text:
        return []
    spans = tagger.tag(text, key)
    for span in spans:
        if span.end > len(text):
            raise SpanAlignmentError(f"span {span} exceeds text length {len(text)}")
    return resolve_overlaps(spans)


@dataclass(frozen=True)
class CleanPolicy:
    remove_labels_by_category: Mapping[str, frozenset[str]] = field(
        default_factory=lambda: {
            "background": frozenset({PERSON, ORG}),
            "political": frozenset({PERSON, ORG, LOC}),
            "other": frozenset({PERSON, ORG}),
        }
    )
    strip_numbers: bool = True
    noise_patterns: tuple[str, ...] = DEFAULT_NOISE_PATTERNS
    party_terms: tuple[str, ...] = DEFAULT_PARTY_TERMS
    mask_mode: str = "delete"  # or "placeholder" -> spans become "<ent>"

    @property
    def policy_id(self) -> str:
        payload = json.dumps(
            {
                "remove": {k: sorted(v) for k, v in self.remove_labels_by_category.items()},
                "strip_numbers": self.strip_numbers,
                "noise_patterns": list(self.noise_patterns),
                "party_terms": list(self.party_terms),
                "mask_mode": self.mask_mode,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def apply_masking(text: str, spans: Sequence[EntitySpan], remove: frozenset[str]) -> str:
    """Delete (or placeholder) spans whose label is in the removal set.

    Whitespace left doubled at a deletion seam collapses to one space; text
    outside removed spans is otherwise untouched.
    """
    victims = [s for s in sorted(spans) if s.label in remove]
    if not victims:
        return text
    return _cut_spans(text, victims, "")


def _cut_spans(text: str, victims: Sequence[EntitySpan], replacement: str) -> str:
    out = []
    pos = 0
    for span in victims:
        out.append(text[pos : span.start])
        if replacement:
            out.append(replacement)
        pos = span.end
    out.append(text[pos:])
    result = out[0]
    for segment in out[1:]:
        if result and segment and result[-1].isspace() and segment[0].isspace():
            segment = segment.lstrip()
            result = result.rstrip() + " " + segment
        else:
            result += segment
    return result.strip()


def _mask(text: str, spans: Sequence[EntitySpan], remove: frozenset[str], mode: str) -> str:
    victims = [s for s in sorted(spans) if s.label in remove]
    if not victims:
        return text
    return _cut_spans(text, victims, "<ent>" if mode == "placeholder" else "")


_DIGIT_RE = re.compile(r"\d+")
_SQUEEZE_RE = re.compile(r"\s+")


def strip_numbers_and_noise(text: str, policy: CleanPolicy) -> str:
    """Remove noise patterns (citations, URLs, templates) and digit runs."""
    for pattern in policy.noise_patterns:
        text = re.sub(pattern, " ", text, flags=re.IGNORECASE)
    if policy.strip_numbers:
        text = _DIGIT_RE.sub("", text)
    return _SQUEEZE_RE.sub(" ", text).strip()


def _party_term_re(stoplist: Sequence[str]) -> re.Pattern:
    alternation = "|".join(re.escape(t) for t in sorted(stoplist, key=len, reverse=True))
    return re.compile(rf"(?<![A-Za-z])(?:{alternation})(?![A-Za-z])", re.IGNORECASE)


def strip_party_terms(text: str, stoplist: Sequence[str] = DEFAULT_PARTY_TERMS) -> str:
    """Remove whole-token stoplist matches; substrings inside words survive."""
    if not stoplist:
        return text
    text = _party_term_re(stoplist).sub("", text)
    return _SQUEEZE_RE.sub(" ", text).strip()


def clean_text(
    text: str,
    category: str,
    tagger: EntityTagger,
    policy: CleanPolicy,
    key: Optional[tuple[str, str]] = None,
) -> str:
    spans = tag_entities(text, tagger, key)
    remove = policy.remove_labels_by_category.get(category, frozenset())
    text = _mask(text, spans, frozenset(remove), policy.mask_mode)
    text = strip_numbers_and_noise(text, policy)
    return strip_party_terms(text, policy.party_terms)


def clean_bundle(
    bundle: CategoryBundle,
    tagger: EntityTagger,
    policy: CleanPolicy,
    politician_id: Optional[str] = None,
) -> CleanBundle:
    """Run the full pipeline per category: mask -> noise/numbers -> party terms."""
    cleaned = {
        cat: clean_text(
            bundle.get(cat),
            cat,
            tagger,
            policy,
            key=(politician_id, cat) if politician_id else None,
        )
        for cat in CATEGORIES
    }
    return CleanBundle(policy_id=policy.policy_id, **cleaned)


# Scan helpers used by the verification suite.

def find_digits(text: str) -> list[str]:
    return _DIGIT_RE.findall(text)


def find_stoplist_tokens(text: str, stoplist: Sequence[str] = DEFAULT_PARTY_TERMS) -> list[str]:
    return _party_term_re(stoplist).findall(text)


def find_gazetteer_phrases(text: str, phrases: Optional[Sequence[str]] = None) -> list[str]:
    if phrases is None:
        phrases = _load_wordlist("loc.txt")
    hits = []
    for phrase in phrases:
        pattern = r"(?<![A-Za-z])" + r"\s+".join(re.escape(w) for w in phrase.split()) + r"(?![A-Za-z])"
        if re.search(pattern, text, re.IGNORECASE):
            hits.append(phrase)
    return hits
