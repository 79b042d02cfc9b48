"""Roster/biography page ingestion.

Two input routes: raw page HTML (parsed with the stdlib HTMLParser) and a
pre-parsed JSON Lines dump, so desk-scale runs work fully offline. Live
fetching goes through an append-only on-disk cache keyed by page title.
"""
from __future__ import annotations

import hashlib
import json
import os
import re
import time
import urllib.request
from dataclasses import dataclass, field
from enum import Enum
from html.parser import HTMLParser
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

from .corpus import (
    Chamber,
    DEFAULT_PHASES,
    DEMOCRATIC,
    IN_SCOPE_HIGH,
    IN_SCOPE_LOW,
    Party,
    PartyKind,
    PhaseTable,
    Politician,
    REPUBLICAN,
    derive_phases,
    normalize_heading_key,
    slugify,
)

LEAD_HEADING = "__lead__"
CACHE_ENV = "POLARISCOPE_CACHE"


class FetchError(RuntimeError):
    """Network fetch failed; safe to retry."""


class MissingFixtureError(FileNotFoundError):
    """CacheOnly fetch for a title that was never cached."""


class RosterParseError(ValueError):
    """No recognizable member table on a roster page."""


class EmptyPageError(ValueError):
    """Biography page with no headings and no lead text."""


class PageSource(str, Enum):
    LIVE = "live"
    DUMP = "dump"
    FIXTURE = "fixture"


Sections = Sequence[tuple[str, str]]


@dataclass(frozen=True)
class RawPage:
    title: str
    payload: Union[str, Sections]  # HTML/wikitext string or pre-parsed sections
    source: PageSource
    page_id: Optional[int] = None
    retrieved_at: str = ""

    def __post_init__(self) -> None:
        if not self.payload and not isinstance(self.payload, (list, tuple)):
            raise ValueError("RawPage payload must be non-empty")


@dataclass(frozen=True)
class RosterEntry:
    name: str
    party_text: str
    state: str
    chamber: Chamber
    congress: int
    page_title: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("roster entry name must be non-empty")
        if not IN_SCOPE_LOW <= self.congress <= IN_SCOPE_HIGH:
            raise ValueError(f"congress {self.congress} outside in-scope range")


class FetchCache:
    """Append-only page cache: <root>/<sha256(title)>.html plus sidecar meta."""

    def __init__(self, root: Union[str, Path, None] = None):
        if root is None:
            root = os.environ.get(CACHE_ENV, ".polariscope-cache")
        self.root = Path(root)

    def _paths(self, title: str) -> tuple[Path, Path]:
        digest = hashlib.sha256(title.encode("utf-8")).hexdigest()
        return self.root / f"{digest}.html", self.root / f"{digest}.meta.json"

    def get(self, title: str) -> Optional[RawPage]:
        body_path, meta_path = self._paths(title)
        if not body_path.exists():
            return None
        meta = {}
        if meta_path.exists():
            meta = json.loads(meta_path.read_text("utf-8"))
        return RawPage(
            title=title,
            payload=body_path.read_text("utf-8"),
            source=PageSource.DUMP,
            page_id=meta.get("page_id"),
            retrieved_at=meta.get("retrieved_at", ""),
        )

    def put(self, page: RawPage) -> None:
        if not isinstance(page.payload, str):
            raise TypeError("only raw string payloads are cached")
        self.root.mkdir(parents=True, exist_ok=True)
        body_path, meta_path = self._paths(page.title)
        tmp = body_path.with_suffix(".tmp")
        tmp.write_text(page.payload, "utf-8")
        os.replace(tmp, body_path)
        meta_path.write_text(
            json.dumps(
                {
                    "title": page.title,
                    "page_id": page.page_id,
                    "retrieved_at": page.retrieved_at,
                    "source": page.source.value,
                },
                sort_keys=True,
            ),
            "utf-8",
        )


class FetchMode(str, Enum):
    LIVE_THEN_CACHE = "live-then-cache"
    CACHE_ONLY = "cache-only"


WIKIPEDIA_BASE = "https://en.wikipedia.org/wiki/"


def fetch_page(
    title: str,
    cache: FetchCache,
    mode: FetchMode = FetchMode.CACHE_ONLY,
    timeout: float = 30.0,
) -> RawPage:
    """Fetch a page by title, hitting the cache before the network."""
    cached = cache.get(title)
    if cached is not None:
        return cached
    if mode is FetchMode.CACHE_ONLY:
        raise MissingFixtureError(f"page {title!r} not in cache {cache.root}")
    url = WIKIPEDIA_BASE + urllib.request.quote(title.replace(" ", "_"))
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            body = resp.read().decode("utf-8", errors="replace")
    except OSError as exc:
        raise FetchError(f"fetch of {title!r} failed: {exc}") from exc
    page = RawPage(
        title=title,
        payload=body,
        source=PageSource.LIVE,
        retrieved_at=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    )
    cache.put(page)
    return page


# --------------------------------------------------------------------------
# Section parsing
# --------------------------------------------------------------------------

_SKIP_TAGS = {"table", "sup", "style", "script", "figure", "figcaption", "nav", "aside"}
_TEXT_TAGS = {"p", "li", "blockquote"}
_HEADING_TAGS = {"h2", "h3", "h4", "h5"}
_EDIT_SUFFIX_RE = re.compile(r"\s*\[\s*edit\s*\]\s*$", re.IGNORECASE)


class _SectionExtractor(HTMLParser):
    """Collects lead + per-h2 section text; h3+ fold into the enclosing h2."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.sections: list[tuple[str, list[str]]] = [(LEAD_HEADING, [])]
        self._skip_depth = 0
        self._in_heading: Optional[str] = None
        self._heading_buf: list[str] = []
        self._text_depth = 0
        self._text_buf: list[str] = []

    def handle_starttag(self, tag, attrs):
        if self._skip_depth:
            self._skip_depth += 1
            return
        cls = dict(attrs).get("class", "")
        if tag in _SKIP_TAGS or "navbox" in cls or "infobox" in cls or "reference" in cls:
            self._skip_depth = 1
            return
        if tag in _HEADING_TAGS:
            self._flush_text()
            self._in_heading = tag
            self._heading_buf = []
        elif tag in _TEXT_TAGS:
            self._text_depth += 1

    def handle_endtag(self, tag):
        if self._skip_depth:
            self._skip_depth -= 1
            return
        if self._in_heading and tag == self._in_heading:
            text = _EDIT_SUFFIX_RE.sub("", "".join(self._heading_buf)).strip()
            if tag == "h2" and text:
                self.sections.append((text, []))
            self._in_heading = None
        elif tag in _TEXT_TAGS and self._text_depth:
            self._text_depth -= 1
            if not self._text_depth:
                self._flush_text()

    def handle_data(self, data):
        if self._skip_depth:
            return
        if self._in_heading is not None:
            self._heading_buf.append(data)
        elif self._text_depth:
            self._text_buf.append(data)

    def _flush_text(self) -> None:
        text = re.sub(r"\s+", " ", "".join(self._text_buf)).strip()
        self._text_buf = []
        if text:
            self.sections[-1][1].append(text)


def _dedupe_headings(pairs: Iterable[tuple[str, str]]) -> dict[str, str]:
    out: dict[str, str] = {}
    seen: dict[str, int] = {}
    for heading, body in pairs:
        key = normalize_heading_key(heading)
        n = seen.get(key, 0) + 1
        seen[key] = n
        out[heading if n == 1 else f"{heading} ({n})"] = body
    return out


def parse_sections(page: RawPage) -> dict[str, str]:
    """Parse a biography page into an ordered heading -> body map.

    The lead paragraph is stored under ``__lead__``; duplicate headings get
    an ``" (n)"`` suffix; structural chrome (tables, references, navboxes,
    figures) is dropped.
    """
    if isinstance(page.payload, str):
        extractor = _SectionExtractor()
        extractor.feed(page.payload)
        pairs = [(h, "\n".join(bodies)) for h, bodies in extractor.sections]
    else:
        pairs = []
        for heading, text in page.payload:
            heading = heading.strip() or LEAD_HEADING
            pairs.append((heading, text.strip()))
        if not pairs or pairs[0][0] != LEAD_HEADING:
            pairs.insert(0, (LEAD_HEADING, ""))
    # Drop the lead slot only if empty *and* other sections exist.
    if pairs and pairs[0][0] == LEAD_HEADING and not pairs[0][1] and len(pairs) > 1:
        pairs = pairs[1:]
    sections = _dedupe_headings(pairs)
    if not any(sections.values()) and list(sections) in ([], [LEAD_HEADING]):
        raise EmptyPageError(f"page {page.title!r} has no headings and no lead text")
    return sections


# --------------------------------------------------------------------------
# Roster parsing
# --------------------------------------------------------------------------

_NAME_HEADERS = ("name", "member", "senator", "representative")
_CHAMBER_HINTS = (("senat", Chamber.SENATE), ("house", Chamber.HOUSE), ("represent", Chamber.HOUSE))


class _RosterExtractor(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.tables: list[dict] = []
        self.headings_seen: list[str] = []
        self._context_heading = ""
        self._in_heading = False
        self._heading_buf: list[str] = []
        self._table: Optional[dict] = None
        self._row: Optional[list[dict]] = None
        self._cell: Optional[dict] = None

    def handle_starttag(self, tag, attrs):
        if tag in ("h2", "h3"):
            self._in_heading = True
            self._heading_buf = []
        elif tag == "table":
            self._table = {"heading": self._context_heading, "rows": []}
        elif tag == "tr" and self._table is not None:
            self._row = []
        elif tag in ("td", "th") and self._row is not None:
            self._cell = {"header": tag == "th", "text": [], "link": None}
        elif tag == "a" and self._cell is not None and self._cell["link"] is None:
            title = dict(attrs).get("title") or dict(attrs).get("href", "")
            if title.startswith("/wiki/"):
                title = urllib.request.unquote(title[len("/wiki/"):]).replace("_", " ")
            self._cell["link"] = title or None

    def handle_endtag(self, tag):
        if tag in ("h2", "h3") and self._in_heading:
            self._in_heading = False
            self._context_heading = "".join(self._heading_buf).strip()
            self.headings_seen.append(self._context_heading)
        elif tag == "table" and self._table is not None:
            self.tables.append(self._table)
            self._table = None
        elif tag == "tr" and self._row is not None:
            if self._cell is not None:
                self._row.append(self._finish_cell())
            if self._row:
                self._table["rows"].append(self._row)
            self._row = None
        elif tag in ("td", "th") and self._cell is not None:
            self._row.append(self._finish_cell())

    def _finish_cell(self) -> dict:
        cell = self._cell
        self._cell = None
        cell["text"] = re.sub(r"\s+", " ", "".join(cell["text"])).strip()
        return cell

    def handle_data(self, data):
        if self._in_heading:
            self._heading_buf.append(data)
        elif self._cell is not None:
            self._cell["text"].append(data)


def _chamber_from_text(text: str) -> Optional[Chamber]:
    low = text.lower()
    for hint, chamber in _CHAMBER_HINTS:
        if hint in low:
            return chamber
    return None


def _wikitext_tables(text: str) -> list[dict]:
    """Minimal wikitext table reader: {| ... |} with ! headers and | cells."""
    tables = []
    context = ""
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        m = re.match(r"^=+\s*(.*?)\s*=+$", line)
        if m:
            context = m.group(1)
        if line.startswith("{|"):
            rows: list[list[dict]] = []
            row: list[dict] = []
            i += 1
            while i < len(lines) and not lines[i].strip().startswith("|}"):
                raw = lines[i].strip()
                if raw.startswith("|-"):
                    if row:
                        rows.append(row)
                    row = []
                elif raw.startswith("!"):
                    for part in re.split(r"!!", raw.lstrip("!")):
                        row.append({"header": True, "text": part.strip(), "link": None})
                elif raw.startswith("|"):
                    for part in re.split(r"\|\|", raw.lstrip("|")):
                        part = part.strip()
                        link = None
                        lm = re.search(r"\[\[([^|\]]+)(?:\|([^\]]+))?\]\]", part)
                        if lm:
                            link = lm.group(1).strip()
                            part = lm.group(2) or lm.group(1)
                        row.append({"header": False, "text": part.strip(), "link": link})
                i += 1
            if row:
                rows.append(row)
            tables.append({"heading": context, "rows": rows})
        i += 1
    return tables


def parse_roster(page: RawPage, congress: int) -> list[RosterEntry]:
    """Extract member rows from a congress roster page (HTML or wikitext)."""
    if not isinstance(page.payload, str):
        raise RosterParseError("roster parsing requires a raw page payload")
    if "<table" in page.payload.lower():
        extractor = _RosterExtractor()
        extractor.feed(page.payload)
        tables = extractor.tables
    else:
        tables = _wikitext_tables(page.payload)

    entries: list[RosterEntry] = []
    seen: set[tuple] = set()
    candidate_headers: list[list[str]] = []
    for table in tables:
        rows = table["rows"]
        if not rows:
            continue
        header = [c["text"].lower() for c in rows[0]]
        candidate_headers.append(header)
        name_col = next(
            (i for i, h in enumerate(header) if any(k in h for k in _NAME_HEADERS)), None
        )
        party_col = next((i for i, h in enumerate(header) if "party" in h), None)
        if name_col is None or party_col is None:
            continue
        state_col = next((i for i, h in enumerate(header) if "state" in h), None)
        chamber_col = next((i for i, h in enumerate(header) if "chamber" in h), None)
        table_chamber = _chamber_from_text(table["heading"])
        for row in rows[1:]:
            if len(row) <= max(name_col, party_col):
                continue
            name = row[name_col]["text"]
            if not name:
                continue
            if chamber_col is not None and len(row) > chamber_col:
                chamber = _chamber_from_text(row[chamber_col]["text"])
            else:
                chamber = table_chamber
            if chamber is None:
                raise RosterParseError(
                    f"cannot infer chamber for table under heading "
                    f"{table['heading']!r}; headers seen: {candidate_headers}"
                )
            entry = RosterEntry(
                name=name,
                party_text=row[party_col]["text"],
                state=row[state_col]["text"] if state_col is not None and len(row) > state_col else "",
                chamber=chamber,
                congress=congress,
                page_title=row[name_col]["link"] or name,
            )
            key = (entry.name, entry.party_text, entry.state, entry.chamber, entry.congress)
            if key not in seen:
                seen.add(key)
                entries.append(entry)
    if not entries:
        raise RosterParseError(
            f"no member list found on {page.title!r}; candidate table headers: {candidate_headers}"
        )
    return entries


# --------------------------------------------------------------------------
# Identity merging
# --------------------------------------------------------------------------

_PARTY_TABLE = {
    "democratic": DEMOCRATIC,
    "democrat": DEMOCRATIC,
    "democrats": DEMOCRATIC,
    "republican": REPUBLICAN,
    "republicans": REPUBLICAN,
}


def normalize_party(party_text: str) -> Party:
    key = party_text.strip().lower()
    if key in _PARTY_TABLE:
        return _PARTY_TABLE[key]
    return Party(PartyKind.OTHER, other_label=party_text.strip() or "unknown")


@dataclass
class MergeResult:
    politicians: list[Politician]
    gaps: list[str] = field(default_factory=list)  # titles with no fetched page
    warnings: list[str] = field(default_factory=list)


def merge_identities(
    entries: Sequence[RosterEntry],
    pages: Mapping[str, Mapping[str, str]],
    phases: PhaseTable = DEFAULT_PHASES,
) -> MergeResult:
    """Collapse roster entries into one Politician per person.

    Terms are unioned across rosters; party and chamber are taken from the
    most recent term (Senate wins a same-congress tie). Party switches are
    reported as warnings, unresolvable page titles as gaps.
    """
    by_title: dict[str, list[RosterEntry]] = {}
    for entry in entries:
        by_title.setdefault(entry.page_title or entry.name, []).append(entry)

    result = MergeResult(politicians=[])
    slug_owners: dict[str, str] = {}
    for title in by_title:
        group = sorted(
            by_title[title],
            key=lambda e: (e.congress, e.chamber is Chamber.SENATE),
        )
        latest = group[-1]
        sections = pages.get(title)
        if not sections:
            result.gaps.append(title)
            continue
        parties = {normalize_party(e.party_text).kind for e in group}
        if len(parties) > 1:
            result.warnings.append(
                f"{title}: party changed across terms ({sorted(k.value for k in parties)}); "
                f"labeled by most recent term"
            )
        slug = slugify(title)
        if slug in slug_owners and slug_owners[slug] != title:
            slug = slugify(f"{title} {latest.state} {latest.chamber.value}")
        slug_owners[slug] = title
        terms = frozenset(e.congress for e in group)
        result.politicians.append(
            Politician(
                id=slug,
                display_name=group[-1].name,
                party=normalize_party(latest.party_text),
                chamber=latest.chamber,
                terms=terms,
                phases=derive_phases(terms, phases),
                sections=dict(sections),
            )
        )
    result.politicians.sort(key=lambda p: p.id)
    return result


# --------------------------------------------------------------------------
# Dump input
# --------------------------------------------------------------------------

def load_dump(path: Union[str, Path]) -> list[RawPage]:
    """Read a JSON Lines page dump: {"title", "page_id", "sections": [...]}. """
    pages = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                sections = [(s["heading"], s["text"]) for s in obj["sections"]]
                pages.append(
                    RawPage(
                        title=obj["title"],
                        payload=sections,
                        source=PageSource.DUMP,
                        page_id=obj.get("page_id"),
                    )
                )
            except (KeyError, TypeError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed dump record: {exc}") from exc
    return pages
