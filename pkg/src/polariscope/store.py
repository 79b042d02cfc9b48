"""Durable persistence: corpus JSON Lines, run manifests, and re-exports of
the binary embedding/index codecs.

Corpus files are canonical JSON (sorted keys, no insignificant whitespace)
with a version header line and an optional SHA-256 sidecar that is verified
on load. Loaders reject malformed input with line/field diagnostics instead
of best-effort parsing.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

from .ann import ANNIndex, load_index, save_index  # noqa: F401  (re-export)
from .corpus import (
    CategoryBundle,
    Chamber,
    CleanBundle,
    Party,
    PartyKind,
    Politician,
)
from .embed.vectors import (  # noqa: F401  (re-export)
    EmbeddingSet,
    load_embedding_set,
    save_embedding_set,
)

CORPUS_FORMAT = "polariscope-corpus"
CORPUS_VERSION = 1


class CorpusLoadError(ValueError):
    """Schema violation, with the offending line and field in the message."""


class IntegrityError(ValueError):
    """Checksum sidecar does not match the file contents."""


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def politician_to_record(p: Politician) -> dict:
    record = {
        "id": p.id,
        "display_name": p.display_name,
        "party": {"kind": p.party.kind.value},
        "chamber": p.chamber.value,
        "terms": sorted(p.terms),
        "phases": sorted(p.phases),
        "sections": [{"heading": h, "text": t} for h, t in p.sections.items()],
    }
    if p.party.other_label is not None:
        record["party"]["other_label"] = p.party.other_label
    if p.categories is not None:
        record["categories"] = {
            "background": p.categories.background,
            "political": p.categories.political,
            "other": p.categories.other,
        }
    if p.clean is not None:
        record["clean"] = {
            "background": p.clean.background,
            "political": p.clean.political,
            "other": p.clean.other,
            "policy_id": p.clean.policy_id,
        }
    return record


def _require(obj: dict, key: str, kind, line: int):
    if key not in obj:
        raise CorpusLoadError(f"line {line}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise CorpusLoadError(
            f"line {line}: field {key!r} must be {kind.__name__}, got {type(value).__name__}"
        )
    return value


def politician_from_record(obj: dict, line: int = 0) -> Politician:
    pid = _require(obj, "id", str, line)
    name = _require(obj, "display_name", str, line)
    party_obj = _require(obj, "party", dict, line)
    try:
        kind = PartyKind(_require(party_obj, "kind", str, line))
    except ValueError as exc:
        raise CorpusLoadError(f"line {line}: field 'party.kind': {exc}") from exc
    try:
        party = Party(kind, party_obj.get("other_label"))
        chamber = Chamber(_require(obj, "chamber", str, line))
    except ValueError as exc:
        raise CorpusLoadError(f"line {line}: {exc}") from exc
    terms = _require(obj, "terms", list, line)
    phases = _require(obj, "phases", list, line)
    sections_raw = _require(obj, "sections", list, line)
    sections = {}
    for i, s in enumerate(sections_raw):
        if not isinstance(s, dict) or "heading" not in s or "text" not in s:
            raise CorpusLoadError(f"line {line}: sections[{i}] needs heading and text")
        sections[s["heading"]] = s["text"]
    categories = None
    if "categories" in obj and obj["categories"] is not None:
        c = _require(obj, "categories", dict, line)
        try:
            categories = CategoryBundle(
                background=c["background"], political=c["political"], other=c["other"]
            )
        except KeyError as exc:
            raise CorpusLoadError(f"line {line}: categories missing {exc}") from exc
    clean = None
    if "clean" in obj and obj["clean"] is not None:
        c = _require(obj, "clean", dict, line)
        try:
            clean = CleanBundle(
                background=c["background"],
                political=c["political"],
                other=c["other"],
                policy_id=c["policy_id"],
            )
        except KeyError as exc:
            raise CorpusLoadError(f"line {line}: clean missing {exc}") from exc
    return Politician(
        id=pid,
        display_name=name,
        party=party,
        chamber=chamber,
        terms=frozenset(int(t) for t in terms),
        phases=frozenset(int(p) for p in phases),
        sections=sections,
        categories=categories,
        clean=clean,
    )


def save_corpus(corpus: Iterable[Politician], path: Union[str, Path]) -> str:
    """Write the corpus as versioned JSON Lines; returns the SHA-256 checksum."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [_canonical({"format": CORPUS_FORMAT, "version": CORPUS_VERSION})]
    lines.extend(_canonical(politician_to_record(p)) for p in corpus)
    payload = ("\n".join(lines) + "\n").encode("utf-8")
    checksum = hashlib.sha256(payload).hexdigest()
    path.write_bytes(payload)
    Path(str(path) + ".sha256").write_text(checksum + "\n", "utf-8")
    return checksum


def load_corpus(path: Union[str, Path]) -> list[Politician]:
    """Load and schema-validate a corpus file, verifying its checksum sidecar."""
    path = Path(path)
    payload = path.read_bytes()
    sidecar = Path(str(path) + ".sha256")
    if sidecar.exists():
        expected = sidecar.read_text("utf-8").strip()
        actual = hashlib.sha256(payload).hexdigest()
        if actual != expected:
            raise IntegrityError(
                f"{path}: checksum mismatch (expected {expected[:12]}..., got {actual[:12]}...)"
            )
    lines = payload.decode("utf-8").splitlines()
    if not lines:
        raise CorpusLoadError(f"{path}: empty file (missing version header)")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise CorpusLoadError(f"{path}: line 1: bad header: {exc}") from exc
    if header.get("format") != CORPUS_FORMAT:
        raise CorpusLoadError(f"{path}: line 1: not a corpus file ({header!r})")
    if header.get("version", 0) > CORPUS_VERSION:
        raise CorpusLoadError(
            f"{path}: unsupported corpus version {header.get('version')}"
        )
    corpus = []
    seen: set[str] = set()
    for lineno, raw in enumerate(lines[1:], 2):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise CorpusLoadError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
        politician = politician_from_record(obj, lineno)
        if politician.id in seen:
            raise CorpusLoadError(f"{path}: line {lineno}: duplicate id {politician.id!r}")
        seen.add(politician.id)
        corpus.append(politician)
    return corpus


# --------------------------------------------------------------------------
# Run manifest
# --------------------------------------------------------------------------

MANIFEST_NAME = "manifest.json"


@dataclass
class RunManifest:
    """Stage fingerprints for pipeline caching: rerun with identical inputs
    is declared cache-valid and skipped."""

    path: Path
    stages: dict[str, dict] = field(default_factory=dict)
    tool_version: str = ""

    @classmethod
    def load(cls, directory: Union[str, Path]) -> "RunManifest":
        from . import __version__

        path = Path(directory) / MANIFEST_NAME
        stages = {}
        if path.exists():
            data = json.loads(path.read_text("utf-8"))
            stages = data.get("stages", {})
        return cls(path=path, stages=stages, tool_version=__version__)

    def save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(
            json.dumps(
                {"tool_version": self.tool_version, "stages": self.stages},
                indent=2,
                sort_keys=True,
            )
            + "\n",
            "utf-8",
        )

    def is_current(self, stage: str, fingerprint: str) -> bool:
        entry = self.stages.get(stage)
        if entry is None or entry.get("fingerprint") != fingerprint:
            return False
        return all(Path(p).exists() for p in entry.get("outputs", []))

    def record(self, stage: str, fingerprint: str, outputs: Iterable[Union[str, Path]]) -> None:
        self.stages[stage] = {
            "fingerprint": fingerprint,
            "completed_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            "outputs": [str(p) for p in outputs],
        }
        self.save()


def fingerprint_of(*parts: object) -> str:
    """Stable fingerprint of stage inputs (configs, file checksums, params)."""
    payload = _canonical([str(p) for p in parts])
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def file_checksum(path: Union[str, Path]) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]
