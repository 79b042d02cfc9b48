"""Embedding sets, attention records, and their on-disk formats.

The binary embedding format ("PEMB") is bit-exact and shared by trained and
externally produced vectors: magic, version u32 LE, dim u32 LE, count u64
LE, then per record a u16 LE id length, the UTF-8 id, and dim float32 LE
values.
"""
from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

PEMB_MAGIC = b"PEMB"
PEMB_VERSION = 1


class EmbeddingFormatError(ValueError):
    """Malformed embedding or attention payload."""


class UnsupportedVersionError(EmbeddingFormatError):
    """File written by a newer format version than this reader supports."""


class Provenance(str, Enum):
    TRAINED_W2V = "w2v"
    TRAINED_D2V = "d2v"
    EXTERNAL = "external"


class DatasetKind(str, Enum):
    POLITICAL = "political"
    BACKGROUND = "background"
    OTHER = "other"
    WHOLE_PAGE = "whole_page"


@dataclass
class EmbeddingSet:
    ids: tuple[str, ...]
    matrix: np.ndarray  # (N, dim) float32
    normalized: bool
    provenance: Provenance
    dataset_kind: Optional[DatasetKind] = None
    index: dict[str, int] = field(repr=False, default=None)

    def __post_init__(self) -> None:
        self.matrix = np.ascontiguousarray(self.matrix, dtype=np.float32)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.ids):
            raise EmbeddingFormatError("matrix shape does not match id count")
        if len(set(self.ids)) != len(self.ids):
            raise EmbeddingFormatError("duplicate ids in embedding set")
        if not np.isfinite(self.matrix).all():
            raise EmbeddingFormatError("non-finite vector entries")
        if self.index is None:
            self.index = {i: row for row, i in enumerate(self.ids)}
        if self.normalized:
            norms = np.linalg.norm(self.matrix.astype(np.float64), axis=1)
            if len(norms) and np.abs(norms - 1.0).max() > 1e-6:
                raise EmbeddingFormatError("normalized flag set but norms deviate from 1")

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, item: str) -> bool:
        return item in self.index

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def vector(self, item: str) -> np.ndarray:
        return self.matrix[self.index[item]]

    def normalize(self) -> "EmbeddingSet":
        if self.normalized:
            return self
        norms = np.linalg.norm(self.matrix.astype(np.float64), axis=1)
        if (norms == 0).any():
            zero = [self.ids[i] for i in np.flatnonzero(norms == 0)[:5]]
            raise ValueError(f"cannot normalize zero vectors (e.g. {zero})")
        matrix = (self.matrix.astype(np.float64) / norms[:, None]).astype(np.float32)
        return EmbeddingSet(
            ids=self.ids,
            matrix=matrix,
            normalized=True,
            provenance=self.provenance,
            dataset_kind=self.dataset_kind,
        )


def save_embedding_set(emb: EmbeddingSet, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(PEMB_MAGIC)
        fh.write(struct.pack("<IIQ", PEMB_VERSION, emb.dim, len(emb)))
        for i, item in enumerate(emb.ids):
            raw = item.encode("utf-8")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(emb.matrix[i].astype("<f4").tobytes())


def load_embedding_set(
    path: Union[str, Path],
    normalized: bool = False,
    provenance: Provenance = Provenance.EXTERNAL,
    dataset_kind: Optional[DatasetKind] = None,
) -> EmbeddingSet:
    data = Path(path).read_bytes()
    if data[:4] != PEMB_MAGIC:
        raise EmbeddingFormatError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < 20:
        raise EmbeddingFormatError(f"{path}: truncated header")
    version, dim, count = struct.unpack_from("<IIQ", data, 4)
    if version > PEMB_VERSION:
        raise UnsupportedVersionError(
            f"{path}: format version {version} is newer than supported {PEMB_VERSION}"
        )
    pos = 20
    ids = []
    rows = np.empty((count, dim), dtype=np.float32)
    vec_bytes = 4 * dim
    for i in range(count):
        if pos + 2 > len(data):
            raise EmbeddingFormatError(f"{path}: truncated at record {i}")
        (id_len,) = struct.unpack_from("<H", data, pos)
        pos += 2
        if pos + id_len + vec_bytes > len(data):
            raise EmbeddingFormatError(f"{path}: truncated at record {i}")
        ids.append(data[pos : pos + id_len].decode("utf-8"))
        pos += id_len
        rows[i] = np.frombuffer(data, dtype="<f4", count=dim, offset=pos)
        pos += vec_bytes
    if pos != len(data):
        raise EmbeddingFormatError(f"{path}: {len(data) - pos} trailing bytes")
    return EmbeddingSet(
        ids=tuple(ids),
        matrix=rows,
        normalized=normalized,
        provenance=provenance,
        dataset_kind=dataset_kind,
    )


@dataclass
class ExternalLoad:
    embeddings: EmbeddingSet
    orphans: list[str]  # ids that did not resolve against the corpus


def _load_vector_records(path: Path) -> tuple[list[str], np.ndarray]:
    """JSON Lines embedding records: {"id": str, "vector": [floats]}."""
    ids: list[str] = []
    vectors: list[list[float]] = []
    dim: Optional[int] = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                rid, vec = obj["id"], obj["vector"]
            except (KeyError, TypeError, json.JSONDecodeError) as exc:
                raise EmbeddingFormatError(f"{path}:{lineno}: bad record: {exc}") from exc
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: dim {len(vec)} differs from first record's {dim}"
                )
            if rid in ids:
                raise EmbeddingFormatError(f"{path}:{lineno}: duplicate id {rid!r}")
            ids.append(rid)
            vectors.append(vec)
    if not ids:
        raise EmbeddingFormatError(f"{path}: no records")
    return ids, np.asarray(vectors, dtype=np.float32)


def load_external_embeddings(
    manifest_path: Union[str, Path],
    corpus_ids: Optional[Sequence[str]] = None,
) -> ExternalLoad:
    """Load externally computed vectors via their JSON manifest.

    The manifest names the payload file (PEMB binary or JSON Lines), the
    dataset kind, and whether the vectors are already normalized. Ids that
    do not resolve against the corpus are reported, not dropped.
    """
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text("utf-8"))
    payload = manifest_path.parent / manifest["file"]
    kind = DatasetKind(manifest["dataset_kind"])
    normalized = bool(manifest.get("normalized", False))
    if payload.suffix == ".pemb":
        emb = load_embedding_set(
            payload, normalized=normalized, provenance=Provenance.EXTERNAL, dataset_kind=kind
        )
    else:
        ids, matrix = _load_vector_records(payload)
        emb = EmbeddingSet(
            ids=tuple(ids),
            matrix=matrix,
            normalized=normalized,
            provenance=Provenance.EXTERNAL,
            dataset_kind=kind,
        )
    orphans = []
    if corpus_ids is not None:
        known = set(corpus_ids)
        orphans = [i for i in emb.ids if i not in known]
    return ExternalLoad(embeddings=emb, orphans=orphans)


@dataclass(frozen=True)
class AttentionRecord:
    politician_id: str
    tokens: tuple[str, ...]
    scores: tuple[float, ...]
    layer_note: str = ""

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.scores):
            raise EmbeddingFormatError(
                f"{self.politician_id}: {len(self.tokens)} tokens vs "
                f"{len(self.scores)} scores"
            )
        for s in self.scores:
            if not math.isfinite(s) or s < 0:
                raise EmbeddingFormatError(
                    f"{self.politician_id}: scores must be finite and >= 0, got {s}"
                )


def load_attention_scores(path: Union[str, Path]) -> list[AttentionRecord]:
    """JSON Lines attention export: {"id", "tokens", "scores", "layer_note"}."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
                record = AttentionRecord(
                    politician_id=obj["id"],
                    tokens=tuple(obj["tokens"]),
                    scores=tuple(float(s) for s in obj["scores"]),
                    layer_note=obj.get("layer_note", ""),
                )
            except EmbeddingFormatError as exc:
                raise EmbeddingFormatError(f"{path}:{lineno}: {exc}") from exc
            except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
                raise EmbeddingFormatError(f"{path}:{lineno}: bad record: {exc}") from exc
            records.append(record)
    return records
