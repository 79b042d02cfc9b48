"""Read-only HTTP API over an immutable pipeline snapshot.

The snapshot directory is produced by the CLI stages; the service never
mutates it. Every endpoint is pure over the loaded snapshot, so identical
requests produce identical responses.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .ann import ANNIndex, load_index
from .corpus import Party, PartyKind, Politician, congress_years, DEFAULT_PHASES
from .embed.vectors import (
    AttentionRecord,
    DatasetKind,
    EmbeddingSet,
    Provenance,
    load_attention_scores,
    load_embedding_set,
)
from .polarize import (
    InsufficientPopulationError,
    attention_top_words,
    candidate_polarization,
    eligible_neighbors,
    word_neighbors,
)
from .store import load_corpus, politician_to_record

SNAPSHOT_ENV = "POLARISCOPE_SNAPSHOT"
POLITICIANS_CAP = 500

DATASETS = ("political", "background")
PROVENANCES = ("d2v", "external")
PARTY_TAGS = {"dem": PartyKind.DEMOCRATIC, "rep": PartyKind.REPUBLICAN}


class SnapshotError(RuntimeError):
    """Snapshot directory is missing a required artifact."""


@dataclass
class Snapshot:
    root: Path
    politicians: list[Politician]
    by_id: dict[str, Politician]
    party_of: dict[str, Party]
    indexes: dict[tuple[str, str], ANNIndex]  # (dataset, provenance)
    embeddings: dict[tuple[str, str], EmbeddingSet]
    word_sets: dict[tuple[str, int], EmbeddingSet]  # (party tag, phase)
    attention: dict[str, AttentionRecord] = field(default_factory=dict)
    manifest: dict = field(default_factory=dict)

    @classmethod
    def load(cls, root: Union[str, Path]) -> "Snapshot":
        root = Path(root)
        corpus_path = root / "corpus.jsonl"
        if not corpus_path.exists():
            raise SnapshotError(
                f"{root}: no corpus.jsonl; run the `ingest` stage first"
            )
        politicians = load_corpus(corpus_path)
        by_id = {p.id: p for p in politicians}
        indexes = {}
        embeddings = {}
        for pann in sorted((root / "indexes").glob("*.pann")) if (root / "indexes").exists() else []:
            dataset, provenance = pann.stem.split("_", 1)
            indexes[(dataset, provenance)] = load_index(pann)
        for pemb in sorted((root / "embeddings").glob("*.pemb")) if (root / "embeddings").exists() else []:
            dataset, provenance = pemb.stem.split("_", 1)
            embeddings[(dataset, provenance)] = load_embedding_set(
                pemb,
                normalized=True,
                provenance=Provenance(provenance) if provenance in ("d2v", "external") else Provenance.EXTERNAL,
                dataset_kind=DatasetKind(dataset),
            )
        word_sets = {}
        for pemb in sorted((root / "words").glob("*_phase*.pemb")) if (root / "words").exists() else []:
            party_tag, phase_part = pemb.stem.split("_phase")
            word_sets[(party_tag, int(phase_part))] = load_embedding_set(pemb, normalized=True)
        attention = {}
        attention_path = root / "attention.jsonl"
        if attention_path.exists():
            for record in load_attention_scores(attention_path):
                attention[record.politician_id] = record
        manifest = {}
        manifest_path = root / "manifest.json"
        if manifest_path.exists():
            manifest = json.loads(manifest_path.read_text("utf-8"))
        return cls(
            root=root,
            politicians=politicians,
            by_id=by_id,
            party_of={p.id: p.party for p in politicians},
            indexes=indexes,
            embeddings=embeddings,
            word_sets=word_sets,
            attention=attention,
            manifest=manifest,
        )


def default_snapshot_dir() -> Optional[str]:
    return os.environ.get(SNAPSHOT_ENV)


class APIError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def _party_tag(party: Party) -> str:
    if party.kind is PartyKind.DEMOCRATIC:
        return "dem"
    if party.kind is PartyKind.REPUBLICAN:
        return "rep"
    return "other"


def _politician_summary(p: Politician) -> dict:
    return {
        "id": p.id,
        "display_name": p.display_name,
        "party": p.party.kind.value,
        "party_label": p.party.other_label,
        "chamber": p.chamber.value,
        "terms": sorted(p.terms),
        "phases": sorted(p.phases),
    }


def create_app(snapshot: Snapshot, allow_origin: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="polariscope", version="0.1.0", docs_url="/api/docs")

    if allow_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[allow_origin],
            allow_methods=["GET"],
            allow_headers=["*"],
        )

    @app.exception_handler(APIError)
    async def api_error_handler(request: Request, exc: APIError):
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        # Spec contract: malformed query parameters are a 400, not a 422.
        return JSONResponse(
            status_code=400,
            content={"code": "bad_param", "message": str(exc.errors()[:3])},
        )

    def get_politician(politician_id: str) -> Politician:
        p = snapshot.by_id.get(politician_id)
        if p is None:
            raise APIError(404, "unknown_id", f"no politician {politician_id!r}")
        return p

    def get_index(dataset: str, provenance: str) -> ANNIndex:
        index = snapshot.indexes.get((dataset, provenance))
        if index is None:
            raise APIError(
                404,
                "no_index",
                f"no index for dataset={dataset} provenance={provenance}; "
                f"available: {sorted(snapshot.indexes)}",
            )
        return index

    @app.get("/api/politicians")
    def list_politicians(
        q: str = Query("", max_length=100),
        party: str = Query("", pattern="^(dem|rep|other)?$"),
        phase: int = Query(0, ge=0, le=4),
    ):
        out = []
        needle = q.strip().lower()
        for p in snapshot.politicians:
            if needle and needle not in p.display_name.lower() and needle not in p.id:
                continue
            if party and _party_tag(p.party) != party:
                continue
            if phase and phase not in p.phases:
                continue
            out.append(_politician_summary(p))
            if len(out) >= POLITICIANS_CAP:
                break
        return out

    @app.get("/api/politicians/{politician_id}")
    def politician_detail(politician_id: str):
        p = get_politician(politician_id)
        record = politician_to_record(p)
        record["has_attention"] = p.id in snapshot.attention
        return record

    @app.get("/api/neighbors/{politician_id}")
    def neighbors(
        politician_id: str,
        dataset: str = Query("political", pattern="^(political|background)$"),
        k: int = Query(20, ge=1, le=1000),
        provenance: str = Query("d2v", pattern="^(d2v|external)$"),
    ):
        p = get_politician(politician_id)
        index = get_index(dataset, provenance)
        if politician_id not in index._index:
            raise APIError(404, "unknown_id", f"{politician_id!r} not in the {dataset} index")
        try:
            found = eligible_neighbors(index, politician_id, k, snapshot.party_of)
        except InsufficientPopulationError as exc:
            raise APIError(409, "insufficient_population", str(exc))
        return [
            {
                "rank": rank,
                "id": n.id,
                "display_name": snapshot.by_id[n.id].display_name,
                "party": snapshot.party_of[n.id].kind.value,
                "score": n.score,
            }
            for rank, n in enumerate(found, 1)
        ]

    @app.get("/api/polarization/{politician_id}")
    def polarization(
        politician_id: str,
        dataset: str = Query("political", pattern="^(political|background)$"),
        k: int = Query(20, ge=1, le=1000),
        provenance: str = Query("d2v", pattern="^(d2v|external)$"),
    ):
        p = get_politician(politician_id)
        index = get_index(dataset, provenance)
        if politician_id not in index._index:
            raise APIError(404, "unknown_id", f"{politician_id!r} not in the {dataset} index")
        try:
            score = candidate_polarization(
                index, politician_id, k, snapshot.party_of, dataset_kind=dataset
            )
        except InsufficientPopulationError as exc:
            raise APIError(409, "insufficient_population", str(exc))
        return {
            "id": score.politician_id,
            "dataset": dataset,
            "provenance": provenance,
            "k": score.k,
            "party": snapshot.party_of[politician_id].kind.value,
            "neighbor_ids": list(score.neighbor_ids),
            "neighbor_parties": list(score.neighbor_parties),
            "neighbor_scores": list(score.neighbor_scores),
            "same_party_count": score.same_party_count,
            "ratio": score.ratio,
            "democrat_fraction": score.democrat_fraction,
            "baseline": score.baseline,
        }

    @app.get("/api/words/{word}/neighbors")
    def word_neighbor_list(
        word: str,
        party: str = Query(..., pattern="^(dem|rep)$"),
        phase: int = Query(..., ge=1, le=4),
        k: int = Query(15, ge=1, le=200),
    ):
        emb = snapshot.word_sets.get((party, phase))
        if emb is None:
            raise APIError(
                404,
                "no_model",
                f"no word model for party={party} phase={phase}; "
                f"available: {sorted(snapshot.word_sets)}",
            )
        token = word.lower()
        if token not in emb:
            raise APIError(404, "unknown_word", f"{word!r} not in the {party}/phase{phase} vocabulary")
        found = word_neighbors(emb, token, min(k, len(emb)))
        return {
            "word": token,
            "party": party,
            "phase": phase,
            "neighbors": [
                {"rank": rank, "token": n.id, "score": n.score}
                for rank, n in enumerate(found, 1)
            ],
        }

    @app.get("/api/attention/{politician_id}")
    def attention(
        politician_id: str,
        percentile: float = Query(90.0, gt=0.0, lt=100.0),
    ):
        get_politician(politician_id)
        record = snapshot.attention.get(politician_id)
        if record is None:
            raise APIError(
                404, "no_attention", f"no attention data loaded for {politician_id!r}"
            )
        top = attention_top_words(record, percentile)
        selected_tokens = {tok for tok, _ in top.selected}
        return {
            "id": politician_id,
            "percentile": percentile,
            "threshold": top.threshold,
            "layer_note": record.layer_note,
            "tokens": [
                {
                    "token": tok,
                    "score": score,
                    "special": tok.startswith("<"),
                    "selected": tok in selected_tokens and not tok.startswith("<"),
                }
                for tok, score in zip(record.tokens, record.scores)
            ],
            "selected": [{"token": tok, "score": score} for tok, score in top.selected],
        }

    @app.get("/api/meta")
    def meta():
        party_counts: dict[str, int] = {}
        for p in snapshot.politicians:
            party_counts[p.party.kind.value] = party_counts.get(p.party.kind.value, 0) + 1
        return {
            "politicians": len(snapshot.politicians),
            "by_party": party_counts,
            "phases": [
                {
                    "index": ph.index,
                    "congress_range": list(ph.congress_range),
                    "years": [
                        congress_years(ph.congress_range[0])[0],
                        congress_years(ph.congress_range[1])[1],
                    ],
                }
                for ph in DEFAULT_PHASES
            ],
            "datasets": sorted({d for d, _ in snapshot.indexes}),
            "provenances": sorted({p for _, p in snapshot.indexes}),
            "word_cells": sorted([list(c) for c in snapshot.word_sets]),
            "attention_ids": sorted(snapshot.attention),
            "default_k": 20,
        }

    return app
