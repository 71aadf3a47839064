"""HTTP JSON facade over ingest, vocabulary browsing and search.

All endpoints live under /api/v1. Every non-2xx response body is one
error envelope: {"status", "code", "message", "details"?}. Search
responses are deterministic for a fixed repository state; nothing in a
body depends on time or randomness.

The serializer helpers double as the CLI's --json renderers so both
surfaces emit identical documents.
"""

from __future__ import annotations

from typing import Any, Literal

import httpx
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import ingest as ingest_mod
from .expansion import (
    EmptyQueryError,
    QueryOperator,
    UnknownConceptError,
    compile_query,
)
from .remote import RemoteConceptSource, RemoteLookupError, remote_lookup
from .repository import CollectionRecord, QUALITY_NAMES, Repository
from .search import (
    CollectionHit,
    QualityRange,
    RelationshipQuery,
    SearchResult,
    search_by_attribute_quality,
    search_by_collection_quality,
    search_by_concepts,
    search_by_relationship,
    suggest_concepts,
)
from .vocabulary import Concept, ConceptKey, VocabularyStore


class ApiException(Exception):
    def __init__(self, status: int, code: str, message: str, details: list[str] | None = None):
        self.status = status
        self.code = code
        self.message = message
        self.details = details
        super().__init__(message)


def error_body(status: int, code: str, message: str, details: list[str] | None = None) -> dict[str, Any]:
    body: dict[str, Any] = {"status": status, "code": code, "message": message}
    if details:
        body["details"] = details
    return body


# -- request bodies -------------------------------------------------------


class ConceptRef(BaseModel):
    model_config = ConfigDict(extra="forbid")
    code: str
    vocabulary: str

    @property
    def key(self) -> ConceptKey:
        return ConceptKey(self.code, self.vocabulary)


class ConceptSearchRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    seeds: list[ConceptRef]
    operator: Literal["AND", "OR"] = "OR"
    expansion: bool = True


class RelationshipSearchRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    vocabulary: str
    relationship: str
    attributing: ConceptRef


class CollectionQualityRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    characteristic: str
    min: float
    max: float


class AttributeQualityRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    concept: ConceptRef
    characteristic: str
    min: float
    max: float
    expansion: bool = False


# -- serializers (shared with the CLI) ------------------------------------


def concept_to_json(concept: Concept) -> dict[str, Any]:
    return {"code": concept.code, "vocabulary": concept.vocabulary, "name": concept.name}


def hit_to_json(hit: CollectionHit) -> dict[str, Any]:
    highlight = None
    if hit.highlight is not None:
        highlight = {
            "scope": hit.highlight.scope,
            "attribute": hit.highlight.attribute,
            "characteristic": hit.highlight.characteristic,
            "value": hit.highlight.value,
        }
    return {
        "biobank": hit.biobank,
        "name": hit.name,
        "matched_attributes": [
            {"attribute": attr, "concepts": [concept_to_json(c) for c in concepts]}
            for attr, concepts in hit.matched_attributes
        ],
        "highlight": highlight,
    }


def search_result_to_json(result: SearchResult) -> dict[str, Any]:
    return {
        "hits": [hit_to_json(h) for h in result.hits],
        "warnings": list(result.warnings),
    }


def collection_summary_to_json(record: CollectionRecord) -> dict[str, Any]:
    return {
        "biobank": record.biobank,
        "name": record.name,
        "description": record.description,
        "quality": {k: record.quality[k] for k in sorted(record.quality)},
        "attributes": len(record.attributes),
        "annotations": sum(len(a.annotations) for a in record.attributes),
    }


def collection_detail_to_json(record: CollectionRecord, store: VocabularyStore) -> dict[str, Any]:
    unresolved = []
    attributes = []
    for attr in record.attributes:
        concepts = []
        for key in sorted(attr.annotations):
            concept = store.resolve(key)
            if concept is None:
                unresolved.append({"code": key.code, "vocabulary": key.vocabulary})
                concepts.append(
                    {"code": key.code, "vocabulary": key.vocabulary, "name": None, "resolved": False}
                )
            else:
                concepts.append(dict(concept_to_json(concept), resolved=True))
        attributes.append(
            {
                "name": attr.name,
                "concepts": concepts,
                "quality": {k: attr.quality[k] for k in sorted(attr.quality)},
            }
        )
    return {
        "biobank": record.biobank,
        "name": record.name,
        "description": record.description,
        "quality": {k: record.quality[k] for k in sorted(record.quality)},
        "attributes": attributes,
        "unresolved": sorted(unresolved, key=lambda u: (u["vocabulary"], u["code"])),
    }


def ingest_report_to_json(report: ingest_mod.IngestReport) -> dict[str, Any]:
    return {
        "accepted_rows": report.accepted_rows,
        "collections_touched": report.collections_touched,
        "diagnostics": [
            {"line": d.line, "severity": d.severity, "message": d.message}
            for d in report.diagnostics
        ],
    }


def suggestions_to_json(ranked: list[tuple[Concept, int]]) -> dict[str, Any]:
    return {
        "suggestions": [
            dict(concept_to_json(concept), count=count) for concept, count in ranked
        ]
    }


def _quality_range(characteristic: str, lo: float, hi: float) -> QualityRange:
    try:
        return QualityRange(characteristic=characteristic, min=lo, max=hi)
    except ValueError as exc:
        raise ApiException(400, "invalid_range", str(exc))


# -- app factory -----------------------------------------------------------


def create_app(
    store: VocabularyStore,
    repo: Repository,
    remote_source: RemoteConceptSource | None = None,
    remote_transport: httpx.BaseTransport | None = None,
) -> FastAPI:
    remote_source = remote_source or RemoteConceptSource()
    app = FastAPI(title="collection metadata catalog", docs_url=None, redoc_url=None)

    # The browser console may be served from a different origin than the
    # API. Metadata only, no credentials, so a wide-open policy is fine.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiException)
    async def _api_exception(request: Request, exc: ApiException) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status,
            content=error_body(exc.status, exc.code, exc.message, exc.details),
        )

    @app.exception_handler(RequestValidationError)
    async def _validation(request: Request, exc: RequestValidationError) -> JSONResponse:
        details = [
            ".".join(str(part) for part in err["loc"]) + ": " + err["msg"]
            for err in exc.errors()
        ]
        return JSONResponse(
            status_code=400,
            content=error_body(400, "invalid_request", "request validation failed", details),
        )

    @app.exception_handler(StarletteHTTPException)
    async def _http_exception(request: Request, exc: StarletteHTTPException) -> JSONResponse:
        codes = {404: "not_found", 405: "method_not_allowed"}
        return JSONResponse(
            status_code=exc.status_code,
            content=error_body(
                exc.status_code, codes.get(exc.status_code, "http_error"), str(exc.detail)
            ),
        )

    @app.post("/api/v1/collections/import")
    async def import_collections(request: Request) -> dict[str, Any]:
        body = await request.body()
        try:
            report = ingest_mod.ingest_csv(body, store, repo)
        except ingest_mod.IngestError as exc:
            raise ApiException(400, "invalid_csv", str(exc))
        return ingest_report_to_json(report)

    @app.get("/api/v1/collections")
    def list_collections() -> dict[str, Any]:
        return {
            "collections": [
                collection_summary_to_json(r) for r in repo.list_collections()
            ]
        }

    @app.get("/api/v1/collections/{biobank}/{name}")
    def collection_detail(biobank: str, name: str) -> dict[str, Any]:
        record = repo.get(biobank, name)
        if record is None:
            raise ApiException(404, "not_found", f"no collection ({biobank}, {name})")
        return collection_detail_to_json(record, store)

    @app.post("/api/v1/search/concepts")
    def concepts_search(body: ConceptSearchRequest) -> dict[str, Any]:
        try:
            plan = compile_query(
                [ref.key for ref in body.seeds],
                QueryOperator[body.operator],
                store,
                expansion=body.expansion,
            )
        except EmptyQueryError:
            raise ApiException(400, "empty_query", "seeds must contain at least one concept")
        except UnknownConceptError as exc:
            raise ApiException(
                400,
                "unknown_concept",
                str(exc),
                details=[f"({exc.key.code}, {exc.key.vocabulary})"],
            )
        return search_result_to_json(search_by_concepts(plan, repo, store))

    @app.post("/api/v1/search/relationship")
    def relationship_search(body: RelationshipSearchRequest) -> dict[str, Any]:
        try:
            query = RelationshipQuery(
                vocabulary=body.vocabulary,
                relationship=body.relationship,
                attributing=body.attributing.key,
            )
        except ValueError as exc:
            raise ApiException(400, "invalid_relationship", str(exc))
        return search_result_to_json(search_by_relationship(query, repo, store))

    @app.post("/api/v1/search/quality/collection")
    def collection_quality_search(body: CollectionQualityRequest) -> dict[str, Any]:
        quality_range = _quality_range(body.characteristic, body.min, body.max)
        return search_result_to_json(search_by_collection_quality(quality_range, repo))

    @app.post("/api/v1/search/quality/attribute")
    def attribute_quality_search(body: AttributeQualityRequest) -> dict[str, Any]:
        quality_range = _quality_range(body.characteristic, body.min, body.max)
        if store.resolve(body.concept.key) is None:
            raise ApiException(
                400,
                "unknown_concept",
                f"unknown concept ({body.concept.code}, {body.concept.vocabulary})",
            )
        return search_result_to_json(
            search_by_attribute_quality(
                body.concept.key, quality_range, repo, store, expansion=body.expansion
            )
        )

    @app.get("/api/v1/concepts/suggest")
    def suggest(q: str = "", limit: int = 10) -> dict[str, Any]:
        if limit < 1:
            raise ApiException(400, "invalid_request", "limit must be >= 1")
        return suggestions_to_json(suggest_concepts(q, limit, repo, store))

    @app.get("/api/v1/vocabularies")
    def vocabularies() -> dict[str, Any]:
        return {
            "vocabularies": [
                {"id": vocab, "concepts": count}
                for vocab, count in store.vocabularies().items()
            ]
        }

    @app.get("/api/v1/vocabularies/{vocabulary}/relationships")
    def vocabulary_relationships(vocabulary: str) -> dict[str, Any]:
        return {"relationships": sorted(store.list_relationships(vocabulary))}

    @app.get("/api/v1/vocabularies/{vocabulary}/relationships/{relationship}/attributing-concepts")
    def attributing_concepts(vocabulary: str, relationship: str) -> dict[str, Any]:
        concepts = store.attributing_concepts(vocabulary, relationship)
        return {
            "concepts": [
                concept_to_json(c)
                for c in sorted(concepts, key=lambda c: (c.vocabulary, c.code))
            ]
        }

    @app.get("/api/v1/health")
    def health() -> dict[str, Any]:
        return {
            "status": "ok",
            "concepts": store.concept_count,
            "vocabularies": len(store.vocabularies()),
            "collections": len(repo.state.collections),
            "annotations": repo.annotation_count(),
        }

    @app.get("/api/v1/remote/concepts")
    def remote_concepts(q: str = "") -> dict[str, Any]:
        try:
            candidates = remote_lookup(q, remote_source, transport=remote_transport)
        except RemoteLookupError as exc:
            raise ApiException(503, exc.code, str(exc))
        return {
            "candidates": [
                {
                    "code": c.code,
                    "vocabulary": c.vocabulary,
                    "name": c.name,
                    "remote_id": c.remote_id,
                }
                for c in candidates
            ]
        }

    return app
