"""Federated biobank collection metadata catalog.

Loads a CDM-style concept vocabulary, stores concept-annotated
collection metadata with quality values, and answers expanded concept
searches, relationship searches and quality-range searches over it.
"""

from .diagnostics import Diagnostic
from .expansion import ConceptClosure, QueryOperator, QueryPlan, compile_query, expand
from .ingest import IngestReport, ingest_csv, parse_annotations, serialize_records, stage
from .repository import (
    AttributeRecord,
    CollectionRecord,
    QualityCharacteristic,
    Repository,
)
from .search import (
    CollectionHit,
    QualityRange,
    RelationshipQuery,
    SearchResult,
    refine_by_quality,
    search_by_attribute_quality,
    search_by_collection_quality,
    search_by_concepts,
    search_by_relationship,
    suggest_concepts,
)
from .vocabulary import Concept, ConceptKey, VocabularyStore, load_vocabulary

__all__ = [
    "AttributeRecord",
    "CollectionHit",
    "CollectionRecord",
    "Concept",
    "ConceptClosure",
    "ConceptKey",
    "Diagnostic",
    "IngestReport",
    "QualityCharacteristic",
    "QualityRange",
    "QueryOperator",
    "QueryPlan",
    "RelationshipQuery",
    "Repository",
    "SearchResult",
    "VocabularyStore",
    "compile_query",
    "expand",
    "ingest_csv",
    "load_vocabulary",
    "parse_annotations",
    "refine_by_quality",
    "search_by_attribute_quality",
    "search_by_collection_quality",
    "search_by_concepts",
    "search_by_relationship",
    "serialize_records",
    "stage",
    "suggest_concepts",
]

__version__ = "0.1.0"
