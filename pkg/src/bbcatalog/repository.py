"""Collection metadata repository.

Holds collection records keyed by (biobank, collection name), each with
attribute records, concept annotations and quality characteristics, plus
an inverted index from concept key to the attributes it annotates.

Writers (imports, snapshot restores) build a complete new state off to
the side and publish it with a single reference swap under a lock, so
readers never observe a half-applied import and never block each other.
"""

from __future__ import annotations

import enum
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .vocabulary import ConceptKey, VocabularyStore

class QualityCharacteristic(enum.Enum):
    COMPLETENESS = "completeness"
    ACCURACY = "accuracy"
    RELIABILITY = "reliability"
    TIMELINESS = "timeliness"
    CONSISTENCY = "consistency"


QUALITY_NAMES = tuple(q.value for q in QualityCharacteristic)

CollectionKey = tuple[str, str]  # (biobank, collection name)


class SnapshotError(Exception):
    """Snapshot content failed validation; message carries the position."""


def validate_quality(values: dict[str, float], where: str) -> dict[str, float]:
    """Check names against the fixed characteristic set and ranges against [0, 1]."""
    for name, value in values.items():
        if name not in QUALITY_NAMES:
            raise SnapshotError(f"{where}: unknown quality characteristic {name!r}")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SnapshotError(f"{where}.{name}: expected a number")
        if not 0.0 <= value <= 1.0:
            raise SnapshotError(f"{where}.{name}: {value} outside [0, 1]")
    return {name: float(values[name]) for name in QUALITY_NAMES if name in values}


@dataclass(frozen=True)
class AttributeRecord:
    name: str
    annotations: frozenset[ConceptKey] = frozenset()
    quality: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class CollectionRecord:
    biobank: str
    name: str
    description: str = ""
    attributes: tuple[AttributeRecord, ...] = ()
    quality: dict[str, float] = field(default_factory=dict)

    @property
    def key(self) -> CollectionKey:
        return (self.biobank, self.name)

    def attribute(self, name: str) -> AttributeRecord | None:
        for attr in self.attributes:
            if attr.name == name:
                return attr
        return None


@dataclass(frozen=True)
class RepositoryState:
    collections: dict[CollectionKey, CollectionRecord]
    # concept key -> {(collection key, attribute name)}, resolved keys only
    concept_index: dict[ConceptKey, frozenset[tuple[CollectionKey, str]]]


def build_concept_index(
    collections: dict[CollectionKey, CollectionRecord], store: VocabularyStore
) -> dict[ConceptKey, frozenset[tuple[CollectionKey, str]]]:
    """Recompute the inverted index; annotations that do not resolve stay out."""
    index: dict[ConceptKey, set[tuple[CollectionKey, str]]] = {}
    for key, record in collections.items():
        for attr in record.attributes:
            for annotation in attr.annotations:
                if store.resolve(annotation) is None:
                    continue
                index.setdefault(annotation, set()).add((key, attr.name))
    return {k: frozenset(v) for k, v in index.items()}


class Repository:
    """Thread-safe collection store over a fixed vocabulary."""

    def __init__(self, store: VocabularyStore):
        self.store = store
        self._write_lock = threading.Lock()
        self._state = RepositoryState(collections={}, concept_index={})

    # -- reads ----------------------------------------------------------

    @property
    def state(self) -> RepositoryState:
        return self._state

    def get(self, biobank: str, name: str) -> CollectionRecord | None:
        return self._state.collections.get((biobank, name))

    def list_collections(self) -> list[CollectionRecord]:
        state = self._state
        return [state.collections[k] for k in sorted(state.collections)]

    def annotation_count(self) -> int:
        """Total (attribute, concept) annotation pairs, resolved or not."""
        return sum(
            len(attr.annotations)
            for record in self._state.collections.values()
            for attr in record.attributes
        )

    def collections_for_concepts(
        self, concepts: Iterable[ConceptKey]
    ) -> dict[CollectionKey, dict[str, set[ConceptKey]]]:
        """Collections annotated by any of the given concepts, with evidence.

        Returns collection key -> attribute name -> the matched concept
        keys on that attribute. Walks the inverted index, so unresolved
        annotations never match.
        """
        state = self._state
        matches: dict[CollectionKey, dict[str, set[ConceptKey]]] = {}
        for concept in concepts:
            key = ConceptKey(*concept)
            for coll_key, attr_name in state.concept_index.get(key, ()):
                matches.setdefault(coll_key, {}).setdefault(attr_name, set()).add(key)
        return matches

    def unresolved_annotations(self, record: CollectionRecord) -> set[ConceptKey]:
        return {
            annotation
            for attr in record.attributes
            for annotation in attr.annotations
            if self.store.resolve(annotation) is None
        }

    # -- writes ---------------------------------------------------------

    def upsert(self, record: CollectionRecord) -> str:
        """Insert or whole-record replace; returns "created" or "replaced"."""
        outcome, = self.upsert_many([record])
        return outcome

    def upsert_many(self, records: Iterable[CollectionRecord]) -> list[str]:
        """Apply several upserts as one atomic state transition."""
        with self._write_lock:
            collections = dict(self._state.collections)
            outcomes = []
            for record in records:
                outcomes.append("replaced" if record.key in collections else "created")
                collections[record.key] = record
            self._state = RepositoryState(
                collections=collections,
                concept_index=build_concept_index(collections, self.store),
            )
        return outcomes

    def replace_all(self, records: Iterable[CollectionRecord]) -> None:
        """Swap in an entirely new collection set (snapshot restore)."""
        collections = {r.key: r for r in records}
        with self._write_lock:
            self._state = RepositoryState(
                collections=collections,
                concept_index=build_concept_index(collections, self.store),
            )

    # -- snapshots ------------------------------------------------------

    def export_snapshot(self) -> dict[str, Any]:
        state = self._state
        return {
            "collections": [
                _collection_to_json(state.collections[k])
                for k in sorted(state.collections)
            ]
        }

    def save(self, path: str | Path) -> None:
        text = json.dumps(self.export_snapshot(), indent=2, sort_keys=True)
        Path(path).write_text(text + "\n", encoding="utf-8")

    def import_snapshot(self, document: Any) -> int:
        """Validate and load a snapshot, replacing current contents.

        Raises :class:`SnapshotError` naming the offending position on any
        unknown field, missing field, wrong type or out-of-range value.
        """
        records = parse_snapshot(document)
        self.replace_all(records)
        return len(records)

    def load(self, path: str | Path) -> int:
        try:
            document = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SnapshotError(f"snapshot is not valid JSON: {exc}") from exc
        return self.import_snapshot(document)


# -- snapshot (de)serialization ------------------------------------------


def _collection_to_json(record: CollectionRecord) -> dict[str, Any]:
    return {
        "biobank": record.biobank,
        "name": record.name,
        "description": record.description,
        "quality": {k: record.quality[k] for k in sorted(record.quality)},
        "attributes": [
            {
                "name": attr.name,
                "concepts": [
                    {"code": a.code, "vocabulary": a.vocabulary}
                    for a in sorted(attr.annotations)
                ],
                "quality": {k: attr.quality[k] for k in sorted(attr.quality)},
            }
            for attr in record.attributes
        ],
    }


def _expect_object(value: Any, where: str, allowed: set[str]) -> dict[str, Any]:
    if not isinstance(value, dict):
        raise SnapshotError(f"{where}: expected an object")
    unknown = set(value) - allowed
    if unknown:
        raise SnapshotError(f"{where}: unknown field {sorted(unknown)[0]!r}")
    return value


def _expect_str(obj: dict[str, Any], field_name: str, where: str, required: bool = True) -> str:
    if field_name not in obj:
        if required:
            raise SnapshotError(f"{where}: missing field {field_name!r}")
        return ""
    value = obj[field_name]
    if not isinstance(value, str):
        raise SnapshotError(f"{where}.{field_name}: expected a string")
    return value


def parse_snapshot(document: Any) -> list[CollectionRecord]:
    top = _expect_object(document, "snapshot", {"collections"})
    if "collections" not in top:
        raise SnapshotError("snapshot: missing field 'collections'")
    collections = top["collections"]
    if not isinstance(collections, list):
        raise SnapshotError("snapshot.collections: expected an array")

    records: list[CollectionRecord] = []
    seen: set[CollectionKey] = set()
    for i, item in enumerate(collections):
        where = f"collections[{i}]"
        obj = _expect_object(
            item, where, {"biobank", "name", "description", "quality", "attributes"}
        )
        biobank = _expect_str(obj, "biobank", where)
        name = _expect_str(obj, "name", where)
        if not biobank or not name:
            raise SnapshotError(f"{where}: biobank and name must be non-empty")
        if (biobank, name) in seen:
            raise SnapshotError(f"{where}: duplicate collection ({biobank}, {name})")
        seen.add((biobank, name))
        description = _expect_str(obj, "description", where, required=False)

        quality_raw = obj.get("quality", {})
        if not isinstance(quality_raw, dict):
            raise SnapshotError(f"{where}.quality: expected an object")
        quality = validate_quality(quality_raw, f"{where}.quality")

        attributes: list[AttributeRecord] = []
        attr_names: set[str] = set()
        raw_attributes = obj.get("attributes", [])
        if not isinstance(raw_attributes, list):
            raise SnapshotError(f"{where}.attributes: expected an array")
        for j, attr_item in enumerate(raw_attributes):
            attr_where = f"{where}.attributes[{j}]"
            attr_obj = _expect_object(
                attr_item, attr_where, {"name", "quality", "concepts"}
            )
            attr_name = _expect_str(attr_obj, "name", attr_where)
            if not attr_name:
                raise SnapshotError(f"{attr_where}: name must be non-empty")
            if attr_name in attr_names:
                raise SnapshotError(f"{attr_where}: duplicate attribute {attr_name!r}")
            attr_names.add(attr_name)
            attr_quality_raw = attr_obj.get("quality", {})
            if not isinstance(attr_quality_raw, dict):
                raise SnapshotError(f"{attr_where}.quality: expected an object")
            attr_quality = validate_quality(attr_quality_raw, f"{attr_where}.quality")

            annotations: set[ConceptKey] = set()
            raw_annotations = attr_obj.get("concepts", [])
            if not isinstance(raw_annotations, list):
                raise SnapshotError(f"{attr_where}.concepts: expected an array")
            for k, raw in enumerate(raw_annotations):
                ann_where = f"{attr_where}.concepts[{k}]"
                ann = _expect_object(raw, ann_where, {"code", "vocabulary"})
                code = _expect_str(ann, "code", ann_where)
                vocabulary = _expect_str(ann, "vocabulary", ann_where)
                if not code or not vocabulary:
                    raise SnapshotError(f"{ann_where}: code and vocabulary must be non-empty")
                annotations.add(ConceptKey(code, vocabulary))

            attributes.append(
                AttributeRecord(
                    name=attr_name,
                    annotations=frozenset(annotations),
                    quality=attr_quality,
                )
            )

        records.append(
            CollectionRecord(
                biobank=biobank,
                name=name,
                description=description,
                attributes=tuple(attributes),
                quality=quality,
            )
        )
    return records
