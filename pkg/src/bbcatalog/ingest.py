"""Annotation CSV parsing, staging and repository commit.

The file format is one comma-separated table with the header

    biobank,collection,attribute,concept_code,vocabulary,completeness,accuracy,reliability,timeliness,consistency

Each data row either annotates an attribute with a concept, supplies
quality values (attribute-level when the attribute cell is filled,
collection-level when it is empty), or both. A special row with
concept_code "_description" and one extra trailing cell sets the
collection description. Quality cells accept fractions ("0.85") or
percents ("85%").
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .diagnostics import Diagnostic
from .repository import (
    AttributeRecord,
    CollectionKey,
    CollectionRecord,
    QUALITY_NAMES,
    Repository,
)
from .vocabulary import ConceptKey, VocabularyStore

ANNOTATION_HEADER = (
    "biobank",
    "collection",
    "attribute",
    "concept_code",
    "vocabulary",
) + QUALITY_NAMES

DESCRIPTION_MARKER = "_description"


class IngestError(Exception):
    """Fatal problem with the file as a whole (encoding, header)."""


@dataclass(frozen=True)
class AnnotationRow:
    biobank: str
    collection: str
    attribute: str  # empty for collection-level rows
    concept_code: str
    vocabulary: str
    quality: dict[str, float] = field(default_factory=dict)
    description: str | None = None
    line: int = 0

    @property
    def concept(self) -> ConceptKey | None:
        if self.concept_code and self.concept_code != DESCRIPTION_MARKER:
            return ConceptKey(self.concept_code, self.vocabulary)
        return None


@dataclass
class IngestReport:
    accepted_rows: int
    collections_touched: int
    diagnostics: list[Diagnostic]


def _parse_quality_cell(cell: str) -> float:
    text = cell.strip()
    if text.endswith("%"):
        value = float(text[:-1]) / 100.0
    else:
        value = float(text)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{cell!r} outside [0, 1]")
    return value


def parse_annotations(source: str | bytes) -> tuple[list[AnnotationRow], list[Diagnostic]]:
    """Parse annotation CSV content into rows plus per-line diagnostics.

    Rows that violate the format are skipped and reported as errors;
    a bad header or undecodable input raises :class:`IngestError`.
    """
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise IngestError(f"annotation file is not valid UTF-8: {exc}") from exc
    source = source.lstrip("﻿")

    reader = csv.reader(io.StringIO(source))
    try:
        header = next(reader)
    except StopIteration:
        raise IngestError("annotation file is empty, expected header")
    header = [cell.strip() for cell in header]
    if tuple(header) != ANNOTATION_HEADER:
        raise IngestError(
            "bad header: expected " + ",".join(ANNOTATION_HEADER)
        )

    rows: list[AnnotationRow] = []
    diags: list[Diagnostic] = []
    for line, cells in enumerate(reader, start=2):
        if not cells or all(not c.strip() for c in cells):
            continue
        if len(cells) < len(ANNOTATION_HEADER):
            diags.append(
                Diagnostic(line, "error", f"expected {len(ANNOTATION_HEADER)} fields, got {len(cells)}")
            )
            continue
        biobank, collection, attribute, concept_code, vocabulary = (
            c.strip() for c in cells[:5]
        )
        if not biobank or not collection:
            diags.append(Diagnostic(line, "error", "biobank and collection must be non-empty"))
            continue

        trailing = cells[len(ANNOTATION_HEADER):]
        if concept_code == DESCRIPTION_MARKER:
            problem = None
            if attribute:
                problem = "description rows must leave the attribute cell empty"
            elif vocabulary:
                problem = "description rows must leave the vocabulary cell empty"
            elif any(c.strip() for c in cells[5 : len(ANNOTATION_HEADER)]):
                problem = "description rows carry no quality values"
            elif len(trailing) != 1:
                problem = "description rows need exactly one trailing description cell"
            if problem:
                diags.append(Diagnostic(line, "error", problem))
                continue
            rows.append(
                AnnotationRow(
                    biobank=biobank,
                    collection=collection,
                    attribute="",
                    concept_code=DESCRIPTION_MARKER,
                    vocabulary="",
                    description=trailing[0],
                    line=line,
                )
            )
            continue

        if trailing and any(c.strip() for c in trailing):
            diags.append(Diagnostic(line, "error", "unexpected trailing field"))
            continue
        if bool(concept_code) != bool(vocabulary):
            diags.append(
                Diagnostic(line, "error", "concept_code and vocabulary must be supplied together")
            )
            continue
        if not attribute and concept_code:
            diags.append(
                Diagnostic(line, "error", "collection-level rows carry no concept fields")
            )
            continue

        quality: dict[str, float] = {}
        bad_cell = None
        for name, cell in zip(QUALITY_NAMES, cells[5 : len(ANNOTATION_HEADER)]):
            if not cell.strip():
                continue
            try:
                quality[name] = _parse_quality_cell(cell)
            except ValueError:
                bad_cell = f"bad {name} value {cell.strip()!r}"
                break
        if bad_cell:
            diags.append(Diagnostic(line, "error", bad_cell))
            continue

        if not concept_code and not quality:
            diags.append(Diagnostic(line, "error", "row carries no concept or quality data"))
            continue

        rows.append(
            AnnotationRow(
                biobank=biobank,
                collection=collection,
                attribute=attribute,
                concept_code=concept_code,
                vocabulary=vocabulary,
                quality=quality,
                line=line,
            )
        )
    return rows, diags


def stage(
    rows: list[AnnotationRow], store: VocabularyStore
) -> tuple[list[CollectionRecord], list[Diagnostic]]:
    """Group parsed rows into collection records.

    Concepts annotating the same attribute accumulate; a quality
    characteristic respecified with a different value keeps the last one
    and emits a warning. Concept keys that do not resolve in the store
    are staged anyway and reported as warnings.
    """
    diags: list[Diagnostic] = []
    order: list[CollectionKey] = []
    descriptions: dict[CollectionKey, str] = {}
    coll_quality: dict[CollectionKey, dict[str, float]] = {}
    attr_order: dict[CollectionKey, list[str]] = {}
    attr_concepts: dict[tuple[CollectionKey, str], set[ConceptKey]] = {}
    attr_quality: dict[tuple[CollectionKey, str], dict[str, float]] = {}

    def merge_quality(target: dict[str, float], row: AnnotationRow, scope: str) -> None:
        for name, value in row.quality.items():
            if name in target and target[name] != value:
                diags.append(
                    Diagnostic(
                        row.line,
                        "warning",
                        f"{scope}: {name} respecified ({target[name]} -> {value}), keeping the last value",
                    )
                )
            target[name] = value

    for row in rows:
        key = (row.biobank, row.collection)
        if key not in coll_quality:
            order.append(key)
            coll_quality[key] = {}
            attr_order[key] = []

        if row.description is not None:
            if key in descriptions and descriptions[key] != row.description:
                diags.append(
                    Diagnostic(row.line, "warning", f"{row.collection}: description respecified, keeping the last value")
                )
            descriptions[key] = row.description
            continue

        if not row.attribute:
            merge_quality(coll_quality[key], row, row.collection)
            continue

        attr_key = (key, row.attribute)
        if row.attribute not in attr_order[key]:
            attr_order[key].append(row.attribute)
            attr_concepts[attr_key] = set()
            attr_quality[attr_key] = {}
        if row.concept is not None:
            attr_concepts[attr_key].add(row.concept)
            if store.resolve(row.concept) is None:
                diags.append(
                    Diagnostic(
                        row.line,
                        "warning",
                        f"unresolved concept ({row.concept_code}, {row.vocabulary}) on {row.collection}.{row.attribute}",
                    )
                )
        merge_quality(attr_quality[attr_key], row, f"{row.collection}.{row.attribute}")

    records = []
    for key in order:
        attributes = tuple(
            AttributeRecord(
                name=name,
                annotations=frozenset(attr_concepts[(key, name)]),
                quality=attr_quality[(key, name)],
            )
            for name in attr_order[key]
        )
        records.append(
            CollectionRecord(
                biobank=key[0],
                name=key[1],
                description=descriptions.get(key, ""),
                attributes=attributes,
                quality=coll_quality[key],
            )
        )
    return records, diags


def _record_violation(record: CollectionRecord) -> str | None:
    if not record.biobank or not record.name:
        return "biobank and name must be non-empty"
    names = [a.name for a in record.attributes]
    if len(names) != len(set(names)):
        return "duplicate attribute names"
    holders = [(record.name, record.quality)] + [
        (f"{record.name}.{a.name}", a.quality) for a in record.attributes
    ]
    for where, quality in holders:
        for name, value in quality.items():
            if name not in QUALITY_NAMES:
                return f"{where}: unknown quality characteristic {name!r}"
            if not 0.0 <= value <= 1.0:
                return f"{where}: {name} value {value} outside [0, 1]"
    return None


def commit(
    records: list[CollectionRecord],
    repo: Repository,
    row_counts: dict[CollectionKey, int] | None = None,
) -> IngestReport:
    """Upsert staged records, skipping any that violate invariants.

    Valid records land in one atomic repository transition; each invalid
    one is dropped whole with an error diagnostic.
    """
    diags: list[Diagnostic] = []
    valid: list[CollectionRecord] = []
    for record in records:
        problem = _record_violation(record)
        if problem:
            diags.append(
                Diagnostic(None, "error", f"collection ({record.biobank}, {record.name}) rejected: {problem}")
            )
            continue
        valid.append(record)
    repo.upsert_many(valid)
    accepted = 0
    if row_counts:
        accepted = sum(row_counts.get(r.key, 0) for r in valid)
    return IngestReport(
        accepted_rows=accepted,
        collections_touched=len(valid),
        diagnostics=diags,
    )


def ingest_csv(source: str | bytes, store: VocabularyStore, repo: Repository) -> IngestReport:
    """Full pipeline: parse, stage, commit; diagnostics from every phase."""
    rows, parse_diags = parse_annotations(source)
    records, stage_diags = stage(rows, store)
    row_counts: dict[CollectionKey, int] = {}
    for row in rows:
        key = (row.biobank, row.collection)
        row_counts[key] = row_counts.get(key, 0) + 1
    report = commit(records, repo, row_counts)
    report.diagnostics = parse_diags + stage_diags + report.diagnostics
    return report


def serialize_records(records: list[CollectionRecord]) -> str:
    """Render staged records back to the annotation CSV dialect.

    Re-parsing the output stages deep-equal records: the first concept
    row of an attribute carries the attribute quality, further concepts
    get one bare row each.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(ANNOTATION_HEADER)

    def quality_cells(quality: dict[str, float]) -> list[str]:
        return [repr(quality[n]) if n in quality else "" for n in QUALITY_NAMES]

    empty_quality = [""] * len(QUALITY_NAMES)
    for record in records:
        if record.description:
            writer.writerow(
                [record.biobank, record.name, "", DESCRIPTION_MARKER, ""]
                + empty_quality
                + [record.description]
            )
        if record.quality:
            writer.writerow(
                [record.biobank, record.name, "", "", ""] + quality_cells(record.quality)
            )
        for attr in record.attributes:
            concepts = sorted(attr.annotations)
            if not concepts:
                if attr.quality:
                    writer.writerow(
                        [record.biobank, record.name, attr.name, "", ""]
                        + quality_cells(attr.quality)
                    )
                continue
            first, *rest = concepts
            writer.writerow(
                [record.biobank, record.name, attr.name, first.code, first.vocabulary]
                + quality_cells(attr.quality)
            )
            for concept in rest:
                writer.writerow(
                    [record.biobank, record.name, attr.name, concept.code, concept.vocabulary]
                    + empty_quality
                )
    return buffer.getvalue()
