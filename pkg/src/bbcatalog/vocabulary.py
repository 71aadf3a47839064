"""Immutable concept graph loaded from CDM-style vocabulary tables.

Two tab-delimited files feed the store: a CONCEPT table (one row per
concept) and a CONCEPT_RELATIONSHIP table (one row per directed edge).
"Is a" edges form the concept hierarchy and must be acyclic; "Maps to"
edges express equivalence and are treated symmetrically. Every other
label is an attributing relationship that classifies its source concept
(e.g. "Has scale" pointing at a scale-type concept).

After load the store never changes, so query methods are safe to call
from any number of threads.
"""

from __future__ import annotations

import csv
import logging
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

from .diagnostics import Diagnostic

logger = logging.getLogger(__name__)

# Reserved labels: hierarchy and equivalence, never attributing relationships.
HIERARCHY_REL = "Is a"
EQUIVALENCE_REL = "Maps to"
RESERVED_RELS = frozenset({HIERARCHY_REL, EQUIVALENCE_REL})

CONCEPT_COLUMNS = (
    "concept_id",
    "concept_code",
    "concept_name",
    "vocabulary_id",
    "domain_id",
    "standard_concept",
)
RELATIONSHIP_COLUMNS = ("concept_id_1", "relationship_id", "concept_id_2")


class VocabularyLoadError(Exception):
    """Fatal vocabulary load problem (bad header, duplicate identity, cycle)."""


class ConceptKey(NamedTuple):
    """The (code, vocabulary) pair identifying a concept across systems."""

    code: str
    vocabulary: str


@dataclass(frozen=True)
class Concept:
    concept_id: int
    code: str
    vocabulary: str
    name: str
    domain: str
    standard: bool

    @property
    def key(self) -> ConceptKey:
        return ConceptKey(self.code, self.vocabulary)


@dataclass(frozen=True)
class ConceptRelationship:
    source_id: int
    relationship: str
    target_id: int


class VocabularyStore:
    """Concept lookup, hierarchy, equivalence and attributing-edge queries.

    Build via :func:`load_vocabulary`; the constructor takes already
    validated concepts and edges.
    """

    def __init__(
        self,
        concepts: Iterable[Concept],
        edges: Iterable[ConceptRelationship],
        diagnostics: list[Diagnostic] | None = None,
    ):
        self._by_id: dict[int, Concept] = {}
        self._by_key: dict[ConceptKey, Concept] = {}
        for concept in concepts:
            if concept.concept_id in self._by_id:
                raise VocabularyLoadError(
                    f"duplicate concept_id {concept.concept_id}"
                )
            if concept.key in self._by_key:
                raise VocabularyLoadError(
                    f"duplicate concept key ({concept.code}, {concept.vocabulary})"
                )
            self._by_id[concept.concept_id] = concept
            self._by_key[concept.key] = concept

        # parent id -> child ids, from reversed "Is a" edges
        self._children: dict[int, set[int]] = defaultdict(set)
        # symmetric one-hop "Maps to" adjacency
        self._maps: dict[int, set[int]] = defaultdict(set)
        # (vocabulary, relationship) -> attributing target ids
        self._rel_targets: dict[tuple[str, str], set[int]] = defaultdict(set)
        # (vocabulary, relationship, target id) -> source ids
        self._prop_sources: dict[tuple[str, str, int], set[int]] = defaultdict(set)
        # vocabulary -> attributing relationship labels
        self._vocab_rels: dict[str, set[str]] = defaultdict(set)

        self._edge_count = 0
        seen: set[tuple[int, str, int]] = set()
        for edge in edges:
            if (edge.source_id, edge.relationship, edge.target_id) in seen:
                continue
            seen.add((edge.source_id, edge.relationship, edge.target_id))
            if edge.source_id not in self._by_id or edge.target_id not in self._by_id:
                raise VocabularyLoadError(
                    f"edge endpoint not loaded: {edge.source_id} -> {edge.target_id}"
                )
            self._edge_count += 1
            source = self._by_id[edge.source_id]
            if edge.relationship == HIERARCHY_REL:
                self._children[edge.target_id].add(edge.source_id)
            elif edge.relationship == EQUIVALENCE_REL:
                self._maps[edge.source_id].add(edge.target_id)
                self._maps[edge.target_id].add(edge.source_id)
            else:
                self._vocab_rels[source.vocabulary].add(edge.relationship)
                self._rel_targets[(source.vocabulary, edge.relationship)].add(
                    edge.target_id
                )
                self._prop_sources[
                    (source.vocabulary, edge.relationship, edge.target_id)
                ].add(edge.source_id)

        self.diagnostics: list[Diagnostic] = list(diagnostics or [])
        self._verify_hierarchy_acyclic()

    def _verify_hierarchy_acyclic(self) -> None:
        # Kahn's algorithm over the child->parent direction; leftovers lie on a cycle.
        indegree: dict[int, int] = defaultdict(int)
        nodes = set(self._children)
        for parent, children in self._children.items():
            nodes.update(children)
            indegree[parent] += len(children)
        queue = [n for n in nodes if indegree[n] == 0]
        visited = 0
        parents_of: dict[int, set[int]] = defaultdict(set)
        for parent, children in self._children.items():
            for child in children:
                parents_of[child].add(parent)
        while queue:
            node = queue.pop()
            visited += 1
            for parent in parents_of.get(node, ()):
                indegree[parent] -= 1
                if indegree[parent] == 0:
                    queue.append(parent)
        if visited != len(nodes):
            member_id = min(n for n in nodes if indegree[n] > 0)
            member = self._by_id[member_id]
            raise VocabularyLoadError(
                f'"{HIERARCHY_REL}" cycle involving concept '
                f"{member.code} ({member.vocabulary})"
            )

    # -- lookup ---------------------------------------------------------

    @property
    def concept_count(self) -> int:
        return len(self._by_id)

    @property
    def edge_count(self) -> int:
        return self._edge_count

    def resolve(self, key: ConceptKey) -> Concept | None:
        """The unique concept with this (code, vocabulary), or None."""
        return self._by_key.get(ConceptKey(*key))

    def get(self, concept_id: int) -> Concept | None:
        return self._by_id.get(concept_id)

    def vocabularies(self) -> dict[str, int]:
        """Vocabulary id -> number of loaded concepts, sorted by id."""
        counts: dict[str, int] = defaultdict(int)
        for concept in self._by_id.values():
            counts[concept.vocabulary] += 1
        return dict(sorted(counts.items()))

    # -- graph queries --------------------------------------------------

    def descendants(self, concept: Concept) -> set[Concept]:
        """All concepts below ``concept`` in the hierarchy, excluding itself."""
        result: set[int] = set()
        frontier = [concept.concept_id]
        while frontier:
            node = frontier.pop()
            for child in self._children.get(node, ()):
                if child not in result:
                    result.add(child)
                    frontier.append(child)
        result.discard(concept.concept_id)
        return {self._by_id[i] for i in result}

    def equivalents(self, concept: Concept) -> set[Concept]:
        """Concepts one "Maps to" hop away, in either direction."""
        return {self._by_id[i] for i in self._maps.get(concept.concept_id, ())}

    def list_relationships(self, vocabulary: str) -> set[str]:
        """Attributing relationship labels on edges out of this vocabulary."""
        return set(self._vocab_rels.get(vocabulary, ()))

    def attributing_concepts(self, vocabulary: str, relationship: str) -> set[Concept]:
        """Targets of (c, relationship, p) edges with c in the vocabulary."""
        ids = self._rel_targets.get((vocabulary, relationship), ())
        return {self._by_id[i] for i in ids}

    def concepts_with_property(
        self, vocabulary: str, relationship: str, attributing: Concept
    ) -> set[Concept]:
        """Concepts in the vocabulary linked to ``attributing`` by the relationship."""
        ids = self._prop_sources.get(
            (vocabulary, relationship, attributing.concept_id), ()
        )
        return {self._by_id[i] for i in ids}


def _read_table(
    path: str | Path, required: tuple[str, ...], diags: list[Diagnostic]
) -> Iterable[tuple[int, dict[str, str]]]:
    """Yield (line number, column -> value) for each data row of a TSV file.

    Unknown extra columns are ignored; a missing required column is fatal.
    Rows with the wrong field count are skipped with a diagnostic.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t")
        try:
            header = next(reader)
        except StopIteration:
            raise VocabularyLoadError(f"{path}: empty file, expected header")
        positions = {name: i for i, name in enumerate(header)}
        missing = [c for c in required if c not in positions]
        if missing:
            raise VocabularyLoadError(
                f"{path}: missing required column(s): {', '.join(missing)}"
            )
        for line, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(header):
                diags.append(
                    Diagnostic(line, "error", f"expected {len(header)} fields, got {len(row)}")
                )
                continue
            yield line, {name: row[positions[name]] for name in required}


def load_vocabulary(
    concept_path: str | Path, relationship_path: str | Path
) -> VocabularyStore:
    """Load a store from CONCEPT and CONCEPT_RELATIONSHIP tab-delimited files.

    Malformed rows and dangling edges are skipped with per-line diagnostics
    on the returned store. Duplicate concept identities and "Is a" cycles
    raise :class:`VocabularyLoadError`.
    """
    diags: list[Diagnostic] = []
    concepts: list[Concept] = []
    for line, cells in _read_table(concept_path, CONCEPT_COLUMNS, diags):
        try:
            concept_id = int(cells["concept_id"])
        except ValueError:
            diags.append(
                Diagnostic(line, "error", f"concept_id {cells['concept_id']!r} is not an integer")
            )
            continue
        code = cells["concept_code"].strip()
        name = cells["concept_name"].strip()
        vocabulary = cells["vocabulary_id"].strip()
        if not code or not name or not vocabulary:
            diags.append(
                Diagnostic(line, "error", "concept_code, concept_name and vocabulary_id must be non-empty")
            )
            continue
        concepts.append(
            Concept(
                concept_id=concept_id,
                code=code,
                vocabulary=vocabulary,
                name=name,
                domain=cells["domain_id"].strip(),
                standard=cells["standard_concept"].strip() == "S",
            )
        )

    known_ids = {c.concept_id for c in concepts}
    edges: list[ConceptRelationship] = []
    for line, cells in _read_table(relationship_path, RELATIONSHIP_COLUMNS, diags):
        relationship = cells["relationship_id"].strip()
        if not relationship:
            diags.append(Diagnostic(line, "error", "relationship_id must be non-empty"))
            continue
        try:
            source_id = int(cells["concept_id_1"])
            target_id = int(cells["concept_id_2"])
        except ValueError:
            diags.append(Diagnostic(line, "error", "edge endpoints must be integers"))
            continue
        if source_id not in known_ids or target_id not in known_ids:
            diags.append(
                Diagnostic(line, "error", f"edge references unknown concept ({source_id} -> {target_id})")
            )
            continue
        edges.append(ConceptRelationship(source_id, relationship, target_id))

    store = VocabularyStore(concepts, edges, diags)
    if diags:
        logger.info("vocabulary load skipped %d row(s)", len(diags))
    return store
