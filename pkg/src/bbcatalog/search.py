"""The four search classes over the repository and vocabulary store.

Concept search matches collections whose annotations intersect the query
closures; relationship search derives its concept set from attributing
edges (no expansion); the two quality searches filter on collection- and
attribute-level values. All result lists are deterministically ordered:
hits by (biobank, name), attributes by name, concepts by (vocabulary,
code).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .expansion import QueryOperator, QueryPlan, expand
from .repository import (
    CollectionKey,
    CollectionRecord,
    QUALITY_NAMES,
    Repository,
)
from .vocabulary import (
    Concept,
    ConceptKey,
    RESERVED_RELS,
    VocabularyStore,
)


@dataclass(frozen=True)
class QualityRange:
    characteristic: str
    min: float
    max: float

    def __post_init__(self) -> None:
        if self.characteristic not in QUALITY_NAMES:
            raise ValueError(f"unknown quality characteristic {self.characteristic!r}")
        if not 0.0 <= self.min <= self.max <= 1.0:
            raise ValueError(
                f"need 0 <= min <= max <= 1, got [{self.min}, {self.max}]"
            )

    def contains(self, value: float) -> bool:
        return self.min <= value <= self.max


@dataclass(frozen=True)
class RelationshipQuery:
    vocabulary: str
    relationship: str
    attributing: ConceptKey

    def __post_init__(self) -> None:
        if self.relationship in RESERVED_RELS:
            raise ValueError(
                f"{self.relationship!r} is a reserved relationship, not an attributing one"
            )


@dataclass(frozen=True)
class Highlight:
    scope: str  # "collection" or "attribute"
    attribute: str | None
    characteristic: str
    value: float


@dataclass(frozen=True)
class CollectionHit:
    biobank: str
    name: str
    matched_attributes: tuple[tuple[str, tuple[Concept, ...]], ...] = ()
    highlight: Highlight | None = None

    @property
    def key(self) -> CollectionKey:
        return (self.biobank, self.name)


@dataclass(frozen=True)
class SearchResult:
    hits: tuple[CollectionHit, ...]
    warnings: tuple[str, ...] = ()

    @property
    def keys(self) -> list[CollectionKey]:
        return [hit.key for hit in self.hits]


def _evidence(
    matches: dict[str, set[ConceptKey]], store: VocabularyStore
) -> tuple[tuple[str, tuple[Concept, ...]], ...]:
    out = []
    for attr_name in sorted(matches):
        concepts = [store.resolve(k) for k in matches[attr_name]]
        concepts = [c for c in concepts if c is not None]
        concepts.sort(key=lambda c: (c.vocabulary, c.code))
        out.append((attr_name, tuple(concepts)))
    return tuple(out)


def search_by_concepts(
    plan: QueryPlan, repo: Repository, store: VocabularyStore
) -> SearchResult:
    """Collections whose annotations satisfy the plan, with full evidence.

    OR: any annotated concept lies in the merged closure. AND: every
    closure contributes at least one annotated concept.
    """
    per_closure = [
        repo.collections_for_concepts(c.key for c in closure.members)
        for closure in plan.closures
    ]
    if plan.operator is QueryOperator.AND:
        matched: set[CollectionKey] = (
            set.intersection(*(set(m) for m in per_closure)) if per_closure else set()
        )
    else:
        matched = set().union(*(set(m) for m in per_closure))

    hits = []
    for coll_key in sorted(matched):
        merged: dict[str, set[ConceptKey]] = {}
        for closure_matches in per_closure:
            for attr_name, keys in closure_matches.get(coll_key, {}).items():
                merged.setdefault(attr_name, set()).update(keys)
        hits.append(
            CollectionHit(
                biobank=coll_key[0],
                name=coll_key[1],
                matched_attributes=_evidence(merged, store),
            )
        )
    return SearchResult(hits=tuple(hits))


def search_by_relationship(
    query: RelationshipQuery, repo: Repository, store: VocabularyStore
) -> SearchResult:
    """Collections annotated by concepts carrying (relationship, attributing).

    The derived concept set is matched as-is (OR, no expansion).
    """
    warnings = []
    attributing = store.resolve(query.attributing)
    if attributing is None:
        warnings.append(
            f"unknown attributing concept ({query.attributing.code}, {query.attributing.vocabulary})"
        )
        return SearchResult(hits=(), warnings=tuple(warnings))
    if query.relationship not in store.list_relationships(query.vocabulary):
        warnings.append(
            f"vocabulary {query.vocabulary!r} has no relationship {query.relationship!r}"
        )
        return SearchResult(hits=(), warnings=tuple(warnings))
    derived = store.concepts_with_property(
        query.vocabulary, query.relationship, attributing
    )
    matches = repo.collections_for_concepts(c.key for c in derived)
    hits = tuple(
        CollectionHit(
            biobank=coll_key[0],
            name=coll_key[1],
            matched_attributes=_evidence(matches[coll_key], store),
        )
        for coll_key in sorted(matches)
    )
    return SearchResult(hits=hits, warnings=tuple(warnings))


def search_by_collection_quality(
    quality_range: QualityRange, repo: Repository
) -> SearchResult:
    """Collections whose collection-level value falls inside the range.

    Collections without the characteristic never match.
    """
    hits = []
    for key in sorted(repo.state.collections):
        record = repo.state.collections[key]
        value = record.quality.get(quality_range.characteristic)
        if value is None or not quality_range.contains(value):
            continue
        hits.append(
            CollectionHit(
                biobank=record.biobank,
                name=record.name,
                highlight=Highlight(
                    scope="collection",
                    attribute=None,
                    characteristic=quality_range.characteristic,
                    value=value,
                ),
            )
        )
    return SearchResult(hits=tuple(hits))


def search_by_attribute_quality(
    concept_key: ConceptKey,
    quality_range: QualityRange,
    repo: Repository,
    store: VocabularyStore,
    expansion: bool = False,
) -> SearchResult:
    """Collections with an attribute annotated by the concept whose
    attribute-level value falls inside the range.

    Exact concept matching by default; with expansion the whole closure
    of the concept is accepted as annotation evidence.
    """
    concept = store.resolve(concept_key)
    if concept is None:
        return SearchResult(
            hits=(),
            warnings=(f"unknown concept ({concept_key.code}, {concept_key.vocabulary})",),
        )
    if expansion:
        accepted = {c.key for c in expand(concept, store).members}
    else:
        accepted = {concept.key}

    matches = repo.collections_for_concepts(accepted)
    hits = []
    for coll_key in sorted(matches):
        record = repo.state.collections[coll_key]
        in_range: dict[str, set[ConceptKey]] = {}
        first: tuple[str, float] | None = None
        for attr_name in sorted(matches[coll_key]):
            attr = record.attribute(attr_name)
            if attr is None:
                continue
            value = attr.quality.get(quality_range.characteristic)
            if value is None or not quality_range.contains(value):
                continue
            in_range[attr_name] = matches[coll_key][attr_name]
            if first is None:
                first = (attr_name, value)
        if not in_range or first is None:
            continue
        hits.append(
            CollectionHit(
                biobank=coll_key[0],
                name=coll_key[1],
                matched_attributes=_evidence(in_range, store),
                highlight=Highlight(
                    scope="attribute",
                    attribute=first[0],
                    characteristic=quality_range.characteristic,
                    value=first[1],
                ),
            )
        )
    return SearchResult(hits=tuple(hits))


def refine_by_quality(
    hits: tuple[CollectionHit, ...] | list[CollectionHit],
    quality_range: QualityRange,
    scope: str,
    repo: Repository,
) -> SearchResult:
    """Filter previous hits by a quality predicate, keeping their evidence.

    Collection scope checks the collection-level value. Attribute scope
    checks the hit's matched attributes (any attribute of the collection
    when the hit carries no attribute evidence).
    """
    if scope not in ("collection", "attribute"):
        raise ValueError(f"scope must be 'collection' or 'attribute', got {scope!r}")
    kept = []
    for hit in hits:
        record = repo.get(hit.biobank, hit.name)
        if record is None:
            continue
        if scope == "collection":
            value = record.quality.get(quality_range.characteristic)
            if value is None or not quality_range.contains(value):
                continue
            highlight = Highlight(
                scope="collection",
                attribute=None,
                characteristic=quality_range.characteristic,
                value=value,
            )
        else:
            if hit.matched_attributes:
                candidates = [name for name, _ in hit.matched_attributes]
            else:
                candidates = [attr.name for attr in record.attributes]
            found: tuple[str, float] | None = None
            for name in candidates:
                attr = record.attribute(name)
                if attr is None:
                    continue
                value = attr.quality.get(quality_range.characteristic)
                if value is not None and quality_range.contains(value):
                    found = (name, value)
                    break
            if found is None:
                continue
            highlight = Highlight(
                scope="attribute",
                attribute=found[0],
                characteristic=quality_range.characteristic,
                value=found[1],
            )
        kept.append(replace(hit, highlight=highlight))
    return SearchResult(hits=tuple(kept))


def suggest_concepts(
    prefix: str, limit: int, repo: Repository, store: VocabularyStore
) -> list[tuple[Concept, int]]:
    """Concepts already used as annotations, matched by code or name prefix.

    Ordered by descending use count, then name, then key; at most
    ``limit`` entries.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    needle = prefix.lower()
    ranked = []
    for key, uses in repo.state.concept_index.items():
        concept = store.resolve(key)
        if concept is None:
            continue
        if not (
            concept.code.lower().startswith(needle)
            or concept.name.lower().startswith(needle)
        ):
            continue
        ranked.append((concept, len(uses)))
    ranked.sort(key=lambda pair: (-pair[1], pair[0].name, pair[0].vocabulary, pair[0].code))
    return ranked[:limit]
