"""Semantic expansion of query concepts.

A search seed grows into its closure: the seed itself, everything it is
equivalent to, everything below any of those in the hierarchy, and so on
until nothing new appears. Equivalence hops and hierarchy descent
interleave, so a "Maps to" edge reached through a descendant still pulls
in the other vocabulary's subtree.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .vocabulary import Concept, ConceptKey, VocabularyStore


class QueryOperator(enum.Enum):
    AND = "and"
    OR = "or"


class UnknownConceptError(Exception):
    """A query seed does not resolve in the vocabulary."""

    def __init__(self, key: ConceptKey):
        self.key = key
        super().__init__(f"unknown concept ({key.code}, {key.vocabulary})")


class EmptyQueryError(Exception):
    """A query carried no seed concepts."""


@dataclass(frozen=True)
class ConceptClosure:
    """One expanded seed: the seed plus every concept it subsumes."""

    seed: Concept
    members: frozenset[Concept]

    def __contains__(self, concept: Concept) -> bool:
        return concept in self.members


@dataclass(frozen=True)
class QueryPlan:
    """Compiled query: closures to match plus how to combine them.

    OR plans hold a single merged closure; AND plans hold one closure per
    seed, all of which must be satisfied.
    """

    operator: QueryOperator
    closures: tuple[ConceptClosure, ...]
    expanded: bool


def expand(seed: Concept, store: VocabularyStore) -> ConceptClosure:
    """Least fixpoint of seed + equivalents + descendants."""
    members: set[Concept] = set()
    frontier = [seed]
    while frontier:
        concept = frontier.pop()
        if concept in members:
            continue
        members.add(concept)
        frontier.extend(store.equivalents(concept))
        frontier.extend(store.descendants(concept))
    return ConceptClosure(seed=seed, members=frozenset(members))


def compile_query(
    seeds: list[ConceptKey],
    operator: QueryOperator,
    store: VocabularyStore,
    expansion: bool = True,
) -> QueryPlan:
    """Resolve seeds and build the closures a search will match against.

    With expansion off every closure is just its own seed. OR merges all
    expanded members into one closure keyed by the first seed; AND keeps
    one closure per seed.
    """
    if not seeds:
        raise EmptyQueryError("a concept query needs at least one seed concept")
    resolved: list[Concept] = []
    for key in seeds:
        concept = store.resolve(key)
        if concept is None:
            raise UnknownConceptError(ConceptKey(*key))
        resolved.append(concept)

    if not expansion:
        closures = tuple(
            ConceptClosure(seed=c, members=frozenset([c])) for c in resolved
        )
    elif operator is QueryOperator.OR:
        merged: set[Concept] = set()
        for concept in resolved:
            merged |= expand(concept, store).members
        closures = (ConceptClosure(seed=resolved[0], members=frozenset(merged)),)
    else:
        closures = tuple(expand(c, store) for c in resolved)
    return QueryPlan(operator=operator, closures=closures, expanded=expansion)
