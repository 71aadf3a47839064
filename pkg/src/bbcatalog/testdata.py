"""Synthetic validation scenario generator.

Emits a vocabulary (CONCEPT.tsv, CONCEPT_RELATIONSHIP.tsv), an
annotation CSV and a ledger JSON. The ledger is the ground truth for
oracle tests: every expected result set in it is computed here with
naive scans over the generated data, never by the search engine.

The generated world plants a fixed skeleton the tests rely on:

* a BMI concept annotating exactly two collections' "bmi" attribute,
  with completeness 0.85 and 0.40;
* a parent/child pair where only the child annotates one collection;
* two imaging concepts with disjoint collection sets (OR fixture) and a
  pathology concept overlapping one of them (AND fixture);
* an equivalence chain (mapping, then a child, then another mapping)
  that needs at least two expansion rounds;
* a "Has scale" cluster of lab concepts pointing at Nom/Ord/Qn scale
  concepts, plus a couple of "Has method" edges.

Everything else (extra concepts, hierarchy, mappings, annotations,
quality values) is drawn from a seeded RNG; the same seed reproduces
byte-identical files.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .ingest import serialize_records
from .repository import AttributeRecord, CollectionRecord
from .vocabulary import ConceptKey

VOCAB_NAMES = ("SNOMED", "LOINC", "ICD10", "RxNorm", "HCPCS", "MedDRA")

BASE_ATTRIBUTES = (
    "age",
    "sex",
    "bmi",
    "height",
    "weight",
    "smoking_status",
    "alcohol_use",
    "diagnosis",
    "diagnosis_date",
    "tumor_stage",
    "tumor_grade",
    "tumor_location",
    "histology",
    "imaging_modality",
    "biomarker_cea",
    "biomarker_kras",
    "treatment",
    "surgery_date",
    "chemo_regimen",
    "followup_months",
    "vital_status",
    "sample_type",
)

BIOBANK = "BBG"


class ScenarioError(Exception):
    """The requested scenario dimensions are inconsistent."""


@dataclass(frozen=True)
class ScenarioSpec:
    collections: int = 10
    attributes_per_collection: int = 22
    concepts: int = 90
    vocabularies: int = 6
    annotations: int = 526
    patients: int = 206  # informational only, echoed into the ledger
    seed: int = 1


@dataclass
class GeneratedConcept:
    concept_id: int
    code: str
    vocabulary: str
    name: str
    domain: str
    standard: str  # "S" or ""

    @property
    def key(self) -> ConceptKey:
        return ConceptKey(self.code, self.vocabulary)


@dataclass
class Scenario:
    spec: ScenarioSpec
    concepts: list[GeneratedConcept]
    edges: list[tuple[int, str, int]]  # (source id, relationship, target id)
    records: list[CollectionRecord]
    ledger: dict[str, Any]

    def concept_tsv(self) -> str:
        lines = [
            "\t".join(
                (
                    "concept_id",
                    "concept_code",
                    "concept_name",
                    "vocabulary_id",
                    "domain_id",
                    "standard_concept",
                )
            )
        ]
        for c in sorted(self.concepts, key=lambda c: c.concept_id):
            lines.append(
                "\t".join(
                    (str(c.concept_id), c.code, c.name, c.vocabulary, c.domain, c.standard)
                )
            )
        return "\n".join(lines) + "\n"

    def relationship_tsv(self) -> str:
        lines = ["\t".join(("concept_id_1", "relationship_id", "concept_id_2"))]
        for source, rel, target in sorted(self.edges):
            lines.append("\t".join((str(source), rel, str(target))))
        return "\n".join(lines) + "\n"

    def annotation_csv(self) -> str:
        return serialize_records(self.records)

    def ledger_json(self) -> str:
        return json.dumps(self.ledger, indent=2, sort_keys=True) + "\n"


def validate_spec(spec: ScenarioSpec) -> None:
    if spec.collections < 2:
        raise ScenarioError("need at least 2 collections")
    if spec.attributes_per_collection < 4:
        raise ScenarioError("need at least 4 attributes per collection")
    if not 2 <= spec.vocabularies <= 26:
        raise ScenarioError("vocabularies must be between 2 and 26")
    if spec.concepts < 20 + spec.vocabularies:
        raise ScenarioError(
            f"need at least {20 + spec.vocabularies} concepts for this many vocabularies"
        )
    if spec.annotations < spec.concepts:
        raise ScenarioError("annotations must be at least the number of concepts")
    if spec.annotations < spec.attributes_per_collection:
        raise ScenarioError("annotations must be at least the attribute count")
    capacity = spec.collections * spec.attributes_per_collection * (spec.concepts - 20)
    if spec.annotations > capacity:
        raise ScenarioError(
            f"annotation budget {spec.annotations} exceeds scenario capacity {capacity}"
        )
    if spec.patients < 1:
        raise ScenarioError("patients must be positive")
    if spec.seed < 0:
        raise ScenarioError("seed must be non-negative")


def _vocab_list(count: int) -> list[str]:
    names = list(VOCAB_NAMES[:count])
    while len(names) < count:
        names.append(f"VOCAB{len(names) + 1}")
    return names


def _attribute_names(count: int) -> list[str]:
    names = list(BASE_ATTRIBUTES[:count])
    while len(names) < count:
        names.append(f"attr_{len(names) + 1:02d}")
    return names


def _filler_code(vocabulary: str, i: int) -> str:
    patterns = {
        "SNOMED": lambda n: str(800000 + n),
        "LOINC": lambda n: f"{7000 + n}-0",
        "ICD10": lambda n: f"Z{n // 10:02d}.{n % 10}",
        "RxNorm": lambda n: str(310000 + n),
        "HCPCS": lambda n: f"G{9000 + n}",
        "MedDRA": lambda n: str(10090000 + n),
    }
    return patterns.get(vocabulary, lambda n: f"X{n:05d}")(i)


_DOMAINS = {
    "SNOMED": "Condition",
    "LOINC": "Observation",
    "ICD10": "Condition",
    "RxNorm": "Drug",
    "HCPCS": "Procedure",
    "MedDRA": "Condition",
}


def generate(spec: ScenarioSpec) -> Scenario:
    validate_spec(spec)
    rng = random.Random(spec.seed)
    vocabs = _vocab_list(spec.vocabularies)
    attr_names = _attribute_names(spec.attributes_per_collection)
    coll_names = [f"CRC{i}" for i in range(1, spec.collections + 1)]

    def coll(i: int) -> str:
        # planted layout speaks in 1-based CRC indices; wrap for tiny scenarios
        return coll_names[(i - 1) % len(coll_names)]

    def attr(name: str) -> str:
        return name if name in attr_names else attr_names[0]

    snomed, loinc = vocabs[0], vocabs[1]
    icd = vocabs[2 % len(vocabs)]
    meddra = vocabs[5 % len(vocabs)]

    next_id = 1000
    concepts: list[GeneratedConcept] = []
    by_key: dict[tuple[str, str], GeneratedConcept] = {}

    def add(code: str, vocabulary: str, name: str, domain: str, standard: str = "S") -> GeneratedConcept:
        nonlocal next_id
        concept = GeneratedConcept(next_id, code, vocabulary, name, domain, standard)
        next_id += 1
        if concept.key in by_key:
            raise ScenarioError(f"internal: duplicate planted code {concept.key}")
        concepts.append(concept)
        by_key[concept.key] = concept
        return concept

    # -- planted skeleton (20 concepts) --------------------------------
    bmi = add("39156-5", loinc, "Body mass index", "Observation")
    parent = add("730001", snomed, "Neoplasm of digestive tract", "Condition")
    child = add("730002", snomed, "Colorectal neoplasm", "Condition")
    ultra = add("710001", snomed, "Ultrasonography of liver", "Procedure")
    xray = add("710002", snomed, "Radiography of liver", "Procedure")
    biopsy = add("710003", snomed, "Biopsy of liver", "Procedure")
    chain_a = add("720001", snomed, "Chronic liver disease", "Condition")
    chain_b = add("K76.9", icd, "Liver disease, unspecified", "Condition")
    chain_b_child = add("K76.0", icd, "Fatty liver", "Condition")
    chain_c = add("10019805", meddra, "Hepatic steatosis", "Condition")
    scale_nom = add("SC-NOM", loinc, "Nom", "Meas Value")
    scale_ord = add("SC-ORD", loinc, "Ord", "Meas Value")
    scale_qn = add("SC-QN", loinc, "Qn", "Meas Value")
    lab_nom = [
        add("9001-1", loinc, "Blood culture panel", "Observation"),
        add("9002-9", loinc, "Pathogen identification", "Observation"),
        add("9003-7", loinc, "Tissue type study", "Observation"),
    ]
    lab_ord = [
        add("9004-5", loinc, "Tumor grade assessment", "Observation"),
        add("9005-2", loinc, "Stage classification", "Observation"),
    ]
    lab_qn = [add("9006-0", loinc, "Carcinoembryonic antigen level", "Observation")]
    method = add("MTH-1", loinc, "Immunoassay method", "Observation")
    planted = list(by_key.values())

    edges: list[tuple[int, str, int]] = []
    edges.append((child.concept_id, "Is a", parent.concept_id))
    edges.append((chain_b_child.concept_id, "Is a", chain_b.concept_id))
    edges.append((chain_a.concept_id, "Maps to", chain_b.concept_id))
    edges.append((chain_b_child.concept_id, "Maps to", chain_c.concept_id))
    for lab in lab_nom:
        edges.append((lab.concept_id, "Has scale", scale_nom.concept_id))
    for lab in lab_ord:
        edges.append((lab.concept_id, "Has scale", scale_ord.concept_id))
    for lab in lab_qn:
        edges.append((lab.concept_id, "Has scale", scale_qn.concept_id))
    edges.append((lab_nom[0].concept_id, "Has method", method.concept_id))
    edges.append((lab_qn[0].concept_id, "Has method", method.concept_id))

    # -- filler concepts, round-robin across vocabularies ---------------
    filler_names = {
        "SNOMED": "Clinical finding",
        "LOINC": "Lab observation",
        "ICD10": "Diagnosis code",
        "RxNorm": "Medication",
        "HCPCS": "Procedure code",
        "MedDRA": "Adverse event term",
    }
    fillers: list[GeneratedConcept] = []
    filler_count = spec.concepts - len(planted)
    for i in range(filler_count):
        vocabulary = vocabs[i % len(vocabs)]
        label = filler_names.get(vocabulary, "Coded entry")
        standard = "S" if rng.random() < 0.9 else ""
        fillers.append(
            add(
                _filler_code(vocabulary, i),
                vocabulary,
                f"{label} {i + 1:03d}",
                _DOMAINS.get(vocabulary, "Observation"),
                standard,
            )
        )

    # random DAG among fillers, per vocabulary, parents always earlier
    by_vocab: dict[str, list[GeneratedConcept]] = {}
    for concept in fillers:
        by_vocab.setdefault(concept.vocabulary, []).append(concept)
    for vocabulary in vocabs:
        group = by_vocab.get(vocabulary, [])
        for i, concept in enumerate(group):
            if i > 0 and rng.random() < 0.5:
                parent_concept = group[rng.randrange(i)]
                edges.append((concept.concept_id, "Is a", parent_concept.concept_id))

    # a few cross-vocabulary mappings among fillers
    mapped: set[int] = set()
    mapping_budget = min(8, filler_count // 4)
    attempts = 0
    while mapping_budget > 0 and attempts < 200:
        attempts += 1
        a, b = rng.sample(fillers, 2)
        if a.vocabulary == b.vocabulary:
            continue
        if a.concept_id in mapped or b.concept_id in mapped:
            continue
        edges.append((a.concept_id, "Maps to", b.concept_id))
        mapped.update((a.concept_id, b.concept_id))
        mapping_budget -= 1

    # -- annotations -----------------------------------------------------
    # triples (collection, attribute, concept key), all unique
    triples: set[tuple[str, str, tuple[str, str]]] = set()

    def plant(collection: str, attribute: str, concept: GeneratedConcept) -> None:
        triples.add((collection, attr(attribute), concept.key))

    plant(coll(1), "bmi", bmi)
    plant(coll(2), "bmi", bmi)
    plant(coll(3), "diagnosis", child)
    plant(coll(3), "diagnosis_date", parent)
    plant(coll(4), "imaging_modality", ultra)
    plant(coll(6), "imaging_modality", ultra)
    plant(coll(5), "imaging_modality", xray)
    plant(coll(6), "histology", biopsy)
    plant(coll(7), "histology", biopsy)
    plant(coll(10), "diagnosis", chain_a)
    plant(coll(8), "diagnosis_date", chain_b)
    plant(coll(9), "diagnosis", chain_b_child)
    plant(coll(8), "diagnosis", chain_c)
    plant(coll(1), "biomarker_cea", lab_nom[0])
    plant(coll(2), "biomarker_kras", lab_nom[1])
    plant(coll(5), "biomarker_cea", lab_nom[2])
    plant(coll(3), "tumor_grade", lab_ord[0])
    plant(coll(7), "tumor_stage", lab_ord[1])
    plant(coll(4), "biomarker_cea", lab_qn[0])
    plant(coll(9), "biomarker_cea", method)
    plant(coll(10), "biomarker_kras", scale_nom)
    plant(coll(4), "tumor_grade", scale_ord)
    plant(coll(5), "tumor_stage", scale_qn)

    # every filler annotates at least one attribute
    slots = [(c, a) for c in coll_names for a in attr_names]
    for concept in fillers:
        while True:
            collection, attribute = rng.choice(slots)
            if (collection, attribute, concept.key) not in triples:
                triples.add((collection, attribute, concept.key))
                break

    if len(triples) > spec.annotations:
        raise ScenarioError(
            f"annotation budget {spec.annotations} is below the planted minimum {len(triples)}"
        )

    # fill to the requested total with filler-only annotations
    stall = 0
    while len(triples) < spec.annotations:
        collection, attribute = rng.choice(slots)
        concept = rng.choice(fillers)
        triple = (collection, attribute, concept.key)
        if triple in triples:
            stall += 1
            if stall > 10000:
                raise ScenarioError("could not place the requested annotation count")
            continue
        stall = 0
        triples.add(triple)

    # -- quality values ---------------------------------------------------
    coll_quality: dict[str, dict[str, float]] = {}
    attr_quality: dict[tuple[str, str], float] = {}
    for collection in coll_names:
        coll_quality[collection] = {
            "completeness": round(rng.uniform(0.2, 1.0), 2),
            "accuracy": round(rng.uniform(0.5, 1.0), 2),
        }
        for attribute in attr_names:
            attr_quality[(collection, attribute)] = round(rng.uniform(0.1, 1.0), 2)
    attr_quality[(coll(1), attr("bmi"))] = 0.85
    attr_quality[(coll(2), attr("bmi"))] = 0.40

    # -- collection records -----------------------------------------------
    annotations_by_slot: dict[tuple[str, str], set[tuple[str, str]]] = {}
    for collection, attribute, key in triples:
        annotations_by_slot.setdefault((collection, attribute), set()).add(key)

    records = []
    for collection in coll_names:
        attributes = tuple(
            AttributeRecord(
                name=attribute,
                annotations=frozenset(
                    annotations_by_slot.get((collection, attribute), set())
                ),
                quality={"completeness": attr_quality[(collection, attribute)]},
            )
            for attribute in attr_names
        )
        records.append(
            CollectionRecord(
                biobank=BIOBANK,
                name=collection,
                description=f"Synthetic cohort {collection} for catalog validation",
                attributes=attributes,
                quality=dict(coll_quality[collection]),
            )
        )

    ledger = _build_ledger(
        spec,
        vocabs,
        attr_names,
        coll_names,
        concepts,
        edges,
        triples,
        coll_quality,
        attr_quality,
        planted_keys={
            "bmi": bmi.key,
            "parent": parent.key,
            "child": child.key,
            "ultrasonography": ultra.key,
            "radiography": xray.key,
            "biopsy": biopsy.key,
            "chain_seed": chain_a.key,
            "scale_nom": scale_nom.key,
            "scale_ord": scale_ord.key,
            "nominal_labs": [c.key for c in lab_nom],
        },
    )
    return Scenario(spec=spec, concepts=concepts, edges=edges, records=records, ledger=ledger)


# -- ledger math (independent of the engine modules) -----------------------


def _naive_closure(
    seed: tuple[str, str],
    concepts: list[GeneratedConcept],
    edges: list[tuple[int, str, int]],
) -> set[tuple[str, str]]:
    """Repeated-pass fixpoint over raw edge lists; deliberately naive."""
    by_id = {c.concept_id: c for c in concepts}
    by_key = {c.key: c for c in concepts}
    members = {by_key[seed].concept_id}
    changed = True
    while changed:
        changed = False
        additions = set()
        for source, rel, target in edges:
            if rel == "Maps to":
                if source in members and target not in members:
                    additions.add(target)
                if target in members and source not in members:
                    additions.add(source)
            elif rel == "Is a":
                if target in members and source not in members:
                    additions.add(source)
        if additions:
            members |= additions
            changed = True
    return {by_id[i].key for i in members}


def _collections_annotated_by(
    keys: set[tuple[str, str]],
    triples: set[tuple[str, str, tuple[str, str]]],
) -> set[str]:
    return {collection for collection, _, key in triples if key in keys}


def _expected_for_query(
    seeds: list[tuple[str, str]],
    operator: str,
    expansion: bool,
    concepts: list[GeneratedConcept],
    edges: list[tuple[int, str, int]],
    triples: set[tuple[str, str, tuple[str, str]]],
) -> list[str]:
    per_seed = []
    for seed in seeds:
        members = _naive_closure(seed, concepts, edges) if expansion else {seed}
        per_seed.append(_collections_annotated_by(members, triples))
    if operator == "AND":
        result = set.intersection(*per_seed)
    else:
        result = set.union(*per_seed)
    return sorted(result)


def _build_ledger(
    spec: ScenarioSpec,
    vocabs: list[str],
    attr_names: list[str],
    coll_names: list[str],
    concepts: list[GeneratedConcept],
    edges: list[tuple[int, str, int]],
    triples: set[tuple[str, str, tuple[str, str]]],
    coll_quality: dict[str, dict[str, float]],
    attr_quality: dict[tuple[str, str], float],
    planted_keys: dict[str, Any],
) -> dict[str, Any]:
    def key_json(key: tuple[str, str]) -> list[str]:
        return [key[0], key[1]]

    queries = []

    def add_query(query_id: str, seeds: list[tuple[str, str]], operator: str, expansion: bool) -> None:
        queries.append(
            {
                "id": query_id,
                "seeds": [key_json(s) for s in seeds],
                "operator": operator,
                "expansion": expansion,
                "expected": _expected_for_query(
                    seeds, operator, expansion, concepts, edges, triples
                ),
            }
        )

    add_query("parent-descendant", [planted_keys["parent"]], "OR", True)
    add_query(
        "or-disjoint",
        [planted_keys["ultrasonography"], planted_keys["radiography"]],
        "OR",
        True,
    )
    add_query(
        "and-overlap",
        [planted_keys["ultrasonography"], planted_keys["biopsy"]],
        "AND",
        True,
    )
    add_query("mapping-chain", [planted_keys["chain_seed"]], "OR", True)
    add_query("mapping-chain-exact", [planted_keys["chain_seed"]], "OR", False)

    # relationship queries: scan edges for sources, then scan annotations
    def relationship_expected(vocabulary: str, relationship: str, attributing: tuple[str, str]) -> list[str]:
        by_id = {c.concept_id: c for c in concepts}
        target = next(c for c in concepts if c.key == attributing)
        sources = {
            by_id[source].key
            for source, rel, tgt in edges
            if rel == relationship
            and tgt == target.concept_id
            and by_id[source].vocabulary == vocabulary
        }
        return sorted(_collections_annotated_by(sources, triples))

    relationship_queries = [
        {
            "vocabulary": vocabs[1],
            "relationship": "Has scale",
            "attributing": key_json(planted_keys["scale_nom"]),
            "expected": relationship_expected(
                vocabs[1], "Has scale", planted_keys["scale_nom"]
            ),
        },
        {
            "vocabulary": vocabs[1],
            "relationship": "Has scale",
            "attributing": key_json(planted_keys["scale_ord"]),
            "expected": relationship_expected(
                vocabs[1], "Has scale", planted_keys["scale_ord"]
            ),
        },
    ]

    bmi_key = planted_keys["bmi"]
    bmi_colls = sorted(
        {
            (collection, attribute)
            for collection, attribute, key in triples
            if key == bmi_key
        }
    )
    quality_example = {
        "concept": key_json(bmi_key),
        "characteristic": "completeness",
        "min": 0.5,
        "max": 1.0,
        "expected": sorted(
            collection
            for collection, attribute in bmi_colls
            if 0.5 <= attr_quality[(collection, attribute)] <= 1.0
        ),
        "values": {
            collection: attr_quality[(collection, attribute)]
            for collection, attribute in bmi_colls
        },
    }

    collection_quality_query = {
        "characteristic": "completeness",
        "min": 0.5,
        "max": 1.0,
        "expected": sorted(
            c for c in coll_names if 0.5 <= coll_quality[c]["completeness"] <= 1.0
        ),
    }

    or_disjoint_expected = next(q for q in queries if q["id"] == "or-disjoint")["expected"]
    refine_example = {
        "base_query": "or-disjoint",
        "scope": "collection",
        "characteristic": "completeness",
        "min": 0.5,
        "max": 1.0,
        "expected": sorted(
            c
            for c in or_disjoint_expected
            if 0.5 <= coll_quality[c]["completeness"] <= 1.0
        ),
    }

    annotation_counts: dict[str, int] = {}
    for collection, attribute, key in triples:
        label = f"{key[0]}|{key[1]}"
        annotation_counts[label] = annotation_counts.get(label, 0) + 1

    suggest = {
        "prefix": "Body",
        "expected_code": key_json(bmi_key),
        "count": annotation_counts[f"{bmi_key[0]}|{bmi_key[1]}"],
    }

    collections_block = {}
    for collection in coll_names:
        attrs_block = {}
        for attribute in attr_names:
            attr_triples = sorted(
                key_json(key)
                for c, a, key in triples
                if c == collection and a == attribute
            )
            attrs_block[attribute] = {
                "completeness": attr_quality[(collection, attribute)],
                "concepts": attr_triples,
            }
        collections_block[collection] = {
            "biobank": BIOBANK,
            "completeness": coll_quality[collection]["completeness"],
            "accuracy": coll_quality[collection]["accuracy"],
            "attributes": attrs_block,
        }

    return {
        "seed": spec.seed,
        "totals": {
            "collections": spec.collections,
            "attributes_per_collection": spec.attributes_per_collection,
            "concepts": spec.concepts,
            "vocabularies": spec.vocabularies,
            "annotations": spec.annotations,
            "patients": spec.patients,
        },
        "biobank": BIOBANK,
        "vocabularies": vocabs,
        "collections": collections_block,
        "concept_annotation_counts": annotation_counts,
        "queries": queries,
        "relationship_queries": relationship_queries,
        "quality_example": quality_example,
        "collection_quality_query": collection_quality_query,
        "refine_example": refine_example,
        "suggest": suggest,
    }


def write_scenario(spec: ScenarioSpec, out_dir: str | Path) -> dict[str, Path]:
    """Generate and write all four artifacts; returns their paths."""
    scenario = generate(spec)
    out = Path(out_dir)
    vocab_dir = out / "vocabulary"
    vocab_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "concepts": vocab_dir / "CONCEPT.tsv",
        "relationships": vocab_dir / "CONCEPT_RELATIONSHIP.tsv",
        "annotations": out / "annotations.csv",
        "ledger": out / "ledger.json",
    }
    paths["concepts"].write_text(scenario.concept_tsv(), encoding="utf-8")
    paths["relationships"].write_text(scenario.relationship_tsv(), encoding="utf-8")
    paths["annotations"].write_text(scenario.annotation_csv(), encoding="utf-8")
    paths["ledger"].write_text(scenario.ledger_json(), encoding="utf-8")
    return paths
