import random

import pytest
from hypothesis import given, settings, strategies as st

from bbcatalog.diagnostics import errors, warnings
from bbcatalog.ingest import (
    ANNOTATION_HEADER,
    AnnotationRow,
    IngestError,
    commit,
    ingest_csv,
    parse_annotations,
    serialize_records,
    stage,
)
from bbcatalog.repository import AttributeRecord, CollectionRecord, Repository
from bbcatalog.vocabulary import ConceptKey

from .oracles import random_world

HEADER = ",".join(ANNOTATION_HEADER)


@pytest.fixture(scope="module")
def world():
    return random_world(random.Random(3), max_concepts=40, max_edges=60)


def csv_text(*rows):
    return "\n".join([HEADER, *rows]) + "\n"


def test_parse_attribute_annotation_row():
    rows, diags = parse_annotations(csv_text("BBG,CRC1,bmi,39156-5,LOINC,0.85,,,,"))
    assert not diags
    (row,) = rows
    assert row.concept == ConceptKey("39156-5", "LOINC")
    assert row.attribute == "bmi"
    assert row.quality == {"completeness": 0.85}
    assert row.line == 2


def test_parse_collection_level_quality_row():
    rows, diags = parse_annotations(csv_text("BBG,CRC1,,,,0.90,,,,"))
    assert not diags
    (row,) = rows
    assert row.attribute == "" and row.concept is None
    assert row.quality == {"completeness": 0.90}


def test_percent_values_normalized():
    rows, _ = parse_annotations(csv_text("BBG,CRC1,bmi,,,85%,,50%,,"))
    assert rows[0].quality == {"completeness": 0.85, "reliability": 0.5}


def test_description_row_variant():
    rows, diags = parse_annotations(
        csv_text('BBG,CRC1,,_description,,,,,,,"Colorectal cohort, wave 1"')
    )
    assert not diags
    assert rows[0].description == "Colorectal cohort, wave 1"


def test_bad_header_is_fatal():
    with pytest.raises(IngestError, match="bad header"):
        parse_annotations("biobank,collection\nBBG,CRC1\n")
    with pytest.raises(IngestError, match="empty"):
        parse_annotations("")


def test_non_utf8_is_fatal():
    with pytest.raises(IngestError, match="UTF-8"):
        parse_annotations(HEADER.encode() + b"\nBBG,CRC1,bmi,x,\xff,0.5,,,,\n")


@pytest.mark.parametrize(
    "row, fragment",
    [
        ("BBG,CRC1,bmi,39156-5,,0.85,,,,", "supplied together"),
        ("BBG,CRC1,,39156-5,LOINC,,,,,", "collection-level"),
        ("BBG,CRC1,bmi,,,1.5,,,,", "bad completeness"),
        ("BBG,CRC1,bmi,,,150%,,,,", "bad completeness"),
        ("BBG,CRC1,bmi,,,abc,,,,", "bad completeness"),
        ("BBG,CRC1,bmi,,,,,,,", "no concept or quality"),
        (",CRC1,bmi,39156-5,LOINC,,,,,", "non-empty"),
        ("BBG,CRC1,bmi,39156-5,LOINC,,,,,,stray", "trailing"),
        ("BBG,CRC1,age,_description,,,,,,,text", "attribute cell empty"),
        ("BBG,CRC1,,_description,LOINC,,,,,,text", "vocabulary cell empty"),
        ("BBG,CRC1,,_description,,0.5,,,,,text", "no quality values"),
        ("BBG,CRC1,,_description,,,,,,", "trailing description cell"),
        ("BBG,CRC1,bmi", "expected 10 fields"),
    ],
)
def test_row_errors_reported_with_line(row, fragment):
    rows, diags = parse_annotations(csv_text(row))
    assert rows == []
    (diag,) = diags
    assert diag.severity == "error" and diag.line == 2
    assert fragment in diag.message


def test_blank_lines_skipped():
    rows, diags = parse_annotations(csv_text("", "BBG,CRC1,bmi,39156-5,LOINC,,,,,", ""))
    assert len(rows) == 1 and not diags


def test_stage_unions_concepts_per_attribute(world):
    rows, _ = parse_annotations(
        csv_text(
            "BBG,CRC1,age,C0,VA,0.8,,,,",
            "BBG,CRC1,age,C1,VB,,,,,",
        )
    )
    records, diags = stage(rows, world.store)
    (record,) = records
    (attr,) = record.attributes
    assert attr.annotations == {ConceptKey("C0", "VA"), ConceptKey("C1", "VB")}
    assert attr.quality == {"completeness": 0.8}
    assert not diags


def test_stage_last_wins_with_warning_on_conflict(world):
    rows, _ = parse_annotations(
        csv_text(
            "BBG,CRC1,,,,0.9,,,,",
            "BBG,CRC1,,,,0.7,,,,",
            "BBG,CRC1,,,,0.7,,,,",  # same value again: no extra warning
        )
    )
    records, diags = stage(rows, world.store)
    assert records[0].quality["completeness"] == 0.7
    assert len(warnings(diags)) == 1
    assert "respecified" in diags[0].message and diags[0].line == 3


def test_stage_flags_unresolved_concepts_but_keeps_them(world):
    rows, _ = parse_annotations(csv_text("BBG,CRC1,age,ghost,VX,,,,,"))
    records, diags = stage(rows, world.store)
    assert records[0].attributes[0].annotations == {ConceptKey("ghost", "VX")}
    assert len(warnings(diags)) == 1
    assert "unresolved" in diags[0].message


def test_stage_collects_description(world):
    rows, _ = parse_annotations(
        csv_text(
            "BBG,CRC1,,_description,,,,,,,first",
            "BBG,CRC1,,_description,,,,,,,second",
            "BBG,CRC1,age,C0,VA,,,,,",
        )
    )
    records, diags = stage(rows, world.store)
    assert records[0].description == "second"
    assert len(warnings(diags)) == 1


def test_commit_isolates_invalid_collections(world):
    repo = Repository(world.store)
    good = CollectionRecord(
        biobank="B", name="GOOD",
        attributes=(AttributeRecord(name="a", annotations=frozenset({ConceptKey("C0", "VA")})),),
    )
    bad = CollectionRecord(
        biobank="B", name="BAD",
        attributes=(
            AttributeRecord(name="a"),
            AttributeRecord(name="a"),  # duplicate attribute name
        ),
    )
    report = commit([good, bad], repo)
    assert report.collections_touched == 1
    assert ("B", "GOOD") in repo.state.collections
    assert ("B", "BAD") not in repo.state.collections
    assert len(errors(report.diagnostics)) == 1


def test_ingest_csv_end_to_end_idempotent(world):
    text = csv_text(
        "BBG,CRC1,,_description,,,,,,,cohort one",
        "BBG,CRC1,,,,0.9,0.8,,,",
        "BBG,CRC1,age,C0,VA,0.5,,,,",
        "BBG,CRC1,age,C1,VB,,,,,",
        "BBG,CRC2,sex,C2,VC,1.0,,,,",
    )
    repo_once = Repository(world.store)
    report = ingest_csv(text, world.store, repo_once)
    assert report.accepted_rows == 5
    assert report.collections_touched == 2
    repo_twice = Repository(world.store)
    ingest_csv(text, world.store, repo_twice)
    ingest_csv(text, world.store, repo_twice)
    assert repo_once.state.collections == repo_twice.state.collections
    assert repo_once.state.concept_index == repo_twice.state.concept_index


def test_serialize_parse_round_trip_hand_built(world):
    records = [
        CollectionRecord(
            biobank="BBG",
            name="CRC1",
            description='says "hi", twice',
            attributes=(
                AttributeRecord(
                    name="age",
                    annotations=frozenset({ConceptKey("C0", "VA"), ConceptKey("C1", "VB")}),
                    quality={"completeness": 0.55, "timeliness": 1.0},
                ),
                AttributeRecord(name="sex", quality={"accuracy": 0.25}),
            ),
            quality={"completeness": 0.9},
        )
    ]
    text = serialize_records(records)
    rows, parse_diags = parse_annotations(text)
    staged, stage_diags = stage(rows, world.store)
    assert not errors(parse_diags) and not errors(stage_diags)
    assert staged == records


names = st.text(
    alphabet=st.characters(min_codepoint=33, max_codepoint=126),
    min_size=1,
    max_size=12,
).filter(lambda s: s != "_description")
fractions = st.integers(min_value=0, max_value=100).map(lambda n: n / 100)


@st.composite
def staged_collections(draw):
    n_colls = draw(st.integers(min_value=1, max_value=4))
    records = []
    for i in range(n_colls):
        attributes = []
        for j in range(draw(st.integers(min_value=0, max_value=4))):
            annotations = frozenset(
                ConceptKey(draw(names), draw(names))
                for _ in range(draw(st.integers(min_value=0, max_value=3)))
            )
            quality = draw(
                st.dictionaries(
                    st.sampled_from(("completeness", "accuracy", "reliability")),
                    fractions,
                    max_size=3,
                )
            )
            if not annotations and not quality:
                quality = {"completeness": draw(fractions)}
            attributes.append(
                AttributeRecord(name=f"attr{j}", annotations=annotations, quality=quality)
            )
        quality = draw(
            st.dictionaries(
                st.sampled_from(("completeness", "consistency")), fractions, max_size=2
            )
        )
        if not attributes and not quality:
            quality = {"completeness": draw(fractions)}  # zero rows would vanish
        records.append(
            CollectionRecord(
                biobank=f"BB{i % 2}",
                name=f"COLL{i}",
                description=draw(st.one_of(st.just(""), names)),
                attributes=tuple(attributes),
                quality=quality,
            )
        )
    return records


@given(records=staged_collections())
@settings(max_examples=60, deadline=None)
def test_serialize_parse_round_trip_property(world, records):
    text = serialize_records(records)
    rows, parse_diags = parse_annotations(text)
    staged, _ = stage(rows, world.store)
    assert not errors(parse_diags)
    assert staged == records
