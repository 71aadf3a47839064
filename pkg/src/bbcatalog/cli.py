"""Command-line surface: vocabulary loading, imports, searches, serving
and synthetic scenario generation.

Repository state persists between invocations through the --snapshot
file; the vocabulary is reloaded from --vocab on every run. With --json
the search commands print exactly the documents the HTTP API would
return for the same query.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .api import (
    collection_summary_to_json,
    create_app,
    ingest_report_to_json,
    search_result_to_json,
)
from .expansion import (
    EmptyQueryError,
    QueryOperator,
    UnknownConceptError,
    compile_query,
)
from .ingest import IngestError, ingest_csv
from .remote import RemoteConceptSource
from .repository import QUALITY_NAMES, Repository, SnapshotError
from .search import (
    QualityRange,
    RelationshipQuery,
    SearchResult,
    search_by_attribute_quality,
    search_by_collection_quality,
    search_by_concepts,
    search_by_relationship,
)
from .testdata import ScenarioError, ScenarioSpec, write_scenario
from .vocabulary import ConceptKey, VocabularyLoadError, VocabularyStore, load_vocabulary

VOCAB_CONCEPT_FILE = "CONCEPT.tsv"
VOCAB_RELATIONSHIP_FILE = "CONCEPT_RELATIONSHIP.tsv"


def _parse_concept_arg(text: str) -> ConceptKey:
    code, sep, vocabulary = text.rpartition(":")
    if not sep or not code or not vocabulary:
        raise click.UsageError(
            f"concept {text!r} must be written as CODE:VOCABULARY (e.g. 39156-5:LOINC)"
        )
    return ConceptKey(code, vocabulary)


def _load_store(ctx: click.Context) -> VocabularyStore:
    vocab_dir = ctx.obj.get("vocab")
    if not vocab_dir:
        raise click.UsageError("this command needs --vocab DIR")
    concept_path = Path(vocab_dir) / VOCAB_CONCEPT_FILE
    relationship_path = Path(vocab_dir) / VOCAB_RELATIONSHIP_FILE
    for path in (concept_path, relationship_path):
        if not path.is_file():
            raise click.ClickException(f"vocabulary file not found: {path}")
    try:
        return load_vocabulary(concept_path, relationship_path)
    except VocabularyLoadError as exc:
        raise click.ClickException(f"vocabulary load failed: {exc}")


def _load_repo(ctx: click.Context, store: VocabularyStore, require: bool = True) -> Repository:
    repo = Repository(store)
    snapshot = ctx.obj.get("snapshot")
    if snapshot and Path(snapshot).is_file():
        try:
            repo.load(snapshot)
        except SnapshotError as exc:
            raise click.ClickException(f"snapshot load failed: {exc}")
    elif require:
        raise click.ClickException(
            "no repository: pass --snapshot pointing at an imported snapshot"
        )
    return repo


def _emit_result(ctx: click.Context, result: SearchResult) -> None:
    if ctx.obj["json"]:
        click.echo(json.dumps(search_result_to_json(result), indent=2, sort_keys=True))
        return
    for warning in result.warnings:
        click.echo(f"warning: {warning}", err=True)
    if not result.hits:
        click.echo("no matching collections")
        return
    for hit in result.hits:
        click.echo(f"{hit.biobank} {hit.name}")
        for attr_name, concepts in hit.matched_attributes:
            rendered = ", ".join(f"{c.name} [{c.code}, {c.vocabulary}]" for c in concepts)
            click.echo(f"  {attr_name}: {rendered}")
        if hit.highlight is not None:
            h = hit.highlight
            where = f"attribute {h.attribute}" if h.scope == "attribute" else "collection"
            click.echo(f"  {h.characteristic}={h.value} ({where})")
    click.echo(f"{len(result.hits)} collection(s)")


quality_choice = click.Choice(QUALITY_NAMES)


@click.group()
@click.option("--vocab", type=click.Path(file_okay=False), envvar="BBCATALOG_VOCAB",
              help=f"Directory holding {VOCAB_CONCEPT_FILE} and {VOCAB_RELATIONSHIP_FILE}.")
@click.option("--snapshot", type=click.Path(dir_okay=False), envvar="BBCATALOG_SNAPSHOT",
              help="Repository snapshot JSON used for persistence between runs.")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable JSON output.")
@click.option("--seed", type=int, default=1, show_default=True,
              help="Random seed (used by gen-testdata).")
@click.pass_context
def main(ctx: click.Context, vocab: str | None, snapshot: str | None, as_json: bool, seed: int) -> None:
    """Concept-annotated collection catalog."""
    ctx.ensure_object(dict)
    ctx.obj.update(vocab=vocab, snapshot=snapshot, json=as_json, seed=seed)


@main.command("load-vocab")
@click.pass_context
def cmd_load_vocab(ctx: click.Context) -> None:
    """Load and validate the vocabulary files."""
    store = _load_store(ctx)
    if ctx.obj["json"]:
        click.echo(
            json.dumps(
                {
                    "concepts": store.concept_count,
                    "edges": store.edge_count,
                    "vocabularies": store.vocabularies(),
                    "diagnostics": [
                        {"line": d.line, "severity": d.severity, "message": d.message}
                        for d in store.diagnostics
                    ],
                },
                indent=2,
                sort_keys=True,
            )
        )
        return
    click.echo(
        f"loaded {store.concept_count} concepts in {len(store.vocabularies())} "
        f"vocabularies, {store.edge_count} relationship edges"
    )
    for diag in store.diagnostics:
        click.echo(f"  {diag}", err=True)


@main.command("import")
@click.argument("csv_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def cmd_import(ctx: click.Context, csv_file: str) -> None:
    """Import an annotation CSV into the snapshot repository."""
    if not ctx.obj.get("snapshot"):
        raise click.UsageError("import needs --snapshot to persist the repository")
    store = _load_store(ctx)
    repo = _load_repo(ctx, store, require=False)
    try:
        report = ingest_csv(Path(csv_file).read_bytes(), store, repo)
    except IngestError as exc:
        raise click.ClickException(str(exc))
    repo.save(ctx.obj["snapshot"])
    if ctx.obj["json"]:
        click.echo(json.dumps(ingest_report_to_json(report), indent=2, sort_keys=True))
        return
    click.echo(
        f"imported {report.accepted_rows} rows into {report.collections_touched} collection(s)"
    )
    for diag in report.diagnostics:
        click.echo(f"  {diag}", err=True)
    if any(d.severity == "error" for d in report.diagnostics):
        sys.exit(1)


@main.command("export")
@click.pass_context
def cmd_export(ctx: click.Context) -> None:
    """Print the repository snapshot JSON to stdout."""
    store = _load_store(ctx)
    repo = _load_repo(ctx, store)
    click.echo(json.dumps(repo.export_snapshot(), indent=2, sort_keys=True))


@main.command("list")
@click.pass_context
def cmd_list(ctx: click.Context) -> None:
    """List collections in the repository."""
    store = _load_store(ctx)
    repo = _load_repo(ctx, store)
    records = repo.list_collections()
    if ctx.obj["json"]:
        click.echo(
            json.dumps(
                {"collections": [collection_summary_to_json(r) for r in records]},
                indent=2,
                sort_keys=True,
            )
        )
        return
    for record in records:
        click.echo(
            f"{record.biobank} {record.name}: {len(record.attributes)} attributes, "
            f"{sum(len(a.annotations) for a in record.attributes)} annotations"
        )
    click.echo(f"{len(records)} collection(s)")


@main.group("search")
def search_group() -> None:
    """Run a search against the snapshot repository."""


@search_group.command("concepts")
@click.argument("concepts", nargs=-1, required=True)
@click.option("--operator", type=click.Choice(["AND", "OR"]), default="OR", show_default=True)
@click.option("--expansion/--no-expansion", default=True, show_default=True,
              help="Expand seeds over equivalence and hierarchy before matching.")
@click.pass_context
def cmd_search_concepts(ctx: click.Context, concepts: tuple[str, ...], operator: str, expansion: bool) -> None:
    """Search by seed concepts, written as CODE:VOCABULARY."""
    store = _load_store(ctx)
    repo = _load_repo(ctx, store)
    seeds = [_parse_concept_arg(c) for c in concepts]
    try:
        plan = compile_query(seeds, QueryOperator[operator], store, expansion=expansion)
    except EmptyQueryError as exc:
        raise click.UsageError(str(exc))
    except UnknownConceptError as exc:
        raise click.ClickException(str(exc))
    _emit_result(ctx, search_by_concepts(plan, repo, store))


@search_group.command("relationship")
@click.argument("vocabulary")
@click.argument("relationship")
@click.argument("attributing")
@click.pass_context
def cmd_search_relationship(ctx: click.Context, vocabulary: str, relationship: str, attributing: str) -> None:
    """Search by (relationship, attributing concept), e.g. LOINC "Has scale" SC-NOM:LOINC."""
    store = _load_store(ctx)
    repo = _load_repo(ctx, store)
    try:
        query = RelationshipQuery(
            vocabulary=vocabulary,
            relationship=relationship,
            attributing=_parse_concept_arg(attributing),
        )
    except ValueError as exc:
        raise click.ClickException(str(exc))
    _emit_result(ctx, search_by_relationship(query, repo, store))


@search_group.command("quality-collection")
@click.argument("characteristic", type=quality_choice)
@click.argument("minimum", type=float)
@click.argument("maximum", type=float)
@click.pass_context
def cmd_search_quality_collection(ctx: click.Context, characteristic: str, minimum: float, maximum: float) -> None:
    """Collections whose collection-level value lies in [MINIMUM, MAXIMUM]."""
    store = _load_store(ctx)
    repo = _load_repo(ctx, store)
    try:
        quality_range = QualityRange(characteristic=characteristic, min=minimum, max=maximum)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    _emit_result(ctx, search_by_collection_quality(quality_range, repo))


@search_group.command("quality-attribute")
@click.argument("concept")
@click.argument("characteristic", type=quality_choice)
@click.argument("minimum", type=float)
@click.argument("maximum", type=float)
@click.option("--expansion/--no-expansion", default=False, show_default=True,
              help="Accept the concept's whole closure as annotation evidence.")
@click.pass_context
def cmd_search_quality_attribute(
    ctx: click.Context, concept: str, characteristic: str, minimum: float, maximum: float, expansion: bool
) -> None:
    """Collections with an attribute annotated by CONCEPT whose value lies in the range."""
    store = _load_store(ctx)
    repo = _load_repo(ctx, store)
    key = _parse_concept_arg(concept)
    if store.resolve(key) is None:
        raise click.ClickException(f"unknown concept ({key.code}, {key.vocabulary})")
    try:
        quality_range = QualityRange(characteristic=characteristic, min=minimum, max=maximum)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    _emit_result(
        ctx,
        search_by_attribute_quality(key, quality_range, repo, store, expansion=expansion),
    )


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--remote-url", default="", envvar="BBCATALOG_REMOTE_URL",
              help="Base URL of an Athena-style concept service.")
@click.option("--remote-enabled", is_flag=True, envvar="BBCATALOG_REMOTE_ENABLED",
              help="Allow outbound remote concept lookups.")
@click.option("--remote-timeout", type=float, default=5.0, show_default=True)
@click.pass_context
def cmd_serve(ctx: click.Context, host: str, port: int, remote_url: str,
              remote_enabled: bool, remote_timeout: float) -> None:
    """Serve the HTTP JSON API."""
    import uvicorn

    store = _load_store(ctx)
    repo = _load_repo(ctx, store, require=False)
    source = RemoteConceptSource(
        base_url=remote_url, timeout=remote_timeout, enabled=remote_enabled
    )
    app = create_app(store, repo, remote_source=source)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command("gen-testdata")
@click.option("--out", type=click.Path(file_okay=False), required=True,
              help="Output directory for vocabulary/, annotations.csv, ledger.json.")
@click.option("--collections", type=int, default=10, show_default=True)
@click.option("--attributes", type=int, default=22, show_default=True)
@click.option("--concepts", type=int, default=90, show_default=True)
@click.option("--vocabularies", type=int, default=6, show_default=True)
@click.option("--annotations", type=int, default=526, show_default=True)
@click.option("--patients", type=int, default=206, show_default=True,
              help="Informational cohort size echoed into the ledger.")
@click.pass_context
def cmd_gen_testdata(ctx: click.Context, out: str, collections: int, attributes: int,
                     concepts: int, vocabularies: int, annotations: int, patients: int) -> None:
    """Generate the synthetic validation scenario."""
    spec = ScenarioSpec(
        collections=collections,
        attributes_per_collection=attributes,
        concepts=concepts,
        vocabularies=vocabularies,
        annotations=annotations,
        patients=patients,
        seed=ctx.obj["seed"],
    )
    try:
        paths = write_scenario(spec, out)
    except ScenarioError as exc:
        raise click.UsageError(str(exc))
    if ctx.obj["json"]:
        click.echo(json.dumps({k: str(v) for k, v in sorted(paths.items())}, indent=2))
        return
    for name in sorted(paths):
        click.echo(f"wrote {paths[name]}")


if __name__ == "__main__":
    main()
