import json
from types import SimpleNamespace

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from bbcatalog.api import create_app
from bbcatalog.cli import main
from bbcatalog.repository import Repository

ARTIFACTS = ("CONCEPT.tsv", "CONCEPT_RELATIONSHIP.tsv")


@pytest.fixture(scope="module")
def cli_env(tmp_path_factory, scenario_paths):
    """A vocabulary directory plus a snapshot populated via `import`."""
    snapshot = tmp_path_factory.mktemp("cli") / "snapshot.json"
    vocab_dir = scenario_paths["concepts"].parent
    runner = CliRunner()
    result = runner.invoke(
        main,
        [
            "--vocab", str(vocab_dir),
            "--snapshot", str(snapshot),
            "import", str(scenario_paths["annotations"]),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "imported" in result.output
    return SimpleNamespace(runner=runner, vocab=str(vocab_dir), snapshot=str(snapshot))


def run(env, *args, json_out=False, expect=0):
    base = ["--vocab", env.vocab, "--snapshot", env.snapshot]
    if json_out:
        base.append("--json")
    result = env.runner.invoke(main, base + list(args))
    assert result.exit_code == expect, result.output
    return result


@pytest.fixture()
def api_client(scenario_store, scenario_csv):
    app = create_app(scenario_store, Repository(scenario_store))
    with TestClient(app) as client:
        response = client.post("/api/v1/collections/import", content=scenario_csv)
        assert response.status_code == 200
        yield client


def test_gen_testdata_is_seed_deterministic(tmp_path):
    runner = CliRunner()
    for out in ("a", "b"):
        result = runner.invoke(
            main, ["--seed", "1", "gen-testdata", "--out", str(tmp_path / out)]
        )
        assert result.exit_code == 0, result.output
        assert result.output.count("wrote") == 4
    for name in ("vocabulary/CONCEPT.tsv", "vocabulary/CONCEPT_RELATIONSHIP.tsv",
                 "annotations.csv", "ledger.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    result = runner.invoke(
        main, ["--seed", "2", "gen-testdata", "--out", str(tmp_path / "c")]
    )
    assert result.exit_code == 0
    assert (
        (tmp_path / "a" / "ledger.json").read_bytes()
        != (tmp_path / "c" / "ledger.json").read_bytes()
    )


def test_gen_testdata_rejects_impossible_dimensions(tmp_path):
    runner = CliRunner()
    result = runner.invoke(
        main, ["gen-testdata", "--out", str(tmp_path / "x"), "--concepts", "5"]
    )
    assert result.exit_code == 2
    assert "concepts" in result.output


def test_list_shows_all_collections(cli_env, ledger):
    result = run(cli_env, "list")
    assert f"{ledger['totals']['collections']} collection(s)" in result.output
    for name in ledger["collections"]:
        assert name in result.output


def test_export_round_trips_the_snapshot_file(cli_env):
    result = run(cli_env, "export")
    exported = json.loads(result.output)
    with open(cli_env.snapshot) as handle:
        assert exported == json.load(handle)
    assert result.output.strip() == open(cli_env.snapshot).read().strip()


def test_search_concepts_json_equals_api_response(cli_env, api_client, ledger):
    for query in ledger["queries"]:
        args = ["search", "concepts"]
        args += [f"{code}:{vocab}" for code, vocab in query["seeds"]]
        args += ["--operator", query["operator"]]
        args += ["--expansion" if query["expansion"] else "--no-expansion"]
        cli_body = json.loads(run(cli_env, *args, json_out=True).output)
        api_body = api_client.post(
            "/api/v1/search/concepts",
            json={
                "seeds": [{"code": c, "vocabulary": v} for c, v in query["seeds"]],
                "operator": query["operator"],
                "expansion": query["expansion"],
            },
        ).json()
        assert cli_body == api_body, query["id"]
        assert [h["name"] for h in cli_body["hits"]] == query["expected"], query["id"]


def test_search_relationship_json_equals_api_response(cli_env, api_client, ledger):
    query = ledger["relationship_queries"][0]
    code, vocab = query["attributing"]
    cli_body = json.loads(
        run(
            cli_env,
            "search", "relationship",
            query["vocabulary"], query["relationship"], f"{code}:{vocab}",
            json_out=True,
        ).output
    )
    api_body = api_client.post(
        "/api/v1/search/relationship",
        json={
            "vocabulary": query["vocabulary"],
            "relationship": query["relationship"],
            "attributing": {"code": code, "vocabulary": vocab},
        },
    ).json()
    assert cli_body == api_body
    assert [h["name"] for h in cli_body["hits"]] == query["expected"]


def test_search_quality_attribute(cli_env, ledger):
    example = ledger["quality_example"]
    code, vocab = example["concept"]
    body = json.loads(
        run(
            cli_env,
            "search", "quality-attribute",
            f"{code}:{vocab}", example["characteristic"],
            str(example["min"]), str(example["max"]),
            json_out=True,
        ).output
    )
    assert [h["name"] for h in body["hits"]] == example["expected"]


def test_search_quality_collection_human_output(cli_env, ledger):
    query = ledger["collection_quality_query"]
    result = run(
        cli_env,
        "search", "quality-collection",
        query["characteristic"], str(query["min"]), str(query["max"]),
    )
    assert f"{len(query['expected'])} collection(s)" in result.output
    for name in query["expected"]:
        assert name in result.output


def test_search_without_snapshot_fails(scenario_paths):
    runner = CliRunner()
    vocab_dir = str(scenario_paths["concepts"].parent)
    result = runner.invoke(
        main, ["--vocab", vocab_dir, "search", "concepts", "39156-5:LOINC"]
    )
    assert result.exit_code == 1
    assert "no repository" in result.output


def test_commands_need_a_vocabulary(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, ["list"])
    assert result.exit_code == 2
    assert "--vocab" in result.output

    result = runner.invoke(main, ["--vocab", str(tmp_path / "nowhere"), "list"])
    assert result.exit_code == 1
    assert "not found" in result.output


def test_unknown_seed_concept_fails(cli_env):
    result = run(cli_env, "search", "concepts", "ghost:SNOMED", expect=1)
    assert "unknown concept" in result.output


def test_malformed_concept_argument_is_usage_error(cli_env):
    result = run(cli_env, "search", "concepts", "39156-5", expect=2)
    assert "CODE:VOCABULARY" in result.output


def test_import_needs_snapshot(scenario_paths):
    runner = CliRunner()
    result = runner.invoke(
        main,
        [
            "--vocab", str(scenario_paths["concepts"].parent),
            "import", str(scenario_paths["annotations"]),
        ],
    )
    assert result.exit_code == 2
    assert "--snapshot" in result.output


def test_load_vocab_reports_counts(cli_env, ledger):
    result = run(cli_env, "load-vocab")
    assert f"loaded {ledger['totals']['concepts']} concepts" in result.output
    body = json.loads(run(cli_env, "load-vocab", json_out=True).output)
    assert body["concepts"] == ledger["totals"]["concepts"]
    assert body["diagnostics"] == []
    assert len(body["vocabularies"]) == ledger["totals"]["vocabularies"]
