import json

import pytest

from bbcatalog.ingest import ingest_csv
from bbcatalog.repository import Repository
from bbcatalog.testdata import ScenarioSpec, write_scenario
from bbcatalog.vocabulary import load_vocabulary


@pytest.fixture(scope="session")
def scenario_paths(tmp_path_factory):
    out = tmp_path_factory.mktemp("scenario")
    return write_scenario(ScenarioSpec(), out)


@pytest.fixture(scope="session")
def scenario_store(scenario_paths):
    return load_vocabulary(scenario_paths["concepts"], scenario_paths["relationships"])


@pytest.fixture(scope="session")
def scenario_csv(scenario_paths) -> bytes:
    return scenario_paths["annotations"].read_bytes()


@pytest.fixture(scope="session")
def ledger(scenario_paths) -> dict:
    return json.loads(scenario_paths["ledger"].read_text(encoding="utf-8"))


@pytest.fixture
def scenario_repo(scenario_store, scenario_csv) -> Repository:
    """A freshly imported repository; safe for tests that write."""
    repo = Repository(scenario_store)
    report = ingest_csv(scenario_csv, scenario_store, repo)
    assert not [d for d in report.diagnostics if d.severity == "error"]
    return repo
