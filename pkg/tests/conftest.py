from __future__ import annotations

import warnings
from pathlib import Path

import pytest
from click.testing import CliRunner

from polariscope.cli import main

warnings.filterwarnings("ignore", message=".*starlette.testclient.*")

PIPELINE_STAGES = [
    ["ingest", "--fixture"],
    ["annotate"],
    ["clean"],
    ["train", "--dim", "16", "--epochs", "10", "--seed", "3"],
    ["embed-load", "--fixture"],
    ["index", "--trees", "20", "--seed", "5"],
    ["classify", "--split-seed", "11"],
    ["polarize", "--k", "4"],
]


def run_pipeline(workdir: Path, stages=None) -> list[str]:
    runner = CliRunner()
    outputs = []
    for stage in stages or PIPELINE_STAGES:
        result = runner.invoke(
            main, [stage[0], "--workdir", str(workdir), *stage[1:]], catch_exceptions=False
        )
        assert result.exit_code == 0, f"{stage}: {result.output}"
        outputs.append(result.output)
    return outputs


@pytest.fixture(scope="session")
def fixture_workdir(tmp_path_factory) -> Path:
    """The bundled 12-politician corpus run through the full pipeline once."""
    workdir = tmp_path_factory.mktemp("pipeline")
    run_pipeline(workdir)
    return workdir


@pytest.fixture(scope="session")
def fixture_snapshot(fixture_workdir):
    from polariscope.service import Snapshot

    return Snapshot.load(fixture_workdir)


@pytest.fixture(scope="session")
def api_client(fixture_snapshot):
    from fastapi.testclient import TestClient

    from polariscope.service import create_app

    return TestClient(create_app(fixture_snapshot))
