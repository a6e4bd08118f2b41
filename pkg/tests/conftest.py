from __future__ import annotations

import sys

import pytest

from carbonsight.materials import MaterialDataset, normalize_name
from carbonsight.pipeline import PipelineConfig, run_pipeline
from carbonsight.study import bundled_dataset


@pytest.fixture(scope="session")
def dataset() -> MaterialDataset:
    return bundled_dataset()


@pytest.fixture(scope="session")
def decking(dataset):
    return dataset.record(9)


@pytest.fixture(scope="session")
def trio(dataset) -> MaterialDataset:
    """The three-record matching fixture: decking, cladding, flooring."""
    records = tuple(dataset.record(i) for i in (9, 21, 30))
    return MaterialDataset(
        records=records,
        name_index={normalize_name(r.material_name): r.id for r in records},
        source_label="trio",
    )


@pytest.fixture
def seeded_fixture_dir(tmp_path, dataset):
    """Record fixtures for a prompt by running the mock gateway once,
    returning a directory a replay run can answer from."""

    def seed(*prompts: str, condition: str = "t2i_insights"):
        fixtures = tmp_path / "fixtures"
        config = PipelineConfig(
            gateway_mode="mock", fixture_dir=fixtures, condition=condition
        )
        for prompt in prompts:
            run_pipeline(prompt, config, dataset=dataset)
        return fixtures

    return seed


def pytest_runtest_logreport(report):
    # one visible verdict line per acceptance criterion, capture or not
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].removeprefix("test_").replace("_", " ")
    status = "PASS" if report.passed else "FAIL"
    sys.stderr.write(f"[acceptance] {status}: {name}\n")
    sys.stderr.flush()
