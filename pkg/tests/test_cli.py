import json

import pytest
from click.testing import CliRunner

from carbonsight.cli import main
from carbonsight.materials import serialize_dataset


@pytest.fixture
def runner():
    # click >= 8.2 separates stderr from stdout by default
    return CliRunner()


@pytest.fixture
def dataset_file(tmp_path, dataset):
    path = tmp_path / "materials.json"
    path.write_bytes(serialize_dataset(dataset))
    return path


def stderr_error(result) -> dict:
    line = result.stderr.strip().splitlines()[-1]
    return json.loads(line)


# ---------------------------------------------------------------------------
# dataset validate


def test_validate_clean_dataset(runner, dataset_file):
    result = runner.invoke(main, ["dataset", "validate", str(dataset_file)])
    assert result.exit_code == 0
    assert result.output == f"ok: {dataset_file}\n"


def test_validate_reports_each_violation(runner, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(
        json.dumps(
            [
                {"id": 1, "material_name": "A (per kg)", "functional_unit_unit": "kg",
                 "functional_unit_quantity": 1, "carbon_a1a3": 1, "carbon_a5": 0,
                 "carbon_c1c4": 0, "total_biogenic_co2e": 0},
                {"id": 1, "material_name": "B (per kg)", "functional_unit_unit": "kg",
                 "functional_unit_quantity": 1, "carbon_a1a3": -2, "carbon_a5": 0,
                 "carbon_c1c4": 0, "total_biogenic_co2e": 0},
            ]
        )
    )
    result = runner.invoke(main, ["dataset", "validate", str(bad)])
    assert result.exit_code == 3
    assert "must be >= 0" in result.output
    assert len(result.output.strip().splitlines()) >= 1


def test_validate_missing_file_is_usage_error(runner, tmp_path):
    result = runner.invoke(main, ["dataset", "validate", str(tmp_path / "absent.json")])
    assert result.exit_code == 2  # click usage error


# ---------------------------------------------------------------------------
# match


def test_match_lexical_output(runner, dataset_file):
    result = runner.invoke(
        main, ["match", "hardwood deck boards", "--dataset", str(dataset_file)]
    )
    assert result.exit_code == 0
    lines = [json.loads(line) for line in result.output.strip().splitlines()]
    chosen, candidates = lines[0], lines[1:]
    assert chosen["record_id"] == 9
    assert chosen["method"] == "lexical"
    assert len(candidates) == 5
    assert candidates[0]["candidate"] == 9


def test_match_exact_name(runner, dataset_file):
    result = runner.invoke(
        main, ["match", "Decking, Hardwood (per m3)", "--dataset", str(dataset_file)]
    )
    chosen = json.loads(result.output.strip().splitlines()[0])
    assert chosen["method"] == "exact"
    assert chosen["score"] == 1.0


def test_match_mock_backend(runner, dataset_file):
    result = runner.invoke(
        main,
        ["match", "hardwood deck boards", "--dataset", str(dataset_file),
         "--backend", "mock", "--top", "3"],
    )
    assert result.exit_code == 0
    chosen = json.loads(result.output.strip().splitlines()[0])
    assert chosen["method"] == "vlm"


def test_match_bad_backend_flag(runner, dataset_file):
    result = runner.invoke(
        main, ["match", "x", "--dataset", str(dataset_file), "--backend", "tape:xyz"]
    )
    assert result.exit_code == 2


def test_match_empty_description_exit_code(runner, dataset_file):
    result = runner.invoke(main, ["match", "   ", "--dataset", str(dataset_file)])
    assert result.exit_code == 3
    assert stderr_error(result)["code"] == "empty_description"


# ---------------------------------------------------------------------------
# gen


def test_gen_json_report(runner, dataset_file):
    result = runner.invoke(
        main,
        ["gen", "--prompt", "a stone bathroom", "--dataset", str(dataset_file)],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report["condition_visibility"] == "metrics_shown"
    assert len(report["insights"]) == 10


def test_gen_t2i_only_text(runner, dataset_file):
    result = runner.invoke(
        main,
        ["gen", "--prompt", "a stone bathroom", "--dataset", str(dataset_file),
         "--condition", "t2i_only", "--format", "text_table"],
    )
    assert result.exit_code == 0
    assert "not shown in this condition" in result.output
    assert result.output.count("\n") == result.output.rstrip().count("\n") + 1


def test_gen_saves_image(runner, dataset_file, tmp_path):
    out = tmp_path / "room.png"
    result = runner.invoke(
        main,
        ["gen", "--prompt", "a stone bathroom", "--dataset", str(dataset_file),
         "--save-image", str(out)],
    )
    assert result.exit_code == 0
    assert out.read_bytes().startswith(b"\x89PNG")


def test_gen_records_fixtures_then_replays(runner, dataset_file, tmp_path):
    fixtures = tmp_path / "fixtures"
    first = runner.invoke(
        main,
        ["gen", "--prompt", "a walnut library", "--dataset", str(dataset_file),
         "--mode", "mock", "--fixtures", str(fixtures)],
    )
    assert first.exit_code == 0
    replayed = runner.invoke(
        main,
        ["gen", "--prompt", "a walnut library", "--dataset", str(dataset_file),
         "--mode", "replay", "--fixtures", str(fixtures)],
    )
    assert replayed.exit_code == 0
    assert replayed.output == first.output.replace('"mode":"mock"', '"mode":"replay"')


def test_gen_replay_miss_exit_code(runner, dataset_file, tmp_path):
    empty = tmp_path / "no-fixtures"
    empty.mkdir()
    result = runner.invoke(
        main,
        ["gen", "--prompt", "never recorded", "--dataset", str(dataset_file),
         "--mode", "replay", "--fixtures", str(empty)],
    )
    assert result.exit_code == 5
    error = stderr_error(result)
    assert error["code"] == "pipeline_stage_error"
    assert error["message"].startswith("t2i: ReplayMiss:")


# ---------------------------------------------------------------------------
# study


def run_study_session(runner, dataset_file, store, condition="T1", sid_holder=None):
    created = runner.invoke(
        main,
        ["study", "new", "--participant", "p1", "--condition", condition,
         "--store", str(store)],
    )
    assert created.exit_code == 0, created.output
    sid = json.loads(created.output)["session_id"]
    if sid_holder is not None:
        sid_holder.append(sid)
    iterated = runner.invoke(
        main,
        ["study", "iterate", "--session", sid, "--prompt", "a quiet room",
         "--store", str(store), "--dataset", str(dataset_file)],
    )
    assert iterated.exit_code == 0, iterated.output
    return sid


def test_study_flow(runner, dataset_file, tmp_path):
    store = tmp_path / "sessions"
    sid = run_study_session(runner, dataset_file, store, condition="T3")

    reflected = runner.invoke(
        main,
        ["study", "reflect", "--session", sid, "--iteration", "1",
         "--text", "too dark", "--store", str(store)],
    )
    assert reflected.exit_code == 0
    assert json.loads(reflected.output)["iteration"] == 1

    finalized = runner.invoke(
        main,
        ["study", "finalize", "--session", sid, "--satisfaction", "yes",
         "--sustainability", "somewhat", "--insights-useful", "no",
         "--store", str(store)],
    )
    assert finalized.exit_code == 0
    assert json.loads(finalized.output)["status"] == "complete"

    summary = runner.invoke(
        main, ["study", "summarize", str(store), "--format", "json"]
    )
    assert summary.exit_code == 0
    table = json.loads(summary.output)["conditions"]
    assert table["T3"]["satisfaction_pct"] == 100.0
    assert table["T3"]["insights_useful_pct"] == 0.0


def test_study_sixth_iteration_exit_code(runner, dataset_file, tmp_path):
    store = tmp_path / "sessions"
    sid = run_study_session(runner, dataset_file, store)
    for i in range(4):
        ok = runner.invoke(
            main,
            ["study", "iterate", "--session", sid, "--prompt", f"design {i}",
             "--store", str(store), "--dataset", str(dataset_file)],
        )
        assert ok.exit_code == 0
    sixth = runner.invoke(
        main,
        ["study", "iterate", "--session", sid, "--prompt", "one more",
         "--store", str(store), "--dataset", str(dataset_file)],
    )
    assert sixth.exit_code == 6
    assert stderr_error(sixth)["code"] == "attempt_limit_exceeded"


def test_study_summarize_open_session_exit_code(runner, dataset_file, tmp_path):
    store = tmp_path / "sessions"
    run_study_session(runner, dataset_file, store)
    result = runner.invoke(main, ["study", "summarize", str(store)])
    assert result.exit_code == 6
    assert stderr_error(result)["code"] == "incomplete_study"


def test_study_summarize_empty_store(runner, tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    result = runner.invoke(main, ["study", "summarize", str(empty)])
    assert result.exit_code == 0
    assert result.output == "no sessions\n"


def test_study_missing_session_exit_code(runner, dataset_file, tmp_path):
    store = tmp_path / "sessions"
    store.mkdir()
    result = runner.invoke(
        main,
        ["study", "iterate", "--session", "ghost", "--prompt", "x",
         "--store", str(store), "--dataset", str(dataset_file)],
    )
    assert result.exit_code == 4
    assert stderr_error(result)["code"] == "session_not_found"


def test_cli_and_service_agree_on_identical_study_flow(runner, dataset_file, tmp_path):
    """The same T3 flow through the CLI and the HTTP service must yield the
    same iteration report and the same study summary."""
    from fastapi.testclient import TestClient

    from carbonsight.service import ServiceConfig, create_app

    prompt = "a cork-floored reading nook"
    answers = {"satisfaction": "yes", "sustainability": "somewhat", "useful": "no"}

    store = tmp_path / "cli-sessions"
    sid = None
    created = runner.invoke(
        main,
        ["study", "new", "--participant", "p1", "--condition", "T3",
         "--store", str(store)],
    )
    sid = json.loads(created.output)["session_id"]
    iterated = runner.invoke(
        main,
        ["study", "iterate", "--session", sid, "--prompt", prompt,
         "--store", str(store), "--dataset", str(dataset_file)],
    )
    assert iterated.exit_code == 0, iterated.output
    cli_iteration = json.loads(iterated.output)
    finalized = runner.invoke(
        main,
        ["study", "finalize", "--session", sid,
         "--satisfaction", answers["satisfaction"],
         "--sustainability", answers["sustainability"],
         "--insights-useful", answers["useful"],
         "--store", str(store)],
    )
    assert finalized.exit_code == 0, finalized.output
    cli_summary = runner.invoke(
        main, ["study", "summarize", str(store), "--format", "json"]
    )
    assert cli_summary.exit_code == 0

    client = TestClient(
        create_app(
            ServiceConfig(
                dataset_path=dataset_file,
                session_dir=tmp_path / "svc-sessions",
                gateway_mode="mock",
            )
        )
    )
    resp = client.post(
        "/sessions", json={"participant_label": "p1", "condition": "T3"}
    )
    svc_sid = resp.json()["session_id"]
    svc_iteration = client.post(
        f"/sessions/{svc_sid}/iterations", json={"prompt": prompt}
    ).json()
    assert client.post(
        f"/sessions/{svc_sid}/finalize",
        json={
            "satisfaction": answers["satisfaction"],
            "sustainability_considered": answers["sustainability"],
            "insights_useful": answers["useful"],
        },
    ).status_code == 200
    svc_summary = client.get("/study/summary").json()

    # Reports are mock-deterministic; timestamps are the only wall-clock field.
    for key in ("index", "prompt", "report"):
        assert cli_iteration[key] == svc_iteration[key]
    assert json.loads(cli_summary.output) == svc_summary


# ---------------------------------------------------------------------------
# serve --check


def test_serve_check(runner, dataset_file, tmp_path):
    config = tmp_path / "service.json"
    config.write_text(
        json.dumps(
            {
                "dataset_path": str(dataset_file),
                "session_dir": str(tmp_path / "sessions"),
            }
        )
    )
    result = runner.invoke(main, ["serve", "--config", str(config), "--check"])
    assert result.exit_code == 0, result.output
    assert result.output == f"ok: {config}\n"


def test_serve_check_bad_config(runner, tmp_path):
    config = tmp_path / "service.json"
    config.write_text('{"dataset_path": "/absent.json", "session_dir": "/tmp/x"}')
    result = runner.invoke(main, ["serve", "--config", str(config), "--check"])
    assert result.exit_code == 3
    assert stderr_error(result)["code"] == "config_error"


def test_usage_error_exit_code(runner):
    result = runner.invoke(main, ["match"])  # missing required args
    assert result.exit_code == 2
