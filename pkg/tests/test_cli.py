from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from egosim.cli import main
from egosim.domain import script_to_yaml
from egosim.pipeline import STEP_FILES
from tests.factories import make_script, make_trace_records

SCENARIO = {
    "title": "Stovetop frying",
    "description": "A user fries food in a small kitchen while multitasking.",
    "environment": "Kitchen & Food Prep",
    "hazard_category": "burn",
}


@pytest.fixture()
def runner() -> CliRunner:
    return CliRunner()


def write_scenario(tmp_path: Path) -> Path:
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(SCENARIO), encoding="utf-8")
    return path


def test_run_creates_all_artifact_files(tmp_path, runner) -> None:
    scenario = write_scenario(tmp_path)
    project_dir = tmp_path / "proj"
    result = runner.invoke(main, [
        "run", "--scenario", str(scenario), "--project", str(project_dir),
    ])
    assert result.exit_code == 0, result.output + str(result.stderr_bytes)
    summary = json.loads(result.output)
    assert summary["completed_steps"] == 5
    assert summary["scripts"] == 3
    for filename in STEP_FILES.values():
        assert (project_dir / filename).exists()


def test_step_out_of_order_fails_with_error_json(tmp_path, runner) -> None:
    scenario = write_scenario(tmp_path)
    project_dir = tmp_path / "proj"
    result = runner.invoke(main, [
        "run", "--scenario", str(scenario), "--project", str(project_dir),
    ])
    assert result.exit_code == 0
    # wipe later steps, then ask for step 5 directly after removing step 4
    (project_dir / STEP_FILES[4]).unlink()
    (project_dir / STEP_FILES[5]).unlink()
    result = runner.invoke(main, ["step", "5", "--project", str(project_dir)])
    assert result.exit_code == 1
    error = json.loads(result.stderr)
    assert error["error"]["type"] == "OutOfOrderError"


def test_step_runs_single_step(tmp_path, runner) -> None:
    scenario = write_scenario(tmp_path)
    project_dir = tmp_path / "proj"
    runner.invoke(main, ["run", "--scenario", str(scenario), "--project", str(project_dir)])
    (project_dir / STEP_FILES[5]).unlink()
    result = runner.invoke(main, ["step", "5", "--project", str(project_dir)])
    assert result.exit_code == 0, result.stderr
    assert len(json.loads(result.output)["scripts"]) == 3


def test_generate_and_evaluate_project_mode(tmp_path, runner) -> None:
    scenario = write_scenario(tmp_path)
    project_dir = tmp_path / "proj"
    runner.invoke(main, ["run", "--scenario", str(scenario), "--project", str(project_dir)])
    seeds = json.loads((project_dir / STEP_FILES[4]).read_text())["seeds"]

    result = runner.invoke(main, [
        "generate", "--project", str(project_dir), "--seed", seeds[0]["id"],
    ])
    assert result.exit_code == 0, result.stderr
    record = json.loads(result.output)
    assert record["status"] == "rendered"

    trace_path = tmp_path / "trace.json"
    trace_path.write_text(json.dumps(make_trace_records()), encoding="utf-8")
    result = runner.invoke(main, [
        "evaluate", "--project", str(project_dir),
        "--video", record["id"], "--trace", str(trace_path),
    ])
    assert result.exit_code == 0, result.stderr
    score = json.loads(result.output)
    assert score["video_id"] == record["id"]
    assert score["gate_status"] == "valid"


def test_evaluate_fixtures_mode_offline(tmp_path, runner) -> None:
    script_path = tmp_path / "script.yaml"
    script_path.write_text(script_to_yaml(make_script()), encoding="utf-8")
    trace_path = tmp_path / "trace.json"
    trace_path.write_text(json.dumps(make_trace_records()), encoding="utf-8")
    vlm_path = tmp_path / "vlm.json"
    vlm_path.write_text(json.dumps({
        "identified_hazard": "hot pan",
        "proposed_intervention": "warn the user",
        "intervention_urgency": 4,
        "events": [
            {"timestamp_s": 8.0, "event_type": "hazard_detected", "description": "pan"},
        ],
    }), encoding="utf-8")
    judge_path = tmp_path / "judge.json"
    judge_path.write_text(json.dumps({
        "helpfulness_score": 0.8, "tone_score": 0.9,
        "over_alert_flag": False, "reasoning": "solid warning",
    }), encoding="utf-8")

    result = runner.invoke(main, [
        "evaluate", "--script", str(script_path), "--trace", str(trace_path),
        "--vlm", str(vlm_path), "--judge", str(judge_path), "--alignment", "0.8",
    ])
    assert result.exit_code == 0, result.stderr
    score = json.loads(result.output)
    assert score["helpfulness"] == 0.8
    assert score["delta_t"] == -0.5  # detection 8.0 vs onset 8.5
    assert score["gate_status"] == "valid"


def test_report_on_empty_project_zero_rows(tmp_path, runner) -> None:
    scenario = write_scenario(tmp_path)
    project_dir = tmp_path / "proj"
    runner.invoke(main, ["run", "--scenario", str(scenario), "--project", str(project_dir)])
    result = runner.invoke(main, ["report", "--project", str(project_dir)])
    assert result.exit_code == 0, result.stderr
    assert (project_dir / "reports" / "report.json").exists()
    assert (project_dir / "reports" / "report.csv").exists()
    assert (project_dir / "reports" / "report.txt").exists()
    assert "All Modes" in result.output


def test_missing_fixture_flags_error(tmp_path, runner) -> None:
    script_path = tmp_path / "script.yaml"
    script_path.write_text(script_to_yaml(make_script()), encoding="utf-8")
    result = runner.invoke(main, ["evaluate", "--script", str(script_path)])
    assert result.exit_code == 1
    error = json.loads(result.stderr)
    assert "fixtures mode" in error["error"]["message"]
