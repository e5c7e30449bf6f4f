from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from egosim.evaluate import evaluate_record
from egosim.project import Project
from egosim.service import create_app
from egosim.trace import frames_from_dicts
from tests.factories import make_scenario, make_trace_records

SCENARIO_BODY = {
    "title": "Stovetop frying",
    "description": "A user fries food in a small kitchen while multitasking.",
    "environment": "Kitchen & Food Prep",
    "hazard_category": "burn",
}


@pytest.fixture()
def client(tmp_path) -> TestClient:
    app = create_app(tmp_path / "projects")
    return TestClient(app)


def create_project(client: TestClient) -> str:
    response = client.post("/projects", json={"scenario": SCENARIO_BODY})
    assert response.status_code == 201, response.text
    return response.json()["project_id"]


def run_all_steps(client: TestClient, pid: str) -> None:
    for step in range(1, 6):
        response = client.post(f"/projects/{pid}/steps/{step}")
        assert response.status_code == 200, (step, response.text)


def test_create_project_and_summary(client) -> None:
    pid = create_project(client)
    summary = client.get(f"/projects/{pid}").json()
    assert summary["scenario"]["title"] == "Stovetop frying"
    assert summary["completed_steps"] == 0
    assert client.get("/projects").json()["projects"] == [pid]


def test_create_project_is_idempotent_for_identical_scenario(client) -> None:
    assert create_project(client) == create_project(client)


def test_stage_walkthrough_artifacts_retrievable(client) -> None:
    pid = create_project(client)
    for step in range(1, 6):
        run = client.post(f"/projects/{pid}/steps/{step}")
        assert run.status_code == 200
        got = client.get(f"/projects/{pid}/steps/{step}")
        assert got.status_code == 200
        assert got.json() == run.json()  # artifact retrievable before next stage
    assert client.get(f"/projects/{pid}").json()["completed_steps"] == 5


def test_out_of_order_step_execution_is_409(client) -> None:
    pid = create_project(client)
    response = client.post(f"/projects/{pid}/steps/3")
    assert response.status_code == 409
    client.post(f"/projects/{pid}/steps/1")
    response = client.post(f"/projects/{pid}/steps/3")
    assert response.status_code == 409


def test_get_unrun_step_is_404(client) -> None:
    pid = create_project(client)
    assert client.get(f"/projects/{pid}/steps/2").status_code == 404
    assert client.get(f"/projects/{pid}/steps/9").status_code == 404
    assert client.get("/projects/nope/steps/1").status_code == 404


def test_put_with_dangling_reference_is_422_with_violations(client) -> None:
    pid = create_project(client)
    client.post(f"/projects/{pid}/steps/1")
    client.post(f"/projects/{pid}/steps/2")
    document = client.get(f"/projects/{pid}/steps/2").json()
    document["user_actions"][0]["intervention_id"] = "itv-does-not-exist"
    response = client.put(f"/projects/{pid}/steps/2", json=document)
    assert response.status_code == 422
    violations = response.json()["detail"]["violations"]
    assert violations
    assert any(v["code"] == "dangling_reference" for v in violations)


def test_put_valid_edit_accepted_and_drops_later_steps(client) -> None:
    pid = create_project(client)
    run_all_steps(client, pid)
    document = client.get(f"/projects/{pid}/steps/2").json()
    document["user_actions"][0]["description"] = "reaching for the pan with a damp cloth"
    response = client.put(f"/projects/{pid}/steps/2", json=document)
    assert response.status_code == 200
    assert client.get(f"/projects/{pid}/steps/3").status_code == 404
    assert client.get(f"/projects/{pid}").json()["completed_steps"] == 2


def test_generate_and_evaluate_flow(client) -> None:
    pid = create_project(client)
    run_all_steps(client, pid)
    seeds = client.get(f"/projects/{pid}/steps/4").json()["seeds"]
    record = client.post(f"/projects/{pid}/generate", json={"seed_id": seeds[0]["id"]})
    assert record.status_code == 200
    video = record.json()
    assert video["status"] == "rendered"
    assert video["alignment_score"] == 0.9

    listed = client.get(f"/projects/{pid}/videos").json()["videos"]
    assert [v["id"] for v in listed] == [video["id"]]

    score = client.post(f"/projects/{pid}/evaluate", json={
        "video_id": video["id"], "trace": make_trace_records(),
    })
    assert score.status_code == 200, score.text
    body = score.json()
    assert body["gate_status"] == "valid"
    assert 0 <= body["overall"] <= 1

    report = client.get(f"/projects/{pid}/report").json()
    all_row = report["rows"][-1]
    assert all_row["mode_label"] == "All Modes"
    assert all_row["total"] == 1


def test_generate_before_scripts_is_409(client) -> None:
    pid = create_project(client)
    response = client.post(f"/projects/{pid}/generate", json={"seed_id": "seed-x"})
    assert response.status_code == 409


def test_generate_unknown_seed_is_404(client) -> None:
    pid = create_project(client)
    run_all_steps(client, pid)
    response = client.post(f"/projects/{pid}/generate", json={"seed_id": "seed-x"})
    assert response.status_code == 404


def test_evaluate_without_trace_is_422(client) -> None:
    pid = create_project(client)
    run_all_steps(client, pid)
    seeds = client.get(f"/projects/{pid}/steps/4").json()["seeds"]
    video = client.post(f"/projects/{pid}/generate", json={"seed_id": seeds[0]["id"]}).json()
    response = client.post(f"/projects/{pid}/evaluate", json={"video_id": video["id"]})
    assert response.status_code == 422


def test_report_empty_project_has_zero_totals(client) -> None:
    pid = create_project(client)
    rows = client.get(f"/projects/{pid}/report").json()["rows"]
    assert all(row["total"] == 0 for row in rows)
    text = client.get(f"/projects/{pid}/report", params={"format": "text"})
    assert text.status_code == 200
    assert "All Modes" in text.text


def test_schemas_endpoint_serves_form_descriptions(client) -> None:
    schemas = client.get("/schemas").json()
    assert set(schemas) == {"step1", "step2", "step3", "step4", "step5"}
    step4_fields = {f["name"] for f in schemas["step4"]["item_fields"]}
    assert "mode" in step4_fields and "user_utterance" in step4_fields


def test_service_equals_direct_library_calls(tmp_path, client) -> None:
    """Thin-adapter invariant: endpoint outputs equal library outputs byte for byte."""
    pid = create_project(client)
    run_all_steps(client, pid)
    seeds = client.get(f"/projects/{pid}/steps/4").json()["seeds"]
    service_video = client.post(
        f"/projects/{pid}/generate", json={"seed_id": seeds[0]["id"]}
    ).json()
    trace = make_trace_records()
    service_score = client.post(f"/projects/{pid}/evaluate", json={
        "video_id": service_video["id"], "trace": trace,
    }).json()

    from egosim.domain import ScenarioSpec
    from egosim.pipeline import run_pipeline

    scenario_dict = client.get(f"/projects/{pid}").json()["scenario"]
    direct_root = tmp_path / "direct"
    project = Project.create(direct_root, ScenarioSpec.from_dict(scenario_dict))

    run_pipeline(project.scenario, project.config.pipeline, project.store,
                 project.config.gateway())
    direct_video = project.generate_for_seed(seeds[0]["id"])
    assert json.dumps(direct_video.to_dict(), sort_keys=True) == \
        json.dumps(service_video, sort_keys=True)

    direct_score = evaluate_record(project, direct_video.id, frames=frames_from_dicts(trace))
    assert json.dumps(direct_score.to_dict(), sort_keys=True) == \
        json.dumps(service_score, sort_keys=True)
