"""HTTP service backing the studio: projects, stage endpoints, generation,
evaluation, and reports.

Every endpoint is a thin adapter over the corresponding library call;
per-project writes are serialized through a single lock, and every stage's
artifact is retrievable before the next stage runs. Out-of-order stage
execution yields 409; failed validation yields 422 carrying the complete
violation list.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any

from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import PlainTextResponse

from egosim._ids import content_id
from egosim.config import ProjectConfig
from egosim.domain import ScenarioSpec, Violation
from egosim.errors import (
    EgosimError,
    InputError,
    OutOfOrderError,
    SchemaViolationError,
    StepFailure,
)
from egosim.evaluate import evaluate_record
from egosim.project import Project
from egosim.reporting import aggregate, export
from egosim.schemas import form_schemas
from egosim.trace import frames_from_dicts

_LOCKS: dict[str, threading.Lock] = {}
_LOCKS_GUARD = threading.Lock()


def _project_lock(project_id: str) -> threading.Lock:
    with _LOCKS_GUARD:
        return _LOCKS.setdefault(project_id, threading.Lock())


def _violations_detail(violations: list[Violation]) -> dict[str, Any]:
    return {"error": "validation failed", "violations": [v.to_dict() for v in violations]}


def create_app(projects_root: str | Path) -> FastAPI:
    root = Path(projects_root)
    root.mkdir(parents=True, exist_ok=True)
    app = FastAPI(title="egosim service")
    # The studio may be served from any static host; no credentials are used.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def open_project(project_id: str) -> Project:
        try:
            return Project.open(root / project_id)
        except InputError:
            raise HTTPException(404, detail={"error": f"project {project_id!r} not found"})

    @app.get("/schemas")
    def get_schemas() -> dict[str, Any]:
        return form_schemas()

    @app.post("/projects", status_code=201)
    def create_project(body: dict[str, Any] = Body(...)) -> dict[str, Any]:
        scenario_data = body.get("scenario")
        if not isinstance(scenario_data, dict):
            raise HTTPException(422, detail={"error": "body requires a scenario object"})
        if not scenario_data.get("id"):
            scenario_data = {**scenario_data, "id": content_id("scn", scenario_data)}
        try:
            scenario = ScenarioSpec.from_dict(scenario_data)
        except (KeyError, ValueError, TypeError) as exc:
            raise HTTPException(422, detail={"error": f"invalid scenario: {exc}"})
        config = ProjectConfig.from_dict(body.get("config") or {})
        project_id = content_id("proj", scenario.to_dict())
        with _project_lock(project_id):
            path = root / project_id
            if (path / "scenario.json").exists():
                existing = Project.open(path)
                if existing.scenario != scenario:
                    raise HTTPException(409, detail={"error": "project id collision"})
            else:
                Project.create(path, scenario, config)
        return {"project_id": project_id}

    @app.get("/projects")
    def list_projects() -> dict[str, Any]:
        ids = sorted(p.parent.name for p in root.glob("*/scenario.json"))
        return {"projects": ids}

    @app.get("/projects/{project_id}")
    def project_summary(project_id: str) -> dict[str, Any]:
        project = open_project(project_id)
        return {
            "project_id": project_id,
            "scenario": project.scenario.to_dict(),
            "completed_steps": project.store.completed_steps(),
            "videos": [record.id for record in project.list_videos()],
        }

    @app.post("/projects/{project_id}/steps/{step}")
    def run_step(
        project_id: str,
        step: int,
        body: dict[str, Any] | None = Body(None),
        force: bool = Query(False),
    ) -> dict[str, Any]:
        project = open_project(project_id)
        with _project_lock(project_id):
            try:
                return project.run_step(
                    step,
                    intervention_id=(body or {}).get("intervention_id"),
                    user_action_id=(body or {}).get("user_action_id"),
                    force=force,
                )
            except OutOfOrderError as exc:
                raise HTTPException(409, detail={"error": str(exc)})
            except StepFailure as failure:
                raise HTTPException(422, detail=_violations_detail(failure.violations))
            except InputError as exc:
                raise HTTPException(422, detail={"error": str(exc)})

    @app.get("/projects/{project_id}/steps/{step}")
    def get_step(project_id: str, step: int) -> dict[str, Any]:
        project = open_project(project_id)
        try:
            return project.read_step_document(step)
        except InputError as exc:
            raise HTTPException(404, detail={"error": str(exc)})

    @app.put("/projects/{project_id}/steps/{step}")
    def replace_step(
        project_id: str, step: int, body: dict[str, Any] = Body(...),
    ) -> dict[str, Any]:
        project = open_project(project_id)
        with _project_lock(project_id):
            try:
                return project.replace_step_document(step, body)
            except OutOfOrderError as exc:
                raise HTTPException(409, detail={"error": str(exc)})
            except SchemaViolationError as exc:
                raise HTTPException(422, detail=_violations_detail(exc.violations))
            except InputError as exc:
                raise HTTPException(404, detail={"error": str(exc)})

    @app.post("/projects/{project_id}/generate")
    def generate(project_id: str, body: dict[str, Any] = Body(...)) -> dict[str, Any]:
        project = open_project(project_id)
        with _project_lock(project_id):
            try:
                record = project.generate_for_seed(body.get("seed_id"))
            except OutOfOrderError as exc:
                raise HTTPException(409, detail={"error": str(exc)})
            except InputError as exc:
                raise HTTPException(404, detail={"error": str(exc)})
        return record.to_dict()

    @app.get("/projects/{project_id}/videos")
    def videos(project_id: str) -> dict[str, Any]:
        project = open_project(project_id)
        return {"videos": [record.to_dict() for record in project.list_videos()]}

    @app.post("/projects/{project_id}/evaluate")
    def evaluate(project_id: str, body: dict[str, Any] = Body(...)) -> dict[str, Any]:
        project = open_project(project_id)
        video_id = body.get("video_id")
        if not video_id:
            raise HTTPException(422, detail={"error": "video_id is required"})
        frames = None
        if body.get("trace") is not None:
            try:
                frames = frames_from_dicts(body["trace"])
            except (EgosimError, KeyError, ValueError, TypeError) as exc:
                raise HTTPException(422, detail={"error": f"invalid trace: {exc}"})
            project.write_trace(video_id, body["trace"])
        with _project_lock(project_id):
            try:
                score = evaluate_record(project, video_id, frames=frames)
            except SchemaViolationError as exc:
                raise HTTPException(422, detail=_violations_detail(exc.violations))
            except InputError as exc:
                raise HTTPException(422, detail={"error": str(exc)})
        return score.to_dict()

    @app.get("/projects/{project_id}/report")
    def report(project_id: str, format: str = Query("json")):
        project = open_project(project_id)
        rows = aggregate(project.read_analyses())
        try:
            document = export(rows, format)
        except InputError as exc:
            raise HTTPException(422, detail={"error": str(exc)})
        if format == "json":
            return json.loads(document)
        return PlainTextResponse(document)

    return app
