"""Command line for the pipeline, synthesis, evaluation, and the service.

Commands exit 0 on success; on failure they print a machine-readable error
JSON document on stderr and exit nonzero.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import yaml

from egosim._ids import content_id
from egosim.config import ProjectConfig, load_config
from egosim.domain import ScenarioSpec
from egosim.errors import EgosimError, SchemaViolationError, StepFailure
from egosim.evaluate import evaluate_record, score_fixture
from egosim.pipeline import load_script_bundle, run_pipeline, verify_chain
from egosim.project import Project
from egosim.reporting import aggregate, export
from egosim.trace import load_trace


def _fail(kind: str, message: str, violations=None) -> None:
    error: dict = {"type": kind, "message": message}
    if violations:
        error["violations"] = [v.to_dict() for v in violations]
    click.echo(json.dumps({"error": error}), err=True)
    sys.exit(1)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except StepFailure as exc:
            _fail("step_failure", str(exc), exc.violations)
        except SchemaViolationError as exc:
            _fail("validation", str(exc), exc.violations)
        except EgosimError as exc:
            _fail(type(exc).__name__, str(exc))
        except FileNotFoundError as exc:
            _fail("missing_file", str(exc))

    return wrapper


def _load_scenario(path: Path) -> ScenarioSpec:
    text = path.read_text(encoding="utf-8")
    data = yaml.safe_load(text) if path.suffix in (".yaml", ".yml") else json.loads(text)
    if not data.get("id"):
        data["id"] = content_id("scn", data)
    return ScenarioSpec.from_dict(data)


def _open_or_create(project_dir: Path, scenario: ScenarioSpec | None,
                    config_path: Path | None) -> Project:
    if (project_dir / "scenario.json").exists():
        return Project.open(project_dir)
    if scenario is None:
        raise EgosimError(f"no project at {project_dir}; a --scenario file is required to create one")
    return Project.create(project_dir, scenario, load_config(config_path))


@click.group()
def main() -> None:
    """Egocentric assistance-scenario synthesis and evaluation."""


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--project", "project_dir", required=True, type=click.Path(path_type=Path))
@click.option("--config", "config_path", type=click.Path(exists=True, path_type=Path))
@handle_errors
def run(scenario_path: Path, project_dir: Path, config_path: Path | None) -> None:
    """Run the full five-step pipeline for a scenario."""
    scenario = _load_scenario(scenario_path)
    project = _open_or_create(project_dir, scenario, config_path)
    cfg = project.config
    run_pipeline(scenario, cfg.pipeline, project.store, cfg.gateway())
    violations = verify_chain(project.store)
    if violations:
        raise SchemaViolationError(violations)
    click.echo(json.dumps({
        "project": str(project.root),
        "completed_steps": project.store.completed_steps(),
        "retry_log": project.store.read_retry_log(),
        "scripts": len(project.store.read_scripts()),
    }, indent=2))


@main.command()
@click.argument("step_number", type=int, required=False)
@click.option("--step", "step_flag", type=int, default=None,
              help="Alternative to the positional step number.")
@click.option("--project", "project_dir", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--intervention", "intervention_id", default=None)
@click.option("--user-action", "user_action_id", default=None)
@click.option("--force", is_flag=True, default=False)
@handle_errors
def step(step_number: int | None, step_flag: int | None, project_dir: Path,
         intervention_id: str | None, user_action_id: str | None, force: bool) -> None:
    """Run a single pipeline step in an existing project."""
    chosen = step_flag if step_flag is not None else step_number
    if chosen is None:
        raise EgosimError("a step number is required (positional or --step)")
    project = Project.open(project_dir)
    document = project.run_step(
        chosen, intervention_id=intervention_id,
        user_action_id=user_action_id, force=force,
    )
    click.echo(json.dumps(document, indent=2))


@main.command()
@click.option("--project", "project_dir", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--seed", "seed_id", required=True)
@handle_errors
def generate(project_dir: Path, seed_id: str) -> None:
    """Render the video bound to a seed's script."""
    project = Project.open(project_dir)
    record = project.generate_for_seed(seed_id)
    click.echo(json.dumps(record.to_dict(), indent=2))


@main.command()
@click.option("--project", "project_dir", type=click.Path(exists=True, path_type=Path))
@click.option("--video", "video_id", default=None)
@click.option("--trace", "trace_path", type=click.Path(exists=True, path_type=Path))
@click.option("--script", "script_path", type=click.Path(exists=True, path_type=Path),
              help="Score-from-fixtures mode: script bundle or single script YAML.")
@click.option("--vlm", "vlm_path", type=click.Path(exists=True, path_type=Path))
@click.option("--judge", "judge_path", type=click.Path(exists=True, path_type=Path))
@click.option("--alignment", type=float, default=0.9, show_default=True)
@handle_errors
def evaluate(project_dir: Path | None, video_id: str | None, trace_path: Path | None,
             script_path: Path | None, vlm_path: Path | None, judge_path: Path | None,
             alignment: float) -> None:
    """Evaluate a project video, or score directly from fixture files."""
    if script_path is not None:
        if not (trace_path and vlm_path and judge_path):
            raise EgosimError("fixtures mode requires --script, --trace, --vlm, and --judge")
        script = load_script_bundle(script_path)[0]
        score = score_fixture(
            script,
            load_trace(trace_path),
            vlm_path.read_text(encoding="utf-8"),
            judge_path.read_text(encoding="utf-8"),
            alignment_score=alignment,
        )
        click.echo(json.dumps(score.to_dict(), indent=2))
        return
    if project_dir is None or video_id is None:
        raise EgosimError("project mode requires --project and --video")
    project = Project.open(project_dir)
    frames = load_trace(trace_path) if trace_path else None
    score = evaluate_record(project, video_id, frames=frames)
    click.echo(json.dumps(score.to_dict(), indent=2))


@main.command()
@click.option("--project", "project_dir", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--format", "formats", multiple=True, default=("json", "csv", "text"),
              show_default=True)
@handle_errors
def report(project_dir: Path, formats: tuple[str, ...]) -> None:
    """Aggregate a project's analyses into report files."""
    project = Project.open(project_dir)
    rows = aggregate(project.read_analyses())
    extensions = {"json": "report.json", "csv": "report.csv",
                  "text": "report.txt", "text-table": "report.txt"}
    written = []
    for fmt in formats:
        document = export(rows, fmt)
        written.append(str(project.write_report(document, extensions.get(fmt, f"report.{fmt}"))))
    click.echo(export(rows, "text"))
    click.echo(json.dumps({"written": written}, indent=2), err=False)


@main.command()
@click.option("--projects-root", default="./projects", show_default=True,
              type=click.Path(path_type=Path))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@handle_errors
def serve(projects_root: Path, host: str, port: int) -> None:
    """Start the HTTP service backing the studio UI."""
    import uvicorn

    from egosim.service import create_app

    uvicorn.run(create_app(projects_root), host=host, port=port)


if __name__ == "__main__":
    main()
