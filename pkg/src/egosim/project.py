"""Project directory layout and persistence.

A project is a plain directory: the pipeline artifact files at the root,
plus media/, videos/, traces/, analysis/, and reports/ subdirectories and a
project.yaml holding the configuration. The tree itself is the source of
truth; there is no database.
"""

from __future__ import annotations

import json
from pathlib import Path

import yaml

from egosim.config import ProjectConfig
from egosim.domain import ScenarioSpec, ScriptContract, VideoRecord
from egosim.errors import InputError
from egosim.pipeline import ArtifactStore
from egosim.scoring import VideoScore
from egosim.trace import FrameObservation, load_trace

CONFIG_FILE = "project.yaml"
SUBDIRS = ("media", "videos", "traces", "analysis", "reports")


class Project:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.store = ArtifactStore(self.root)
        for sub in SUBDIRS:
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._config: ProjectConfig | None = None

    @classmethod
    def create(
        cls,
        root: str | Path,
        scenario: ScenarioSpec,
        config: ProjectConfig | None = None,
    ) -> "Project":
        project = cls(root)
        if project.store.has_scenario():
            raise InputError(f"project at {root} already exists")
        project.store.write_scenario(scenario)
        project.write_config(config or ProjectConfig())
        return project

    @classmethod
    def open(cls, root: str | Path) -> "Project":
        project = cls(root)
        if not project.store.has_scenario():
            raise InputError(f"no project found at {root} (missing scenario.json)")
        return project

    # -- configuration -------------------------------------------------------

    @property
    def config(self) -> ProjectConfig:
        if self._config is None:
            path = self.root / CONFIG_FILE
            if path.exists():
                data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
                self._config = ProjectConfig.from_dict(data)
            else:
                self._config = ProjectConfig()
        return self._config

    def write_config(self, config: ProjectConfig) -> None:
        text = yaml.safe_dump(config.to_dict(), sort_keys=False)
        (self.root / CONFIG_FILE).write_text(text, encoding="utf-8")
        self._config = config

    @property
    def scenario(self) -> ScenarioSpec:
        return self.store.read_scenario()

    # -- videos and media -----------------------------------------------------

    def video_path(self, video_id: str) -> Path:
        return self.root / "videos" / f"{video_id}.json"

    def write_video(self, record: VideoRecord) -> None:
        self.video_path(record.id).write_text(
            json.dumps(record.to_dict(), indent=2) + "\n", encoding="utf-8"
        )

    def read_video(self, video_id: str) -> VideoRecord | None:
        path = self.video_path(video_id)
        if not path.exists():
            return None
        return VideoRecord.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def list_videos(self) -> list[VideoRecord]:
        records = []
        for path in sorted((self.root / "videos").glob("*.json")):
            records.append(VideoRecord.from_dict(json.loads(path.read_text(encoding="utf-8"))))
        return records

    def write_media(self, handle: str, data: bytes) -> Path:
        path = self.root / "media" / f"{handle}.bin"
        path.write_bytes(data)
        return path

    # -- traces and analyses ----------------------------------------------------

    def trace_path(self, video_id: str) -> Path:
        return self.root / "traces" / f"{video_id}.json"

    def read_trace(self, video_id: str) -> list[FrameObservation]:
        path = self.trace_path(video_id)
        if not path.exists():
            raise InputError(
                f"no trace stored for video {video_id!r}; supply one explicitly"
            )
        return load_trace(path)

    def write_trace(self, video_id: str, frames_json: list[dict]) -> None:
        self.trace_path(video_id).write_text(
            json.dumps(frames_json, indent=2) + "\n", encoding="utf-8"
        )

    def write_analysis(self, score: VideoScore) -> Path:
        path = self.root / "analysis" / f"{score.video_id}.json"
        path.write_text(json.dumps(score.to_dict(), indent=2) + "\n", encoding="utf-8")
        return path

    def read_analyses(self) -> list[VideoScore]:
        scores = []
        for path in sorted((self.root / "analysis").glob("*.json")):
            scores.append(VideoScore.from_dict(json.loads(path.read_text(encoding="utf-8"))))
        return scores

    def write_report(self, content: str, filename: str) -> Path:
        path = self.root / "reports" / filename
        path.write_text(content, encoding="utf-8")
        return path

    # -- scripts ---------------------------------------------------------------

    def find_script(self, script_ref: str) -> ScriptContract:
        from egosim.synthesis import script_id

        if not self.store.has_step(5):
            raise InputError("project has no generated scripts yet")
        for contract in self.store.read_scripts():
            if script_id(contract) == script_ref:
                return contract
        raise InputError(f"no script with ref {script_ref!r} in this project")

    # -- stage execution ----------------------------------------------------

    def read_step_document(self, step: int) -> dict:
        """The artifact document exactly as stored (JSON object for every step)."""
        from egosim.pipeline import STEP_FILES

        if step not in STEP_FILES:
            raise InputError(f"step {step} does not exist")
        path = self.store.step_path(step)
        if not path.exists():
            raise InputError(f"step {step} has not run yet")
        if step == 5:
            return yaml.safe_load(path.read_text(encoding="utf-8"))
        return json.loads(path.read_text(encoding="utf-8"))

    def run_step(
        self,
        step: int,
        intervention_id: str | None = None,
        user_action_id: str | None = None,
        force: bool = False,
    ) -> dict:
        """Run one pipeline step, returning its artifact document.

        Steps must run in order (OutOfOrderError otherwise). Re-running a
        completed step is a no-op unless ``force``, which also drops every
        later step file to keep progress monotone.
        """
        from egosim.errors import OutOfOrderError, StepFailure
        from egosim.pipeline import (
            STEP_FILES,
            select_chain,
            step1_generate_interventions,
            step2_derive_user_actions,
            step3_specify_signals,
            step4_bind_modes,
            step5_generate_script,
        )

        if step not in STEP_FILES:
            raise InputError(f"step {step} does not exist")
        store = self.store
        if store.completed_steps() < step - 1:
            raise OutOfOrderError(
                f"cannot run step {step}: step {store.completed_steps() + 1} has not completed"
            )
        if store.has_step(step) and not force:
            return self.read_step_document(step)
        if force:
            for later in range(step, 6):
                if store.has_step(later):
                    store.step_path(later).unlink()

        cfg = self.config.pipeline
        gateway = self.config.gateway()
        retry_log = store.read_retry_log()
        try:
            if step == 1:
                interventions = step1_generate_interventions(
                    self.scenario, cfg, gateway, retry_log,
                )
                store.write_step1(self.scenario.id, interventions)
            elif step == 2:
                actions = []
                for i, intervention in enumerate(store.read_step1()):
                    actions.extend(step2_derive_user_actions(
                        intervention, cfg, gateway, retry_log, item_index=i,
                    ))
                store.write_step2(actions)
            elif step == 3:
                signals = []
                for i, action in enumerate(store.read_step2()):
                    signals.extend(step3_specify_signals(
                        action, cfg, gateway, retry_log, item_index=i,
                    ))
                store.write_step3(signals)
            elif step == 4:
                selection = select_chain(
                    store, cfg,
                    intervention_id=intervention_id,
                    user_action_id=user_action_id,
                )
                seeds = step4_bind_modes(
                    selection.intervention, selection.action, selection.signals,
                    cfg, gateway, retry_log,
                )
                store.write_step4(seeds)
            else:
                index = store.index()
                scripts = [
                    step5_generate_script(seed, cfg, gateway, index, retry_log, item_index=i)
                    for i, seed in enumerate(store.read_step4())
                ]
                store.write_scripts(scripts)
        except StepFailure as failure:
            store.record_failure(failure.step, failure.raw_payloads)
            raise
        finally:
            store.write_retry_log(retry_log)
        return self.read_step_document(step)

    def replace_step_document(self, step: int, document: dict) -> dict:
        """Replace a step artifact with a user edit after full re-validation.

        Accepting an edit invalidates everything derived from the previous
        artifact, so later step files are dropped (monotone progress).
        """
        from egosim.errors import OutOfOrderError, SchemaViolationError
        from egosim.pipeline import STEP_FILES, validate_artifact_document

        if step not in STEP_FILES:
            raise InputError(f"step {step} does not exist")
        store = self.store
        if store.completed_steps() < step - 1:
            raise OutOfOrderError(
                f"cannot replace step {step} before earlier steps complete"
            )
        violations = validate_artifact_document(store, step, document)
        if violations:
            raise SchemaViolationError(violations)
        for later in range(step + 1, 6):
            if store.has_step(later):
                store.step_path(later).unlink()
        if step == 5:
            text = yaml.safe_dump(document, sort_keys=False, default_flow_style=False)
            store.step_path(5).write_text(text, encoding="utf-8")
        else:
            store.step_path(step).write_text(
                json.dumps(document, indent=2, ensure_ascii=False) + "\n", encoding="utf-8",
            )
        return self.read_step_document(step)

    def generate_for_seed(self, seed_id: str) -> VideoRecord:
        """Render the script bound to a seed through the configured backends."""
        from egosim.errors import OutOfOrderError
        from egosim.synthesis import synthesize

        if not self.store.has_step(5):
            raise OutOfOrderError("scripts have not been generated yet")
        scripts = [s for s in self.store.read_scripts() if s.seed_id == seed_id]
        if not scripts:
            raise InputError(f"no script for seed {seed_id!r}")
        index = self.store.index()
        signals = [
            index.signals[sid]
            for sid in scripts[0].trigger_signal_ids
            if sid in index.signals
        ]
        return synthesize(scripts[0], self.config.gateway(), self, signals)
