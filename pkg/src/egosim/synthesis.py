"""Two-stage script-to-video realization: first frame, then the video job.

Prompt building is pure (equal scripts produce byte-equal prompts). Backend
failures are recorded on the returned VideoRecord, never raised past this
boundary, and the first-frame stage always precedes job submission.
"""

from __future__ import annotations

import json
import time
from typing import TYPE_CHECKING, Sequence

from egosim import prompts
from egosim._ids import content_id
from egosim.domain import (
    ScriptContract,
    SegmentKind,
    SignalSpec,
    VideoRecord,
    VideoStatus,
)
from egosim.errors import EgosimError
from egosim.gateway import Gateway, JobStatus

if TYPE_CHECKING:
    from egosim.project import Project

EGOCENTRIC_MARKERS = "visible hands, eye-level view"
POLL_INTERVAL_S = 0.5
MAX_POLLS = 120


def script_id(script: ScriptContract) -> str:
    return content_id("scr", script.to_dict())


def video_id_for(script: ScriptContract) -> str:
    """Synthesis is idempotent per script content."""
    return content_id("vid", script.to_dict())


def build_first_frame_prompt(script: ScriptContract) -> str:
    """Starting-frame prompt: scene, camera, and lighting; exit state is ignored."""
    scene = script.segment(SegmentKind.SCENE_SETUP)
    return (
        f"{scene.prompt} Camera: {script.camera_angle}. Lighting: {script.lighting}. "
        f"Egocentric first-person perspective, {EGOCENTRIC_MARKERS}."
    )


def build_video_prompts(
    script: ScriptContract, signals: Sequence[SignalSpec] = ()
) -> list[str]:
    """One prompt per segment in contract order; the trigger prompt carries the cues."""
    cue_text = ", ".join(s.cue for s in signals)
    rendered = []
    for segment in script.segments:
        text = f"{segment.kind.value}: {segment.prompt}"
        if segment.kind is SegmentKind.INTERVENTION_TRIGGER and cue_text:
            if cue_text not in segment.prompt:
                text = f"{text} Trigger cues: {cue_text}."
        rendered.append(text)
    return rendered


def build_alignment_prompt(script: ScriptContract) -> str:
    summaries = "\n".join(
        f"- {seg.kind.value} [{seg.start_offset_s:g}-{seg.end_offset_s:g} s]: {seg.prompt}"
        for seg in script.segments
    )
    return prompts.render(
        "alignment_v1",
        context={"video_duration_s": script.total_duration_s},
        segment_summaries=summaries,
    )


def _await_job(gateway: Gateway, job_handle: str) -> str:
    state = gateway.poll_job(job_handle)
    polls = 1
    while state.status is JobStatus.PENDING and polls < MAX_POLLS:
        time.sleep(POLL_INTERVAL_S)
        state = gateway.poll_job(job_handle)
        polls += 1
    if state.status is not JobStatus.COMPLETE or not state.video_ref:
        raise EgosimError(f"video job {job_handle} did not complete: {state.detail or state.status.value}")
    return state.video_ref


def _fetch_alignment(gateway: Gateway, video_ref: str, script: ScriptContract) -> float | None:
    try:
        raw = gateway.analyze_video(video_ref, build_alignment_prompt(script), schema_id="alignment")
        value = float(json.loads(raw)["alignment_score"])
    except (EgosimError, ValueError, KeyError, TypeError, json.JSONDecodeError):
        return None
    return min(1.0, max(0.0, value))


def synthesize(
    script: ScriptContract,
    gateway: Gateway,
    project: "Project",
    signals: Sequence[SignalSpec] = (),
) -> VideoRecord:
    """Render a script: first frame, then the video job, then alignment scoring.

    Resubmitting an already-rendered script is a no-op returning the stored
    record.
    """
    video_id = video_id_for(script)
    existing = project.read_video(video_id)
    if existing is not None and existing.status is VideoStatus.RENDERED:
        return existing

    ref = script_id(script)
    duration = script.total_duration_s

    try:
        first_frame = gateway.generate_image(build_first_frame_prompt(script))
    except EgosimError as exc:
        record = VideoRecord(
            id=video_id, script_ref=ref, first_frame_ref=None, video_ref=None,
            duration_s=duration, alignment_score=None, status=VideoStatus.FAILED,
            error=f"first-frame generation failed: {exc}",
        )
        project.write_video(record)
        return record
    project.write_media(first_frame, f"placeholder first frame {first_frame}\n".encode())

    try:
        job = gateway.generate_video(first_frame, build_video_prompts(script, signals))
        video_ref = _await_job(gateway, job)
    except EgosimError as exc:
        record = VideoRecord(
            id=video_id, script_ref=ref, first_frame_ref=first_frame, video_ref=None,
            duration_s=duration, alignment_score=None, status=VideoStatus.FAILED,
            error=f"video synthesis failed: {exc}",
        )
        project.write_video(record)
        return record
    project.write_media(video_ref, f"placeholder video {video_ref}\n".encode())

    record = VideoRecord(
        id=video_id, script_ref=ref, first_frame_ref=first_frame, video_ref=video_ref,
        duration_s=duration, alignment_score=_fetch_alignment(gateway, video_ref, script),
        status=VideoStatus.RENDERED,
    )
    project.write_video(record)
    return record
