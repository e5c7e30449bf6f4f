"""Per-video evaluation orchestration: trace signals, VLM, judge, fusion.

Two entry points: ``evaluate_record`` drives the configured backends for a
project video, while ``score_fixture`` scores entirely from supplied files
(trace + VLM payload + judge payload) with no gateway, which keeps the whole
evaluation stack verifiable offline.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Sequence

from egosim import prompts
from egosim.config import EvaluationConfig
from egosim.domain import ScriptContract, VideoRecord, VideoStatus
from egosim.errors import InputError, SchemaViolationError
from egosim.gateway import Gateway
from egosim.scoring import VideoScore, score_video
from egosim.semantic import (
    JudgeVerdict,
    VlmAnalysis,
    build_judge_input,
    parse_judge_output,
    parse_vlm_output,
)
from egosim.trace import FrameObservation, compute_series

if TYPE_CHECKING:
    from egosim.project import Project


def build_analysis_prompt(duration_s: float) -> str:
    return prompts.render("vlm_v1", context={"video_duration_s": duration_s})


def _parse_or_raise(parser, raw: str, *args) -> object:
    parsed, violations = parser(raw, *args)
    if violations:
        raise SchemaViolationError(violations)
    return parsed


def evaluate_record(
    project: "Project",
    video_id: str,
    gateway: Gateway | None = None,
    frames: Sequence[FrameObservation] | None = None,
    hazard_category: str | None = None,
) -> VideoScore:
    """Evaluate one rendered project video through the configured backends."""
    record = project.read_video(video_id)
    if record is None:
        raise InputError(f"video {video_id!r} not found in project")
    if record.status is not VideoStatus.RENDERED or record.video_ref is None:
        raise InputError(f"video {video_id!r} has not rendered (status {record.status.value})")
    script = project.find_script(record.script_ref)
    if frames is None:
        frames = project.read_trace(video_id)
    if gateway is None:
        gateway = project.config.gateway()
    eval_cfg = project.config.evaluation

    raw_analysis = gateway.analyze_video(
        record.video_ref, build_analysis_prompt(record.duration_s)
    )
    analysis: VlmAnalysis = _parse_or_raise(parse_vlm_output, raw_analysis, record.duration_s)

    series = compute_series(list(frames), eval_cfg.signal)
    judge_input = build_judge_input(script, analysis, evidence=series)
    raw_verdict = gateway.judge(judge_input, prompts.render("judge_v1"))
    verdict: JudgeVerdict = _parse_or_raise(parse_judge_output, raw_verdict)

    if hazard_category is None and project.store.has_scenario():
        hazard_category = project.scenario.hazard_category

    score = score_video(
        script, record, list(frames), analysis, verdict,
        windows=eval_cfg.windows, weights=eval_cfg.weights,
        signal_cfg=eval_cfg.signal, hazard_category=hazard_category,
        series=series,
    )
    project.write_analysis(score)
    return score


def score_fixture(
    script: ScriptContract,
    frames: Sequence[FrameObservation],
    vlm_payload: str,
    judge_payload: str,
    alignment_score: float | None = 0.9,
    eval_cfg: EvaluationConfig | None = None,
    video_id: str | None = None,
    hazard_category: str | None = None,
) -> VideoScore:
    """Score directly from fixture files; no network, no project required."""
    from egosim.synthesis import script_id, video_id_for

    eval_cfg = eval_cfg or EvaluationConfig()
    duration = script.total_duration_s
    analysis: VlmAnalysis = _parse_or_raise(parse_vlm_output, vlm_payload, duration)
    verdict: JudgeVerdict = _parse_or_raise(parse_judge_output, judge_payload)
    record = VideoRecord(
        id=video_id or video_id_for(script),
        script_ref=script_id(script),
        first_frame_ref="img-fixture00000",
        video_ref="vid-fixture00000",
        duration_s=duration,
        alignment_score=alignment_score,
        status=VideoStatus.RENDERED,
    )
    return score_video(
        script, record, list(frames), analysis, verdict,
        windows=eval_cfg.windows, weights=eval_cfg.weights,
        signal_cfg=eval_cfg.signal, hazard_category=hazard_category,
    )
