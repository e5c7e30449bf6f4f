from __future__ import annotations

import dataclasses
import json

import httpx
import pytest

import egosim.gateway as gw
from egosim.domain import SegmentKind, VideoStatus
from egosim.gateway import BackendConfig, BackendKind, Gateway, stub_gateway
from egosim.project import Project
from egosim.synthesis import (
    build_first_frame_prompt,
    build_video_prompts,
    synthesize,
    video_id_for,
)
from tests.factories import make_chain, make_scenario, make_script


@pytest.fixture()
def project(tmp_path) -> Project:
    return Project.create(tmp_path / "proj", make_scenario())


def test_first_frame_prompt_contains_scene_camera_lighting() -> None:
    script = make_script()
    prompt = build_first_frame_prompt(script)
    assert script.segment(SegmentKind.SCENE_SETUP).prompt in prompt
    assert "egocentric, eye-level" in prompt
    assert "warm indoor light" in prompt
    assert "visible hands, eye-level view" in prompt


def test_first_frame_prompt_ignores_exit_state() -> None:
    script = make_script()
    segments = list(script.segments)
    segments[3] = dataclasses.replace(segments[3], prompt="a completely different ending")
    modified = dataclasses.replace(script, segments=tuple(segments))
    assert build_first_frame_prompt(script) == build_first_frame_prompt(modified)


def test_prompt_building_is_pure() -> None:
    script = make_script()
    assert build_first_frame_prompt(script) == build_first_frame_prompt(make_script())
    assert build_video_prompts(script) == build_video_prompts(make_script())


def test_video_prompts_order_count_and_cue_embedding() -> None:
    index, seed = make_chain()
    script = make_script(seed)
    signals = [index.signals[s] for s in seed.signal_ids]
    prompts = build_video_prompts(script, signals)
    assert len(prompts) == 4
    assert prompts[0].startswith("scene_setup:")
    assert script.segment(SegmentKind.SCENE_SETUP).prompt in prompts[0]
    assert "steam rising rapidly" in prompts[2]


def test_synthesize_stub_renders_deterministic_record(project) -> None:
    gateway = stub_gateway()
    script = make_script()
    record = synthesize(script, gateway, project)
    assert record.status is VideoStatus.RENDERED
    assert record.id == video_id_for(script)
    assert record.first_frame_ref and record.first_frame_ref.startswith("img-")
    assert record.video_ref and record.video_ref.startswith("vid-")
    assert record.alignment_score == 0.9
    assert record.duration_s == script.total_duration_s
    assert (project.root / "media" / f"{record.video_ref}.bin").exists()

    again = synthesize(script, gateway, project)
    assert again == record  # idempotent by script content


def test_synthesize_video_failure_keeps_first_frame(project) -> None:
    def failing(request: httpx.Request) -> httpx.Response:
        raise httpx.ConnectError("video backend down", request=request)

    configs = {
        kind: BackendConfig(kind=kind, endpoint_url="stub://fixtures", model_name="stub")
        for kind in BackendKind
    }
    configs[BackendKind.VIDEO] = BackendConfig(
        kind=BackendKind.VIDEO, endpoint_url="https://video.invalid/v1",
        model_name="m", max_retries=0,
    )
    gw._TRANSPORT_OVERRIDE = httpx.MockTransport(failing)
    try:
        record = synthesize(make_script(), Gateway(configs), project)
    finally:
        gw._TRANSPORT_OVERRIDE = None
    assert record.status is VideoStatus.FAILED
    assert record.first_frame_ref is not None
    assert record.video_ref is None
    assert record.alignment_score is None
    assert "video synthesis failed" in (record.error or "")


def test_synthesize_first_frame_failure_submits_no_video(project) -> None:
    video_calls = 0

    def handler(request: httpx.Request) -> httpx.Response:
        nonlocal video_calls
        if "image.invalid" in str(request.url):
            raise httpx.ConnectError("image backend down", request=request)
        video_calls += 1
        return httpx.Response(200, json={"job_id": "job-x"})

    configs = {
        kind: BackendConfig(kind=kind, endpoint_url="stub://fixtures", model_name="stub")
        for kind in BackendKind
    }
    configs[BackendKind.IMAGE] = BackendConfig(
        kind=BackendKind.IMAGE, endpoint_url="https://image.invalid/v1",
        model_name="m", max_retries=0,
    )
    configs[BackendKind.VIDEO] = BackendConfig(
        kind=BackendKind.VIDEO, endpoint_url="https://video.invalid/v1", model_name="m",
    )
    gw._TRANSPORT_OVERRIDE = httpx.MockTransport(handler)
    try:
        record = synthesize(make_script(), Gateway(configs), project)
    finally:
        gw._TRANSPORT_OVERRIDE = None
    assert record.status is VideoStatus.FAILED
    assert record.first_frame_ref is None
    assert video_calls == 0


def test_alignment_directive_flows_through(project) -> None:
    script = make_script()
    segments = list(script.segments)
    segments[0] = dataclasses.replace(
        segments[0], prompt=segments[0].prompt + " [stub:alignment=0.3]"
    )
    low_alignment = dataclasses.replace(script, segments=tuple(segments))
    record = synthesize(low_alignment, stub_gateway(), project)
    assert record.alignment_score == 0.3


def test_video_record_persisted_in_project(project) -> None:
    record = synthesize(make_script(), stub_gateway(), project)
    stored = project.read_video(record.id)
    assert stored == record
    listed = project.list_videos()
    assert record in listed
    raw = json.loads(project.video_path(record.id).read_text())
    assert raw["status"] == "rendered"
