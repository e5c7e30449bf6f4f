from __future__ import annotations

import json
import random

import pytest

from egosim.semantic import (
    EventType,
    JudgeInput,
    JudgeVerdict,
    VlmAnalysis,
    VlmEvent,
    build_judge_input,
    detection_time,
    parse_judge_output,
    parse_vlm_output,
    summarize_evidence,
)
from egosim.trace import SignalSeries
from tests.factories import make_script

DURATION = 12.0


def vlm_payload(**over) -> dict:
    payload = {
        "identified_hazard": "hot pan on an unattended burner",
        "proposed_intervention": "warn the user before they grab the handle",
        "intervention_urgency": 3,
        "events": [
            {"timestamp_s": 4.0, "event_type": "signal_detected", "description": "steam plume"},
            {"timestamp_s": 6.0, "event_type": "hazard_detected", "description": "hand near pan"},
        ],
    }
    payload.update(over)
    return payload


def judge_payload(**over) -> dict:
    payload = {
        "helpfulness_score": 0.8,
        "tone_score": 0.9,
        "over_alert_flag": False,
        "reasoning": "clear, urgency-appropriate warning",
    }
    payload.update(over)
    return payload


# ---------------------------------------------------------------------------
# VLM parsing
# ---------------------------------------------------------------------------


def test_parse_vlm_happy_path() -> None:
    analysis, violations = parse_vlm_output(json.dumps(vlm_payload()), DURATION)
    assert violations == []
    assert analysis is not None
    assert analysis.intervention_urgency == 3
    assert len(analysis.events) == 2


def test_parse_vlm_urgency_out_of_range() -> None:
    _, violations = parse_vlm_output(json.dumps(vlm_payload(intervention_urgency=6)), DURATION)
    assert any(v.code == "urgency_range" for v in violations)


def test_parse_vlm_urgency_coerced_only_if_integral() -> None:
    analysis, violations = parse_vlm_output(
        json.dumps(vlm_payload(intervention_urgency=3.0)), DURATION
    )
    assert violations == [] and analysis is not None
    assert analysis.intervention_urgency == 3

    for bad in (3.5, "3", True):
        _, violations = parse_vlm_output(
            json.dumps(vlm_payload(intervention_urgency=bad)), DURATION
        )
        assert any(v.field == "intervention_urgency" for v in violations)


def test_parse_vlm_event_beyond_duration() -> None:
    payload = vlm_payload(events=[
        {"timestamp_s": 99.0, "event_type": "hazard_detected", "description": "late"},
    ])
    _, violations = parse_vlm_output(json.dumps(payload), DURATION)
    assert any(v.code == "event_beyond_duration" for v in violations)


def test_parse_vlm_unknown_event_type() -> None:
    payload = vlm_payload(events=[
        {"timestamp_s": 1.0, "event_type": "smelled", "description": "?"},
    ])
    _, violations = parse_vlm_output(json.dumps(payload), DURATION)
    assert any(v.code == "unknown_event_type" for v in violations)


def test_parse_vlm_invalid_json() -> None:
    analysis, violations = parse_vlm_output("not json at all {", DURATION)
    assert analysis is None
    assert violations[0].code == "invalid_json"


def test_vlm_field_deletion_fuzz_names_the_missing_field() -> None:
    rng = random.Random(77)
    fields = ["identified_hazard", "proposed_intervention", "intervention_urgency", "events"]
    for _ in range(50):
        doomed = rng.choice(fields)
        payload = vlm_payload()
        del payload[doomed]
        analysis, violations = parse_vlm_output(json.dumps(payload), DURATION)
        assert analysis is None
        assert any(v.field == doomed for v in violations)


# ---------------------------------------------------------------------------
# Judge parsing
# ---------------------------------------------------------------------------


def test_parse_judge_happy_path() -> None:
    verdict, violations = parse_judge_output(json.dumps(judge_payload()))
    assert violations == []
    assert verdict == JudgeVerdict(0.8, 0.9, False, "clear, urgency-appropriate warning")


def test_parse_judge_score_out_of_range() -> None:
    _, violations = parse_judge_output(json.dumps(judge_payload(helpfulness_score=1.2)))
    assert any(v.code == "score_range" and v.field == "helpfulness_score" for v in violations)


def test_parse_judge_missing_flag() -> None:
    payload = judge_payload()
    del payload["over_alert_flag"]
    _, violations = parse_judge_output(json.dumps(payload))
    assert any(v.field == "over_alert_flag" for v in violations)


def test_judge_field_deletion_fuzz_names_the_missing_field() -> None:
    rng = random.Random(78)
    fields = ["helpfulness_score", "tone_score", "over_alert_flag", "reasoning"]
    for _ in range(40):
        doomed = rng.choice(fields)
        payload = judge_payload()
        del payload[doomed]
        verdict, violations = parse_judge_output(json.dumps(payload))
        assert verdict is None
        assert any(v.field == doomed for v in violations)


# ---------------------------------------------------------------------------
# Judge input assembly
# ---------------------------------------------------------------------------


def _series(escalation=(0.1, 0.6), distances=(0.4, 0.2)) -> SignalSeries:
    n = len(escalation)
    return SignalSeries(
        distances=tuple(distances),
        smoothed_areas=(0.2,) * n,
        growth=(None,) + (0.0,) * (n - 1),
        escalation=tuple(escalation),
        safety_stat=max(escalation),
    )


def test_build_judge_input_with_evidence_contains_both_cue_sentences() -> None:
    script = make_script()
    analysis, _ = parse_vlm_output(json.dumps(vlm_payload()), DURATION)
    judge_input = build_judge_input(script, analysis, evidence=_series())
    assert judge_input.evidence_summary is not None
    assert "Peak hazard escalation" in judge_input.evidence_summary
    assert "Minimum hand-hazard distance" in judge_input.evidence_summary


def test_build_judge_input_without_evidence() -> None:
    script = make_script()
    analysis, _ = parse_vlm_output(json.dumps(vlm_payload()), DURATION)
    judge_input = build_judge_input(script, analysis)
    assert judge_input.evidence_summary is None


def test_build_judge_input_deterministic() -> None:
    script = make_script()
    analysis, _ = parse_vlm_output(json.dumps(vlm_payload()), DURATION)
    a = build_judge_input(script, analysis, evidence=_series())
    b = build_judge_input(script, analysis, evidence=_series())
    assert a.to_json() == b.to_json()


def test_summarize_evidence_without_distances() -> None:
    summary = summarize_evidence(_series(distances=(None, None)))
    assert "No hand-hazard distance" in summary


def test_judge_input_requires_vlm_outputs() -> None:
    with pytest.raises(ValueError):
        JudgeInput(script_context={}, vlm_outputs=None)  # type: ignore[arg-type]


# ---------------------------------------------------------------------------
# Detection time
# ---------------------------------------------------------------------------


def _analysis(events) -> VlmAnalysis:
    return VlmAnalysis("h", "i", 3, tuple(events))


def test_detection_time_takes_earliest_hazard_or_signal() -> None:
    analysis = _analysis([
        VlmEvent(4.0, EventType.SIGNAL_DETECTED, "steam"),
        VlmEvent(6.0, EventType.HAZARD_DETECTED, "hand"),
    ])
    assert detection_time(analysis) == 4.0


def test_detection_time_absent_without_detection_events() -> None:
    analysis = _analysis([VlmEvent(2.0, EventType.USER_ACTION, "reach")])
    assert detection_time(analysis) is None


def test_detection_time_single_event() -> None:
    analysis = _analysis([VlmEvent(8.5, EventType.HAZARD_DETECTED, "pan")])
    assert detection_time(analysis) == 8.5


def test_detection_time_monotone_under_added_events() -> None:
    rng = random.Random(79)
    for _ in range(100):
        events = [
            VlmEvent(rng.uniform(0, 12), rng.choice(list(EventType)), "e")
            for _ in range(rng.randint(0, 5))
        ]
        base = detection_time(_analysis(events))
        extra = VlmEvent(rng.uniform(0, 12), rng.choice(list(EventType)), "x")
        extended = detection_time(_analysis(events + [extra]))
        if base is None:
            if extended is not None:
                assert extra.event_type in (EventType.HAZARD_DETECTED, EventType.SIGNAL_DETECTED)
        else:
            assert extended is not None and extended <= base
