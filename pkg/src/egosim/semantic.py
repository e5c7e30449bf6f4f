"""Semantic layer: VLM scene-analysis schema, judge rubric output, and t_v.

Parsers accept exactly the payloads that satisfy the typed invariants and
report every violation (with the offending field named) instead of stopping
at the first problem.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping

from egosim.domain import ScriptContract, SegmentKind, Violation
from egosim.trace import SignalSeries


class EventType(str, Enum):
    HAZARD_DETECTED = "hazard_detected"
    SIGNAL_DETECTED = "signal_detected"
    USER_ACTION = "user_action"
    OTHER = "other"


DETECTION_EVENT_TYPES = frozenset({EventType.HAZARD_DETECTED, EventType.SIGNAL_DETECTED})


@dataclass(frozen=True)
class VlmEvent:
    timestamp_s: float
    event_type: EventType
    description: str

    def __post_init__(self) -> None:
        if self.timestamp_s < 0:
            raise ValueError("event timestamp_s must be >= 0")

    def to_dict(self) -> dict[str, Any]:
        return {
            "timestamp_s": self.timestamp_s,
            "event_type": self.event_type.value,
            "description": self.description,
        }


@dataclass(frozen=True)
class VlmAnalysis:
    identified_hazard: str
    proposed_intervention: str
    intervention_urgency: int
    events: tuple[VlmEvent, ...]

    def __post_init__(self) -> None:
        if not 1 <= self.intervention_urgency <= 5:
            raise ValueError("intervention_urgency must lie in 1..5")
        object.__setattr__(self, "events", tuple(self.events))

    def to_dict(self) -> dict[str, Any]:
        return {
            "identified_hazard": self.identified_hazard,
            "proposed_intervention": self.proposed_intervention,
            "intervention_urgency": self.intervention_urgency,
            "events": [e.to_dict() for e in self.events],
        }


@dataclass(frozen=True)
class JudgeVerdict:
    helpfulness_score: float
    tone_score: float
    over_alert_flag: bool
    reasoning: str

    def __post_init__(self) -> None:
        if not 0.0 <= self.helpfulness_score <= 1.0:
            raise ValueError("helpfulness_score must lie in [0, 1]")
        if not 0.0 <= self.tone_score <= 1.0:
            raise ValueError("tone_score must lie in [0, 1]")

    def to_dict(self) -> dict[str, Any]:
        return {
            "helpfulness_score": self.helpfulness_score,
            "tone_score": self.tone_score,
            "over_alert_flag": self.over_alert_flag,
            "reasoning": self.reasoning,
        }


@dataclass(frozen=True)
class JudgeInput:
    """Composed context for the single judge call scoring all dimensions."""

    script_context: Mapping[str, Any]
    vlm_outputs: VlmAnalysis
    evidence_summary: str | None = None

    def __post_init__(self) -> None:
        if self.vlm_outputs is None:
            raise ValueError("judge input requires vlm_outputs")
        object.__setattr__(self, "script_context", dict(self.script_context))

    def to_dict(self) -> dict[str, Any]:
        return {
            "script_context": dict(self.script_context),
            "vlm_outputs": self.vlm_outputs.to_dict(),
            "evidence_summary": self.evidence_summary,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def _parse_object(raw: str) -> tuple[dict[str, Any] | None, list[Violation]]:
    try:
        obj = json.loads(raw)
    except (json.JSONDecodeError, TypeError) as exc:
        return None, [Violation("invalid_json", f"payload is not valid JSON: {exc}")]
    if not isinstance(obj, dict):
        return None, [Violation("invalid_json", "payload must be a JSON object")]
    return obj, []


def _integral_urgency(value: Any) -> int | None:
    """Accept 3 or 3.0, never booleans, strings, or non-integral floats."""
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, float) and math.isfinite(value) and value == int(value):
        return int(value)
    return None


def parse_vlm_output(raw: str, video_duration_s: float) -> tuple[VlmAnalysis | None, list[Violation]]:
    """Validate the hazard-centric VLM payload against the analysis schema."""
    obj, violations = _parse_object(raw)
    if obj is None:
        return None, violations

    for name in ("identified_hazard", "proposed_intervention"):
        value = obj.get(name)
        if name not in obj:
            violations.append(Violation("missing_field", f"{name} is required", field=name))
        elif not isinstance(value, str) or not value.strip():
            violations.append(Violation("invalid_type", f"{name} must be a non-empty string", field=name))

    urgency: int | None = None
    if "intervention_urgency" not in obj:
        violations.append(Violation(
            "missing_field", "intervention_urgency is required", field="intervention_urgency",
        ))
    else:
        urgency = _integral_urgency(obj["intervention_urgency"])
        if urgency is None:
            violations.append(Violation(
                "invalid_type", "intervention_urgency must be an integral number",
                field="intervention_urgency",
            ))
        elif not 1 <= urgency <= 5:
            violations.append(Violation(
                "urgency_range", f"intervention_urgency {urgency} outside 1..5",
                field="intervention_urgency",
            ))
            urgency = None

    events: list[VlmEvent] = []
    if "events" not in obj:
        violations.append(Violation("missing_field", "events is required", field="events"))
    elif not isinstance(obj["events"], list):
        violations.append(Violation("invalid_type", "events must be a list", field="events"))
    else:
        for i, entry in enumerate(obj["events"]):
            label = f"events[{i}]"
            if not isinstance(entry, dict):
                violations.append(Violation("invalid_type", f"{label} must be an object", field="events"))
                continue
            ts = entry.get("timestamp_s")
            kind = entry.get("event_type")
            ok = True
            if not isinstance(ts, (int, float)) or isinstance(ts, bool) or ts < 0:
                violations.append(Violation(
                    "invalid_type", f"{label}.timestamp_s must be a number >= 0", field="events",
                ))
                ok = False
            elif ts > video_duration_s:
                violations.append(Violation(
                    "event_beyond_duration",
                    f"{label} at {ts:g} s exceeds the video duration {video_duration_s:g} s",
                    field="events",
                ))
                ok = False
            try:
                event_type = EventType(kind)
            except ValueError:
                violations.append(Violation(
                    "unknown_event_type", f"{label}.event_type {kind!r} is not recognized",
                    field="events",
                ))
                ok = False
            if ok:
                events.append(VlmEvent(float(ts), event_type, str(entry.get("description", ""))))

    if violations:
        return None, violations
    return (
        VlmAnalysis(
            identified_hazard=obj["identified_hazard"],
            proposed_intervention=obj["proposed_intervention"],
            intervention_urgency=urgency,  # type: ignore[arg-type]
            events=tuple(events),
        ),
        [],
    )


def parse_judge_output(raw: str) -> tuple[JudgeVerdict | None, list[Violation]]:
    """Validate the judge rubric JSON (helpfulness, tone, over-alert, reasoning)."""
    obj, violations = _parse_object(raw)
    if obj is None:
        return None, violations

    scores: dict[str, float] = {}
    for name in ("helpfulness_score", "tone_score"):
        if name not in obj:
            violations.append(Violation("missing_field", f"{name} is required", field=name))
            continue
        value = obj[name]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            violations.append(Violation("invalid_type", f"{name} must be a number", field=name))
        elif not 0.0 <= value <= 1.0:
            violations.append(Violation(
                "score_range", f"{name} {value:g} outside [0, 1]", field=name,
            ))
        else:
            scores[name] = float(value)

    if "over_alert_flag" not in obj:
        violations.append(Violation(
            "missing_field", "over_alert_flag is required", field="over_alert_flag",
        ))
    elif not isinstance(obj["over_alert_flag"], bool):
        violations.append(Violation(
            "invalid_type", "over_alert_flag must be a boolean", field="over_alert_flag",
        ))

    if "reasoning" not in obj:
        violations.append(Violation("missing_field", "reasoning is required", field="reasoning"))
    elif not isinstance(obj["reasoning"], str):
        violations.append(Violation("invalid_type", "reasoning must be a string", field="reasoning"))

    if violations:
        return None, violations
    return (
        JudgeVerdict(
            helpfulness_score=scores["helpfulness_score"],
            tone_score=scores["tone_score"],
            over_alert_flag=obj["over_alert_flag"],
            reasoning=obj["reasoning"],
        ),
        [],
    )


def summarize_evidence(series: SignalSeries) -> str:
    """Two-sentence physical-evidence digest for the judge."""
    peak = max(series.escalation) if series.escalation else 0.0
    present = [d for d in series.distances if d is not None]
    first = f"Peak hazard escalation over the trace was {peak:.3f}."
    if present:
        second = f"Minimum hand-hazard distance was {min(present):.3f} (normalized units)."
    else:
        second = "No hand-hazard distance was observable."
    return f"{first} {second}"


def build_judge_input(
    script: ScriptContract,
    analysis: VlmAnalysis,
    evidence: SignalSeries | None = None,
    causal_reasoning: str | None = None,
) -> JudgeInput:
    """Deterministically assemble the judge context from script, VLM, and evidence."""
    trigger = script.segment(SegmentKind.INTERVENTION_TRIGGER)
    context = {
        "actions": [seg.prompt for seg in script.segments],
        "reasoning": causal_reasoning if causal_reasoning is not None else trigger.prompt,
        "hazard_expectation": (
            f"Hazard onset expected at {script.expected_hazard_onset_s:g} s, within the "
            f"trigger window [{trigger.start_offset_s:g}, {trigger.end_offset_s:g}] s."
        ),
    }
    summary = summarize_evidence(evidence) if evidence is not None else None
    return JudgeInput(script_context=context, vlm_outputs=analysis, evidence_summary=summary)


def detection_time(analysis: VlmAnalysis) -> float | None:
    """Earliest hazard/signal detection timestamp; None when nothing was detected."""
    stamps = [e.timestamp_s for e in analysis.events if e.event_type in DETECTION_EVENT_TYPES]
    return min(stamps) if stamps else None
