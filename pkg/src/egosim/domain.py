"""Artifact types flowing through the script pipeline and the evaluation stack.

All types are immutable values; construction enforces structural invariants
(non-empty identifiers, numeric ranges, closed enums) while cross-field and
cross-artifact rules live in :func:`validate_seed` and
:func:`validate_script`, which report *every* violation rather than stopping
at the first so callers can surface all problems at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping

import yaml

SEGMENT_TIMING_TOLERANCE_S = 1e-6


class AssistanceMode(str, Enum):
    REACTIVE = "reactive"
    EXPLICIT_PROACTIVE = "explicit_proactive"
    IMPLICIT_PROACTIVE = "implicit_proactive"


class InterventionKind(str, Enum):
    SAFETY_WARNING = "safety_warning"
    PROACTIVE_HELP = "proactive_help"
    SOCIAL_ADHERENCE = "social_adherence"
    COMMAND_RESPONSE = "command_response"


class SignalModality(str, Enum):
    VISUAL = "visual"
    AUDIO = "audio"


class SegmentKind(str, Enum):
    SCENE_SETUP = "scene_setup"
    USER_ACTION = "user_action"
    INTERVENTION_TRIGGER = "intervention_trigger"
    EXIT_STATE = "exit_state"


SEGMENT_ORDER: tuple[SegmentKind, ...] = (
    SegmentKind.SCENE_SETUP,
    SegmentKind.USER_ACTION,
    SegmentKind.INTERVENTION_TRIGGER,
    SegmentKind.EXIT_STATE,
)


class VideoStatus(str, Enum):
    PENDING = "pending"
    RENDERED = "rendered"
    FAILED = "failed"


@dataclass(frozen=True)
class Violation:
    """A single named rule failure; ``field`` points at the offending field."""

    code: str
    message: str
    field: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code, "message": self.message, "field": self.field}


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    title: str
    description: str
    environment: str
    hazard_category: str

    def __post_init__(self) -> None:
        _require(bool(self.id), "scenario id must be non-empty")
        _require(bool(self.title), "scenario title must be non-empty")
        _require(bool(self.description), "scenario description must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "title": self.title,
            "description": self.description,
            "environment": self.environment,
            "hazard_category": self.hazard_category,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ScenarioSpec":
        return cls(
            id=data["id"],
            title=data["title"],
            description=data["description"],
            environment=data["environment"],
            hazard_category=data["hazard_category"],
        )


@dataclass(frozen=True)
class InterventionCandidate:
    id: str
    scenario_id: str
    description: str
    intervention_kind: InterventionKind
    rationale: str

    def __post_init__(self) -> None:
        _require(bool(self.id), "intervention id must be non-empty")
        _require(bool(self.description), "intervention description must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "scenario_id": self.scenario_id,
            "description": self.description,
            "intervention_kind": self.intervention_kind.value,
            "rationale": self.rationale,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "InterventionCandidate":
        return cls(
            id=data["id"],
            scenario_id=data["scenario_id"],
            description=data["description"],
            intervention_kind=InterventionKind(data["intervention_kind"]),
            rationale=data["rationale"],
        )


@dataclass(frozen=True)
class UserActionCandidate:
    id: str
    intervention_id: str
    description: str
    causal_explanation: str

    def __post_init__(self) -> None:
        _require(bool(self.id), "user action id must be non-empty")
        _require(bool(self.description), "user action description must be non-empty")
        _require(
            bool(self.causal_explanation.strip()),
            "causal_explanation must record the reverse-reasoning trace",
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "intervention_id": self.intervention_id,
            "description": self.description,
            "causal_explanation": self.causal_explanation,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "UserActionCandidate":
        return cls(
            id=data["id"],
            intervention_id=data["intervention_id"],
            description=data["description"],
            causal_explanation=data["causal_explanation"],
        )


@dataclass(frozen=True)
class SignalSpec:
    id: str
    user_action_id: str
    modality: SignalModality
    cue: str
    trigger_description: str

    def __post_init__(self) -> None:
        _require(bool(self.id), "signal id must be non-empty")
        _require(bool(self.cue), "signal cue must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "user_action_id": self.user_action_id,
            "modality": self.modality.value,
            "cue": self.cue,
            "trigger_description": self.trigger_description,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SignalSpec":
        return cls(
            id=data["id"],
            user_action_id=data["user_action_id"],
            modality=SignalModality(data["modality"]),
            cue=data["cue"],
            trigger_description=data["trigger_description"],
        )


@dataclass(frozen=True)
class StructuredSeed:
    """Mode-bound scenario seed tying a signal chain to an assistance mode.

    ``utterance_addressed_to_agent`` is set by the generating step, never
    inferred here; validators treat it as ground truth.
    """

    id: str
    intervention_id: str
    user_action_id: str
    signal_ids: tuple[str, ...]
    mode: AssistanceMode
    user_utterance: str | None
    utterance_addressed_to_agent: bool
    user_aware: bool

    def __post_init__(self) -> None:
        _require(bool(self.id), "seed id must be non-empty")
        object.__setattr__(self, "signal_ids", tuple(self.signal_ids))

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "intervention_id": self.intervention_id,
            "user_action_id": self.user_action_id,
            "signal_ids": list(self.signal_ids),
            "mode": self.mode.value,
            "user_utterance": self.user_utterance,
            "utterance_addressed_to_agent": self.utterance_addressed_to_agent,
            "user_aware": self.user_aware,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "StructuredSeed":
        return cls(
            id=data["id"],
            intervention_id=data["intervention_id"],
            user_action_id=data["user_action_id"],
            signal_ids=tuple(data["signal_ids"]),
            mode=AssistanceMode(data["mode"]),
            user_utterance=data["user_utterance"],
            utterance_addressed_to_agent=data["utterance_addressed_to_agent"],
            user_aware=data["user_aware"],
        )


@dataclass(frozen=True)
class Segment:
    kind: SegmentKind
    start_offset_s: float
    duration_s: float
    prompt: str

    def __post_init__(self) -> None:
        _require(self.start_offset_s >= 0, "segment start_offset_s must be >= 0")
        _require(self.duration_s > 0, "segment duration_s must be > 0")

    @property
    def end_offset_s(self) -> float:
        return self.start_offset_s + self.duration_s

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "start_offset_s": self.start_offset_s,
            "duration_s": self.duration_s,
            "prompt": self.prompt,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Segment":
        return cls(
            kind=SegmentKind(data["kind"]),
            start_offset_s=float(data["start_offset_s"]),
            duration_s=float(data["duration_s"]),
            prompt=data["prompt"],
        )


@dataclass(frozen=True)
class ScriptContract:
    """Four-segment contract binding text generation to video synthesis.

    Segment cardinality, ordering, contiguity, and the hazard-onset window
    are checked by :func:`validate_script`, not at construction, so invalid
    contracts remain representable for exhaustive violation reporting.
    """

    seed_id: str
    mode: AssistanceMode
    camera_angle: str
    lighting: str
    segments: tuple[Segment, ...]
    expected_hazard_onset_s: float
    trigger_signal_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "trigger_signal_ids", tuple(self.trigger_signal_ids))

    def segment(self, kind: SegmentKind) -> Segment:
        for seg in self.segments:
            if seg.kind is kind:
                return seg
        raise KeyError(f"script has no {kind.value} segment")

    @property
    def total_duration_s(self) -> float:
        return sum(seg.duration_s for seg in self.segments)

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed_id": self.seed_id,
            "mode": self.mode.value,
            "camera_angle": self.camera_angle,
            "lighting": self.lighting,
            "segments": [seg.to_dict() for seg in self.segments],
            "expected_hazard_onset_s": self.expected_hazard_onset_s,
            "trigger_signal_ids": list(self.trigger_signal_ids),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ScriptContract":
        return cls(
            seed_id=data["seed_id"],
            mode=AssistanceMode(data["mode"]),
            camera_angle=data["camera_angle"],
            lighting=data["lighting"],
            segments=tuple(Segment.from_dict(seg) for seg in data["segments"]),
            expected_hazard_onset_s=float(data["expected_hazard_onset_s"]),
            trigger_signal_ids=tuple(data["trigger_signal_ids"]),
        )


def script_to_yaml(contract: ScriptContract) -> str:
    """Canonical YAML encoding of a script contract."""
    return yaml.safe_dump(contract.to_dict(), sort_keys=False, default_flow_style=False)


def script_from_yaml(text: str) -> ScriptContract:
    return ScriptContract.from_dict(yaml.safe_load(text))


@dataclass(frozen=True)
class VideoRecord:
    id: str
    script_ref: str
    first_frame_ref: str | None
    video_ref: str | None
    duration_s: float
    alignment_score: float | None
    status: VideoStatus
    error: str | None = None

    def __post_init__(self) -> None:
        _require(bool(self.id), "video record id must be non-empty")
        if self.status is not VideoStatus.RENDERED:
            _require(
                self.alignment_score is None,
                "alignment_score is present only on rendered records",
            )
        if self.alignment_score is not None:
            _require(0.0 <= self.alignment_score <= 1.0, "alignment_score must lie in [0, 1]")

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "script_ref": self.script_ref,
            "first_frame_ref": self.first_frame_ref,
            "video_ref": self.video_ref,
            "duration_s": self.duration_s,
            "alignment_score": self.alignment_score,
            "status": self.status.value,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "VideoRecord":
        return cls(
            id=data["id"],
            script_ref=data["script_ref"],
            first_frame_ref=data["first_frame_ref"],
            video_ref=data["video_ref"],
            duration_s=float(data["duration_s"]),
            alignment_score=data["alignment_score"],
            status=VideoStatus(data["status"]),
            error=data.get("error"),
        )


@dataclass
class ArtifactIndex:
    """In-memory lookup over produced artifacts, used for reference checks."""

    scenarios: dict[str, ScenarioSpec] = field(default_factory=dict)
    interventions: dict[str, InterventionCandidate] = field(default_factory=dict)
    user_actions: dict[str, UserActionCandidate] = field(default_factory=dict)
    signals: dict[str, SignalSpec] = field(default_factory=dict)
    seeds: dict[str, StructuredSeed] = field(default_factory=dict)

    def add(self, *artifacts: Any) -> None:
        for artifact in artifacts:
            if isinstance(artifact, ScenarioSpec):
                self.scenarios[artifact.id] = artifact
            elif isinstance(artifact, InterventionCandidate):
                self.interventions[artifact.id] = artifact
            elif isinstance(artifact, UserActionCandidate):
                self.user_actions[artifact.id] = artifact
            elif isinstance(artifact, SignalSpec):
                self.signals[artifact.id] = artifact
            elif isinstance(artifact, StructuredSeed):
                self.seeds[artifact.id] = artifact
            else:
                raise TypeError(f"cannot index artifact of type {type(artifact).__name__}")

    def extend(self, artifacts: Iterable[Any]) -> None:
        for artifact in artifacts:
            self.add(artifact)


def mode_predicate(seed: StructuredSeed, mode: AssistanceMode) -> bool:
    """Whether the seed's utterance/awareness fields satisfy ``mode``'s semantics.

    At most one mode predicate can hold for any seed; validation accepts a
    seed exactly when the predicate for its own mode holds.
    """
    has_utterance = seed.user_utterance is not None
    if mode is AssistanceMode.REACTIVE:
        return has_utterance and seed.utterance_addressed_to_agent and seed.user_aware
    if mode is AssistanceMode.EXPLICIT_PROACTIVE:
        return has_utterance and not seed.utterance_addressed_to_agent and seed.user_aware
    return not has_utterance and not seed.utterance_addressed_to_agent and not seed.user_aware


def _mode_violations(seed: StructuredSeed) -> list[Violation]:
    out: list[Violation] = []
    has_utterance = seed.user_utterance is not None
    mode = seed.mode
    if mode is AssistanceMode.REACTIVE:
        if not has_utterance:
            out.append(Violation(
                "mode_utterance_mismatch",
                "reactive seed requires a user utterance",
                field="user_utterance",
            ))
        elif not seed.utterance_addressed_to_agent:
            out.append(Violation(
                "mode_utterance_mismatch",
                "reactive utterance must be addressed to the agent",
                field="utterance_addressed_to_agent",
            ))
        if not seed.user_aware:
            out.append(Violation(
                "mode_awareness_mismatch",
                "reactive seed requires user_aware = true",
                field="user_aware",
            ))
    elif mode is AssistanceMode.EXPLICIT_PROACTIVE:
        if not has_utterance:
            out.append(Violation(
                "mode_utterance_mismatch",
                "explicit_proactive seed requires a user utterance",
                field="user_utterance",
            ))
        elif seed.utterance_addressed_to_agent:
            out.append(Violation(
                "mode_utterance_mismatch",
                "explicit_proactive utterance must not be addressed to the agent",
                field="utterance_addressed_to_agent",
            ))
        if not seed.user_aware:
            out.append(Violation(
                "mode_awareness_mismatch",
                "explicit_proactive seed requires user_aware = true",
                field="user_aware",
            ))
    else:
        if has_utterance:
            out.append(Violation(
                "mode_utterance_mismatch",
                "implicit_proactive seed must not carry a user utterance",
                field="user_utterance",
            ))
        if seed.utterance_addressed_to_agent:
            out.append(Violation(
                "mode_utterance_mismatch",
                "implicit_proactive seed cannot address the agent",
                field="utterance_addressed_to_agent",
            ))
        if seed.user_aware:
            out.append(Violation(
                "mode_awareness_mismatch",
                "implicit_proactive seed requires user_aware = false",
                field="user_aware",
            ))
    return out


def validate_seed(seed: StructuredSeed, store: ArtifactIndex) -> list[Violation]:
    """Check every seed invariant against the artifact store.

    Returns the complete list of violations (empty when the seed is valid);
    never stops at the first problem.
    """
    violations: list[Violation] = []

    if not seed.signal_ids:
        violations.append(Violation(
            "empty_signal_list", "seed must reference at least one signal", field="signal_ids",
        ))

    intervention = store.interventions.get(seed.intervention_id)
    if intervention is None:
        violations.append(Violation(
            "dangling_reference",
            f"intervention {seed.intervention_id!r} not found in store",
            field="intervention_id",
        ))
    action = store.user_actions.get(seed.user_action_id)
    if action is None:
        violations.append(Violation(
            "dangling_reference",
            f"user action {seed.user_action_id!r} not found in store",
            field="user_action_id",
        ))
    resolved_signals = []
    for signal_id in seed.signal_ids:
        signal = store.signals.get(signal_id)
        if signal is None:
            violations.append(Violation(
                "dangling_reference",
                f"signal {signal_id!r} not found in store",
                field="signal_ids",
            ))
        else:
            resolved_signals.append(signal)

    violations.extend(_mode_violations(seed))

    # Causal chain checks only make sense on resolved references.
    if action is not None and intervention is not None and action.intervention_id != intervention.id:
        violations.append(Violation(
            "broken_causal_chain",
            f"user action {action.id!r} derives from intervention "
            f"{action.intervention_id!r}, not {intervention.id!r}",
            field="user_action_id",
        ))
    if action is not None:
        for signal in resolved_signals:
            if signal.user_action_id != action.id:
                violations.append(Violation(
                    "broken_causal_chain",
                    f"signal {signal.id!r} belongs to user action "
                    f"{signal.user_action_id!r}, not {action.id!r}",
                    field="signal_ids",
                ))
    return violations


def validate_script(contract: ScriptContract) -> list[Violation]:
    """Check every script-contract invariant; contiguity tolerance is 1e-6 s."""
    violations: list[Violation] = []
    tol = SEGMENT_TIMING_TOLERANCE_S

    kinds = [seg.kind for seg in contract.segments]
    for kind in SEGMENT_ORDER:
        count = kinds.count(kind)
        if count == 0:
            violations.append(Violation(
                "missing_segment_kind",
                f"script is missing its {kind.value} segment",
                field="segments",
            ))
        elif count > 1:
            violations.append(Violation(
                "duplicate_segment_kind",
                f"script has {count} {kind.value} segments; exactly one allowed",
                field="segments",
            ))
    if (
        len(kinds) == len(SEGMENT_ORDER)
        and set(kinds) == set(SEGMENT_ORDER)
        and kinds != list(SEGMENT_ORDER)
    ):
        violations.append(Violation(
            "segment_order",
            "segments must run scene_setup, user_action, intervention_trigger, exit_state",
            field="segments",
        ))

    for prev, current in zip(contract.segments, contract.segments[1:]):
        expected = prev.start_offset_s + prev.duration_s
        delta = current.start_offset_s - expected
        if abs(delta) > tol:
            shape = "gap" if delta > 0 else "overlap"
            violations.append(Violation(
                "segment_discontiguity",
                f"{shape} of {abs(delta):g} s between {prev.kind.value} and {current.kind.value}",
                field="segments",
            ))

    try:
        trigger = contract.segment(SegmentKind.INTERVENTION_TRIGGER)
    except KeyError:
        trigger = None
    if trigger is not None:
        onset = contract.expected_hazard_onset_s
        if onset < trigger.start_offset_s or onset > trigger.end_offset_s:
            violations.append(Violation(
                "onset_outside_trigger",
                f"expected_hazard_onset_s {onset:g} lies outside the trigger window "
                f"[{trigger.start_offset_s:g}, {trigger.end_offset_s:g}]",
                field="expected_hazard_onset_s",
            ))

    if not contract.camera_angle.strip():
        violations.append(Violation(
            "empty_camera_angle", "camera_angle must be non-empty", field="camera_angle",
        ))
    if not contract.lighting.strip():
        violations.append(Violation(
            "empty_lighting", "lighting must be non-empty", field="lighting",
        ))
    return violations
