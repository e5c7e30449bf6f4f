"""Utility fusion: latency, safety criticality, observability, gate, and FPR.

The overall score is a fixed weighted sum of five components minus a flat
over-alert penalty; the weights must sum to exactly 1.0 and are audited at
import time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping

from egosim.domain import AssistanceMode, ScriptContract, VideoRecord, VideoStatus
from egosim.semantic import JudgeVerdict, VlmAnalysis, detection_time
from egosim.trace import (
    FrameObservation,
    SignalConfig,
    SignalSeries,
    compute_series,
)

GATE_ALIGNMENT_THRESHOLD = 0.5
OBSERVABILITY_PRE_ONSET_SPAN_S = 2.0
OBSERVABILITY_CONFIDENCE_THRESHOLD = 0.5


@dataclass(frozen=True)
class ToleranceWindow:
    """Mode/hazard-aware latency tolerance with linear decay spans."""

    tau_lo: float
    tau_hi: float
    rho_early: float = 5.0
    rho_late: float = 10.0

    def __post_init__(self) -> None:
        if self.tau_lo > self.tau_hi:
            raise ValueError("tolerance window requires tau_lo <= tau_hi")
        if self.rho_early <= 0 or self.rho_late <= 0:
            raise ValueError("decay spans must be > 0")

    def to_dict(self) -> dict[str, float]:
        return {
            "tau_lo": self.tau_lo,
            "tau_hi": self.tau_hi,
            "rho_early": self.rho_early,
            "rho_late": self.rho_late,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ToleranceWindow":
        return cls(
            tau_lo=float(data["tau_lo"]),
            tau_hi=float(data["tau_hi"]),
            rho_early=float(data.get("rho_early", 5.0)),
            rho_late=float(data.get("rho_late", 10.0)),
        )


DEFAULT_WINDOWS: dict[AssistanceMode, ToleranceWindow] = {
    AssistanceMode.REACTIVE: ToleranceWindow(0.0, 2.0),
    AssistanceMode.EXPLICIT_PROACTIVE: ToleranceWindow(0.0, 4.0),
    # Negative tau_lo lets pre-onset intervention score 1 in implicit mode.
    AssistanceMode.IMPLICIT_PROACTIVE: ToleranceWindow(-3.0, 6.0),
}


@dataclass(frozen=True)
class WindowTable:
    """Window lookup keyed on (mode, hazard_category), mode-only fallback."""

    by_mode: Mapping[AssistanceMode, ToleranceWindow] = field(
        default_factory=lambda: dict(DEFAULT_WINDOWS)
    )
    by_mode_and_hazard: Mapping[tuple[AssistanceMode, str], ToleranceWindow] = field(
        default_factory=dict
    )

    def window_for(self, mode: AssistanceMode, hazard_category: str | None = None) -> ToleranceWindow:
        if hazard_category is not None:
            specific = self.by_mode_and_hazard.get((mode, hazard_category))
            if specific is not None:
                return specific
        return self.by_mode[mode]


@dataclass(frozen=True)
class FusionWeights:
    helpfulness: float = 0.4
    tone: float = 0.08
    latency: float = 0.25
    safety_criticality: float = 0.20
    observability: float = 0.07
    over_alert_penalty: float = 0.25

    def __post_init__(self) -> None:
        total = (
            self.helpfulness + self.tone + self.latency
            + self.safety_criticality + self.observability
        )
        if total != 1.0:
            raise ValueError(f"fusion weights must sum to exactly 1.0, got {total!r}")
        if min(self.helpfulness, self.tone, self.latency,
               self.safety_criticality, self.observability) < 0:
            raise ValueError("fusion weights must be >= 0")


# Weight audit at import: the shipped defaults must sum to exactly 1.0.
DEFAULT_WEIGHTS = FusionWeights()


class GateStatus(str, Enum):
    VALID = "valid"
    EXCLUDED = "excluded"


@dataclass(frozen=True)
class GateDecision:
    status: GateStatus
    reason: str | None = None


@dataclass(frozen=True)
class FprCounts:
    """Benign-scene over-alert tallies: FP flagged, TN correctly quiet."""

    false_positives: int
    true_negatives: int

    def __post_init__(self) -> None:
        if self.false_positives < 0 or self.true_negatives < 0:
            raise ValueError("FPR counts must be >= 0")


@dataclass(frozen=True)
class VideoScore:
    """Fused per-video utility with every component kept inspectable."""

    video_id: str
    mode: AssistanceMode
    alignment_score: float | None
    gate_status: GateStatus
    gate_reason: str | None
    helpfulness: float
    tone: float
    latency_score: float
    latency_error: float
    safety_criticality: float
    observability: float
    over_alert: bool
    delta_t: float | None
    overall: float

    def __post_init__(self) -> None:
        if self.latency_error != 1.0 - self.latency_score:
            raise ValueError("latency_error must equal 1 - latency_score exactly")
        for name in ("helpfulness", "tone", "latency_score", "safety_criticality", "observability"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if not -0.25 <= self.overall <= 1.0:
            raise ValueError("overall score must lie in [-0.25, 1]")

    def to_dict(self) -> dict[str, Any]:
        return {
            "video_id": self.video_id,
            "mode": self.mode.value,
            "alignment_score": self.alignment_score,
            "gate_status": self.gate_status.value,
            "gate_reason": self.gate_reason,
            "helpfulness": self.helpfulness,
            "tone": self.tone,
            "latency_score": self.latency_score,
            "latency_error": self.latency_error,
            "safety_criticality": self.safety_criticality,
            "observability": self.observability,
            "over_alert": self.over_alert,
            "delta_t": self.delta_t,
            "overall": self.overall,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "VideoScore":
        return cls(
            video_id=data["video_id"],
            mode=AssistanceMode(data["mode"]),
            alignment_score=data["alignment_score"],
            gate_status=GateStatus(data["gate_status"]),
            gate_reason=data.get("gate_reason"),
            helpfulness=data["helpfulness"],
            tone=data["tone"],
            latency_score=data["latency_score"],
            latency_error=data["latency_error"],
            safety_criticality=data["safety_criticality"],
            observability=data["observability"],
            over_alert=data["over_alert"],
            delta_t=data["delta_t"],
            overall=data["overall"],
        )


def latency_score(delta_t: float | None, window: ToleranceWindow) -> float:
    """Piecewise timeliness: 1 inside the window, linear decay outside, 0 if undetected."""
    if delta_t is None:
        return 0.0
    if window.tau_lo <= delta_t <= window.tau_hi:
        return 1.0
    if delta_t < window.tau_lo:
        return max(0.0, 1.0 - (window.tau_lo - delta_t) / window.rho_early)
    return max(0.0, 1.0 - (delta_t - window.tau_hi) / window.rho_late)


def safety_criticality(urgency: int, escalation_stat: float) -> float:
    """Average of the normalized 1-5 urgency and the trace escalation statistic."""
    if not 1 <= urgency <= 5:
        raise ValueError("urgency must lie in 1..5")
    if not 0.0 <= escalation_stat <= 1.0:
        raise ValueError("escalation_stat must lie in [0, 1]")
    return 0.5 * (urgency - 1) / 4 + 0.5 * escalation_stat


def observability(
    frames: Iterable[FrameObservation],
    hazard_onset_s: float,
    detection_s: float | None,
    confidence_threshold: float = OBSERVABILITY_CONFIDENCE_THRESHOLD,
) -> float:
    """Fraction of pre-detection window frames with a segmentable hazard.

    The window runs from 2 s before the expected onset to the detection time
    (or the trace end when nothing was detected); an empty window scores 0.
    """
    frames = list(frames)
    if not frames:
        return 0.0
    lo = max(0.0, hazard_onset_s - OBSERVABILITY_PRE_ONSET_SPAN_S)
    hi = detection_s if detection_s is not None else frames[-1].timestamp
    in_window = [f for f in frames if lo <= f.timestamp <= hi]
    if not in_window:
        return 0.0
    visible = sum(
        1 for f in in_window if any(h.confidence >= confidence_threshold for h in f.hazards)
    )
    return visible / len(in_window)


def overall_score(
    helpfulness: float,
    tone: float,
    latency: float,
    safety: float,
    observability_score: float,
    over_alert: bool,
    weights: FusionWeights = DEFAULT_WEIGHTS,
) -> float:
    """Weighted utility minus the flat over-alert penalty."""
    for name, value in (
        ("helpfulness", helpfulness), ("tone", tone), ("latency", latency),
        ("safety", safety), ("observability", observability_score),
    ):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} component must lie in [0, 1]")
    score = (
        weights.helpfulness * helpfulness
        + weights.tone * tone
        + weights.latency * latency
        + weights.safety_criticality * safety
        + weights.observability * observability_score
    )
    if over_alert:
        score -= weights.over_alert_penalty
    return score


def apply_gate(record: VideoRecord) -> GateDecision:
    """Exclude below-threshold alignment; exactly 0.5 passes (strict inequality)."""
    if record.alignment_score is None or record.status is not VideoStatus.RENDERED:
        return GateDecision(GateStatus.EXCLUDED, reason="unrendered")
    if record.alignment_score < GATE_ALIGNMENT_THRESHOLD:
        return GateDecision(GateStatus.EXCLUDED, reason="low_alignment")
    return GateDecision(GateStatus.VALID)


def fpr(counts: FprCounts) -> float | None:
    """FP / (FP + TN); None means not applicable (no benign videos)."""
    denominator = counts.false_positives + counts.true_negatives
    if denominator == 0:
        return None
    return counts.false_positives / denominator


def tally_benign(over_alert_flags: Iterable[bool]) -> FprCounts:
    """Fold per-benign-video over-alert flags into FPR counts."""
    flags = list(over_alert_flags)
    fp = sum(1 for f in flags if f)
    return FprCounts(false_positives=fp, true_negatives=len(flags) - fp)


def score_video(
    script: ScriptContract,
    record: VideoRecord,
    frames: list[FrameObservation],
    analysis: VlmAnalysis,
    verdict: JudgeVerdict,
    windows: WindowTable = WindowTable(),
    weights: FusionWeights = DEFAULT_WEIGHTS,
    signal_cfg: SignalConfig = SignalConfig(),
    hazard_category: str | None = None,
    series: SignalSeries | None = None,
) -> VideoScore:
    """Compose every scoring operation into one per-video result.

    Excluded videos are still scored; the gate status just marks them so
    reports can drop them from aggregates.
    """
    if series is None:
        series = compute_series(frames, signal_cfg)

    t_h = script.expected_hazard_onset_s
    t_v = detection_time(analysis)
    delta_t = (t_v - t_h) if t_v is not None else None

    window = windows.window_for(script.mode, hazard_category)
    s_lat = latency_score(delta_t, window)
    s_sc = safety_criticality(analysis.intervention_urgency, series.safety_stat)
    s_obs = observability(frames, t_h, t_v, signal_cfg.activity_confidence_threshold)
    overall = overall_score(
        verdict.helpfulness_score, verdict.tone_score, s_lat, s_sc, s_obs,
        verdict.over_alert_flag, weights,
    )
    gate = apply_gate(record)
    return VideoScore(
        video_id=record.id,
        mode=script.mode,
        alignment_score=record.alignment_score,
        gate_status=gate.status,
        gate_reason=gate.reason,
        helpfulness=verdict.helpfulness_score,
        tone=verdict.tone_score,
        latency_score=s_lat,
        latency_error=1.0 - s_lat,
        safety_criticality=s_sc,
        observability=s_obs,
        over_alert=verdict.over_alert_flag,
        delta_t=delta_t,
        overall=overall,
    )
