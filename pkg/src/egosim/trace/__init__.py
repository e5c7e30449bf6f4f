"""Physical signal layer: per-frame segmentation traces and derived series.

Traces are produced by an external segmentation tool and loaded from JSON;
this module never runs segmentation. The numeric inner loops live in twin
kernel modules: a compiled Cython extension and a pure-Python fallback with
bit-identical semantics. The compiled backend is selected at import when
available; ``EGOSIM_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import json
import math
import os
from array import array
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from egosim.errors import InputError
from egosim.trace import _pykernels

_BACKENDS: dict[str, Any] = {"python": _pykernels}
try:
    from egosim.trace import _kernels  # compiled extension, optional

    _BACKENDS["cython"] = _kernels
except ImportError:
    _kernels = None

if os.environ.get("EGOSIM_PURE_PYTHON"):
    _active = _BACKENDS["python"]
else:
    _active = _BACKENDS.get("cython", _BACKENDS["python"])


def active_backend() -> str:
    """Name of the kernel backend in use ("cython" or "python")."""
    return _active.BACKEND


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def set_backend(name: str) -> None:
    """Select the kernel backend process-wide; intended for startup/benchmarks."""
    global _active
    if name not in _BACKENDS:
        raise InputError(f"unknown kernel backend {name!r}; available: {available_backends()}")
    _active = _BACKENDS[name]


@dataclass(frozen=True)
class HazardObservation:
    prompt_id: str
    confidence: float
    area_ratio: float
    centroid: tuple[float, float]

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("hazard confidence must lie in [0, 1]")
        if not 0.0 <= self.area_ratio <= 1.0:
            raise ValueError("hazard area_ratio must lie in [0, 1]")
        x, y = self.centroid
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise ValueError("hazard centroid must lie in the unit square")
        object.__setattr__(self, "centroid", (float(x), float(y)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "prompt_id": self.prompt_id,
            "confidence": self.confidence,
            "area_ratio": self.area_ratio,
            "centroid": list(self.centroid),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "HazardObservation":
        return cls(
            prompt_id=data["prompt_id"],
            confidence=float(data["confidence"]),
            area_ratio=float(data["area_ratio"]),
            centroid=tuple(data["centroid"]),
        )


@dataclass(frozen=True)
class FrameObservation:
    frame_index: int
    timestamp: float
    hand_centroid: tuple[float, float] | None
    hazards: tuple[HazardObservation, ...]

    def __post_init__(self) -> None:
        if self.frame_index < 0:
            raise ValueError("frame_index must be >= 0")
        if self.hand_centroid is not None:
            x, y = self.hand_centroid
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise ValueError("hand_centroid must lie in the unit square")
            object.__setattr__(self, "hand_centroid", (float(x), float(y)))
        object.__setattr__(self, "hazards", tuple(self.hazards))

    def to_dict(self) -> dict[str, Any]:
        return {
            "frame_index": self.frame_index,
            "timestamp": self.timestamp,
            "hand_centroid": list(self.hand_centroid) if self.hand_centroid else None,
            "hazards": [h.to_dict() for h in self.hazards],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FrameObservation":
        hand = data.get("hand_centroid")
        return cls(
            frame_index=int(data["frame_index"]),
            timestamp=float(data["timestamp"]),
            hand_centroid=tuple(hand) if hand is not None else None,
            hazards=tuple(HazardObservation.from_dict(h) for h in data["hazards"]),
        )


Trace = Sequence[FrameObservation]


@dataclass(frozen=True)
class SignalConfig:
    smoothing_window: int = 3
    activity_confidence_threshold: float = 0.5
    proximity_scale: float = 0.25
    safety_aggregator: str = "max"

    def __post_init__(self) -> None:
        if self.smoothing_window < 1:
            raise ValueError("smoothing_window must be >= 1")
        if self.proximity_scale <= 0:
            raise ValueError("proximity_scale must be > 0")
        if self.safety_aggregator not in ("max", "mean"):
            raise ValueError("safety_aggregator must be 'max' or 'mean'")


@dataclass(frozen=True)
class SignalSeries:
    """Derived per-frame series plus the per-video safety statistic."""

    distances: tuple[float | None, ...]
    smoothed_areas: tuple[float, ...]
    growth: tuple[float | None, ...]
    escalation: tuple[float, ...]
    safety_stat: float

    def __post_init__(self) -> None:
        n = len(self.smoothed_areas)
        if not (len(self.distances) == len(self.growth) == len(self.escalation) == n):
            raise ValueError("signal series lengths must match the trace")
        if not 0.0 <= self.safety_stat <= 1.0:
            raise ValueError("safety_stat must lie in [0, 1]")

    def to_dict(self) -> dict[str, Any]:
        return {
            "distances": list(self.distances),
            "smoothed_areas": list(self.smoothed_areas),
            "growth": list(self.growth),
            "escalation": list(self.escalation),
            "safety_stat": self.safety_stat,
        }


def validate_trace(frames: Trace) -> None:
    """Reject traces whose timestamps are not strictly increasing."""
    for prev, current in zip(frames, frames[1:]):
        if current.timestamp <= prev.timestamp:
            raise InputError(
                f"trace timestamps must be strictly increasing "
                f"(frame {prev.frame_index} at {prev.timestamp} followed by {current.timestamp})"
            )


def frames_from_dicts(records: Iterable[Mapping[str, Any]]) -> list[FrameObservation]:
    frames = [FrameObservation.from_dict(r) for r in records]
    validate_trace(frames)
    return frames


def load_trace(path: str | Path) -> list[FrameObservation]:
    """Load one video's trace: a JSON array of frame observation records."""
    with open(path, "r", encoding="utf-8") as fh:
        records = json.load(fh)
    if not isinstance(records, list):
        raise InputError(f"trace file {path} must contain a JSON array of frames")
    return frames_from_dicts(records)


def _flatten(frames: Trace) -> tuple[array, array, array, array, array, array, array, array]:
    counts = array("l", [len(f.hazards) for f in frames])
    areas = array("d", [h.area_ratio for f in frames for h in f.hazards])
    confs = array("d", [h.confidence for f in frames for h in f.hazards])
    xs = array("d", [h.centroid[0] for f in frames for h in f.hazards])
    ys = array("d", [h.centroid[1] for f in frames for h in f.hazards])
    hand_x = array("d", [f.hand_centroid[0] if f.hand_centroid else 0.0 for f in frames])
    hand_y = array("d", [f.hand_centroid[1] if f.hand_centroid else 0.0 for f in frames])
    hand_present = array("B", [1 if f.hand_centroid else 0 for f in frames])
    return counts, areas, confs, xs, ys, hand_x, hand_y, hand_present


def hand_hazard_distance(frame: FrameObservation, cfg: SignalConfig = SignalConfig()) -> float | None:
    """Distance from the hand to the nearest active hazard; None when undefined."""
    if frame.hand_centroid is None or not frame.hazards:
        return None
    xs = array("d", [h.centroid[0] for h in frame.hazards])
    ys = array("d", [h.centroid[1] for h in frame.hazards])
    confs = array("d", [h.confidence for h in frame.hazards])
    d = _active.min_active_distance(
        frame.hand_centroid[0], frame.hand_centroid[1],
        xs, ys, confs, cfg.activity_confidence_threshold,
    )
    return None if math.isnan(d) else d


def aggregate_area(frame: FrameObservation, cfg: SignalConfig = SignalConfig()) -> float:
    """Summed area ratio of the frame's active hazards, clamped to 1."""
    if not frame.hazards:
        return 0.0
    areas = array("d", [h.area_ratio for h in frame.hazards])
    confs = array("d", [h.confidence for h in frame.hazards])
    return _active.aggregate_area(areas, confs, cfg.activity_confidence_threshold)


def smooth_area(frames: Trace, cfg: SignalConfig = SignalConfig()) -> list[float]:
    """Moving-average aggregate hazard area, truncated at the trace start."""
    validate_trace(frames)
    raw = array("d", [aggregate_area(f, cfg) for f in frames])
    return list(_active.smooth(raw, cfg.smoothing_window))


def area_growth(smoothed: Sequence[float], timestamps: Sequence[float]) -> list[float | None]:
    """Growth rate of the smoothed area; the first sample is None (undefined)."""
    if len(smoothed) != len(timestamps):
        raise InputError("smoothed series and timestamps must have equal length")
    for prev, current in zip(timestamps, timestamps[1:]):
        if current <= prev:
            raise InputError("timestamps must be strictly increasing")
    if len(smoothed) < 2:
        return [None] * len(smoothed)
    g = _active.growth(array("d", smoothed), array("d", timestamps))
    return [None if math.isnan(v) else v for v in g]


def escalation_curve(
    frames: Trace,
    distances: Sequence[float | None],
    smoothed: Sequence[float],
    cfg: SignalConfig = SignalConfig(),
) -> list[float]:
    """Combine hazard activity with hand proximity into a per-frame risk proxy."""
    if not (len(frames) == len(distances) == len(smoothed)):
        raise InputError("series must be aligned with the trace")
    thr = cfg.activity_confidence_threshold
    active_flags = array(
        "B", [1 if any(h.confidence >= thr for h in f.hazards) else 0 for f in frames]
    )
    dist = array("d", [math.nan if d is None else d for d in distances])
    return list(_active.escalation(array("d", smoothed), dist, active_flags, cfg.proximity_scale))


def safety_stat(escalation: Sequence[float], aggregator: str = "max") -> float:
    """Per-video safety criticality: peak (default) or mean escalation."""
    if len(escalation) == 0:
        raise InputError("safety_stat requires a non-empty escalation series")
    if aggregator == "max":
        return max(escalation)
    if aggregator == "mean":
        return sum(escalation) / len(escalation)
    raise InputError(f"unknown safety aggregator {aggregator!r}")


def compute_series(frames: Trace, cfg: SignalConfig = SignalConfig()) -> SignalSeries:
    """Full signal stack for one trace in a single flattened pass."""
    if len(frames) == 0:
        raise InputError("cannot compute signals for an empty trace")
    validate_trace(frames)

    counts, areas, confs, xs, ys, hand_x, hand_y, hand_present = _flatten(frames)
    agg, dist, active_flags = _active.frame_stats(
        counts, areas, confs, xs, ys, hand_x, hand_y, hand_present,
        cfg.activity_confidence_threshold,
    )
    smoothed = _active.smooth(array("d", agg), cfg.smoothing_window)
    timestamps = [f.timestamp for f in frames]
    if len(frames) >= 2:
        g_raw = _active.growth(array("d", smoothed), array("d", timestamps))
        g = [None if math.isnan(v) else v for v in g_raw]
    else:
        g = [None]
    esc = _active.escalation(
        array("d", smoothed),
        array("d", dist),
        array("B", active_flags),
        cfg.proximity_scale,
    )
    return SignalSeries(
        distances=tuple(None if math.isnan(d) else d for d in dist),
        smoothed_areas=tuple(smoothed),
        growth=tuple(g),
        escalation=tuple(esc),
        safety_stat=safety_stat(esc, cfg.safety_aggregator),
    )
