from __future__ import annotations

import math
import random

import pytest

import egosim.trace as trace
from egosim.errors import InputError
from egosim.trace import (
    FrameObservation,
    HazardObservation,
    SignalConfig,
    area_growth,
    compute_series,
    escalation_curve,
    frames_from_dicts,
    hand_hazard_distance,
    safety_stat,
    smooth_area,
)

CFG = SignalConfig()


# ---------------------------------------------------------------------------
# Independent brute-force oracles. These stay deliberately naive and separate
# from the kernel implementations they check.
# ---------------------------------------------------------------------------


def oracle_windowed_mean(values: list[float], window: int) -> list[float]:
    out = []
    for i in range(len(values)):
        chunk = values[max(0, i - window + 1): i + 1]
        out.append(sum(chunk) / len(chunk))
    return out


def oracle_aggregate(frame: FrameObservation, threshold: float) -> float:
    total = sum(h.area_ratio for h in frame.hazards if h.confidence >= threshold)
    return min(1.0, total)


def oracle_min_distance(frame: FrameObservation, threshold: float) -> float | None:
    if frame.hand_centroid is None:
        return None
    dists = [
        math.dist(frame.hand_centroid, h.centroid)
        for h in frame.hazards
        if h.confidence >= threshold
    ]
    return min(dists) if dists else None


def oracle_growth(smoothed: list[float], timestamps: list[float]) -> list[float | None]:
    out: list[float | None] = [None]
    for i in range(1, len(smoothed)):
        out.append((smoothed[i] - smoothed[i - 1]) / (timestamps[i] - timestamps[i - 1]))
    return out


def random_trace(rng: random.Random, max_frames: int = 50, max_hazards: int = 4) -> list[FrameObservation]:
    n = rng.randint(1, max_frames)
    frames = []
    t = 0.0
    for i in range(n):
        t += rng.uniform(0.05, 0.8)
        hazards = tuple(
            HazardObservation(
                prompt_id=f"haz-{k}",
                confidence=rng.random(),
                area_ratio=rng.random(),
                centroid=(rng.random(), rng.random()),
            )
            for k in range(rng.randint(0, max_hazards))
        )
        hand = (rng.random(), rng.random()) if rng.random() < 0.7 else None
        frames.append(FrameObservation(i, t, hand, hazards))
    return frames


# ---------------------------------------------------------------------------
# Frozen examples
# ---------------------------------------------------------------------------


def _frame(hand, hazards, index=0, t=0.0) -> FrameObservation:
    return FrameObservation(index, t, hand, tuple(
        HazardObservation(f"haz-{i}", conf, area, tuple(c))
        for i, (conf, area, c) in enumerate(hazards)
    ))


def test_distance_coincident_centroids(kernel_backend) -> None:
    frame = _frame((0.5, 0.5), [(0.9, 0.1, (0.5, 0.5))])
    assert hand_hazard_distance(frame, CFG) == 0.0


def test_distance_min_over_active_hazards(kernel_backend) -> None:
    frame = _frame((0.6, 0.8), [(0.9, 0.1, (0.3, 0.4)), (0.9, 0.1, (0.0, 0.0))])
    # hand-computed: sqrt(0.09 + 0.16) = 0.5 and sqrt(0.36 + 0.64) = 1.0
    assert hand_hazard_distance(frame, CFG) == pytest.approx(0.5, abs=1e-15)


def test_distance_ignores_inactive_hazards(kernel_backend) -> None:
    frame = _frame((0.6, 0.8), [(0.9, 0.1, (0.3, 0.4)), (0.3, 0.1, (0.0, 0.0))])
    assert hand_hazard_distance(frame, CFG) == pytest.approx(0.5, abs=1e-15)


def test_distance_absent_without_hand_or_active_hazard(kernel_backend) -> None:
    assert hand_hazard_distance(_frame(None, [(0.9, 0.1, (0.5, 0.5))]), CFG) is None
    assert hand_hazard_distance(_frame((0.5, 0.5), [(0.1, 0.1, (0.5, 0.5))]), CFG) is None
    assert hand_hazard_distance(_frame((0.5, 0.5), []), CFG) is None


def _area_trace(areas: list[float]) -> list[FrameObservation]:
    return [
        _frame(None, [(0.9, a, (0.5, 0.5))], index=i, t=float(i))
        for i, a in enumerate(areas)
    ]


def test_smooth_area_truncated_window(kernel_backend) -> None:
    got = smooth_area(_area_trace([0.1, 0.2, 0.3]), SignalConfig(smoothing_window=3))
    expected = [0.1, 0.15, 0.2]  # truncated-window means, hand-checked
    assert got == pytest.approx(expected, abs=1e-12)


def test_smooth_area_constant_fixed_point(kernel_backend) -> None:
    got = smooth_area(_area_trace([0.4] * 6), SignalConfig(smoothing_window=3))
    assert got == pytest.approx([0.4] * 6, abs=1e-15)


def test_smooth_area_window_one_is_identity(kernel_backend) -> None:
    areas = [0.1, 0.7, 0.2, 0.9]
    got = smooth_area(_area_trace(areas), SignalConfig(smoothing_window=1))
    assert got == pytest.approx(areas, abs=0)


def test_area_growth_direct_quotients(kernel_backend) -> None:
    assert area_growth([0.2, 0.3], [0.0, 1.0])[1] == pytest.approx(0.1, abs=1e-15)
    assert area_growth([0.2, 0.25], [0.0, 0.5])[1] == pytest.approx(0.1, abs=1e-15)
    assert area_growth([0.5, 0.5, 0.5], [0.0, 1.0, 2.0])[1:] == pytest.approx([0.0, 0.0])


def test_area_growth_first_sample_undefined(kernel_backend) -> None:
    assert area_growth([0.2, 0.3], [0.0, 1.0])[0] is None


def test_area_growth_rejects_non_increasing_timestamps(kernel_backend) -> None:
    with pytest.raises(InputError):
        area_growth([0.1, 0.2], [1.0, 1.0])
    with pytest.raises(InputError):
        area_growth([0.1, 0.2, 0.3], [0.0, 2.0, 1.5])


def test_escalation_examples(kernel_backend) -> None:
    inactive = _frame((0.5, 0.5), [(0.1, 0.3, (0.5, 0.5))])
    assert escalation_curve([inactive], [None], [0.4], CFG) == [0.0]

    active = _frame((0.5, 0.5), [(0.9, 0.4, (0.5, 0.5))])
    assert escalation_curve([active], [0.0], [0.4], CFG) == pytest.approx([0.4], abs=1e-15)
    at_scale = escalation_curve([active], [CFG.proximity_scale], [0.4], CFG)
    assert at_scale == pytest.approx([0.0], abs=1e-15)


def test_escalation_without_hand_uses_activity_alone(kernel_backend) -> None:
    active = _frame(None, [(0.9, 0.4, (0.5, 0.5))])
    assert escalation_curve([active], [None], [0.35], CFG) == pytest.approx([0.35], abs=1e-15)


def test_safety_stat_examples() -> None:
    assert safety_stat([0.0, 0.2, 0.7, 0.4]) == 0.7
    assert safety_stat([0.0, 0.0]) == 0.0
    assert safety_stat([0.5]) == 0.5
    assert safety_stat([0.2, 0.4], aggregator="mean") == pytest.approx(0.3)
    with pytest.raises(InputError):
        safety_stat([])


# ---------------------------------------------------------------------------
# Oracle equivalence on random traces
# ---------------------------------------------------------------------------


def test_smooth_area_matches_oracle_on_random_traces(kernel_backend) -> None:
    rng = random.Random(1001)
    for _ in range(200):
        frames = random_trace(rng)
        for w in (1, 2, 3, 5):
            cfg = SignalConfig(smoothing_window=w)
            raw = [oracle_aggregate(f, cfg.activity_confidence_threshold) for f in frames]
            expected = oracle_windowed_mean(raw, w)
            got = smooth_area(frames, cfg)
            assert got == pytest.approx(expected, abs=1e-12)


def test_distance_matches_oracle_on_random_frames(kernel_backend) -> None:
    rng = random.Random(1002)
    for _ in range(300):
        frames = random_trace(rng, max_frames=3)
        for frame in frames:
            expected = oracle_min_distance(frame, CFG.activity_confidence_threshold)
            got = hand_hazard_distance(frame, CFG)
            if expected is None:
                assert got is None
            else:
                assert got == pytest.approx(expected, abs=1e-12)


def test_area_growth_matches_oracle_on_random_traces(kernel_backend) -> None:
    rng = random.Random(1003)
    for _ in range(200):
        frames = random_trace(rng)
        if len(frames) < 2:
            continue
        smoothed = smooth_area(frames, CFG)
        ts = [f.timestamp for f in frames]
        expected = oracle_growth(smoothed, ts)
        got = area_growth(smoothed, ts)
        assert got[0] is None
        assert got[1:] == pytest.approx(expected[1:], abs=1e-12)


def test_compute_series_consistent_with_granular_ops(kernel_backend) -> None:
    rng = random.Random(1004)
    for _ in range(100):
        frames = random_trace(rng)
        series = compute_series(frames, CFG)
        assert list(series.smoothed_areas) == smooth_area(frames, CFG)
        dists = [hand_hazard_distance(f, CFG) for f in frames]
        assert list(series.distances) == dists
        esc = escalation_curve(frames, dists, list(series.smoothed_areas), CFG)
        assert list(series.escalation) == esc
        assert series.safety_stat == safety_stat(esc, CFG.safety_aggregator)
        if len(frames) >= 2:
            ts = [f.timestamp for f in frames]
            assert list(series.growth) == area_growth(list(series.smoothed_areas), ts)


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------


def test_escalation_and_safety_stat_stay_in_unit_interval(kernel_backend) -> None:
    rng = random.Random(1005)
    for _ in range(200):
        frames = random_trace(rng)
        series = compute_series(frames, CFG)
        assert all(0.0 <= e <= 1.0 for e in series.escalation)
        assert 0.0 <= series.safety_stat <= 1.0


def test_growth_antisymmetry_on_reversed_pair(kernel_backend) -> None:
    rng = random.Random(1006)
    for _ in range(100):
        a, b = rng.random(), rng.random()
        dt = rng.uniform(0.1, 2.0)
        forward = area_growth([a, b], [0.0, dt])[1]
        backward = area_growth([b, a], [0.0, dt])[1]
        assert backward == pytest.approx(-forward, abs=1e-12)


def test_single_frame_spike_perturbs_smoothed_series_by_at_most_h_over_w(kernel_backend) -> None:
    # Truncated start windows hold fewer than w samples, where the bound is
    # h / (i + 1); the h / w flicker bound applies once full windows exist.
    rng = random.Random(1007)
    for _ in range(50):
        n = rng.randint(6, 30)
        c = rng.uniform(0.0, 0.5)
        h = rng.uniform(0.0, 0.5)
        w = rng.choice([2, 3, 5])
        spike_at = rng.randrange(w - 1, n)
        areas = [c] * n
        areas[spike_at] = c + h
        smoothed = smooth_area(_area_trace(areas), SignalConfig(smoothing_window=w))
        assert max(abs(v - c) for v in smoothed) <= h / w + 1e-12


def test_kernel_backends_agree_exactly() -> None:
    if "cython" not in trace.available_backends():
        pytest.skip("compiled kernels unavailable")
    rng = random.Random(1008)
    for _ in range(50):
        frames = random_trace(rng)
        trace.set_backend("cython")
        fast = compute_series(frames, CFG)
        trace.set_backend("python")
        slow = compute_series(frames, CFG)
        trace.set_backend("cython")
        assert fast == slow  # bit-identical, not merely approximate


# ---------------------------------------------------------------------------
# Trace IO and validation
# ---------------------------------------------------------------------------


def test_trace_round_trip() -> None:
    rng = random.Random(1009)
    frames = random_trace(rng)
    records = [f.to_dict() for f in frames]
    assert frames_from_dicts(records) == frames


def test_non_increasing_timestamps_rejected() -> None:
    records = [
        FrameObservation(0, 1.0, None, ()).to_dict(),
        FrameObservation(1, 1.0, None, ()).to_dict(),
    ]
    with pytest.raises(InputError):
        frames_from_dicts(records)


def test_observation_range_checks() -> None:
    with pytest.raises(ValueError):
        HazardObservation("h", 1.5, 0.1, (0.5, 0.5))
    with pytest.raises(ValueError):
        HazardObservation("h", 0.5, -0.1, (0.5, 0.5))
    with pytest.raises(ValueError):
        HazardObservation("h", 0.5, 0.1, (1.5, 0.5))
    with pytest.raises(ValueError):
        FrameObservation(-1, 0.0, None, ())
    with pytest.raises(ValueError):
        FrameObservation(0, 0.0, (0.5, 1.5), ())


def test_compute_series_rejects_empty_trace() -> None:
    with pytest.raises(InputError):
        compute_series([], CFG)
