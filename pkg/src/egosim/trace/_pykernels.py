"""Pure-Python twin of the compiled trace kernels.

Iteration order and arithmetic mirror ``_kernels.pyx`` operation for
operation, so both backends produce bit-identical series on the same input.
Values that are undefined for a frame (no hand, no active hazard, first
growth sample) are represented as NaN inside the kernel layer; the public
API maps them to ``None``.
"""

from __future__ import annotations

import math

BACKEND = "python"


def smooth(areas, window):
    """Truncated moving mean over the trailing ``window`` samples."""
    n = len(areas)
    out = [0.0] * n
    for i in range(n):
        lo = i - window + 1
        if lo < 0:
            lo = 0
        acc = 0.0
        for j in range(lo, i + 1):
            acc += areas[j]
        out[i] = acc / float(i - lo + 1)
    return out


def growth(smoothed, timestamps):
    """Per-frame difference quotient; index 0 is NaN (undefined)."""
    n = len(smoothed)
    out = [0.0] * n
    if n > 0:
        out[0] = math.nan
    for i in range(1, n):
        out[i] = (smoothed[i] - smoothed[i - 1]) / (timestamps[i] - timestamps[i - 1])
    return out


def aggregate_area(areas, confs, threshold):
    """Sum of active hazards' area ratios, clamped to 1."""
    acc = 0.0
    for i in range(len(areas)):
        if confs[i] >= threshold:
            acc += areas[i]
    if acc > 1.0:
        acc = 1.0
    return acc


def min_active_distance(hand_x, hand_y, xs, ys, confs, threshold):
    """Minimum Euclidean distance from the hand to an active hazard; NaN if none."""
    best = math.nan
    for i in range(len(xs)):
        if confs[i] >= threshold:
            dx = hand_x - xs[i]
            dy = hand_y - ys[i]
            d = math.sqrt(dx * dx + dy * dy)
            if math.isnan(best) or d < best:
                best = d
    return best


def frame_stats(counts, areas, confs, xs, ys, hand_x, hand_y, hand_present, threshold):
    """One pass over a flattened trace.

    ``counts[i]`` is the number of hazards in frame ``i``; hazard attributes
    are concatenated in frame order. Returns per-frame aggregate area,
    hand-hazard distance (NaN when absent), and an active-hazard flag.
    """
    n = len(counts)
    agg = [0.0] * n
    dist = [0.0] * n
    active = [0] * n
    offset = 0
    for i in range(n):
        count = counts[i]
        acc = 0.0
        best = math.nan
        flag = 0
        for j in range(offset, offset + count):
            if confs[j] >= threshold:
                flag = 1
                acc += areas[j]
                if hand_present[i]:
                    dx = hand_x[i] - xs[j]
                    dy = hand_y[i] - ys[j]
                    d = math.sqrt(dx * dx + dy * dy)
                    if math.isnan(best) or d < best:
                        best = d
        if acc > 1.0:
            acc = 1.0
        agg[i] = acc
        dist[i] = best
        active[i] = flag
        offset += count
    return agg, dist, active


def escalation(smoothed, distances, any_active, scale):
    """Per-frame escalation: clamped activity scaled by hand proximity."""
    n = len(smoothed)
    out = [0.0] * n
    for i in range(n):
        if not any_active[i]:
            out[i] = 0.0
            continue
        a = smoothed[i]
        if a < 0.0:
            a = 0.0
        elif a > 1.0:
            a = 1.0
        factor = 1.0
        if not math.isnan(distances[i]):
            factor = 1.0 - distances[i] / scale
            if factor < 0.0:
                factor = 0.0
            elif factor > 1.0:
                factor = 1.0
        out[i] = a * factor
    return out
