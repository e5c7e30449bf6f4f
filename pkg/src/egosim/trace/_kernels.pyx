# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled trace kernels; semantics mirror ``_pykernels`` exactly.

Inputs are C-contiguous double (or unsigned char) buffers; callers flatten
traces once and pass ``array.array`` views. No fast-math flags are used so
results stay bit-identical to the pure-Python twin.
"""

from libc.math cimport isnan, sqrt, NAN

BACKEND = "cython"


def smooth(double[::1] areas, Py_ssize_t window):
    """Truncated moving mean over the trailing ``window`` samples."""
    cdef Py_ssize_t n = areas.shape[0]
    cdef Py_ssize_t i, j, lo
    cdef double acc
    out = [0.0] * n
    for i in range(n):
        lo = i - window + 1
        if lo < 0:
            lo = 0
        acc = 0.0
        for j in range(lo, i + 1):
            acc += areas[j]
        out[i] = acc / (<double> (i - lo + 1))
    return out


def growth(double[::1] smoothed, double[::1] timestamps):
    """Per-frame difference quotient; index 0 is NaN (undefined)."""
    cdef Py_ssize_t n = smoothed.shape[0]
    cdef Py_ssize_t i
    out = [0.0] * n
    if n > 0:
        out[0] = NAN
    for i in range(1, n):
        out[i] = (smoothed[i] - smoothed[i - 1]) / (timestamps[i] - timestamps[i - 1])
    return out


def aggregate_area(double[::1] areas, double[::1] confs, double threshold):
    """Sum of active hazards' area ratios, clamped to 1."""
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(areas.shape[0]):
        if confs[i] >= threshold:
            acc += areas[i]
    if acc > 1.0:
        acc = 1.0
    return acc


def min_active_distance(double hand_x, double hand_y,
                        double[::1] xs, double[::1] ys, double[::1] confs,
                        double threshold):
    """Minimum Euclidean distance from the hand to an active hazard; NaN if none."""
    cdef Py_ssize_t i
    cdef double best = NAN
    cdef double dx, dy, d
    for i in range(xs.shape[0]):
        if confs[i] >= threshold:
            dx = hand_x - xs[i]
            dy = hand_y - ys[i]
            d = sqrt(dx * dx + dy * dy)
            if isnan(best) or d < best:
                best = d
    return best


def frame_stats(long[::1] counts,
                double[::1] areas, double[::1] confs,
                double[::1] xs, double[::1] ys,
                double[::1] hand_x, double[::1] hand_y,
                unsigned char[::1] hand_present,
                double threshold):
    """One pass over a flattened trace; see the pure-Python twin for layout."""
    cdef Py_ssize_t n = counts.shape[0]
    cdef Py_ssize_t i, j, offset = 0
    cdef long count
    cdef double acc, best, dx, dy, d
    cdef int flag
    agg = [0.0] * n
    dist = [0.0] * n
    active = [0] * n
    for i in range(n):
        count = counts[i]
        acc = 0.0
        best = NAN
        flag = 0
        for j in range(offset, offset + count):
            if confs[j] >= threshold:
                flag = 1
                acc += areas[j]
                if hand_present[i]:
                    dx = hand_x[i] - xs[j]
                    dy = hand_y[i] - ys[j]
                    d = sqrt(dx * dx + dy * dy)
                    if isnan(best) or d < best:
                        best = d
        if acc > 1.0:
            acc = 1.0
        agg[i] = acc
        dist[i] = best
        active[i] = flag
        offset += count
    return agg, dist, active


def escalation(double[::1] smoothed, double[::1] distances,
               unsigned char[::1] any_active, double scale):
    """Per-frame escalation: clamped activity scaled by hand proximity."""
    cdef Py_ssize_t n = smoothed.shape[0]
    cdef Py_ssize_t i
    cdef double a, factor
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
        if not isnan(distances[i]):
            factor = 1.0 - distances[i] / scale
            if factor < 0.0:
                factor = 0.0
            elif factor > 1.0:
                factor = 1.0
        out[i] = a * factor
    return out
