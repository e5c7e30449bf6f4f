#!/usr/bin/env python3
"""Benchmark the compiled trace kernels against the pure-Python fallback.

Builds one long synthetic segmentation trace and times the full signal stack
(compute_series) on each available backend, verifying that both produce
bit-identical results.
"""

from __future__ import annotations

import argparse
import random
import time

import egosim.trace as trace_mod
from egosim.trace import FrameObservation, HazardObservation, SignalConfig, compute_series


def synthetic_trace(frames: int, hazards_per_frame: int, seed: int = 7) -> list[FrameObservation]:
    rng = random.Random(seed)
    out = []
    t = 0.0
    for i in range(frames):
        t += 1.0 / 30.0
        hazards = tuple(
            HazardObservation(
                prompt_id=f"haz-{k}",
                confidence=rng.random(),
                area_ratio=rng.random() * 0.4,
                centroid=(rng.random(), rng.random()),
            )
            for k in range(hazards_per_frame)
        )
        hand = (rng.random(), rng.random()) if rng.random() < 0.8 else None
        out.append(FrameObservation(i, t, hand, hazards))
    return out


def time_backend(name: str, frames, cfg: SignalConfig, repeats: int) -> tuple[float, object]:
    trace_mod.set_backend(name)
    best = float("inf")
    series = None
    for _ in range(repeats):
        started = time.perf_counter()
        series = compute_series(frames, cfg)
        best = min(best, time.perf_counter() - started)
    return best, series


def time_kernels_only(name: str, flattened, timestamps, cfg: SignalConfig, repeats: int) -> float:
    """Time just the kernel stage, excluding the shared flattening pass."""
    from array import array

    impl = trace_mod._BACKENDS[name]
    counts, areas, confs, xs, ys, hand_x, hand_y, hand_present = flattened
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        agg, dist, active = impl.frame_stats(
            counts, areas, confs, xs, ys, hand_x, hand_y, hand_present,
            cfg.activity_confidence_threshold,
        )
        smoothed = impl.smooth(array("d", agg), cfg.smoothing_window)
        impl.growth(array("d", smoothed), timestamps)
        impl.escalation(array("d", smoothed), array("d", dist), array("B", active),
                        cfg.proximity_scale)
        best = min(best, time.perf_counter() - started)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--frames", type=int, default=200_000)
    parser.add_argument("--hazards", type=int, default=3)
    parser.add_argument("--window", type=int, default=3)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    print(f"building synthetic trace: {args.frames} frames x {args.hazards} hazards")
    frames = synthetic_trace(args.frames, args.hazards)
    cfg = SignalConfig(smoothing_window=args.window)

    available = trace_mod.available_backends()
    if "cython" not in available:
        print("compiled kernels unavailable; only the pure-Python backend will run")

    from array import array

    flattened = trace_mod._flatten(frames)
    timestamps = array("d", [f.timestamp for f in frames])

    results = {}
    print(f"{'backend':>8}  {'end-to-end':>12}  {'kernels only':>12}")
    for name in available:
        elapsed, series = time_backend(name, frames, cfg, args.repeats)
        kernel_elapsed = time_kernels_only(name, flattened, timestamps, cfg, args.repeats)
        results[name] = (elapsed, kernel_elapsed, series)
        print(f"{name:>8}  {elapsed * 1e3:9.2f} ms  {kernel_elapsed * 1e3:9.2f} ms")

    if len(results) == 2:
        fast = results["cython"]
        slow = results["python"]
        identical = fast[2] == slow[2]
        print(
            f"speedup: {slow[0] / fast[0]:.1f}x end-to-end, "
            f"{slow[1] / fast[1]:.1f}x kernels only; bit-identical results: {identical}"
        )
        if not identical:
            raise SystemExit("backend results diverged")


if __name__ == "__main__":
    main()
