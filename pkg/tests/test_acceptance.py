"""Acceptance criteria, one test per criterion at its stated tolerance.

The conftest terminal-summary hook prints one PASS/FAIL line per criterion
after the run.
"""

from __future__ import annotations

import dataclasses
import json
import math
import random
import time

import pytest
from hypothesis import given, settings, strategies as st

import egosim.trace as trace_mod
from egosim.domain import (
    AssistanceMode,
    VideoRecord,
    VideoStatus,
    mode_predicate,
    validate_script,
    validate_seed,
)
from egosim.errors import StepFailure
from egosim.gateway import stub_gateway
from egosim.pipeline import (
    ArtifactStore,
    PipelineConfig,
    STEP_FILES,
    run_pipeline,
    verify_chain,
)
from egosim.reporting import aggregate
from egosim.scoring import (
    DEFAULT_WEIGHTS,
    FprCounts,
    FusionWeights,
    GateStatus,
    ToleranceWindow,
    apply_gate,
    fpr,
    latency_score,
    overall_score,
)
from egosim.trace import SignalConfig, area_growth, hand_hazard_distance, smooth_area
from tests.factories import make_scenario
from tests.test_reporting import VALID_PATTERN, brute_force_means, fixture_scores
from tests.test_signals import (
    oracle_aggregate,
    oracle_growth,
    oracle_min_distance,
    oracle_windowed_mean,
    random_trace,
)


def test_fusion_exactness() -> None:
    started = time.perf_counter()
    assert abs(overall_score(1, 1, 1, 1, 1, False) - 1.0) <= 1e-12
    assert overall_score(1, 1, 1, 1, 1, True) == 0.75  # exact
    assert time.perf_counter() - started < 1.0


def test_weight_audit_exact_sum() -> None:
    # DEFAULT_WEIGHTS is constructed at import; construction rejects any
    # weight set whose sum is not exactly 1.0.
    w = DEFAULT_WEIGHTS
    assert w.helpfulness + w.tone + w.latency + w.safety_criticality + w.observability == 1.0
    assert 0.4 + 0.08 + 0.25 + 0.20 + 0.07 == 1.0
    with pytest.raises(ValueError):
        FusionWeights(observability=0.07000001)


def test_latency_identity_and_shape() -> None:
    started = time.perf_counter()
    rng = random.Random(20240)
    for _ in range(10_000):
        lo = rng.uniform(-6, 6)
        window = ToleranceWindow(
            tau_lo=lo,
            tau_hi=lo + rng.uniform(0, 9),
            rho_early=rng.uniform(0.5, 12),
            rho_late=rng.uniform(0.5, 15),
        )
        dt = None if rng.random() < 0.05 else rng.uniform(-40, 40)
        s = latency_score(dt, window)
        e = 1.0 - s
        assert e == 1.0 - s and 0.0 <= s <= 1.0
        if dt is not None and window.tau_lo <= dt <= window.tau_hi:
            assert s == 1.0 and e == 0.0  # maximum attained exactly on the window
        if dt is None:
            assert s == 0.0

        # continuity at both window edges within 1e-9
        eps = 1e-12
        assert abs(latency_score(window.tau_lo - eps, window) - 1.0) < 1e-9
        assert abs(latency_score(window.tau_hi + eps, window) - 1.0) < 1e-9

        # monotone decay outside the window, via sorted sampling
        late = sorted(rng.uniform(window.tau_hi, window.tau_hi + 50) for _ in range(4))
        late_scores = [latency_score(x, window) for x in late]
        assert all(a >= b for a, b in zip(late_scores, late_scores[1:]))
        early = sorted(rng.uniform(window.tau_lo - 50, window.tau_lo) for _ in range(4))
        early_scores = [latency_score(x, window) for x in early]
        assert all(a <= b for a, b in zip(early_scores, early_scores[1:]))
    assert time.perf_counter() - started < 5.0


@pytest.mark.parametrize("backend", trace_mod.available_backends())
def test_signal_oracles(backend: str) -> None:
    started = time.perf_counter()
    previous = trace_mod.active_backend()
    trace_mod.set_backend(backend)
    try:
        rng = random.Random(20241)
        for _ in range(1000):
            frames = random_trace(rng, max_frames=50, max_hazards=4)
            for w in (1, 2, 3, 5):
                cfg = SignalConfig(smoothing_window=w)
                raw = [oracle_aggregate(f, cfg.activity_confidence_threshold) for f in frames]
                expected_smooth = oracle_windowed_mean(raw, w)
                got_smooth = smooth_area(frames, cfg)
                assert all(
                    abs(a - b) <= 1e-12 for a, b in zip(got_smooth, expected_smooth)
                )
            frame = frames[rng.randrange(len(frames))]
            expected_d = oracle_min_distance(frame, 0.5)
            got_d = hand_hazard_distance(frame)
            if expected_d is None:
                assert got_d is None
            else:
                assert got_d is not None and abs(got_d - expected_d) <= 1e-12
            if len(frames) >= 2:
                smoothed = smooth_area(frames, SignalConfig())
                ts = [f.timestamp for f in frames]
                expected_g = oracle_growth(smoothed, ts)
                got_g = area_growth(smoothed, ts)
                assert got_g[0] is None
                assert all(
                    abs(a - b) <= 1e-12 for a, b in zip(got_g[1:], expected_g[1:])
                )
    finally:
        trace_mod.set_backend(previous)
    assert time.perf_counter() - started < 10.0


def test_gate_boundary() -> None:
    def record(alignment: float) -> VideoRecord:
        return VideoRecord(
            id="vid-x", script_ref="scr-x", first_frame_ref="img-x", video_ref="vid-y",
            duration_s=12.0, alignment_score=alignment, status=VideoStatus.RENDERED,
        )

    assert apply_gate(record(0.499999)).status is GateStatus.EXCLUDED
    assert apply_gate(record(0.5)).status is GateStatus.VALID


def test_fpr_values_and_not_applicable() -> None:
    assert fpr(FprCounts(false_positives=1, true_negatives=3)) == 0.25
    assert fpr(FprCounts(false_positives=0, true_negatives=0)) is None


def test_aggregation_fixture_reproduces_brute_force_means() -> None:
    scores = fixture_scores(VALID_PATTERN)  # 60 scores, 20 per mode, 7/5/5 valid
    assert len(scores) == 60
    rows = aggregate(scores)
    modes = list(AssistanceMode)
    for row, mode in zip(rows, modes):
        subset = [s for s in scores if s.mode is mode]
        expected = brute_force_means(subset)
        assert row.total == row.valid + row.excluded == 20
        assert row.valid == VALID_PATTERN[mode]
        for key, value in expected.items():
            got = getattr(row, key)
            assert got is not None and abs(got - value) <= 1e-12
    all_row = rows[-1]
    expected = brute_force_means(scores)
    assert all_row.total == all_row.valid + all_row.excluded == 60
    assert all_row.valid == 17
    for key, value in expected.items():
        got = getattr(all_row, key)
        assert got is not None and abs(got - value) <= 1e-12


def test_pipeline_end_to_end_stub_offline(tmp_path, monkeypatch) -> None:
    import httpx

    def refuse_network(*args, **kwargs):
        raise AssertionError("network client constructed during offline acceptance run")

    monkeypatch.setattr(httpx, "Client", refuse_network)

    started = time.perf_counter()
    gateway = stub_gateway()
    cfg = PipelineConfig()
    scenario = make_scenario()

    store_a = ArtifactStore(tmp_path / "run_a")
    run_pipeline(scenario, cfg, store_a, gateway)
    for filename in STEP_FILES.values():
        assert (store_a.root / filename).exists(), filename

    scripts = store_a.read_scripts()
    for script in scripts:
        assert validate_script(script) == []
    assert verify_chain(store_a) == []
    assert {s.mode for s in store_a.read_step4()} == set(AssistanceMode)

    store_b = ArtifactStore(tmp_path / "run_b")
    run_pipeline(scenario, cfg, store_b, gateway)
    for filename in [*STEP_FILES.values(), "scenario.json", "retry_log.json"]:
        assert (store_a.root / filename).read_bytes() == (store_b.root / filename).read_bytes()
    assert time.perf_counter() - started < 30.0


def test_schema_retry_accounting(tmp_path) -> None:
    gateway = stub_gateway(malform_first=True)
    store = ArtifactStore(tmp_path / "retries")
    run_pipeline(make_scenario(), PipelineConfig(), store, gateway)
    assert store.read_retry_log() == {f"step{n}": 1 for n in range(1, 6)}
    assert verify_chain(store) == []

    failing_store = ArtifactStore(tmp_path / "budget_zero")
    with pytest.raises(StepFailure) as excinfo:
        run_pipeline(
            make_scenario(), PipelineConfig(schema_retry_limit=0), failing_store, gateway,
        )
    assert excinfo.value.step == "step1"
    assert excinfo.value.raw_payloads
    retained = failing_store.root / "failures" / "step1_payloads.json"
    assert retained.exists()
    assert json.loads(retained.read_text()) == excinfo.value.raw_payloads
    assert not failing_store.has_step(1)


_SEED_FIELD_STRATEGY = st.fixed_dictionaries({
    "mode": st.sampled_from(list(AssistanceMode)),
    "utterance": st.one_of(st.none(), st.just("Can you help me find the salt?")),
    "addressed": st.booleans(),
    "aware": st.booleans(),
})


@settings(max_examples=300, deadline=None)
@given(fields=_SEED_FIELD_STRATEGY)
def test_mode_invariants_property(fields) -> None:
    from tests.factories import make_chain

    index, seed = make_chain(fields["mode"])
    mutated = dataclasses.replace(
        seed,
        user_utterance=fields["utterance"],
        utterance_addressed_to_agent=fields["addressed"],
        user_aware=fields["aware"],
    )
    violations = validate_seed(mutated, index)
    accepted = violations == []
    assert accepted == mode_predicate(mutated, mutated.mode)

    if accepted:
        if mutated.mode in (AssistanceMode.REACTIVE, AssistanceMode.EXPLICIT_PROACTIVE):
            assert mutated.user_utterance is not None
        else:
            assert mutated.user_utterance is None
    else:
        names = {v.code for v in violations}
        assert names <= {"mode_utterance_mismatch", "mode_awareness_mismatch"}
        has_utterance = mutated.user_utterance is not None
        utterance_wrong = (
            (mutated.mode is AssistanceMode.REACTIVE
             and not (has_utterance and mutated.utterance_addressed_to_agent))
            or (mutated.mode is AssistanceMode.EXPLICIT_PROACTIVE
                and not (has_utterance and not mutated.utterance_addressed_to_agent))
            or (mutated.mode is AssistanceMode.IMPLICIT_PROACTIVE
                and (has_utterance or mutated.utterance_addressed_to_agent))
        )
        awareness_wrong = (
            mutated.user_aware != (mutated.mode is not AssistanceMode.IMPLICIT_PROACTIVE)
        )
        if utterance_wrong:
            assert "mode_utterance_mismatch" in names
        if awareness_wrong:
            assert "mode_awareness_mismatch" in names


def test_mode_invariants_generated_seeds() -> None:
    """Seeds produced by the pipeline itself always satisfy mode semantics."""
    gateway = stub_gateway()
    from egosim.pipeline import step4_bind_modes
    from tests.factories import make_chain

    index, seed = make_chain()
    seeds = step4_bind_modes(
        index.interventions[seed.intervention_id],
        index.user_actions[seed.user_action_id],
        [index.signals[s] for s in seed.signal_ids],
        PipelineConfig(), gateway,
    )
    for bound in seeds:
        index.add(bound)
        assert validate_seed(bound, index) == []
        assert mode_predicate(bound, bound.mode)
        if bound.mode is AssistanceMode.IMPLICIT_PROACTIVE:
            assert bound.user_utterance is None
        else:
            assert bound.user_utterance is not None
