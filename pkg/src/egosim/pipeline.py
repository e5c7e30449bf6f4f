"""Five-step script-generation pipeline with per-step schema validation.

Invalid backend payloads trigger full regeneration (never field patching)
with the validation feedback appended to the prompt, up to the configured
retry budget; every schema-invalid payload is counted in the retry log and
retained on step failure. Canonical artifact ids are content hashes assigned
here; backend-supplied ids are untrusted and ignored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import yaml

from egosim import prompts
from egosim._ids import content_id
from egosim.domain import (
    ArtifactIndex,
    AssistanceMode,
    InterventionCandidate,
    InterventionKind,
    ScenarioSpec,
    ScriptContract,
    Segment,
    SEGMENT_ORDER,
    SignalModality,
    SignalSpec,
    StructuredSeed,
    UserActionCandidate,
    Violation,
    script_from_yaml,
    validate_script,
    validate_seed,
)
from egosim.errors import InputError, StepFailure
from egosim.gateway import Gateway, StructuredRequest
from egosim.schemas import (
    RETRY_HEADER,
    parse_json_object,
    validate_step1_payload,
    validate_step2_payload,
    validate_step3_payload,
    validate_step4_payload,
    validate_step5_payload,
)

STEP_FILES: dict[int, str] = {
    1: "step1_interventions.json",
    2: "step2_user_actions.json",
    3: "step3_signals_all.json",
    4: "step4_mode_binding.json",
    5: "script.yaml",
}
SCENARIO_FILE = "scenario.json"
RETRY_LOG_FILE = "retry_log.json"
FAILURES_DIR = "failures"
STEP_NAMES = {n: f"step{n}" for n in STEP_FILES}


@dataclass(frozen=True)
class PipelineConfig:
    k_interventions: int = 5
    m_actions: int = 3
    schema_retry_limit: int = 3
    default_segment_durations_s: tuple[float, float, float, float] = (3.0, 4.0, 3.0, 2.0)
    prompt_template_ids: Mapping[str, str] = field(
        default_factory=lambda: dict(prompts.DEFAULT_TEMPLATE_IDS)
    )
    bind_intervention_index: int = 0
    bind_action_index: int = 0
    template_override_dir: str | None = None

    def __post_init__(self) -> None:
        if self.k_interventions < 1 or self.m_actions < 1:
            raise ValueError("candidate counts must be >= 1")
        if self.schema_retry_limit < 0:
            raise ValueError("schema_retry_limit must be >= 0")
        durations = tuple(float(d) for d in self.default_segment_durations_s)
        if len(durations) != 4 or any(d <= 0 for d in durations):
            raise ValueError("default_segment_durations_s must be four positive values")
        object.__setattr__(self, "default_segment_durations_s", durations)
        merged = dict(prompts.DEFAULT_TEMPLATE_IDS)
        merged.update(self.prompt_template_ids)
        object.__setattr__(self, "prompt_template_ids", merged)

    def to_dict(self) -> dict[str, Any]:
        return {
            "k_interventions": self.k_interventions,
            "m_actions": self.m_actions,
            "schema_retry_limit": self.schema_retry_limit,
            "default_segment_durations_s": list(self.default_segment_durations_s),
            "prompt_template_ids": dict(self.prompt_template_ids),
            "bind_intervention_index": self.bind_intervention_index,
            "bind_action_index": self.bind_action_index,
            "template_override_dir": self.template_override_dir,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PipelineConfig":
        known = {
            "k_interventions", "m_actions", "schema_retry_limit",
            "default_segment_durations_s", "prompt_template_ids",
            "bind_intervention_index", "bind_action_index", "template_override_dir",
        }
        kwargs = {k: v for k, v in data.items() if k in known and v is not None}
        if "default_segment_durations_s" in kwargs:
            kwargs["default_segment_durations_s"] = tuple(kwargs["default_segment_durations_s"])
        return cls(**kwargs)


def _canonical_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


class ArtifactStore:
    """File-backed artifact store; the directory tree is the source of truth.

    Monotone progress invariant: a step file exists only if all earlier step
    files exist. Single writer per store.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    # -- paths ------------------------------------------------------------

    def step_path(self, step: int) -> Path:
        return self.root / STEP_FILES[step]

    def has_step(self, step: int) -> bool:
        return self.step_path(step).exists()

    def completed_steps(self) -> int:
        done = 0
        for step in sorted(STEP_FILES):
            if not self.has_step(step):
                break
            done = step
        return done

    def _write(self, path: Path, text: str) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")

    def _require_predecessors(self, step: int) -> None:
        missing = [n for n in range(1, step) if not self.has_step(n)]
        if missing:
            raise InputError(
                f"cannot write step {step}: step(s) {missing} have not completed"
            )

    # -- scenario ----------------------------------------------------------

    def has_scenario(self) -> bool:
        return (self.root / SCENARIO_FILE).exists()

    def write_scenario(self, scenario: ScenarioSpec) -> None:
        self._write(self.root / SCENARIO_FILE, _canonical_json(scenario.to_dict()))

    def read_scenario(self) -> ScenarioSpec:
        data = json.loads((self.root / SCENARIO_FILE).read_text(encoding="utf-8"))
        return ScenarioSpec.from_dict(data)

    # -- step payload files -------------------------------------------------

    def write_step1(self, scenario_id: str, interventions: Sequence[InterventionCandidate]) -> None:
        payload = {
            "scenario_id": scenario_id,
            "interventions": [c.to_dict() for c in interventions],
        }
        self._write(self.step_path(1), _canonical_json(payload))

    def read_step1(self) -> list[InterventionCandidate]:
        data = json.loads(self.step_path(1).read_text(encoding="utf-8"))
        return [InterventionCandidate.from_dict(d) for d in data["interventions"]]

    def write_step2(self, actions: Sequence[UserActionCandidate]) -> None:
        self._require_predecessors(2)
        payload = {"user_actions": [a.to_dict() for a in actions]}
        self._write(self.step_path(2), _canonical_json(payload))

    def read_step2(self) -> list[UserActionCandidate]:
        data = json.loads(self.step_path(2).read_text(encoding="utf-8"))
        return [UserActionCandidate.from_dict(d) for d in data["user_actions"]]

    def write_step3(self, signals: Sequence[SignalSpec]) -> None:
        self._require_predecessors(3)
        payload = {"signals": [s.to_dict() for s in signals]}
        self._write(self.step_path(3), _canonical_json(payload))

    def read_step3(self) -> list[SignalSpec]:
        data = json.loads(self.step_path(3).read_text(encoding="utf-8"))
        return [SignalSpec.from_dict(d) for d in data["signals"]]

    def write_step4(self, seeds: Sequence[StructuredSeed]) -> None:
        self._require_predecessors(4)
        payload = {"seeds": [s.to_dict() for s in seeds]}
        self._write(self.step_path(4), _canonical_json(payload))

    def read_step4(self) -> list[StructuredSeed]:
        data = json.loads(self.step_path(4).read_text(encoding="utf-8"))
        return [StructuredSeed.from_dict(d) for d in data["seeds"]]

    def write_scripts(self, scripts: Sequence[ScriptContract]) -> None:
        self._require_predecessors(5)
        payload = {"scripts": [s.to_dict() for s in scripts]}
        text = yaml.safe_dump(payload, sort_keys=False, default_flow_style=False)
        self._write(self.step_path(5), text)

    def read_scripts(self) -> list[ScriptContract]:
        data = yaml.safe_load(self.step_path(5).read_text(encoding="utf-8"))
        return [ScriptContract.from_dict(d) for d in data["scripts"]]

    # -- retry log and failures ---------------------------------------------

    def read_retry_log(self) -> dict[str, int]:
        path = self.root / RETRY_LOG_FILE
        if not path.exists():
            return {STEP_NAMES[n]: 0 for n in STEP_FILES}
        return json.loads(path.read_text(encoding="utf-8"))

    def write_retry_log(self, log: Mapping[str, int]) -> None:
        self._write(self.root / RETRY_LOG_FILE, _canonical_json(dict(log)))

    def record_failure(self, step_name: str, raw_payloads: Sequence[str]) -> None:
        path = self.root / FAILURES_DIR / f"{step_name}_payloads.json"
        self._write(path, _canonical_json(list(raw_payloads)))

    # -- aggregate views ------------------------------------------------------

    def index(self) -> ArtifactIndex:
        index = ArtifactIndex()
        if self.has_scenario():
            index.add(self.read_scenario())
        readers: list[tuple[int, Callable[[], list[Any]]]] = [
            (1, self.read_step1), (2, self.read_step2),
            (3, self.read_step3), (4, self.read_step4),
        ]
        for step, reader in readers:
            if self.has_step(step):
                index.extend(reader())
        return index


def _generate_validated(
    gateway: Gateway,
    cfg: PipelineConfig,
    step: int,
    schema_id: str,
    template_key: str,
    template_vars: Mapping[str, Any],
    context: Mapping[str, Any],
    validate: Callable[[dict], list[Violation]],
    retry_log: dict[str, int] | None,
) -> dict:
    """Request a payload, validating and fully regenerating until it passes."""
    step_name = STEP_NAMES[step]
    base_prompt = prompts.render(
        cfg.prompt_template_ids[template_key],
        context=dict(context),
        override_dir=cfg.template_override_dir,
        **template_vars,
    )
    prompt = base_prompt
    raw_payloads: list[str] = []
    violations: list[Violation] = []
    for _ in range(cfg.schema_retry_limit + 1):
        raw = gateway.complete_structured(StructuredRequest(prompt=prompt, schema_id=schema_id))
        obj, violations = parse_json_object(raw)
        if obj is not None:
            violations = validate(obj)
        if not violations:
            return obj  # type: ignore[return-value]
        raw_payloads.append(raw)
        if retry_log is not None:
            retry_log[step_name] = retry_log.get(step_name, 0) + 1
        feedback = "\n".join(f"- {v.message}" for v in violations)
        prompt = (
            f"{base_prompt.rstrip()}\n\n{RETRY_HEADER}\n{feedback}\n"
            "Regenerate the full JSON payload, corrected.\n"
        )
    raise StepFailure(step_name, violations, raw_payloads)


def step1_generate_interventions(
    scenario: ScenarioSpec,
    cfg: PipelineConfig,
    gateway: Gateway,
    retry_log: dict[str, int] | None = None,
) -> list[InterventionCandidate]:
    """Brainstorm k schema-valid intervention candidates for a scenario."""
    payload = _generate_validated(
        gateway, cfg, step=1, schema_id="step1_interventions", template_key="step1",
        template_vars={
            "scenario_title": scenario.title,
            "environment": scenario.environment,
            "scenario_description": scenario.description,
            "k": cfg.k_interventions,
        },
        context={
            "k": cfg.k_interventions,
            "scenario_id": scenario.id,
            "scenario_title": scenario.title,
            "environment": scenario.environment,
            "hazard_category": scenario.hazard_category,
        },
        validate=lambda obj: validate_step1_payload(obj, cfg.k_interventions),
        retry_log=retry_log,
    )
    return [
        InterventionCandidate(
            id=content_id("itv", {"scenario_id": scenario.id, "index": i, **item}),
            scenario_id=scenario.id,
            description=item["description"],
            intervention_kind=InterventionKind(item["intervention_kind"]),
            rationale=item["rationale"],
        )
        for i, item in enumerate(payload["interventions"])
    ]


def step2_derive_user_actions(
    intervention: InterventionCandidate,
    cfg: PipelineConfig,
    gateway: Gateway,
    retry_log: dict[str, int] | None = None,
    item_index: int = 0,
) -> list[UserActionCandidate]:
    """Work backward from an intervention need to m plausible user actions."""
    payload = _generate_validated(
        gateway, cfg, step=2, schema_id="step2_user_actions", template_key="step2",
        template_vars={
            "intervention_description": intervention.description,
            "intervention_rationale": intervention.rationale,
            "m": cfg.m_actions,
        },
        context={
            "m": cfg.m_actions,
            "intervention_id": intervention.id,
            "intervention_description": intervention.description,
            "item_index": item_index,
        },
        validate=lambda obj: validate_step2_payload(obj, cfg.m_actions),
        retry_log=retry_log,
    )
    return [
        UserActionCandidate(
            id=content_id("act", {"intervention_id": intervention.id, "index": i, **item}),
            intervention_id=intervention.id,
            description=item["description"],
            causal_explanation=item["causal_explanation"],
        )
        for i, item in enumerate(payload["user_actions"])
    ]


def step3_specify_signals(
    action: UserActionCandidate,
    cfg: PipelineConfig,
    gateway: Gateway,
    retry_log: dict[str, int] | None = None,
    item_index: int = 0,
) -> list[SignalSpec]:
    """Define the perceivable cues that ground this action for evaluation."""
    payload = _generate_validated(
        gateway, cfg, step=3, schema_id="step3_signals", template_key="step3",
        template_vars={
            "action_description": action.description,
            "action_causal_explanation": action.causal_explanation,
        },
        context={
            "action_id": action.id,
            "action_description": action.description,
            "item_index": item_index,
        },
        validate=validate_step3_payload,
        retry_log=retry_log,
    )
    return [
        SignalSpec(
            id=content_id("sig", {"user_action_id": action.id, "index": i, **item}),
            user_action_id=action.id,
            modality=SignalModality(item["modality"]),
            cue=item["cue"],
            trigger_description=item["trigger_description"],
        )
        for i, item in enumerate(payload["signals"])
    ]


def step4_bind_modes(
    intervention: InterventionCandidate,
    action: UserActionCandidate,
    signals: Sequence[SignalSpec],
    cfg: PipelineConfig,
    gateway: Gateway,
    retry_log: dict[str, int] | None = None,
) -> list[StructuredSeed]:
    """Bind the causal chain into exactly three seeds, one per assistance mode."""
    if not signals:
        raise InputError("mode binding requires at least one signal")
    signal_ids = tuple(s.id for s in signals)
    payload = _generate_validated(
        gateway, cfg, step=4, schema_id="step4_mode_binding", template_key="step4",
        template_vars={
            "intervention_description": intervention.description,
            "action_description": action.description,
            "signal_cues": ", ".join(s.cue for s in signals),
        },
        context={
            "intervention_id": intervention.id,
            "action_id": action.id,
            "signal_ids": list(signal_ids),
        },
        validate=validate_step4_payload,
        retry_log=retry_log,
    )
    seeds = []
    for item in payload["seeds"]:
        utterance = item["user_utterance"]
        if isinstance(utterance, str) and not utterance.strip():
            utterance = None
        body = {
            "intervention_id": intervention.id,
            "user_action_id": action.id,
            "signal_ids": list(signal_ids),
            "mode": item["mode"],
            "user_utterance": utterance,
            "utterance_addressed_to_agent": item["utterance_addressed_to_agent"],
            "user_aware": item["user_aware"],
        }
        seeds.append(StructuredSeed(
            id=content_id("seed", body),
            intervention_id=intervention.id,
            user_action_id=action.id,
            signal_ids=signal_ids,
            mode=AssistanceMode(item["mode"]),
            user_utterance=utterance,
            utterance_addressed_to_agent=item["utterance_addressed_to_agent"],
            user_aware=item["user_aware"],
        ))
    seeds.sort(key=lambda s: list(AssistanceMode).index(s.mode))
    return seeds


def build_script_from_payload(
    seed: StructuredSeed,
    payload: Mapping[str, Any],
    cfg: PipelineConfig,
) -> tuple[ScriptContract, list[Violation]]:
    """Assemble a contract from a step-5 payload, applying timing defaults.

    Segment timings come from the pipeline config; the hazard onset defaults
    to the trigger-segment midpoint unless the backend supplied a value, which
    is then subject to the trigger-window invariant via validate_script.
    """
    script = payload["script"]
    durations = cfg.default_segment_durations_s
    offsets = [0.0]
    for duration in durations[:-1]:
        offsets.append(offsets[-1] + duration)
    trigger_lo = offsets[2]
    trigger_hi = offsets[2] + durations[2]
    onset = script.get("expected_hazard_onset_s")
    if onset is None:
        onset = trigger_lo + durations[2] / 2.0
    segments = tuple(
        Segment(kind=kind, start_offset_s=offset, duration_s=duration, prompt=seg["prompt"])
        for kind, offset, duration, seg in zip(
            SEGMENT_ORDER, offsets, durations, script["segments"]
        )
    )
    contract = ScriptContract(
        seed_id=seed.id,
        mode=seed.mode,
        camera_angle=script["camera_angle"],
        lighting=script["lighting"],
        segments=segments,
        expected_hazard_onset_s=float(onset),
        trigger_signal_ids=tuple(seed.signal_ids),
    )
    return contract, validate_script(contract)


def step5_generate_script(
    seed: StructuredSeed,
    cfg: PipelineConfig,
    gateway: Gateway,
    index: ArtifactIndex,
    retry_log: dict[str, int] | None = None,
    item_index: int = 0,
) -> ScriptContract:
    """Convert a validated seed into a script contract that passes validation."""
    seed_violations = validate_seed(seed, index)
    if seed_violations:
        raise InputError(
            "step5 requires a validated seed: " + "; ".join(v.message for v in seed_violations)
        )
    intervention = index.interventions[seed.intervention_id]
    action = index.user_actions[seed.user_action_id]
    signals = [index.signals[sid] for sid in seed.signal_ids]
    durations = cfg.default_segment_durations_s
    trigger_lo = durations[0] + durations[1]
    trigger_hi = trigger_lo + durations[2]

    def validate_payload(obj: dict) -> list[Violation]:
        violations = validate_step5_payload(obj)
        if violations:
            return violations
        _, contract_violations = build_script_from_payload(seed, obj, cfg)
        return contract_violations

    payload = _generate_validated(
        gateway, cfg, step=5, schema_id="step5_script", template_key="step5",
        template_vars={
            "mode": seed.mode.value,
            "intervention_description": intervention.description,
            "action_description": action.description,
            "signal_cues": ", ".join(s.cue for s in signals),
            "user_utterance": seed.user_utterance or "(none)",
            "trigger_window_lo": f"{trigger_lo:g}",
            "trigger_window_hi": f"{trigger_hi:g}",
        },
        context={
            "seed_id": seed.id,
            "mode": seed.mode.value,
            "action_description": action.description,
            "signal_cues": [s.cue for s in signals],
            "scenario_title": next(iter(index.scenarios.values())).title
            if index.scenarios else "",
            "item_index": item_index,
        },
        validate=validate_payload,
        retry_log=retry_log,
    )
    contract, violations = build_script_from_payload(seed, payload, cfg)
    if violations:  # unreachable: validate_payload already gated this
        raise StepFailure(STEP_NAMES[5], violations, [])
    return contract


def run_pipeline(
    scenario: ScenarioSpec,
    cfg: PipelineConfig,
    store: ArtifactStore,
    gateway: Gateway,
) -> ArtifactStore:
    """Execute steps 1-5 as a cascade, resuming past any completed step files.

    On a step failure the store is left at the last completed step with the
    raw payloads retained under failures/.
    """
    if store.has_scenario():
        existing = store.read_scenario()
        if existing != scenario:
            raise InputError(
                f"store at {store.root} already holds scenario {existing.id!r}"
            )
    else:
        store.write_scenario(scenario)

    retry_log = store.read_retry_log()

    def checkpoint() -> None:
        store.write_retry_log(retry_log)

    def run_step(step: int, produce: Callable[[], None]) -> None:
        if store.has_step(step):
            return
        try:
            produce()
        except StepFailure as failure:
            store.record_failure(failure.step, failure.raw_payloads)
            checkpoint()
            raise
        checkpoint()

    interventions: list[InterventionCandidate] = []
    actions: list[UserActionCandidate] = []
    signals: list[SignalSpec] = []
    seeds: list[StructuredSeed] = []

    def do_step1() -> None:
        nonlocal interventions
        interventions = step1_generate_interventions(scenario, cfg, gateway, retry_log)
        store.write_step1(scenario.id, interventions)

    def do_step2() -> None:
        nonlocal actions
        actions = []
        for i, intervention in enumerate(store.read_step1()):
            actions.extend(
                step2_derive_user_actions(intervention, cfg, gateway, retry_log, item_index=i)
            )
        store.write_step2(actions)

    def do_step3() -> None:
        nonlocal signals
        signals = []
        for i, action in enumerate(store.read_step2()):
            signals.extend(step3_specify_signals(action, cfg, gateway, retry_log, item_index=i))
        store.write_step3(signals)

    def do_step4() -> None:
        nonlocal seeds
        chain = select_chain(store, cfg)
        seeds = step4_bind_modes(
            chain.intervention, chain.action, chain.signals, cfg, gateway, retry_log,
        )
        store.write_step4(seeds)

    def do_step5() -> None:
        index = store.index()
        scripts = [
            step5_generate_script(seed, cfg, gateway, index, retry_log, item_index=i)
            for i, seed in enumerate(store.read_step4())
        ]
        store.write_scripts(scripts)

    run_step(1, do_step1)
    run_step(2, do_step2)
    run_step(3, do_step3)
    run_step(4, do_step4)
    run_step(5, do_step5)
    return store


@dataclass(frozen=True)
class ChainSelection:
    intervention: InterventionCandidate
    action: UserActionCandidate
    signals: tuple[SignalSpec, ...]


def select_chain(
    store: ArtifactStore,
    cfg: PipelineConfig,
    intervention_id: str | None = None,
    user_action_id: str | None = None,
) -> ChainSelection:
    """Pick the causal chain mode binding operates on (first-first by default)."""
    interventions = store.read_step1()
    if not interventions:
        raise InputError("no interventions available")
    if intervention_id is not None:
        matching = [c for c in interventions if c.id == intervention_id]
        if not matching:
            raise InputError(f"intervention {intervention_id!r} not found")
        intervention = matching[0]
    else:
        intervention = interventions[min(cfg.bind_intervention_index, len(interventions) - 1)]

    actions = [a for a in store.read_step2() if a.intervention_id == intervention.id]
    if not actions:
        raise InputError(f"no user actions derived for intervention {intervention.id!r}")
    if user_action_id is not None:
        matching = [a for a in actions if a.id == user_action_id]
        if not matching:
            raise InputError(f"user action {user_action_id!r} not found for this intervention")
        action = matching[0]
    else:
        action = actions[min(cfg.bind_action_index, len(actions) - 1)]

    signals = tuple(s for s in store.read_step3() if s.user_action_id == action.id)
    if not signals:
        raise InputError(f"no signals specified for user action {action.id!r}")
    return ChainSelection(intervention, action, signals)


def verify_chain(store: ArtifactStore) -> list[Violation]:
    """Brute-force referential walk: script -> seed -> signals -> action ->
    intervention -> scenario. Returns every resolution failure found."""
    violations: list[Violation] = []
    index = store.index()
    scenario = store.read_scenario() if store.has_scenario() else None
    scripts = store.read_scripts() if store.has_step(5) else []
    for contract in scripts:
        seed = index.seeds.get(contract.seed_id)
        if seed is None:
            violations.append(Violation(
                "dangling_reference", f"script references unknown seed {contract.seed_id!r}",
                field="seed_id",
            ))
            continue
        if contract.mode is not seed.mode:
            violations.append(Violation(
                "mode_mismatch",
                f"script mode {contract.mode.value} differs from seed mode {seed.mode.value}",
                field="mode",
            ))
        violations.extend(validate_seed(seed, index))
        violations.extend(validate_script(contract))
        for signal_id in contract.trigger_signal_ids:
            if signal_id not in index.signals:
                violations.append(Violation(
                    "dangling_reference",
                    f"script trigger signal {signal_id!r} not found",
                    field="trigger_signal_ids",
                ))
        intervention = index.interventions.get(seed.intervention_id)
        if intervention is not None and scenario is not None \
                and intervention.scenario_id != scenario.id:
            violations.append(Violation(
                "broken_causal_chain",
                f"intervention {intervention.id!r} belongs to scenario "
                f"{intervention.scenario_id!r}, not {scenario.id!r}",
                field="scenario_id",
            ))
    return violations


def load_script_bundle(path: str | Path) -> list[ScriptContract]:
    """Read a script.yaml bundle (or a single-contract YAML document)."""
    text = Path(path).read_text(encoding="utf-8")
    data = yaml.safe_load(text)
    if isinstance(data, dict) and "scripts" in data:
        return [ScriptContract.from_dict(d) for d in data["scripts"]]
    return [script_from_yaml(text)]


def validate_artifact_document(
    store: ArtifactStore, step: int, data: Mapping[str, Any]
) -> list[Violation]:
    """Re-validate a user-edited step artifact document against the store.

    Checks both structural shape (parseable into domain types) and referential
    integrity against the artifacts of earlier steps; used by the editing
    surface before a replacement artifact is accepted.
    """
    violations: list[Violation] = []
    index = store.index()

    def parse_items(key: str, parser: Callable[[Mapping[str, Any]], Any]) -> list[Any]:
        items = data.get(key)
        if not isinstance(items, list):
            violations.append(Violation(
                "invalid_type", f"artifact document requires a {key!r} list", field=key,
            ))
            return []
        parsed = []
        for i, item in enumerate(items):
            try:
                parsed.append(parser(item))
            except (KeyError, ValueError, TypeError) as exc:
                violations.append(Violation(
                    "invalid_item", f"{key}[{i}] is not a valid artifact: {exc}", field=key,
                ))
        return parsed

    if step == 1:
        scenario_id = data.get("scenario_id")
        if store.has_scenario() and scenario_id != store.read_scenario().id:
            violations.append(Violation(
                "dangling_reference",
                f"scenario_id {scenario_id!r} does not match this project's scenario",
                field="scenario_id",
            ))
        for candidate in parse_items("interventions", InterventionCandidate.from_dict):
            if candidate.scenario_id not in index.scenarios:
                violations.append(Violation(
                    "dangling_reference",
                    f"intervention {candidate.id!r} references unknown scenario "
                    f"{candidate.scenario_id!r}",
                    field="scenario_id",
                ))
    elif step == 2:
        for action in parse_items("user_actions", UserActionCandidate.from_dict):
            if action.intervention_id not in index.interventions:
                violations.append(Violation(
                    "dangling_reference",
                    f"user action {action.id!r} references unknown intervention "
                    f"{action.intervention_id!r}",
                    field="intervention_id",
                ))
    elif step == 3:
        for signal in parse_items("signals", SignalSpec.from_dict):
            if signal.user_action_id not in index.user_actions:
                violations.append(Violation(
                    "dangling_reference",
                    f"signal {signal.id!r} references unknown user action "
                    f"{signal.user_action_id!r}",
                    field="user_action_id",
                ))
    elif step == 4:
        for seed in parse_items("seeds", StructuredSeed.from_dict):
            violations.extend(validate_seed(seed, index))
    elif step == 5:
        for contract in parse_items("scripts", ScriptContract.from_dict):
            violations.extend(validate_script(contract))
            if contract.seed_id not in index.seeds:
                violations.append(Violation(
                    "dangling_reference",
                    f"script references unknown seed {contract.seed_id!r}",
                    field="seed_id",
                ))
    else:
        violations.append(Violation("unknown_step", f"step {step} does not exist"))
    return violations
