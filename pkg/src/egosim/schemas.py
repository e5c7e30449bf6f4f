"""Registered structured-output schemas and backend-payload validators.

Each pipeline step names the schema its backend output must satisfy; the
validators here check raw payload shape and closed-set fields, returning
exhaustive violation lists. Identifier fields are deliberately absent from
payload schemas: the orchestrator assigns canonical content-hash ids and
treats backend-supplied ids as untrusted.
"""

from __future__ import annotations

import json
from typing import Any

from egosim.domain import (
    AssistanceMode,
    InterventionKind,
    SEGMENT_ORDER,
    SignalModality,
    Violation,
)

SCHEMA_IDS = frozenset({
    "step1_interventions",
    "step2_user_actions",
    "step3_signals",
    "step4_mode_binding",
    "step5_script",
    "vlm_analysis",
    "judge_verdict",
    "alignment",
})

# Markers shared between prompt assembly and the deterministic stub backend.
CONTEXT_HEADER = "## Request context"
RETRY_HEADER = "## Previous attempt failed validation"


def extract_context(prompt: str) -> dict[str, Any]:
    """Recover the machine-readable context block embedded in a prompt."""
    for line in reversed(prompt.splitlines()):
        stripped = line.strip()
        if stripped.startswith("{"):
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError:
                continue
            if isinstance(obj, dict):
                return obj
    return {}


def parse_json_object(raw: str) -> tuple[dict[str, Any] | None, list[Violation]]:
    try:
        obj = json.loads(raw)
    except (json.JSONDecodeError, TypeError) as exc:
        return None, [Violation("invalid_json", f"payload is not valid JSON: {exc}")]
    if not isinstance(obj, dict):
        return None, [Violation("invalid_json", "payload must be a JSON object")]
    return obj, []


def _string_field(item: dict, name: str, label: str, violations: list[Violation]) -> None:
    value = item.get(name)
    if name not in item:
        violations.append(Violation("missing_field", f"{label}.{name} is required", field=name))
    elif not isinstance(value, str) or not value.strip():
        violations.append(Violation(
            "invalid_type", f"{label}.{name} must be a non-empty string", field=name,
        ))


def _items(obj: dict, key: str) -> tuple[list[dict] | None, list[Violation]]:
    if key not in obj:
        return None, [Violation("missing_field", f"{key} is required", field=key)]
    value = obj[key]
    if not isinstance(value, list):
        return None, [Violation("invalid_type", f"{key} must be a list", field=key)]
    bad = [i for i, item in enumerate(value) if not isinstance(item, dict)]
    if bad:
        return None, [Violation("invalid_type", f"{key}[{i}] must be an object", field=key) for i in bad]
    return value, []


def validate_step1_payload(obj: dict, k: int) -> list[Violation]:
    items, violations = _items(obj, "interventions")
    if items is None:
        return violations
    if len(items) != k:
        violations.append(Violation(
            "wrong_cardinality", f"expected exactly {k} interventions, got {len(items)}",
            field="interventions",
        ))
    kinds = {kind.value for kind in InterventionKind}
    for i, item in enumerate(items):
        label = f"interventions[{i}]"
        _string_field(item, "description", label, violations)
        _string_field(item, "rationale", label, violations)
        if item.get("intervention_kind") not in kinds:
            violations.append(Violation(
                "unknown_kind",
                f"{label}.intervention_kind {item.get('intervention_kind')!r} not in {sorted(kinds)}",
                field="intervention_kind",
            ))
    return violations


def validate_step2_payload(obj: dict, m: int) -> list[Violation]:
    items, violations = _items(obj, "user_actions")
    if items is None:
        return violations
    if len(items) != m:
        violations.append(Violation(
            "wrong_cardinality", f"expected exactly {m} user actions, got {len(items)}",
            field="user_actions",
        ))
    for i, item in enumerate(items):
        label = f"user_actions[{i}]"
        _string_field(item, "description", label, violations)
        _string_field(item, "causal_explanation", label, violations)
    return violations


def validate_step3_payload(obj: dict) -> list[Violation]:
    items, violations = _items(obj, "signals")
    if items is None:
        return violations
    if len(items) < 1:
        violations.append(Violation(
            "wrong_cardinality", "at least one signal is required", field="signals",
        ))
    modalities = {m.value for m in SignalModality}
    for i, item in enumerate(items):
        label = f"signals[{i}]"
        if item.get("modality") not in modalities:
            violations.append(Violation(
                "unknown_modality",
                f"{label}.modality {item.get('modality')!r} not in {sorted(modalities)}",
                field="modality",
            ))
        _string_field(item, "cue", label, violations)
        _string_field(item, "trigger_description", label, violations)
    return violations


def validate_step4_payload(obj: dict) -> list[Violation]:
    items, violations = _items(obj, "seeds")
    if items is None:
        return violations
    if len(items) != 3:
        violations.append(Violation(
            "wrong_cardinality", f"expected exactly 3 seeds (one per mode), got {len(items)}",
            field="seeds",
        ))
    seen_modes: list[str] = []
    for i, item in enumerate(items):
        label = f"seeds[{i}]"
        mode_value = item.get("mode")
        try:
            mode = AssistanceMode(mode_value)
        except ValueError:
            violations.append(Violation(
                "unknown_mode", f"{label}.mode {mode_value!r} is not an assistance mode",
                field="mode",
            ))
            continue
        seen_modes.append(mode.value)
        utterance = item.get("user_utterance")
        addressed = item.get("utterance_addressed_to_agent")
        aware = item.get("user_aware")
        if utterance is not None and not isinstance(utterance, str):
            violations.append(Violation(
                "invalid_type", f"{label}.user_utterance must be a string or null",
                field="user_utterance",
            ))
            continue
        if not isinstance(addressed, bool) or not isinstance(aware, bool):
            violations.append(Violation(
                "invalid_type",
                f"{label} requires boolean utterance_addressed_to_agent and user_aware",
                field="user_aware",
            ))
            continue
        has_utterance = isinstance(utterance, str) and bool(utterance.strip())
        if mode is AssistanceMode.REACTIVE and not (has_utterance and addressed and aware):
            violations.append(Violation(
                "mode_utterance_mismatch",
                f"{label}: reactive seed needs an agent-addressed utterance and user_aware",
                field="mode",
            ))
        if mode is AssistanceMode.EXPLICIT_PROACTIVE and not (has_utterance and not addressed and aware):
            violations.append(Violation(
                "mode_utterance_mismatch",
                f"{label}: explicit_proactive seed needs a non-addressed utterance and user_aware",
                field="mode",
            ))
        if mode is AssistanceMode.IMPLICIT_PROACTIVE and (has_utterance or addressed or aware):
            violations.append(Violation(
                "mode_utterance_mismatch",
                f"{label}: implicit_proactive seed must have no utterance and user_aware=false",
                field="mode",
            ))
    if sorted(seen_modes) != sorted(m.value for m in AssistanceMode) and len(items) == 3:
        violations.append(Violation(
            "mode_coverage", "the three seeds must cover reactive, explicit_proactive, "
            "and implicit_proactive exactly once", field="seeds",
        ))
    return violations


def validate_step5_payload(obj: dict) -> list[Violation]:
    violations: list[Violation] = []
    script = obj.get("script")
    if "script" not in obj:
        return [Violation("missing_field", "script is required", field="script")]
    if not isinstance(script, dict):
        return [Violation("invalid_type", "script must be an object", field="script")]
    _string_field(script, "camera_angle", "script", violations)
    _string_field(script, "lighting", "script", violations)
    segments, seg_violations = _items(script, "segments")
    violations.extend(seg_violations)
    if segments is not None:
        expected = [kind.value for kind in SEGMENT_ORDER]
        got = [seg.get("kind") for seg in segments]
        if got != expected:
            violations.append(Violation(
                "segment_kinds", f"segments must be exactly {expected} in order, got {got}",
                field="segments",
            ))
        for i, seg in enumerate(segments):
            _string_field(seg, "prompt", f"segments[{i}]", violations)
    onset = script.get("expected_hazard_onset_s")
    if onset is not None and (isinstance(onset, bool) or not isinstance(onset, (int, float))):
        violations.append(Violation(
            "invalid_type", "expected_hazard_onset_s must be a number when present",
            field="expected_hazard_onset_s",
        ))
    return violations


def form_schemas() -> dict[str, Any]:
    """Machine-readable field descriptions driving the studio's stage forms."""
    return {
        "step1": {
            "artifact": "interventions",
            "item_fields": [
                {"name": "id", "type": "string", "readonly": True},
                {"name": "scenario_id", "type": "string", "readonly": True},
                {"name": "description", "type": "string", "required": True},
                {"name": "intervention_kind", "type": "enum",
                 "values": [k.value for k in InterventionKind], "required": True},
                {"name": "rationale", "type": "string", "required": True},
            ],
        },
        "step2": {
            "artifact": "user_actions",
            "item_fields": [
                {"name": "id", "type": "string", "readonly": True},
                {"name": "intervention_id", "type": "string", "required": True},
                {"name": "description", "type": "string", "required": True},
                {"name": "causal_explanation", "type": "string", "required": True},
            ],
        },
        "step3": {
            "artifact": "signals",
            "item_fields": [
                {"name": "id", "type": "string", "readonly": True},
                {"name": "user_action_id", "type": "string", "required": True},
                {"name": "modality", "type": "enum",
                 "values": [m.value for m in SignalModality], "required": True},
                {"name": "cue", "type": "string", "required": True},
                {"name": "trigger_description", "type": "string", "required": True},
            ],
        },
        "step4": {
            "artifact": "seeds",
            "item_fields": [
                {"name": "id", "type": "string", "readonly": True},
                {"name": "intervention_id", "type": "string", "required": True},
                {"name": "user_action_id", "type": "string", "required": True},
                {"name": "signal_ids", "type": "string_list", "required": True},
                {"name": "mode", "type": "enum",
                 "values": [m.value for m in AssistanceMode], "required": True},
                {"name": "user_utterance", "type": "string", "nullable": True},
                {"name": "utterance_addressed_to_agent", "type": "boolean", "required": True},
                {"name": "user_aware", "type": "boolean", "required": True},
            ],
        },
        "step5": {
            "artifact": "scripts",
            "item_fields": [
                {"name": "seed_id", "type": "string", "readonly": True},
                {"name": "mode", "type": "enum",
                 "values": [m.value for m in AssistanceMode], "readonly": True},
                {"name": "camera_angle", "type": "string", "required": True},
                {"name": "lighting", "type": "string", "required": True},
                {"name": "segments", "type": "segment_list",
                 "kinds": [k.value for k in SEGMENT_ORDER], "required": True},
                {"name": "expected_hazard_onset_s", "type": "number", "required": True},
                {"name": "trigger_signal_ids", "type": "string_list", "required": True},
            ],
        },
    }
