"""Fully deterministic offline backend.

Every response is a pure function of (backend kind, request bytes): the
request is hashed, the hash seeds an RNG, and the RNG picks from fixture
banks. Prompts steer fixtures through two mechanisms, both part of the
request bytes and therefore deterministic:

* the machine-readable context block appended by the prompt renderer
  (scenario title, counts, cues, durations);
* explicit fixture directives such as ``[stub:over-alert]`` or
  ``[stub:alignment=0.3]`` that tests embed to exercise specific branches.

When the endpoint is configured as ``stub://fixtures?malform_first=1`` the
stub emits one malformed payload per fresh request and a valid one once the
prompt carries the retry-feedback header, which lets schema-retry handling
be tested end to end.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from typing import TYPE_CHECKING, Any
from urllib.parse import parse_qs, urlparse

from egosim.errors import InputError
from egosim.schemas import RETRY_HEADER, extract_context

if TYPE_CHECKING:
    from egosim.gateway import BackendConfig

STUB_SCHEME = "stub"

_ALIGNMENT_DIRECTIVE = re.compile(r"\[stub:alignment=([0-9.]+)\]")
_OVER_ALERT_DIRECTIVE = "[stub:over-alert]"

_INTERVENTION_BANK: dict[str, list[str]] = {
    "safety_warning": [
        "warn the user about the hot pan",
        "alert the user that the pot is about to boil over",
        "warn about the frayed power cord near the wet counter",
    ],
    "proactive_help": [
        "offer to locate the misplaced measuring cup",
        "suggest steadying the cutting board before slicing",
        "offer to start a timer as the user begins multitasking",
    ],
    "social_adherence": [
        "remind the user to wash hands before plating food for guests",
        "flag that one guest asked for a nut-free dish",
        "suggest keeping the noise down while others are asleep",
    ],
    "command_response": [
        "answer where the salt is stored",
        "read out the next recipe step on request",
        "set the timer the user asked for",
    ],
}

_RATIONALE_BANK = [
    "acting on the early signal prevents the situation from escalating",
    "the cue is perceivable before any harm occurs",
    "a short nudge here avoids an unsafe or awkward outcome",
]

_HOT_PAN_ACTIONS = [
    ("reaching for the pan handle without a mitt",
     "bare-hand contact with a hot handle causes a burn, so the warning becomes necessary"),
    ("placing a plastic utensil near the burner",
     "the utensil can melt and ignite next to the flame, creating the hazard the warning addresses"),
]

_GENERIC_ACTIONS = [
    ("leaving the stove unattended while answering the door",
     "an unattended heat source lets the hazard develop unnoticed"),
    ("stacking items precariously at the counter edge",
     "the unstable stack is about to tip into the work area"),
    ("pouring liquid while looking away at a phone",
     "inattention while pouring leads directly to a spill near electronics"),
    ("carrying too many items across the kitchen at once",
     "an overloaded grip makes dropping something fragile likely"),
]

_VISUAL_SIGNALS = [
    ("steam rising rapidly", "a thickening steam plume marks the moment heat becomes dangerous"),
    ("unsteady hand movement", "wobbling of the grip signals imminent loss of control"),
    ("liquid creeping toward the counter edge", "the spreading puddle is about to reach the edge"),
]

_AUDIO_SIGNALS = [
    ("sound of glass cracking", "a sharp crack indicates the glassware is failing"),
    ("sizzling suddenly intensifying", "the sound spike marks the onset of overheating"),
]

_HAZARD_BANK = [
    "hot pan on an active burner near the user's reach",
    "liquid spreading toward a powered appliance",
    "unstable glassware at the counter edge",
]

_PROPOSED_BANK = [
    "tell the user to stop and use protection before touching it",
    "warn the user now and point at the specific object",
    "calmly direct the user to move the item to a safe spot",
]


def is_stub_endpoint(endpoint_url: str) -> bool:
    return urlparse(endpoint_url).scheme == STUB_SCHEME


def _options(endpoint_url: str) -> dict[str, str]:
    query = urlparse(endpoint_url).query
    return {key: values[-1] for key, values in parse_qs(query).items()}


def _rng(cfg: "BackendConfig", *parts: str) -> random.Random:
    digest = hashlib.sha256("\x1f".join((cfg.kind.value, *parts)).encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _digest12(*parts: str) -> str:
    return hashlib.sha256("\x1f".join(parts).encode("utf-8")).hexdigest()[:12]


def respond_structured(cfg: "BackendConfig", schema_id: str, prompt: str,
                       media_ref: str | None = None) -> str:
    """Produce the canned-but-hash-parameterized payload for a schema."""
    options = _options(cfg.endpoint_url)
    ctx = extract_context(prompt)
    if (
        options.get("malform_first")
        and RETRY_HEADER not in prompt
        and int(ctx.get("item_index", 0)) == 0
    ):
        # One malformed payload per pipeline step: the step's first fresh
        # request (item ordinal 0, no retry feedback yet) is truncated.
        return '{"truncated": '

    rng = _rng(cfg, schema_id, prompt, media_ref or "")
    builder = _BUILDERS.get(schema_id)
    if builder is None:
        raise InputError(f"stub has no fixtures for schema {schema_id!r}")
    return json.dumps(builder(ctx, rng, prompt), indent=1)


def _step1(ctx: dict[str, Any], rng: random.Random, prompt: str) -> dict[str, Any]:
    k = int(ctx.get("k", 5))
    title = str(ctx.get("scenario_title", "the scenario"))
    kinds = list(_INTERVENTION_BANK)
    items = []
    for i in range(k):
        kind = kinds[i % len(kinds)]
        base = _INTERVENTION_BANK[kind][rng.randrange(len(_INTERVENTION_BANK[kind]))]
        items.append({
            "description": base if i < len(kinds) else f"{base} (variant {i})",
            "intervention_kind": kind,
            "rationale": f"In {title}: {_RATIONALE_BANK[rng.randrange(len(_RATIONALE_BANK))]}.",
        })
    return {"interventions": items}


def _step2(ctx: dict[str, Any], rng: random.Random, prompt: str) -> dict[str, Any]:
    m = int(ctx.get("m", 3))
    intervention = str(ctx.get("intervention_description", ""))
    pool = list(_HOT_PAN_ACTIONS) if "hot pan" in intervention else []
    pool += [a for a in _GENERIC_ACTIONS if a not in pool]
    items = []
    for i in range(m):
        description, cause = pool[i % len(pool)]
        if i >= len(pool):
            description = f"{description} (variant {i})"
        items.append({"description": description, "causal_explanation": cause})
    return {"user_actions": items}


def _step3(ctx: dict[str, Any], rng: random.Random, prompt: str) -> dict[str, Any]:
    text = " ".join(str(ctx.get(key, "")) for key in
                    ("action_description", "intervention_description", "scenario_title")).lower()
    signals = []
    if "glass" in text:
        cue, trigger = _AUDIO_SIGNALS[0]
        signals.append({"modality": "audio", "cue": cue, "trigger_description": trigger})
    if "pan" in text or "hot" in text or "stove" in text or not signals:
        cue, trigger = _VISUAL_SIGNALS[0]
    else:
        cue, trigger = _VISUAL_SIGNALS[rng.randrange(len(_VISUAL_SIGNALS))]
    signals.append({"modality": "visual", "cue": cue, "trigger_description": trigger})
    return {"signals": signals}


def _step4(ctx: dict[str, Any], rng: random.Random, prompt: str) -> dict[str, Any]:
    return {"seeds": [
        {
            "mode": "reactive",
            "user_utterance": "Can you help me find the salt?",
            "utterance_addressed_to_agent": True,
            "user_aware": True,
        },
        {
            "mode": "explicit_proactive",
            "user_utterance": "Hmm... Where did I put it?",
            "utterance_addressed_to_agent": False,
            "user_aware": True,
        },
        {
            "mode": "implicit_proactive",
            "user_utterance": None,
            "utterance_addressed_to_agent": False,
            "user_aware": False,
        },
    ]}


def _step5(ctx: dict[str, Any], rng: random.Random, prompt: str) -> dict[str, Any]:
    cues = ctx.get("signal_cues") or ["steam rising rapidly"]
    action = str(ctx.get("action_description", "the user acts"))
    title = str(ctx.get("scenario_title", "a room"))
    return {"script": {
        "camera_angle": "egocentric, eye-level",
        "lighting": "warm indoor light",
        "segments": [
            {"kind": "scene_setup",
             "prompt": f"First-person view of {title}: the workspace is laid out and active."},
            {"kind": "user_action",
             "prompt": f"The camera follows the user's hands as they begin {action}."},
            {"kind": "intervention_trigger",
             "prompt": f"The trigger becomes perceivable: {', '.join(map(str, cues))}."},
            {"kind": "exit_state",
             "prompt": "The user reacts to the assistant and the situation resolves safely."},
        ],
        "expected_hazard_onset_s": None,
    }}


def _vlm(ctx: dict[str, Any], rng: random.Random, prompt: str) -> dict[str, Any]:
    duration = float(ctx.get("video_duration_s", 12.0))
    return {
        "identified_hazard": _HAZARD_BANK[rng.randrange(len(_HAZARD_BANK))],
        "proposed_intervention": _PROPOSED_BANK[rng.randrange(len(_PROPOSED_BANK))],
        "intervention_urgency": 3,
        "events": [
            {"timestamp_s": round(duration * 0.625, 3), "event_type": "signal_detected",
             "description": "the trigger cue becomes visible"},
            {"timestamp_s": round(duration * 0.75, 3), "event_type": "hazard_detected",
             "description": "the hazard is clearly materializing"},
        ],
    }


def _judge(ctx: dict[str, Any], rng: random.Random, prompt: str) -> dict[str, Any]:
    over_alert = _OVER_ALERT_DIRECTIVE in prompt
    return {
        "helpfulness_score": 0.8,
        "tone_score": 0.9,
        "over_alert_flag": over_alert,
        "reasoning": "The proposed intervention addresses the observed hazard "
                     + ("but the alert is unsupported by the scene." if over_alert
                        else "with urgency-appropriate wording."),
    }


def _alignment(ctx: dict[str, Any], rng: random.Random, prompt: str) -> dict[str, Any]:
    match = _ALIGNMENT_DIRECTIVE.search(prompt)
    score = float(match.group(1)) if match else 0.9
    return {"alignment_score": score}


_BUILDERS = {
    "step1_interventions": _step1,
    "step2_user_actions": _step2,
    "step3_signals": _step3,
    "step4_mode_binding": _step4,
    "step5_script": _step5,
    "vlm_analysis": _vlm,
    "judge_verdict": _judge,
    "alignment": _alignment,
}


def image_handle(cfg: "BackendConfig", prompt: str) -> str:
    return f"img-{_digest12('image', prompt)}"


def submit_video_job(cfg: "BackendConfig", first_frame: str, segment_prompts: list[str]) -> str:
    if not first_frame.startswith("img-"):
        raise InputError(f"stub cannot render from unknown media handle {first_frame!r}")
    return f"job-{_digest12('video', first_frame, *segment_prompts)}"


def poll(cfg: "BackendConfig", job_handle: str) -> tuple[str, str | None]:
    """Stub jobs complete immediately; the video handle derives from the job id."""
    if not job_handle.startswith("job-"):
        raise InputError(f"unknown job handle {job_handle!r}")
    return "complete", f"vid-{job_handle.removeprefix('job-')}"


def check_media_handle(handle: str) -> None:
    if not (handle.startswith("vid-") or handle.startswith("img-")):
        raise InputError(f"corrupt media handle {handle!r}")
