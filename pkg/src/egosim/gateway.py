"""Uniform client layer over external generative backends.

Dispatch is driven by the endpoint URL scheme: ``stub://`` routes to the
deterministic offline backend, ``http(s)://`` to a thin JSON-over-HTTP
adapter with bounded retries. No validation of structured payloads happens
here; the orchestrator owns schema checks so that schema-retry loops can be
counted separately from transport retries.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Any, Mapping, Sequence

import httpx

from egosim import stub
from egosim.errors import ConfigurationError, InputError, TransportError
from egosim.schemas import SCHEMA_IDS
from egosim.semantic import JudgeInput

DEFAULT_BACKEND_CONCURRENCY = 4

# Test seam: when set, HTTP calls are routed through this httpx transport.
_TRANSPORT_OVERRIDE: httpx.BaseTransport | None = None


class BackendKind(str, Enum):
    TEXT = "text"
    IMAGE = "image"
    VIDEO = "video"
    VLM = "vlm"
    JUDGE = "judge"


@dataclass(frozen=True)
class BackendConfig:
    kind: BackendKind
    endpoint_url: str
    model_name: str
    auth_env_var: str | None = None
    timeout_s: float = 30.0
    max_retries: int = 2

    def __post_init__(self) -> None:
        if self.timeout_s <= 0:
            raise ValueError("timeout_s must be > 0")
        if not 0 <= self.max_retries <= 10:
            raise ValueError("max_retries must lie in 0..10")

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "endpoint_url": self.endpoint_url,
            "model_name": self.model_name,
            "auth_env_var": self.auth_env_var,
            "timeout_s": self.timeout_s,
            "max_retries": self.max_retries,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "BackendConfig":
        return cls(
            kind=BackendKind(data["kind"]),
            endpoint_url=data["endpoint_url"],
            model_name=data["model_name"],
            auth_env_var=data.get("auth_env_var"),
            timeout_s=float(data.get("timeout_s", 30.0)),
            max_retries=int(data.get("max_retries", 2)),
        )


@dataclass(frozen=True)
class StructuredRequest:
    prompt: str
    schema_id: str
    determinism_hint: float | None = None

    def __post_init__(self) -> None:
        if self.schema_id not in SCHEMA_IDS:
            raise ValueError(f"schema_id {self.schema_id!r} is not registered")


class JobStatus(str, Enum):
    PENDING = "pending"
    COMPLETE = "complete"
    FAILED = "failed"


@dataclass(frozen=True)
class JobState:
    status: JobStatus
    video_ref: str | None = None
    detail: str | None = None


def resolve_credential(cfg: BackendConfig) -> str | None:
    """Read the configured credential; fails before any network traffic."""
    if stub.is_stub_endpoint(cfg.endpoint_url) or not cfg.auth_env_var:
        return None
    value = os.environ.get(cfg.auth_env_var)
    if not value:
        raise ConfigurationError(
            f"environment variable {cfg.auth_env_var!r} for backend "
            f"{cfg.kind.value} is not set"
        )
    return value


def _http_call(cfg: BackendConfig, payload: dict[str, Any], credential: str | None) -> dict[str, Any]:
    headers = {"content-type": "application/json"}
    if credential:
        headers["authorization"] = f"Bearer {credential}"
    attempts = cfg.max_retries + 1
    last_error: Exception | None = None
    with httpx.Client(timeout=cfg.timeout_s, transport=_TRANSPORT_OVERRIDE) as client:
        for _ in range(attempts):
            try:
                response = client.post(cfg.endpoint_url, json=payload, headers=headers)
                response.raise_for_status()
                body = response.json()
                if not isinstance(body, dict):
                    raise TransportError("backend returned a non-object JSON body", attempts)
                return body
            except httpx.TimeoutException as exc:
                last_error = exc
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                last_error = exc
    raise TransportError(
        f"{cfg.kind.value} backend failed after {attempts} attempt(s): {last_error}",
        attempts,
    )


def _structured_call(cfg: BackendConfig, request: StructuredRequest,
                     media_ref: str | None = None) -> str:
    if stub.is_stub_endpoint(cfg.endpoint_url):
        return stub.respond_structured(cfg, request.schema_id, request.prompt, media_ref)
    credential = resolve_credential(cfg)
    payload = {
        "model": cfg.model_name,
        "schema_id": request.schema_id,
        "prompt": request.prompt,
        "determinism_hint": request.determinism_hint,
    }
    if media_ref is not None:
        payload["media_ref"] = media_ref
    body = _http_call(cfg, payload, credential)
    output = body.get("output")
    return output if isinstance(output, str) else json.dumps(output)


def complete_structured(cfg: BackendConfig, request: StructuredRequest) -> str:
    """Return the backend's raw text verbatim; validation is the caller's job."""
    if cfg.kind is not BackendKind.TEXT:
        raise ConfigurationError(f"complete_structured requires a text backend, got {cfg.kind.value}")
    return _structured_call(cfg, request)


def generate_image(cfg: BackendConfig, prompt: str) -> str:
    """Render the first-frame reference image; returns an opaque media handle."""
    if cfg.kind is not BackendKind.IMAGE:
        raise ConfigurationError(f"generate_image requires an image backend, got {cfg.kind.value}")
    if not prompt.strip():
        raise InputError("image prompt must be non-empty")
    if stub.is_stub_endpoint(cfg.endpoint_url):
        return stub.image_handle(cfg, prompt)
    credential = resolve_credential(cfg)
    body = _http_call(cfg, {"model": cfg.model_name, "prompt": prompt}, credential)
    return str(body["handle"])


def generate_video(cfg: BackendConfig, first_frame: str, segment_prompts: Sequence[str]) -> str:
    """Submit an asynchronous render job for the four segment prompts."""
    if cfg.kind is not BackendKind.VIDEO:
        raise ConfigurationError(f"generate_video requires a video backend, got {cfg.kind.value}")
    if len(segment_prompts) != 4:
        raise InputError(f"exactly 4 segment prompts required, got {len(segment_prompts)}")
    if stub.is_stub_endpoint(cfg.endpoint_url):
        return stub.submit_video_job(cfg, first_frame, list(segment_prompts))
    credential = resolve_credential(cfg)
    body = _http_call(cfg, {
        "model": cfg.model_name,
        "first_frame": first_frame,
        "prompts": list(segment_prompts),
    }, credential)
    return str(body["job_id"])


def poll_job(cfg: BackendConfig, job_handle: str) -> JobState:
    if cfg.kind is not BackendKind.VIDEO:
        raise ConfigurationError(f"poll_job requires a video backend, got {cfg.kind.value}")
    if stub.is_stub_endpoint(cfg.endpoint_url):
        status, video_ref = stub.poll(cfg, job_handle)
        return JobState(JobStatus(status), video_ref)
    credential = resolve_credential(cfg)
    body = _http_call(cfg, {"op": "poll", "job_id": job_handle}, credential)
    return JobState(JobStatus(body["status"]), body.get("video_ref"), body.get("detail"))


def analyze_video(cfg: BackendConfig, video: str, analysis_prompt: str,
                  schema_id: str = "vlm_analysis") -> str:
    """Raw structured scene analysis for a rendered video."""
    if cfg.kind is not BackendKind.VLM:
        raise ConfigurationError(f"analyze_video requires a vlm backend, got {cfg.kind.value}")
    stub.check_media_handle(video)
    return _structured_call(
        cfg, StructuredRequest(prompt=analysis_prompt, schema_id=schema_id), media_ref=video,
    )


def judge(cfg: BackendConfig, judge_input: JudgeInput, rubric_prompt: str) -> str:
    """Single judge call scoring helpfulness, tone, and over-alert jointly."""
    if cfg.kind is not BackendKind.JUDGE:
        raise ConfigurationError(f"judge requires a judge backend, got {cfg.kind.value}")
    if judge_input.vlm_outputs is None:
        raise InputError("judge input must contain VLM outputs")
    prompt = f"{rubric_prompt.rstrip()}\n\n## Judge input\n{judge_input.to_json()}\n"
    return _structured_call(cfg, StructuredRequest(prompt=prompt, schema_id="judge_verdict"))


class Gateway:
    """Bundle of per-kind backend configs with bounded per-backend concurrency.

    Stateless with respect to requests; safe to share across threads.
    """

    def __init__(
        self,
        configs: Mapping[BackendKind, BackendConfig],
        max_concurrency: int = DEFAULT_BACKEND_CONCURRENCY,
    ):
        self._configs = dict(configs)
        self._limits = {
            kind: threading.BoundedSemaphore(max_concurrency) for kind in self._configs
        }
        # Credentials are resolved once at configuration load.
        self._credentials = {kind: resolve_credential(cfg) for kind, cfg in self._configs.items()}

    def config(self, kind: BackendKind) -> BackendConfig:
        try:
            return self._configs[kind]
        except KeyError:
            raise ConfigurationError(f"no backend configured for kind {kind.value!r}") from None

    def _guard(self, kind: BackendKind):
        return self._limits[kind]

    def complete_structured(self, request: StructuredRequest) -> str:
        with self._guard(BackendKind.TEXT):
            return complete_structured(self.config(BackendKind.TEXT), request)

    def generate_image(self, prompt: str) -> str:
        with self._guard(BackendKind.IMAGE):
            return generate_image(self.config(BackendKind.IMAGE), prompt)

    def generate_video(self, first_frame: str, segment_prompts: Sequence[str]) -> str:
        with self._guard(BackendKind.VIDEO):
            return generate_video(self.config(BackendKind.VIDEO), first_frame, segment_prompts)

    def poll_job(self, job_handle: str) -> JobState:
        with self._guard(BackendKind.VIDEO):
            return poll_job(self.config(BackendKind.VIDEO), job_handle)

    def analyze_video(self, video: str, analysis_prompt: str,
                      schema_id: str = "vlm_analysis") -> str:
        with self._guard(BackendKind.VLM):
            return analyze_video(self.config(BackendKind.VLM), video, analysis_prompt, schema_id)

    def judge(self, judge_input: JudgeInput, rubric_prompt: str) -> str:
        with self._guard(BackendKind.JUDGE):
            return judge(self.config(BackendKind.JUDGE), judge_input, rubric_prompt)


def stub_gateway(malform_first: bool = False) -> Gateway:
    """All-stub gateway for offline runs and tests."""
    endpoint = "stub://fixtures?malform_first=1" if malform_first else "stub://fixtures"
    configs = {
        kind: BackendConfig(kind=kind, endpoint_url=endpoint, model_name=f"stub-{kind.value}")
        for kind in BackendKind
    }
    return Gateway(configs)
