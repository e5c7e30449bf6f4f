"""Project configuration: pipeline, backends, and evaluation settings.

A single YAML file configures everything; every section is optional and
defaults to a fully offline stub setup so projects work with no network and
no credentials.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from egosim.domain import AssistanceMode
from egosim.errors import ConfigurationError
from egosim.gateway import BackendConfig, BackendKind, Gateway
from egosim.pipeline import PipelineConfig
from egosim.scoring import DEFAULT_WINDOWS, FusionWeights, ToleranceWindow, WindowTable
from egosim.trace import SignalConfig

STUB_ENDPOINT = "stub://fixtures"


def _default_backends() -> dict[BackendKind, BackendConfig]:
    return {
        kind: BackendConfig(kind=kind, endpoint_url=STUB_ENDPOINT, model_name=f"stub-{kind.value}")
        for kind in BackendKind
    }


@dataclass(frozen=True)
class EvaluationConfig:
    signal: SignalConfig = SignalConfig()
    windows: WindowTable = field(default_factory=WindowTable)
    weights: FusionWeights = FusionWeights()

    def to_dict(self) -> dict[str, Any]:
        windows: dict[str, Any] = {
            mode.value: window.to_dict() for mode, window in self.windows.by_mode.items()
        }
        for (mode, hazard), window in self.windows.by_mode_and_hazard.items():
            windows[f"{mode.value}/{hazard}"] = window.to_dict()
        return {
            "signal": {
                "smoothing_window": self.signal.smoothing_window,
                "activity_confidence_threshold": self.signal.activity_confidence_threshold,
                "proximity_scale": self.signal.proximity_scale,
                "safety_aggregator": self.signal.safety_aggregator,
            },
            "latency_windows": windows,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EvaluationConfig":
        signal_data = data.get("signal", {})
        signal = SignalConfig(
            smoothing_window=int(signal_data.get("smoothing_window", 3)),
            activity_confidence_threshold=float(
                signal_data.get("activity_confidence_threshold", 0.5)
            ),
            proximity_scale=float(signal_data.get("proximity_scale", 0.25)),
            safety_aggregator=signal_data.get("safety_aggregator", "max"),
        )
        by_mode = dict(DEFAULT_WINDOWS)
        by_mode_and_hazard: dict[tuple[AssistanceMode, str], ToleranceWindow] = {}
        for key, window_data in data.get("latency_windows", {}).items():
            window = ToleranceWindow.from_dict(window_data)
            if "/" in key:
                mode_part, hazard = key.split("/", 1)
                by_mode_and_hazard[(AssistanceMode(mode_part), hazard)] = window
            else:
                by_mode[AssistanceMode(key)] = window
        return cls(
            signal=signal,
            windows=WindowTable(by_mode=by_mode, by_mode_and_hazard=by_mode_and_hazard),
        )


@dataclass(frozen=True)
class ProjectConfig:
    pipeline: PipelineConfig = PipelineConfig()
    backends: Mapping[BackendKind, BackendConfig] = field(default_factory=_default_backends)
    evaluation: EvaluationConfig = EvaluationConfig()

    def gateway(self) -> Gateway:
        return Gateway(self.backends)

    def to_dict(self) -> dict[str, Any]:
        return {
            "pipeline": self.pipeline.to_dict(),
            "backends": {kind.value: cfg.to_dict() for kind, cfg in self.backends.items()},
            "evaluation": self.evaluation.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ProjectConfig":
        pipeline = PipelineConfig.from_dict(data.get("pipeline", {}))
        backends = _default_backends()
        for kind_value, backend_data in data.get("backends", {}).items():
            kind = BackendKind(kind_value)
            merged = {"kind": kind.value, "model_name": f"stub-{kind.value}",
                      "endpoint_url": STUB_ENDPOINT}
            merged.update({k: v for k, v in backend_data.items() if v is not None})
            backends[kind] = BackendConfig.from_dict(merged)
        evaluation = EvaluationConfig.from_dict(data.get("evaluation", {}))
        return cls(pipeline=pipeline, backends=backends, evaluation=evaluation)


def load_config(path: str | Path | None) -> ProjectConfig:
    """Load a YAML project config; None or a missing file yields stub defaults."""
    if path is None:
        return ProjectConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file {path} does not exist")
    data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must hold a YAML mapping")
    return ProjectConfig.from_dict(data)
