"""Mode-wise and overall aggregation of gate-valid video scores.

The Overall column is the mean fused score scaled by 100; every other mean
stays in [0, 1]. All means are computed over gate-valid samples only, and a
mode without valid samples reports its means as not applicable (None).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from egosim.domain import AssistanceMode
from egosim.errors import InputError
from egosim.scoring import GateStatus, VideoScore

MODE_LABELS: dict[AssistanceMode, str] = {
    AssistanceMode.REACTIVE: "Reactive",
    AssistanceMode.EXPLICIT_PROACTIVE: "Explicit",
    AssistanceMode.IMPLICIT_PROACTIVE: "Implicit",
}
ALL_MODES_LABEL = "All Modes"

TEXT_COLUMNS = (
    "Total", "Valid", "Excluded", "Overall",
    "Helpfulness", "Tone", "LatencyErr", "SafetyCrit",
)


@dataclass(frozen=True)
class ReportRow:
    mode_label: str
    total: int
    valid: int
    excluded: int
    overall: float | None
    helpfulness: float | None
    tone: float | None
    latency_err: float | None
    safety_crit: float | None

    def __post_init__(self) -> None:
        if self.total != self.valid + self.excluded:
            raise ValueError("total must equal valid + excluded")

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode_label": self.mode_label,
            "total": self.total,
            "valid": self.valid,
            "excluded": self.excluded,
            "overall": self.overall,
            "helpfulness": self.helpfulness,
            "tone": self.tone,
            "latency_err": self.latency_err,
            "safety_crit": self.safety_crit,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ReportRow":
        return cls(
            mode_label=data["mode_label"],
            total=int(data["total"]),
            valid=int(data["valid"]),
            excluded=int(data["excluded"]),
            overall=data["overall"],
            helpfulness=data["helpfulness"],
            tone=data["tone"],
            latency_err=data["latency_err"],
            safety_crit=data["safety_crit"],
        )


def _mean(values: Sequence[float]) -> float | None:
    if not values:
        return None
    return sum(values) / len(values)


def _row(label: str, scores: Sequence[VideoScore]) -> ReportRow:
    valid = [s for s in scores if s.gate_status is GateStatus.VALID]
    mean_overall = _mean([s.overall for s in valid])
    return ReportRow(
        mode_label=label,
        total=len(scores),
        valid=len(valid),
        excluded=len(scores) - len(valid),
        overall=None if mean_overall is None else 100.0 * mean_overall,
        helpfulness=_mean([s.helpfulness for s in valid]),
        tone=_mean([s.tone for s in valid]),
        latency_err=_mean([s.latency_error for s in valid]),
        safety_crit=_mean([s.safety_criticality for s in valid]),
    )


def aggregate(scores: Sequence[VideoScore]) -> list[ReportRow]:
    """One row per assistance mode plus an all-modes row, in table order."""
    rows = [
        _row(MODE_LABELS[mode], [s for s in scores if s.mode is mode])
        for mode in MODE_LABELS
    ]
    rows.append(_row(ALL_MODES_LABEL, list(scores)))
    return rows


@dataclass(frozen=True)
class ComparisonRow:
    mode_label: str
    setting: str
    row: ReportRow

    def to_dict(self) -> dict[str, Any]:
        return {"mode_label": self.mode_label, "setting": self.setting, **self.row.to_dict()}


def compare_runs(
    a: Sequence[ReportRow],
    b: Sequence[ReportRow],
    label_a: str = "A",
    label_b: str = "B",
) -> list[ComparisonRow]:
    """Pair two runs' rows mode by mode for side-by-side presentation."""
    labels_a = [row.mode_label for row in a]
    labels_b = [row.mode_label for row in b]
    if labels_a != labels_b:
        raise InputError(f"report mode labels differ: {labels_a} vs {labels_b}")
    paired: list[ComparisonRow] = []
    for row_a, row_b in zip(a, b):
        paired.append(ComparisonRow(row_a.mode_label, label_a, row_a))
        paired.append(ComparisonRow(row_b.mode_label, label_b, row_b))
    return paired


def _cell(value: float | int | None, scaled: bool = False) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, int):
        return str(value)
    return f"{value:.2f}" if scaled else f"{value:.3f}"


def export(rows: Sequence[ReportRow], format: str = "json") -> str:
    """Serialize report rows; json and csv are lossless, text is for humans."""
    if format == "json":
        return json.dumps({"rows": [row.to_dict() for row in rows]}, indent=2) + "\n"
    if format == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow([
            "mode_label", "total", "valid", "excluded", "overall",
            "helpfulness", "tone", "latency_err", "safety_crit",
        ])
        for row in rows:
            data = row.to_dict()
            writer.writerow([
                data["mode_label"], data["total"], data["valid"], data["excluded"],
                *("" if data[k] is None else repr(data[k])
                  for k in ("overall", "helpfulness", "tone", "latency_err", "safety_crit")),
            ])
        return buffer.getvalue()
    if format in ("text", "text-table"):
        header = ["Mode", *TEXT_COLUMNS]
        body = [
            [
                row.mode_label,
                _cell(row.total), _cell(row.valid), _cell(row.excluded),
                _cell(row.overall, scaled=True),
                _cell(row.helpfulness), _cell(row.tone),
                _cell(row.latency_err), _cell(row.safety_crit),
            ]
            for row in rows
        ]
        widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]
        lines = [
            "  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip()
            for line in [header, *body]
        ]
        return "\n".join(lines) + "\n"
    raise InputError(f"unknown report format {format!r}")


def rows_from_json(document: str) -> list[ReportRow]:
    return [ReportRow.from_dict(d) for d in json.loads(document)["rows"]]


def rows_from_csv(document: str) -> list[ReportRow]:
    reader = csv.DictReader(io.StringIO(document))
    rows = []
    for record in reader:
        rows.append(ReportRow(
            mode_label=record["mode_label"],
            total=int(record["total"]),
            valid=int(record["valid"]),
            excluded=int(record["excluded"]),
            **{
                key: (None if record[key] == "" else float(record[key]))
                for key in ("overall", "helpfulness", "tone", "latency_err", "safety_crit")
            },
        ))
    return rows
