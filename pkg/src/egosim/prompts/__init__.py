"""Editable prompt templates for the generation and evaluation backends.

Templates are plain text files using ``string.Template`` placeholders
(``${var}``) so literal JSON braces need no escaping. A project may override
any template by dropping a file with the same name into its ``templates/``
directory; the packaged files ship with placeholder few-shot exemplars meant
to be edited per deployment.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from string import Template
from typing import Any

from egosim.errors import ConfigurationError
from egosim.schemas import CONTEXT_HEADER

DEFAULT_TEMPLATE_IDS: dict[str, str] = {
    "step1": "step1_v1",
    "step2": "step2_v1",
    "step3": "step3_v1",
    "step4": "step4_v1",
    "step5": "step5_v1",
    "vlm": "vlm_v1",
    "judge": "judge_v1",
    "alignment": "alignment_v1",
}


def template_text(template_id: str, override_dir: str | Path | None = None) -> str:
    filename = f"{template_id}.txt"
    if override_dir is not None:
        candidate = Path(override_dir) / filename
        if candidate.exists():
            return candidate.read_text(encoding="utf-8")
    ref = resources.files(__package__).joinpath(filename)
    if not ref.is_file():
        raise ConfigurationError(f"prompt template {template_id!r} not found")
    return ref.read_text(encoding="utf-8")


def render(
    template_id: str,
    context: dict[str, Any] | None = None,
    override_dir: str | Path | None = None,
    **variables: Any,
) -> str:
    """Render a template and append the machine-readable context block."""
    text = Template(template_text(template_id, override_dir))
    try:
        body = text.substitute(**{k: str(v) for k, v in variables.items()})
    except KeyError as exc:
        raise ConfigurationError(f"template {template_id!r} is missing variable {exc}") from exc
    if context is not None:
        body = f"{body.rstrip()}\n\n{CONTEXT_HEADER}\n{json.dumps(context, sort_keys=True)}\n"
    return body
