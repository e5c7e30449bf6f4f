"""Content-hash identifiers for pipeline artifacts.

Identifiers are derived from the producing step's payload so that reruns
with identical inputs assign identical ids, which keeps artifact stores
reproducible byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

_DIGEST_CHARS = 12


def content_digest(payload: Any, length: int = _DIGEST_CHARS) -> str:
    """Hex digest of the canonical JSON encoding of ``payload``."""
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:length]


def content_id(prefix: str, payload: Any) -> str:
    return f"{prefix}-{content_digest(payload)}"
