"""Exception types shared across the pipeline, gateway, and service layers."""

from __future__ import annotations

from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from egosim.domain import Violation


class EgosimError(Exception):
    """Base class for all package errors."""


class ConfigurationError(EgosimError):
    """Raised before any request is made when configuration is unusable."""


class InputError(EgosimError):
    """Raised on degenerate inputs (empty prompt, wrong prompt count, bad handle)."""


class OutOfOrderError(EgosimError):
    """Raised when a stage is executed before its predecessors completed."""


class TransportError(EgosimError):
    """Raised after the retry budget for a backend call is exhausted."""

    def __init__(self, message: str, attempts: int = 1):
        super().__init__(message)
        self.attempts = attempts


class SchemaViolationError(EgosimError):
    """Raised when an artifact fails validation and no violation list is expected."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        summary = "; ".join(v.message for v in self.violations) or "invalid artifact"
        super().__init__(summary)


class StepFailure(EgosimError):
    """A pipeline step exhausted its schema-retry budget.

    Carries every raw payload observed so failed generations stay inspectable.
    """

    def __init__(self, step: str, violations: Sequence["Violation"], raw_payloads: Sequence[str]):
        self.step = step
        self.violations = list(violations)
        self.raw_payloads = list(raw_payloads)
        super().__init__(f"{step} failed schema validation after {len(raw_payloads)} attempt(s)")
