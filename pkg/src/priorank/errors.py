"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems exit 1,
infeasible instances exit 2, anything else exits 3.
"""

from __future__ import annotations

from dataclasses import dataclass


class PriorankError(Exception):
    """Base class for all errors raised by this package."""


class ModelValidationError(PriorankError, ValueError):
    """A domain object was constructed with invalid data."""


@dataclass(frozen=True)
class ValidationIssue:
    """One problem found in an input document, located by a JSON-ish path."""

    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


class ProjectValidationError(PriorankError):
    """A project or snapshot document failed validation.

    Carries every issue found, not just the first one.
    """

    def __init__(self, issues: list[ValidationIssue]):
        self.issues = list(issues)
        super().__init__("; ".join(str(issue) for issue in self.issues))


class InfeasibleError(PriorankError):
    """Hard precedence constraints contain a cycle; no ordering can satisfy them."""

    def __init__(self, cycle: tuple[str, ...]):
        self.cycle = tuple(cycle)
        loop = " -> ".join(self.cycle + (self.cycle[0],)) if self.cycle else "?"
        super().__init__(f"hard constraints form a cycle: {loop}")


class SessionStateError(PriorankError):
    """An elicitation session operation was called in the wrong state."""


class SnapshotError(PriorankError):
    """A session snapshot could not be read (syntax, schema, or version)."""
