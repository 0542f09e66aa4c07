"""Engine error types.

Every error carries a stable machine-readable ``code`` (its class name)
so the HTTP service and CLI can map failures without string matching.
"""

from __future__ import annotations


class ErlError(Exception):
    """Base class for all engine errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- catalog ---------------------------------------------------------------


class ParseError(ErlError):
    """Malformed row in a catalog file."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class StructureError(ErlError):
    """Catalog violates a structural invariant (orphan parent, duplicate id, ...)."""


class UnknownIndicator(ErlError):
    pass


class SubtreeTooLarge(ErlError):
    """Subtree exceeds the exhaustive-enumeration bound."""


# --- traversal --------------------------------------------------------------


class UnknownBlock(ErlError):
    pass


class EmptySelection(ErlError):
    pass


class OutOfOrderAnswer(ErlError):
    """Submitted indicator is not the current question."""


class SessionComplete(ErlError):
    pass


class NeverAnswered(ErlError):
    pass


class StaleSequence(ErlError):
    """Optimistic-concurrency token does not match the session state."""


# --- store ------------------------------------------------------------------


class UnknownSession(ErlError):
    pass


class UnknownUseCase(ErlError):
    pass


class UseCaseMismatch(ErlError):
    pass


class CatalogMismatch(ErlError):
    pass


class StorageFailure(ErlError):
    pass
