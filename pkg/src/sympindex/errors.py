"""Exception hierarchy; each class carries the CLI exit status it maps to."""
from __future__ import annotations


class IndexToolError(Exception):
    exit_code = 1


class CheckFailed(IndexToolError):
    """A verified identity or inequality did not hold."""

    exit_code = 1


class HypothesisViolation(IndexToolError):
    """A mathematical precondition of the operation is not met."""

    exit_code = 1


class InfiniteMorseNumber(HypothesisViolation):
    def __init__(self, p: int, label: str = ""):
        self.p = p
        self.label = label
        where = f" (from {label})" if label else ""
        super().__init__(f"infinite count at p = {p}{where}")


class InconsistentData(IndexToolError):
    exit_code = 2


class ParseError(IndexToolError):
    exit_code = 2


class PrecisionError(IndexToolError):
    """A comparison cannot be decided at the stored precision."""

    exit_code = 3


class UndecidableSign(PrecisionError):
    pass


class ScanExhausted(IndexToolError):
    """The N-scan ran out before enough solutions were found."""

    exit_code = 4

    def __init__(self, message: str, found: list | None = None):
        super().__init__(message)
        self.found = list(found or [])


class VerificationFailure(CheckFailed):
    def __init__(self, check: str, detail: str = ""):
        self.check = check
        super().__init__(f"verification failed at {check}" + (f": {detail}" if detail else ""))
