"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class SturmianError(Exception):
    """Base class; ``code`` is the machine-readable name used by the CLI."""

    code = "SturmianError"

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self), "details": self.details}


class MalformedWord(SturmianError):
    """Entry list is not a member of the continued-fraction space."""

    code = "MalformedWord"


class InvalidExtension(SturmianError):
    """Appending an entry leaves the continued-fraction space."""

    code = "InvalidExtension"


class NotInUnitInterval(SturmianError):
    """Real input must lie strictly between 0 and 1."""

    code = "NotInUnitInterval"


class InfiniteSlope(SturmianError):
    """A mechanical word was requested for the formal value infinity."""

    code = "InfiniteSlope"


class UnsupportedValue(SturmianError):
    """The word's value is outside the domain of the operation."""

    code = "UnsupportedValue"


class DegenerateSpectrum(SturmianError):
    """Eigenvalues at theta=0 and theta=pi do not interleave."""

    code = "DegenerateSpectrum"


class NoSignChange(SturmianError):
    """Bracket does not straddle a root."""

    code = "NoSignChange"


class TypeAmbiguous(SturmianError):
    """Band is strictly inside bands of both or neither parent spectra."""

    code = "TypeAmbiguous"


class StructureViolation(SturmianError):
    """A nesting, ordering or counting property failed."""

    code = "StructureViolation"


class CoverViolation(SturmianError):
    """A deeper cover is not contained in a shallower one."""

    code = "CoverViolation"


class InvalidCode(SturmianError):
    """Letter sequence violates the code rules."""

    code = "InvalidCode"


class InvalidMu(SturmianError):
    """Coefficient sequence violates the admissibility rules."""

    code = "InvalidMu"


class EdgeCollision(SturmianError):
    """Energy lies within tolerance of a band edge."""

    code = "EdgeCollision"


class InsufficientDepth(SturmianError):
    """Not enough convergents to decompose the label."""

    code = "InsufficientDepth"


class CertificateFailure(SturmianError):
    """A gap certificate sub-check failed."""

    code = "CertificateFailure"


class ConsistencyError(SturmianError):
    """Two independent computation routes disagree."""

    code = "ConsistencyError"


class TooManyCodes(SturmianError):
    """Enumeration would exceed the configured cap."""

    code = "TooManyCodes"
