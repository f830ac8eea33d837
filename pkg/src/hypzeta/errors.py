"""Exception types shared across the package."""

from __future__ import annotations


class HypzetaError(Exception):
    """Base class for package specific failures."""


class ConvergenceError(HypzetaError):
    """A quadrature or iteration did not reach the requested tolerance.

    The best estimate reached is attached so callers can still inspect it.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class SpectrumBudgetError(HypzetaError):
    """Word enumeration ran out of budget; carries the partial spectrum."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class InvalidGroupError(HypzetaError):
    """The generator set cannot present a torsion-free Fuchsian group."""


class FingerprintMismatchError(HypzetaError):
    """A cached spectrum does not belong to the presentation at hand."""


class SpectrumParseError(HypzetaError):
    """A spectrum cache file is truncated or malformed."""


class RankError(HypzetaError):
    """A factorization hit a pivot too small to trust."""


class ResourceLimitError(HypzetaError):
    """Refusing a computation that would silently degrade in accuracy."""
