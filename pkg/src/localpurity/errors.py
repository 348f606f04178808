from __future__ import annotations

"""Exception hierarchy shared by all modules."""


class LocalPurityError(Exception):
    """Base class for package errors."""


class ValidationError(LocalPurityError, ValueError):
    """Malformed input: wrong shape, out-of-range parameter, bad config."""


class DomainError(LocalPurityError, ValueError):
    """Input is well formed but outside the mathematical domain."""


class IRDivergenceError(DomainError):
    """Second moment diverges at small wavenumber for this profile/field."""


class UVDivergenceError(DomainError):
    """Second moment diverges at large wavenumber without an explicit cutoff."""


class NumericalError(LocalPurityError, RuntimeError):
    """Quadrature or series failed to reach the requested tolerance."""

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved
