"""Exception types used across the package.

The CLI maps these onto distinct exit codes, so user-facing failures
must raise one of the classes below rather than bare ValueError.
"""

from __future__ import annotations


class QMKError(Exception):
    """Base class for all package errors."""


class ValidationError(QMKError):
    """Input fails a structural contract (not Hermitian, bad trace, ...)."""


class TruncationError(ValidationError):
    """Requested state does not fit the truncated oscillator basis.

    Carries the estimated norm deficit so callers can enlarge n_basis.
    """

    def __init__(self, message: str, deficit: float = 0.0):
        super().__init__(message)
        self.deficit = deficit


class ResolutionError(ValidationError):
    """Phase-space grid too coarse or too small for the requested state."""


class ConvergenceError(QMKError):
    """Iterative solver exhausted its budget before meeting tolerances.

    residual_history holds (primal, dual) pairs for diagnosis.
    """

    def __init__(self, message: str, residual_history=None):
        super().__init__(message)
        self.residual_history = residual_history or []


class ConfigError(ValidationError):
    """Malformed configuration file or option value."""
