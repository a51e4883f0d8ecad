"""Shared exception types.

Every validation failure in the library raises one of these so callers can
distinguish bad arguments from numerical trouble.
"""

from __future__ import annotations


class DriftlabError(Exception):
    """Base class for all library errors."""


class DomainError(DriftlabError, ValueError):
    """An argument lies outside its mathematical domain (e.g. t outside [0, 1])."""


class ShapeError(DriftlabError, ValueError):
    """Array arguments have inconsistent or unexpected shapes."""


class ConfigurationError(DriftlabError, ValueError):
    """A configuration value or combination of values is invalid."""


class DegeneracyError(DriftlabError, ValueError):
    """A distribution parameter is degenerate (non-SPD covariance, empty support)."""


class NumericalBlowupError(DriftlabError, ArithmeticError):
    """A sampler trajectory left the finite range the integrator can trust.

    Carries enough context to locate the failure: the step index, the time
    at the left endpoint of the failing step, and the index of the first
    offending sample in the batch.
    """

    def __init__(self, step: int, t: float, sample_index: int, message: str | None = None):
        self.step = step
        self.t = t
        self.sample_index = sample_index
        detail = message or (
            f"trajectory diverged at step {step} (t={t!r}), first bad sample index {sample_index}"
        )
        super().__init__(detail)


class UnreliableEstimateWarning(UserWarning):
    """A returned estimate is suspect (low effective sample size, floored distances)."""
