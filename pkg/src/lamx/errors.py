"""Exception types shared across the package."""

from __future__ import annotations


class InputError(ValueError):
    """Malformed argument: wrong dimension, non-positive tuning constant, etc."""


class AssumptionError(ValueError):
    """A modelling assumption needed by the estimator fails for the given inputs.

    ``assumption`` names the violated condition, e.g. ``"Assumption 3"`` for a
    singular covariance matrix.
    """

    def __init__(self, message: str, assumption: str | None = None, **context):
        self.assumption = assumption
        self.context = context
        if assumption and not message.startswith(assumption):
            message = f"{assumption}: {message}"
        super().__init__(message)


class UnsupportedDesignError(InputError):
    """The requested competitor estimator is only defined for another design."""


class ConfigError(ValueError):
    """Configuration file problems; carries every violation found, not just the first."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
