"""Exception hierarchy; each class maps to a CLI exit code."""


class MarketStatesError(Exception):
    exit_code = 1

    def __init__(self, message, *, stage=None):
        super().__init__(message)
        self.stage = stage

    def __str__(self):
        msg = super().__str__()
        return f"[{self.stage}] {msg}" if self.stage else msg


class ConfigError(MarketStatesError):
    exit_code = 2


class ValidationError(MarketStatesError):
    """Input data violates a domain invariant (bad prices, shapes, mismatched frames)."""

    exit_code = 3


class NumericalError(MarketStatesError):
    """A numerical stage failed: eigensolver, zero variance, non-convergent chain."""

    exit_code = 4
