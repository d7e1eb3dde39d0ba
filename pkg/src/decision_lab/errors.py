"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class DecisionLabError(Exception):
    exit_code = 3


class ConfigurationError(DecisionLabError, ValueError):
    """Invalid model, estimator or run configuration."""

    exit_code = 2


class DomainError(ConfigurationError):
    """A parameter lies outside the domain an operation is defined on."""


class DataError(DecisionLabError, ValueError):
    """Bad input data: shape mismatch, empty sample, non-finite values."""

    exit_code = 3


class NumericalError(DecisionLabError, ArithmeticError):
    """Rank deficiency or other failure of a numerical routine."""

    exit_code = 3


class SingularityError(NumericalError):
    """A shrinkage denominator is exactly zero."""
