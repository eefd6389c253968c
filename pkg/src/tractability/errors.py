"""Exception types shared across the package."""


class TractabilityError(Exception):
    """Base class for all errors raised by this package."""


class SpectrumError(TractabilityError, ValueError):
    """A spectrum definition violates positivity, monotonicity or decay."""


class IndexBeyondTail(TractabilityError, IndexError):
    """Random access past the end of a finite explicit list."""


class BudgetExceeded(TractabilityError, RuntimeError):
    """A search ran past its configured index cap without an answer."""


class InvalidSpec(TractabilityError, ValueError):
    """Malformed tractability function, h-function or condition spec."""


class BracketInvalid(TractabilityError, ValueError):
    """Bisection endpoints do not disagree."""


class ConfigError(TractabilityError, ValueError):
    """A run configuration is incomplete or unparseable."""
