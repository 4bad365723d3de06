"""Exception types shared across the package.

Each class maps to one CLI exit code (see cli.EXIT_CODES).
"""


class StabilimeterError(Exception):
    """Base class for all package errors."""


class ParseError(StabilimeterError):
    """Malformed input file (CSV dataset, schema sidecar, formula text)."""


class ParameterError(StabilimeterError):
    """A numeric or structural parameter is outside its declared range."""


class DataError(StabilimeterError):
    """Input data violates a precondition (empty, mismatched schema, ...)."""


class CapacityError(StabilimeterError):
    """An exact computation would exceed the configured enumeration bound."""


class LearnerError(StabilimeterError):
    """A learner failed while training inside an estimation loop."""
