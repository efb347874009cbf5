"""Exception hierarchy.

Errors split into two families so the CLI can map them to exit codes:
``InputError`` (bad data or arguments, exit 1) and ``NumericalError``
(the math broke down, exit 2).
"""


class GarmatsError(Exception):
    """Base class for all package errors."""


class InputError(GarmatsError, ValueError):
    pass


class NumericalError(GarmatsError, ArithmeticError):
    pass


class SeriesTooShort(InputError):
    pass


class NothingToInvert(InputError):
    pass


class DegenerateSplit(InputError):
    pass


class ConstantSeries(InputError):
    pass


class LagTooLarge(InputError):
    pass


class TooFewObservations(InputError):
    pass


class NonStationaryParams(InputError):
    pass


class NonInvertibleParams(InputError):
    pass


class NonCountData(InputError):
    pass


class DegenerateDf(InputError):
    pass


class LengthMismatch(InputError):
    pass


class EmptyInput(InputError):
    pass


class IndexOutOfRange(InputError, IndexError):
    pass


class ParseError(InputError):
    pass


class NonNumericValue(ParseError):
    pass


class NumericalDegeneracy(NumericalError):
    pass


class SingularRegression(NumericalError):
    pass


class OverflowGuard(NumericalError, OverflowError):
    """Raised when a log-link recursion diverges (linear predictor > 700)."""


class PipelineError(GarmatsError):
    """Wraps a module error with the pipeline stage it came from."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")


class DataFileNotFound(InputError, FileNotFoundError):
    pass
