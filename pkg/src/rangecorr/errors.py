"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit code 2); numerical
failures derive from :class:`NumericalError` (CLI exit code 3).
"""


class RangeCorrError(Exception):
    """Base class for all package errors."""


class InputError(RangeCorrError, ValueError):
    """Invalid input data or arguments."""


class DomainError(InputError):
    """A correlation argument outside [-1, 1]."""


class MalformedBarError(InputError):
    """An OHLC bar violating the price ordering or positivity rules."""


class CsvFormatError(InputError):
    """A CSV file that cannot be parsed; carries the offending line number."""

    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class DegenerateSeriesError(InputError):
    """A series whose scale is zero or that is too short to estimate from."""


class EmptyIntersectionError(InputError):
    """Aligned assets share no trading dates."""


class NumericalError(RangeCorrError, ArithmeticError):
    """A numerical routine failed to meet its contract."""


class QuadratureError(NumericalError):
    pass


class NonMonotonePhiError(NumericalError):
    """The tabulated bias map is not strictly increasing."""


class SingularSystemError(NumericalError):
    pass


class AssemblyError(NumericalError):
    """Programmatic moment assembly disagrees with the reference matrix."""
