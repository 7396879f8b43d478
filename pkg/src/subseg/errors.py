"""Exception types shared across the package.

Each class maps onto one CLI exit code so failures stay scriptable:
bad parameters exit 2, invalid data 3, numerical trouble 4, I/O 5.
"""


class ArgumentError(ValueError):
    """A parameter value is outside its documented range."""


class ValidationError(ValueError):
    """Input data violates a documented invariant."""


class ParseError(ValidationError):
    """A file row could not be parsed.

    Carries the 1-based line number of the offending row when known.
    """

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class CoverageError(ValidationError):
    """A word cannot be segmented because a required unit is missing."""


class NumericalError(ArithmeticError):
    """A numerical operation left its valid domain."""


class CorpusIOError(OSError):
    """Corpus input could not be read or decoded."""
