"""Exception types shared across the package."""


class CoverageError(LookupError):
    """A table lookup needed a key or range the table does not hold."""


class TableFormatError(ValueError):
    """Malformed row in a table file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MonotonicityError(ValueError):
    """Stored exponents decrease in s for some fixed k."""

    def __init__(self, k, s, message):
        self.k = k
        self.s = s
        super().__init__(message)


class NumericIntegrityError(ArithmeticError):
    """A quantity that must be real (or exact) came out otherwise."""


class ScaleLimitError(ValueError):
    """Request exceeds the desk-scale limits of a brute-force routine."""


class DivergenceError(ValueError):
    """A series bound is undefined because the exponent sum is too small."""
