class DensecapError(Exception):
    """Base class for library errors."""


class DimensionError(DensecapError, ValueError):
    """Shapes or subsystem dimensions do not agree."""


class NumericalError(DensecapError, ArithmeticError):
    """A numerical contract was violated (non-PSD input, support escape, ...)."""


class ParseError(DensecapError, ValueError):
    """An input file could not be interpreted."""
