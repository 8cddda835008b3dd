"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Operand shapes are incompatible with the operator or vector."""


class ParameterError(ValueError):
    """An argument value is outside the accepted range."""


class MatrixFormatError(ValueError):
    """A matrix file cannot be used."""


class UnsupportedFormatError(MatrixFormatError):
    """The Matrix Market header requests an unsupported variant.

    Complex, pattern, and array files are rejected rather than coerced.
    """


class MatrixMarketParseError(MatrixFormatError):
    """A Matrix Market line failed to parse; carries the 1-based line number."""

    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class CholeskyFailure(Exception):
    """Cholesky factorization hit a non-positive pivot.

    ``pivot`` is the 1-based index of the failing pivot, mirroring the
    *info* convention of dense LAPACK factorizations.  During automatic
    degree selection this is the stop signal, not a fatal condition.
    """

    def __init__(self, pivot):
        super().__init__(f"Cholesky pivot {pivot} is not positive")
        self.pivot = pivot


class PivotError(ValueError):
    """An ILU pivot is zero, below the floor, or structurally missing.

    ``row`` is the 0-based row at which factorization stopped.
    """

    def __init__(self, row, message=None):
        super().__init__(message or f"zero or near-zero pivot in row {row}")
        self.row = row


class NumericalBreakdownError(RuntimeError):
    """Non-finite values appeared while building the Krylov basis."""

    def __init__(self, iteration):
        super().__init__(
            f"non-finite Krylov data at inner iteration {iteration}"
        )
        self.iteration = iteration


class SingularHessenbergError(RuntimeError):
    """The rotated Hessenberg matrix has a zero diagonal entry."""


class ConfigError(ValueError):
    """Experiment configuration is malformed or inconsistent."""
