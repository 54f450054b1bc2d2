class BorelInvariantsError(Exception):
    """
    An error raised by the borel-invariants workbench.
    """


class DivisionByZero(BorelInvariantsError, ZeroDivisionError):
    """
    Raised when an exact scalar is divided by zero (or a dual scalar
    by one whose value part is zero).
    """


class MatrixShapeError(BorelInvariantsError, ValueError):
    """
    Raised when matrix dimensions do not fit the requested operation.
    """


class NonSquareError(MatrixShapeError):
    """
    Raised when an operation that needs a square matrix is given a rectangular one.
    """

    def __init__(self, rows: int, cols: int):
        super().__init__(f"Expecting a square matrix. Received shape {rows}x{cols}.")


class SingularMatrixError(BorelInvariantsError, ArithmeticError):
    """
    Raised when a matrix that must be invertible has determinant zero.
    """


class SingularConjugatorError(SingularMatrixError):
    """
    Raised when conjugating by a matrix with determinant zero.
    """

    def __init__(self):
        super().__init__("Conjugating element is singular (det = 0).")


class IndexOutOfRange(BorelInvariantsError, IndexError):
    """
    Raised when generator indices fall outside the ranges of the generator table.
    """


class DegeneratePointError(BorelInvariantsError, ArithmeticError):
    """
    Raised when a rational generator is evaluated at a point where one
    of its denominators vanishes. Verification suites resample on this.
    """


class SamplingExhaustedError(BorelInvariantsError, RuntimeError):
    """
    Raised when the resampling budget runs out before a usable point is drawn.
    """


class InputFormatError(BorelInvariantsError, ValueError):
    """
    Raised when user-provided text cannot be parsed.
    """


class RationalFormatError(InputFormatError):
    """
    Raised when a string is not a rational of the form ``p/q`` or ``p``.
    """


class MatrixFormatError(InputFormatError):
    """
    Raised when a matrix document is not a JSON array of equal-length arrays
    of rational strings.
    """
