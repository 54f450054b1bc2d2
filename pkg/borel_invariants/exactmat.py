"""
Dense matrices over exact scalars.

Entries are :class:`fractions.Fraction` or :class:`~borel_invariants.exactnum.DualRational`.
Determinants of rational matrices use fraction-free Bareiss elimination over the integers
after clearing row denominators; determinants of dual matrices use Jacobi's formula
``det(A + εB) = det(A) + ε·Σ adj(A)[j][i]·B[i][j]``, which stays exact at singular ``A``.
"""

import json
import math
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union

from .exactnum import (
    DualRational,
    RationalLike,
    Scalar,
    as_rational,
    format_rational,
    format_scalar,
    parse_rational,
)
from .exceptions import (
    MatrixFormatError,
    MatrixShapeError,
    NonSquareError,
    RationalFormatError,
    SingularConjugatorError,
    SingularMatrixError,
)

# Cofactor expansion is n! work; only used as an oracle on small sizes.
COFACTOR_ORACLE_MAX_SIZE = 7


def _coerce(value: Union[Scalar, int]) -> Scalar:
    if isinstance(value, DualRational):
        return value

    return as_rational(value)


class Matrix:
    """
    An immutable ``rows x cols`` grid of exact scalars, stored row-major.
    Indices are 0-based; the 1-based generator indices live in :mod:`borel_invariants.invariants`.
    """

    __slots__ = ("_rows", "_cols")

    def __init__(self, rows: Iterable[Iterable[Union[Scalar, int]]], cols: Optional[int] = None):
        grid = tuple(tuple(_coerce(x) for x in row) for row in rows)
        widths = {len(row) for row in grid}
        if len(widths) > 1:
            raise MatrixShapeError(f"Rows have differing lengths: {sorted(widths)}.")

        width = widths.pop() if widths else (cols or 0)
        if cols is not None and cols != width:
            raise MatrixShapeError(f"Expecting {cols} columns. Rows have {width}.")

        self._rows = grid
        self._cols = width

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(((1 if r == c else 0) for c in range(n)) for r in range(n))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls(((0,) * cols for _ in range(rows)), cols=cols)

    @classmethod
    def diagonal(cls, values: Sequence[Union[Scalar, int]]) -> "Matrix":
        n = len(values)
        return cls(((values[r] if r == c else 0) for c in range(n)) for r in range(n))

    @classmethod
    def from_strings(cls, grid: Sequence[Sequence[str]]) -> "Matrix":
        try:
            return cls([parse_rational(x) for x in row] for row in grid)
        except (RationalFormatError, TypeError) as err:
            raise MatrixFormatError(f"Invalid matrix entry: {err}") from err

    @classmethod
    def parse_json(cls, text: str) -> "Matrix":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise MatrixFormatError(f"Matrix document is not valid JSON: {err}") from err

        if not isinstance(data, list) or not all(isinstance(row, list) for row in data):
            raise MatrixFormatError("Matrix document must be a JSON array of arrays.")

        try:
            return cls.from_strings(data)
        except MatrixShapeError as err:
            raise MatrixFormatError(str(err)) from err

    @property
    def nrows(self) -> int:
        return len(self._rows)

    @property
    def ncols(self) -> int:
        return self._cols

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    @property
    def rows(self) -> tuple[tuple[Scalar, ...], ...]:
        return self._rows

    @property
    def entries(self) -> tuple[Scalar, ...]:
        return tuple(x for row in self._rows for x in row)

    @property
    def is_dual(self) -> bool:
        return any(isinstance(x, DualRational) for x in self.entries)

    def __getitem__(self, index: tuple[int, int]) -> Scalar:
        r, c = index
        return self._rows[r][c]

    def __iter__(self) -> Iterator[tuple[Scalar, ...]]:
        return iter(self._rows)

    def row(self, r: int) -> tuple[Scalar, ...]:
        return self._rows[r]

    def col(self, c: int) -> tuple[Scalar, ...]:
        return tuple(row[c] for row in self._rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented

        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self._cols, self._rows))

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(format_scalar(x) for x in row) + "]" for row in self)
        return f"Matrix([{body}])"

    def map(self, fn: Callable[[Scalar], Union[Scalar, int]]) -> "Matrix":
        return Matrix(((fn(x) for x in row) for row in self._rows), cols=self._cols)

    def transpose(self) -> "Matrix":
        return Matrix((self.col(c) for c in range(self.ncols)), cols=self.nrows)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "Matrix":
        return Matrix(((self._rows[r][c] for c in cols) for r in rows), cols=len(cols))

    def minor(self, r: int, c: int) -> "Matrix":
        """The matrix with row ``r`` and column ``c`` deleted."""
        keep_rows = [i for i in range(self.nrows) if i != r]
        keep_cols = [j for j in range(self.ncols) if j != c]
        return self.submatrix(keep_rows, keep_cols)

    def stack(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.ncols:
            raise MatrixShapeError(f"Cannot stack {self.shape} on {other.shape}.")

        return Matrix(self._rows + other._rows, cols=self.ncols)

    def _check_same_shape(self, other: "Matrix"):
        if self.shape != other.shape:
            raise MatrixShapeError(f"Shape mismatch: {self.shape} vs {other.shape}.")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same_shape(other)
        return Matrix(
            (tuple(a + b for a, b in zip(x, y)) for x, y in zip(self, other)), cols=self.ncols
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same_shape(other)
        return Matrix(
            (tuple(a - b for a, b in zip(x, y)) for x, y in zip(self, other)), cols=self.ncols
        )

    def __neg__(self) -> "Matrix":
        return self.map(lambda x: -x)

    def scale(self, factor: Union[Scalar, int]) -> "Matrix":
        return self.map(lambda x: x * factor)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.ncols != other.nrows:
            raise MatrixShapeError(f"Cannot multiply {self.shape} by {other.shape}.")

        columns = [other.col(c) for c in range(other.ncols)]
        return Matrix(
            (
                tuple(sum((a * b for a, b in zip(row, column)), Fraction(0)) for column in columns)
                for row in self._rows
            ),
            cols=other.ncols,
        )

    def trace(self) -> Scalar:
        _require_square(self)
        return sum((self[k, k] for k in range(self.nrows)), Fraction(0))

    def values(self) -> "Matrix":
        return self.map(lambda x: x.value if isinstance(x, DualRational) else x)

    def derivs(self) -> "Matrix":
        return self.map(lambda x: x.deriv if isinstance(x, DualRational) else 0)

    def to_strings(self) -> list[list[str]]:
        return [[format_rational(x) for x in row] for row in self._rows]

    def to_json(self) -> str:
        return json.dumps(self.to_strings())


def _require_square(matrix: Matrix):
    if not matrix.is_square:
        raise NonSquareError(*matrix.shape)


def _bareiss_det(matrix: Matrix) -> Fraction:
    n = matrix.nrows
    if n == 0:
        return Fraction(1)

    rows: list[list[int]] = []
    scale = 1
    for row in matrix:
        row_denominator = math.lcm(*(x.denominator for x in row))
        scale *= row_denominator
        rows.append([x.numerator * (row_denominator // x.denominator) for x in row])

    sign = 1
    previous_pivot = 1
    for k in range(n - 1):
        if rows[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if rows[r][k] != 0), None)
            if swap is None:
                return Fraction(0)

            rows[k], rows[swap] = rows[swap], rows[k]
            sign = -sign

        pivot = rows[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                # Exact by Sylvester's identity.
                rows[i][j] = (pivot * rows[i][j] - rows[i][k] * rows[k][j]) // previous_pivot

            rows[i][k] = 0

        previous_pivot = pivot

    return Fraction(sign * rows[n - 1][n - 1], scale)


def _dual_det(matrix: Matrix) -> DualRational:
    value_part = matrix.values()
    deriv_part = matrix.derivs()
    value = _bareiss_det(value_part)
    if all(x == 0 for x in deriv_part.entries):
        return DualRational(value)

    adj = adjugate(value_part)
    n = matrix.nrows
    deriv = sum(
        (adj[j, i] * deriv_part[i, j] for i in range(n) for j in range(n) if deriv_part[i, j]),
        Fraction(0),
    )
    return DualRational(value, deriv)


def det(matrix: Matrix) -> Scalar:
    _require_square(matrix)
    if matrix.is_dual:
        return _dual_det(matrix)

    return _bareiss_det(matrix)


def cofactor_det(matrix: Matrix) -> Scalar:
    """
    Laplace expansion along the first row. Independent of :func:`det`; kept as a test
    oracle for small sizes.
    """
    _require_square(matrix)
    n = matrix.nrows
    if n > COFACTOR_ORACLE_MAX_SIZE:
        raise MatrixShapeError(
            f"Cofactor expansion is limited to size {COFACTOR_ORACLE_MAX_SIZE}. Received {n}."
        )

    if n == 0:
        return Fraction(1)

    elif n == 1:
        return matrix[0, 0]

    total: Scalar = Fraction(0)
    for c in range(n):
        entry = matrix[0, c]
        if entry == 0:
            continue

        term = entry * cofactor_det(matrix.minor(0, c))
        total = total + term if c % 2 == 0 else total - term

    return total


def adjugate(matrix: Matrix) -> Matrix:
    """
    The classical adjoint ``X*`` with ``X·X* = X*·X = det(X)·E``, built entrywise from
    ``(n-1) x (n-1)`` cofactors so that it is defined for singular ``X`` too.
    """
    _require_square(matrix)
    n = matrix.nrows
    cofactors = [
        [det(matrix.minor(r, c)) * (1 if (r + c) % 2 == 0 else -1) for c in range(n)]
        for r in range(n)
    ]
    return Matrix(((cofactors[c][r] for c in range(n)) for r in range(n)), cols=n)


def inverse(matrix: Matrix) -> Matrix:
    determinant = det(matrix)
    if determinant == 0:
        raise SingularMatrixError(f"Matrix {matrix!r} is singular.")

    return adjugate(matrix).map(lambda x: x / determinant)


def conjugate(g: Matrix, x: Matrix) -> Matrix:
    """``Ad_g X = g·X·g⁻¹``."""
    _require_square(g)
    if g.shape != x.shape:
        raise MatrixShapeError(f"Cannot conjugate {x.shape} by {g.shape}.")

    try:
        g_inv = inverse(g)
    except SingularMatrixError as err:
        raise SingularConjugatorError() from err

    return g @ x @ g_inv


def pullback(g: Matrix, x: Matrix) -> Matrix:
    """
    ``g⁻¹·X·g``: the point a function is evaluated at under ``(Ad_g f)(X) = f(Ad_g⁻¹ X)``.
    """
    _require_square(g)
    if g.shape != x.shape:
        raise MatrixShapeError(f"Cannot conjugate {x.shape} by {g.shape}.")

    try:
        g_inv = inverse(g)
    except SingularMatrixError as err:
        raise SingularConjugatorError() from err

    return g_inv @ x @ g


def rank(matrix: Matrix) -> int:
    """Rank over the rationals by Gaussian elimination (dual entries use their value part)."""
    rows = [[as_rational(x) for x in row] for row in matrix.values()]
    ncols = matrix.ncols
    result = 0
    for c in range(ncols):
        pivot = next((r for r in range(result, len(rows)) if rows[r][c] != 0), None)
        if pivot is None:
            continue

        rows[result], rows[pivot] = rows[pivot], rows[result]
        lead = rows[result][c]
        for r in range(result + 1, len(rows)):
            if rows[r][c] == 0:
                continue

            factor = rows[r][c] / lead
            rows[r] = [a - factor * b for a, b in zip(rows[r], rows[result])]

        result += 1
        if result == len(rows):
            break

    return result


def scalar_matrix(n: int, value: Union[Scalar, RationalLike]) -> Matrix:
    return Matrix.identity(n).scale(value)
