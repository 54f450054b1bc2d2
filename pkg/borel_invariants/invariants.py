"""
Generators of the U- and B-invariant fields of the adjoint action of GL(n) on n x n matrices.

Indices follow the generator table: position ``(i, j)`` with ``1 <= i <= n`` and
``0 <= j <= i - 1`` holds ``J_{i,j}``; column ``i`` of the table lists ``(i, 0) ... (i, i-1)``
top to bottom, so the bottom row is ``(1, 0), (2, 1), ..., (n, n-1)``.

``J_{i,j}`` is the determinant of the ``i x i`` matrix taking columns ``1..i`` of X rows
``n-i+j+1..n`` followed by adjugate rows ``n-j+1..n``.
"""

import re
from enum import Enum
from functools import cached_property
from typing import Callable, Literal, Optional, TypeVar

from pydantic import BaseModel, ConfigDict, model_validator

from .exactmat import Matrix, adjugate, det
from .exactnum import Scalar, is_zero
from .exceptions import DegeneratePointError, IndexOutOfRange, InputFormatError, MatrixShapeError

Position = tuple[int, int]
T = TypeVar("T")


class Kind(str, Enum):
    J = "J"
    JPRIME = "Jprime"
    JDOUBLEPRIME = "Jdoubleprime"
    LOWER_Y = "y"
    UPPER_Y = "Y"

    @property
    def prefix(self) -> str:
        return _KIND_PREFIXES[self]


_KIND_PREFIXES = {
    Kind.J: "J",
    Kind.JPRIME: "J'",
    Kind.JDOUBLEPRIME: "J''",
    Kind.LOWER_Y: "y",
    Kind.UPPER_Y: "Y",
}
_PREFIX_KINDS = {
    **{prefix: kind for kind, prefix in _KIND_PREFIXES.items()},
    **{kind.value: kind for kind in Kind},
}
_ID_PATTERN = re.compile(r"^\s*([A-Za-z']+)\s*:\s*(\d+)\s*(?:,\s*(\d+)\s*)?$")


class Stage(str, Enum):
    """The tables of the transformation chain, in order."""

    J = "J"
    PRIME = "prime"
    Y = "y"
    DOUBLEPRIME = "doubleprime"
    FINAL = "Yfinal"

    @property
    def order(self) -> int:
        return STAGE_ORDER.index(self)


STAGE_ORDER = (Stage.J, Stage.PRIME, Stage.Y, Stage.DOUBLEPRIME, Stage.FINAL)


class RowSource(str, Enum):
    X = "X"
    ADJ = "ADJ"


class RowRef(BaseModel):
    model_config = ConfigDict(frozen=True)

    source: RowSource
    index: int
    """1-based row index into X or its adjugate."""

    def __str__(self) -> str:
        return f"{self.source.value}{self.index}"


class MinorSpec(BaseModel):
    """
    The row plan of ``J_{i,j}``: the first ``i - j`` rows come from X, the last ``j``
    from the adjugate, all restricted to columns ``1..i``.
    """

    model_config = ConfigDict(frozen=True)

    n: int
    i: int
    j: int
    row_plan: tuple[RowRef, ...]
    columns: tuple[int, ...]


class InvariantId(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Kind
    i: int
    j: Optional[int] = None

    @model_validator(mode="after")
    def check_second_index(self):
        if self.kind is Kind.LOWER_Y and self.j is not None:
            raise ValueError("y generators take a single index.")

        elif self.kind is not Kind.LOWER_Y and self.j is None:
            raise ValueError(f"{self.kind.prefix} generators take two indices.")

        return self

    @classmethod
    def parse(cls, text: str) -> "InvariantId":
        """Parse ``J:i,j``, ``J':i,j``, ``J'':i,j``, ``y:i`` or ``Y:i,j``."""
        match = _ID_PATTERN.match(text)
        if not match or match.group(1) not in _PREFIX_KINDS:
            raise InputFormatError(
                f"'{text}' is not a generator id. Expecting 'J:i,j', 'y:i' or 'Y:i,j'."
            )

        prefix, first, second = match.groups()
        try:
            return cls(
                kind=_PREFIX_KINDS[prefix],
                i=int(first),
                j=None if second is None else int(second),
            )
        except ValueError as err:
            raise InputFormatError(f"'{text}' is not a generator id: {err}") from err

    def __str__(self) -> str:
        if self.j is None:
            return f"{self.kind.prefix}:{self.i}"

        return f"{self.kind.prefix}:{self.i},{self.j}"

    @property
    def position(self) -> Position:
        """Where this generator sits in the generator table."""
        if self.kind is Kind.LOWER_Y:
            return self.i, self.i - 1

        return self.i, self.j  # type: ignore[return-value]

    def validate_for(self, n: int) -> "InvariantId":
        if self.kind is Kind.LOWER_Y:
            if not 1 <= self.i <= n:
                raise IndexOutOfRange(f"{self} requires 1 <= i <= n (n={n}).")

        elif self.kind is Kind.UPPER_Y:
            if not (2 <= self.i <= n and 0 <= self.j <= self.i - 2):  # type: ignore[operator]
                raise IndexOutOfRange(f"{self} requires 2 <= i <= n, 0 <= j <= i-2 (n={n}).")

        else:
            check_indices(n, self.i, self.j)  # type: ignore[arg-type]

        return self


def J_id(i: int, j: int) -> InvariantId:
    return InvariantId(kind=Kind.J, i=i, j=j)


def y_id(i: int) -> InvariantId:
    return InvariantId(kind=Kind.LOWER_Y, i=i)


def Y_id(i: int, j: int) -> InvariantId:
    return InvariantId(kind=Kind.UPPER_Y, i=i, j=j)


def check_indices(n: int, i: int, j: int):
    if n < 1:
        raise IndexOutOfRange(f"Dimension must be positive. Received n={n}.")

    elif not 1 <= i <= n:
        raise IndexOutOfRange(f"Index i={i} outside 1..{n}.")

    elif not 0 <= j <= i - 1:
        raise IndexOutOfRange(f"Index j={j} outside 0..{i - 1} (i={i}).")


def positions(n: int) -> list[Position]:
    return [(i, j) for i in range(1, n + 1) for j in range(i)]


def minor_spec(n: int, i: int, j: int) -> MinorSpec:
    check_indices(n, i, j)
    x_rows = [RowRef(source=RowSource.X, index=r) for r in range(n - i + j + 1, n + 1)]
    adj_rows = [RowRef(source=RowSource.ADJ, index=r) for r in range(n - j + 1, n + 1)]
    return MinorSpec(
        n=n, i=i, j=j, row_plan=tuple(x_rows + adj_rows), columns=tuple(range(1, i + 1))
    )


def homogeneity_degree(n: int, i: int, j: int) -> int:
    """``i - j`` rows of degree 1 and ``j`` adjugate rows of degree ``n - 1``."""
    check_indices(n, i, j)
    return i + j * (n - 2)


def _quotient(numerator: Scalar, denominator: Scalar, what: str) -> Scalar:
    if is_zero(denominator):
        raise DegeneratePointError(f"{what} is undefined here: its denominator vanishes.")

    return numerator / denominator


class GeneratorEvaluator:
    """
    Evaluates generators at one point X (rational or dual). The adjugate and every
    ``J_{i,j}`` are computed once and shared by all derived generators.
    """

    def __init__(self, n: int, x: Matrix):
        if x.shape != (n, n):
            raise MatrixShapeError(f"Expecting a {n}x{n} matrix. Received {x.shape}.")

        self.n = n
        self.x = x
        self._minors: dict[Position, Scalar] = {}

    @cached_property
    def adjugate(self) -> Matrix:
        return adjugate(self.x)

    def assemble(self, i: int, j: int) -> Matrix:
        spec = minor_spec(self.n, i, j)
        sources = {RowSource.X: self.x, RowSource.ADJ: None}
        if j > 0:
            sources[RowSource.ADJ] = self.adjugate

        rows = []
        for ref in spec.row_plan:
            source = sources[ref.source]
            rows.append([source[ref.index - 1, c - 1] for c in spec.columns])  # type: ignore

        return Matrix(rows, cols=i)

    def J(self, i: int, j: int) -> Scalar:
        if (i, j) not in self._minors:
            self._minors[(i, j)] = det(self.assemble(i, j))

        return self._minors[(i, j)]

    def y(self, i: int) -> Scalar:
        if not 1 <= i <= self.n:
            raise IndexOutOfRange(f"y:{i} requires 1 <= i <= {self.n}.")

        elif i == 1:
            return self.J(1, 0)

        return _quotient(self.J(i, i - 1), self.J(i - 1, 0), f"y:{i}")

    def Y(self, i: int, j: int) -> Scalar:
        Y_id(i, j).validate_for(self.n)
        numerator = self.J(i, j) * self.y(self.n - i + j + 1)
        denominator = self.J(i - 1, j) * self.y(i)
        return _quotient(numerator, denominator, f"Y:{i},{j}")

    def J_prime(self, i: int, j: int) -> Scalar:
        check_indices(self.n, i, j)
        if i >= 3 and 1 <= j <= i - 2:
            return _quotient(self.J(i, j), self.J(i - 1, j), f"J':{i},{j}")

        return self.J(i, j)

    def J_doubleprime(self, i: int, j: int) -> Scalar:
        check_indices(self.n, i, j)
        if j == 0 and i >= 2:
            return _quotient(self.J_prime(i, 0), self.J_prime(i - 1, 0), f"J'':{i},0")

        return self.J_prime(i, j)

    def value(self, ident: InvariantId) -> Scalar:
        ident.validate_for(self.n)
        if ident.kind is Kind.J:
            return self.J(ident.i, ident.j)  # type: ignore[arg-type]

        elif ident.kind is Kind.JPRIME:
            return self.J_prime(ident.i, ident.j)  # type: ignore[arg-type]

        elif ident.kind is Kind.JDOUBLEPRIME:
            return self.J_doubleprime(ident.i, ident.j)  # type: ignore[arg-type]

        elif ident.kind is Kind.LOWER_Y:
            return self.y(ident.i)

        return self.Y(ident.i, ident.j)  # type: ignore[arg-type]

    def table(self) -> dict[Position, Scalar]:
        return {pos: self.J(*pos) for pos in positions(self.n)}


def eval_J(n: int, i: int, j: int, x: Matrix) -> Scalar:
    check_indices(n, i, j)
    return GeneratorEvaluator(n, x).J(i, j)


def eval_y(n: int, i: int, x: Matrix) -> Scalar:
    return GeneratorEvaluator(n, x).y(i)


def eval_Y(n: int, i: int, j: int, x: Matrix) -> Scalar:
    return GeneratorEvaluator(n, x).Y(i, j)


def evaluate(ident: InvariantId, n: int, x: Matrix) -> Scalar:
    return GeneratorEvaluator(n, x).value(ident)


class ElementaryStep(BaseModel):
    """``z_target -> z_target · z_source^exponent`` with ``target != source``."""

    model_config = ConfigDict(frozen=True)

    stage: Stage
    target: Position
    source: Position
    exponent: Literal[1, -1]

    @model_validator(mode="after")
    def check_distinct(self):
        if self.target == self.source:
            raise ValueError(f"Elementary step cannot use {self.target} on itself.")

        return self


def chain_steps(n: int, through: Stage = Stage.FINAL) -> list[ElementaryStep]:
    """
    The elementary transformations turning the J table into the table of the
    ``through`` stage. Descending loops keep every source unmodified until it is read.
    """
    steps: list[ElementaryStep] = []

    def add(stage: Stage, target: Position, source: Position, exponent: Literal[1, -1]):
        if stage.order <= through.order:
            steps.append(
                ElementaryStep(stage=stage, target=target, source=source, exponent=exponent)
            )

    for i in range(n, 2, -1):
        for j in range(1, i - 1):
            add(Stage.PRIME, (i, j), (i - 1, j), -1)

    for i in range(2, n + 1):
        add(Stage.Y, (i, i - 1), (i - 1, 0), -1)

    # Runs through i = n as well; the direct Y_{n,0} definition needs it.
    for i in range(n, 1, -1):
        add(Stage.DOUBLEPRIME, (i, 0), (i - 1, 0), -1)

    for i in range(2, n + 1):
        for j in range(i - 1):
            k = n - i + j + 1
            add(Stage.FINAL, (i, j), (k, k - 1), 1)
            add(Stage.FINAL, (i, j), (i, i - 1), -1)

    return steps


def apply_step(
    table: dict[Position, T], step: ElementaryStep, combine: Callable[[T, T, int], T]
) -> dict[Position, T]:
    updated = dict(table)
    updated[step.target] = combine(table[step.target], table[step.source], step.exponent)
    return updated


def combine_values(target: Scalar, source: Scalar, exponent: int) -> Scalar:
    if exponent == 1:
        return target * source

    return _quotient(target, source, "Elementary transformation")


def stage_label(n: int, stage: Stage, position: Position) -> InvariantId:
    i, j = position
    check_indices(n, i, j)
    if stage is Stage.J:
        return J_id(i, j)

    elif stage is Stage.PRIME:
        return InvariantId(kind=Kind.JPRIME, i=i, j=j)

    elif j == i - 1:
        return y_id(i)

    elif stage is Stage.Y:
        return InvariantId(kind=Kind.JPRIME, i=i, j=j)

    elif stage is Stage.DOUBLEPRIME:
        return InvariantId(kind=Kind.JDOUBLEPRIME, i=i, j=j)

    return Y_id(i, j)


def _labelled(n: int, stage: Stage, table: dict[Position, T]) -> dict[InvariantId, T]:
    return {stage_label(n, stage, pos): table[pos] for pos in positions(n)}


def chain_tables(n: int, x: Matrix) -> dict[Stage, dict[InvariantId, Scalar]]:
    """Every stage's generator values at X from a single replay of the chain."""
    table = GeneratorEvaluator(n, x).table()
    snapshots = {Stage.J: _labelled(n, Stage.J, table)}
    steps = chain_steps(n)
    for stage in STAGE_ORDER[1:]:
        for step in (s for s in steps if s.stage is stage):
            table = apply_step(table, step, combine_values)

        snapshots[stage] = _labelled(n, stage, table)

    return snapshots


def chain_eval(n: int, stage: Stage, x: Matrix) -> dict[InvariantId, Scalar]:
    table = GeneratorEvaluator(n, x).table()
    for step in chain_steps(n, through=stage):
        table = apply_step(table, step, combine_values)

    return _labelled(n, stage, table)


def direct_final(n: int, x: Matrix) -> dict[InvariantId, Scalar]:
    """The final-stage generators from their closed definitions (no chain)."""
    evaluator = GeneratorEvaluator(n, x)
    values = {y_id(i): evaluator.y(i) for i in range(1, n + 1)}
    values.update({Y_id(i, j): evaluator.Y(i, j) for i in range(2, n + 1) for j in range(i - 1)})
    return values


def generator_table(n: int, stage: Stage = Stage.J) -> list[list[InvariantId]]:
    if n < 1:
        raise IndexOutOfRange(f"Dimension must be positive. Received n={n}.")

    return [[stage_label(n, stage, (i, j)) for j in range(i)] for i in range(1, n + 1)]


def j_system(n: int) -> list[InvariantId]:
    return [J_id(i, j) for i, j in positions(n)]


def b_system(n: int) -> list[InvariantId]:
    """``{y_n} ∪ {Y_{i,j}}``: n(n-1)/2 + 1 generators of the B-invariant field."""
    return [y_id(n)] + [Y_id(i, j) for i in range(2, n + 1) for j in range(i - 1)]


def stage_system(n: int, stage: Stage) -> list[InvariantId]:
    """
    The stage's full generator system. The final stage lists ``y_1..y_n`` first and
    then the ``Y_{i,j}``; other stages follow table order.
    """
    if stage is Stage.FINAL:
        return [y_id(i) for i in range(1, n + 1)] + b_system(n)[1:]

    return [stage_label(n, stage, pos) for pos in positions(n)]
