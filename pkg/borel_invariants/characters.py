"""
Weights of semi-invariants under the diagonal torus ``H``, stored additively: the exponent
vector ``e`` denotes the character ``diag(a_1, ..., a_n) -> a_1^e_1 ··· a_n^e_n``.

The invariant monomials in a system of semi-invariants are the integer kernel of its weight
matrix; the kernel is read off the column Hermite form of ``[I; W]`` over ``ZZ`` and
returned in Hermite normal form.
"""

import random
from fractions import Fraction
from functools import partial
from typing import Callable, Iterable, Optional, Sequence

from pydantic import BaseModel, ConfigDict
from sympy.polys.domains import ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import hermite_normal_form as sympy_hermite_normal_form

from .exactmat import Matrix, pullback
from .exactnum import Scalar
from .exceptions import IndexOutOfRange
from .invariants import (
    InvariantId,
    Kind,
    Position,
    Stage,
    apply_step,
    chain_steps,
    check_indices,
    generator_table,
    positions,
    stage_label,
    stage_system,
)
from .reports import Failure, VerificationReport, run_trials
from .sampling import (
    DEFAULT_MAX_RETRIES,
    Subgroup,
    draw_group_element,
    draw_matrix,
    trial_stream,
    with_resampling,
)


def laurent_monomial(factors: Iterable[tuple[str, int]]) -> str:
    """Render ``[("a1", 1), ("a3", -2)]`` as ``a1/a3^2``; the empty product is ``1``."""
    present = [(base, e) for base, e in factors if e]

    def power(base: str, e: int) -> str:
        return base if e == 1 else f"{base}^{e}"

    numerator = [power(base, e) for base, e in present if e > 0]
    denominator = [power(base, -e) for base, e in present if e < 0]
    top = "*".join(numerator) or "1"
    if not denominator:
        return top

    bottom = denominator[0] if len(denominator) == 1 else f"({'*'.join(denominator)})"
    return f"{top}/{bottom}"


class WeightVector(BaseModel):
    model_config = ConfigDict(frozen=True)

    exponents: tuple[int, ...]

    @classmethod
    def zero(cls, n: int) -> "WeightVector":
        return cls(exponents=(0,) * n)

    @classmethod
    def unit(cls, n: int, k: int) -> "WeightVector":
        """``e_k`` (1-based), the character ``a_k``."""
        return cls(exponents=tuple(int(m == k) for m in range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.exponents)

    @property
    def is_trivial(self) -> bool:
        return not any(self.exponents)

    def __add__(self, other: "WeightVector") -> "WeightVector":
        return WeightVector(exponents=tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __sub__(self, other: "WeightVector") -> "WeightVector":
        return WeightVector(exponents=tuple(a - b for a, b in zip(self.exponents, other.exponents)))

    def __neg__(self) -> "WeightVector":
        return WeightVector(exponents=tuple(-a for a in self.exponents))

    def character(self, diagonal: Sequence[Fraction]) -> Fraction:
        value = Fraction(1)
        for a, e in zip(diagonal, self.exponents):
            if e:
                value *= a**e

        return value

    def to_monomial(self) -> str:
        return laurent_monomial((f"a{k}", e) for k, e in enumerate(self.exponents, 1))


def weight_J(n: int, i: int, j: int) -> WeightVector:
    """
    ``χ(J_{i,j}) = a_1···a_i / ((a_n···a_{n-j+1})·(a_n···a_{n-i+j+1}))``:
    columns contribute ``a_c``, every X or adjugate row ``r`` contributes ``1/a_r``.
    """
    check_indices(n, i, j)
    exponents = [0] * n
    for k in range(1, i + 1):
        exponents[k - 1] += 1

    for k in range(n - j + 1, n + 1):
        exponents[k - 1] -= 1

    for k in range(n - i + j + 1, n + 1):
        exponents[k - 1] -= 1

    return WeightVector(exponents=tuple(exponents))


def _prime_weight(n: int, i: int, j: int) -> WeightVector:
    if i >= 3 and 1 <= j <= i - 2:
        return WeightVector.unit(n, i) - WeightVector.unit(n, n - i + j + 1)

    return weight_J(n, i, j)


def weight_stage(n: int, stage: Stage, ident: InvariantId) -> WeightVector:
    ident.validate_for(n)
    expected = stage_label(n, stage, ident.position)
    if expected != ident:
        raise IndexOutOfRange(
            f"{ident} is not a generator of stage '{stage.value}' "
            f"(that position holds {expected})."
        )

    i, j = ident.position
    if ident.kind is Kind.J:
        return weight_J(n, i, j)

    elif ident.kind is Kind.JPRIME:
        return _prime_weight(n, i, j)

    elif ident.kind is Kind.LOWER_Y:
        return WeightVector.unit(n, i) - WeightVector.unit(n, n)

    elif ident.kind is Kind.JDOUBLEPRIME:
        if j == 0:
            # i = n gives a_n/a_1, not 1: the J'' table shows 1 there.
            return WeightVector.unit(n, i) - WeightVector.unit(n, n - i + 1)

        return _prime_weight(n, i, j)

    return WeightVector.zero(n)


def weight_table(n: int, stage: Stage = Stage.J) -> list[list[WeightVector]]:
    return [
        [weight_stage(n, stage, ident) for ident in column] for column in generator_table(n, stage)
    ]


def replay_weights(n: int, stage: Stage) -> dict[Position, WeightVector]:
    """Stage weights obtained by pushing the J weights through the elementary steps."""

    def combine(target: WeightVector, source: WeightVector, exponent: int) -> WeightVector:
        return target + source if exponent == 1 else target - source

    table = {pos: weight_J(n, *pos) for pos in positions(n)}
    for step in chain_steps(n, through=stage):
        table = apply_step(table, step, combine)

    return table


def weight_matrix(weights: Sequence[WeightVector]) -> list[list[int]]:
    """The ``n x k`` matrix whose column ``t`` is the weight of generator ``t``."""
    if not weights:
        return []

    return [[w.exponents[row] for w in weights] for row in range(weights[0].n)]


def _column_hnf(columns: Sequence[Sequence[int]], height: int) -> list[list[int]]:
    """Columns of sympy's column-style HNF of the matrix with the given columns."""
    if not columns or height == 0:
        return []

    matrix = DomainMatrix(
        [[ZZ(int(column[r])) for column in columns] for r in range(height)],
        (height, len(columns)),
        ZZ,
    )
    rows = sympy_hermite_normal_form(matrix).to_list()
    width = len(rows[0]) if rows else 0
    return [[int(rows[r][c]) for r in range(height)] for c in range(width)]


def hermite_normal_form(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """
    Reduced row-style HNF with zero rows dropped: positive pivots, entries above each
    pivot in ``[0, pivot)``.
    """
    if not rows:
        return []

    # Reversing coordinates and column order maps sympy's bottom-up column form onto it.
    flipped = _column_hnf([list(row)[::-1] for row in rows], len(rows[0]))
    return [column[::-1] for column in reversed(flipped)]


class LatticeBasis(BaseModel):
    """
    A basis of ``{m ∈ Z^k : W·m = 0}``. ``vectors`` are in Hermite normal form;
    ``transform`` lists the columns of the unimodular ``U`` that brings ``[I; W]`` to
    column Hermite form. The columns ``u`` of ``U`` with ``W·u = 0`` span the same lattice.
    """

    vectors: list[list[int]]
    dimension: int
    rank: int
    transform: list[list[int]]
    labels: Optional[list[str]] = None

    def contains(self, m: Sequence[int]) -> bool:
        """Membership of an exponent vector, by reduction against the Hermite basis."""
        if len(m) != self.dimension:
            return False

        residue = list(m)
        for vector in self.vectors:
            column, pivot = next((c, a) for c, a in enumerate(vector) if a)
            quotient, remainder = divmod(residue[column], pivot)
            if remainder:
                return False

            residue = [a - quotient * b for a, b in zip(residue, vector)]

        return not any(residue)


def kernel_lattice(w: Sequence[Sequence[int]], ncols: Optional[int] = None) -> LatticeBasis:
    k = len(w[0]) if w else (ncols or 0)
    # Column operations on [I; W] record the unimodular transform in the identity block.
    augmented = [[int(r == c) for r in range(k)] + [row[c] for row in w] for c in range(k)]
    columns = _column_hnf(augmented, k + len(w))
    kernel = [column[:k] for column in columns if not any(column[k:])]
    return LatticeBasis(
        vectors=hermite_normal_form(kernel),
        dimension=k,
        rank=k - len(kernel),
        transform=[column[:k] for column in columns],
    )


def stage_lattice(n: int, stage: Stage = Stage.FINAL) -> LatticeBasis:
    system = stage_system(n, stage)
    basis = kernel_lattice(weight_matrix([weight_stage(n, stage, g) for g in system]), len(system))
    return basis.model_copy(update={"labels": [str(g) for g in system]})


def _weight_trial(
    trial: int,
    *,
    n: int,
    f: Callable[[Matrix], Scalar],
    w: WeightVector,
    seed: int,
    bound: int,
    max_retries: int,
) -> Optional[Failure]:
    def attempt(rng: random.Random):
        h = draw_group_element(rng, Subgroup.H, n, bound)
        x = draw_matrix(rng, n, bound)
        lhs = f(pullback(h.matrix, x))
        rhs = w.character(h.diagonal) * f(x)
        return h, x, lhs, rhs

    h, x, lhs, rhs = with_resampling(
        trial_stream(seed, trial), attempt, max_retries, context=f"weight trial {trial}"
    )
    if lhs == rhs:
        return None

    return Failure.from_values(trial, {"h": h.matrix, "X": x}, lhs, rhs)


def weight_verify(
    n: int,
    f: Callable[[Matrix], Scalar],
    w: WeightVector,
    trials: int = 50,
    seed: int = 0,
    bound: int = 10,
    max_retries: int = DEFAULT_MAX_RETRIES,
    jobs: int = 1,
) -> VerificationReport:
    """Check ``f(h⁻¹·X·h) = χ_h(w)·f(X)`` exactly for random diagonal ``h`` and points X."""
    trial_fn = partial(
        _weight_trial, n=n, f=f, w=w, seed=seed, bound=bound, max_retries=max_retries
    )
    return run_trials("weight-verify", n, trials, seed, trial_fn, jobs=jobs)
