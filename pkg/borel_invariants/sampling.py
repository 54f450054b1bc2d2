"""
Deterministic random sampling of rational points and subgroup elements.

The stream for trial ``t`` depends only on ``(seed, t)``, so serial and parallel
runs draw identical witnesses.
"""

import random
from enum import Enum
from fractions import Fraction
from typing import Callable, TypeVar

from pydantic import BaseModel, ConfigDict, model_validator

from .exactmat import Matrix, det
from .exceptions import DegeneratePointError, SamplingExhaustedError
from .logging import logger

# Rejection budget for nonzero entries / invertible draws.
MAX_DRAW_ATTEMPTS = 64
# Resampling budget for degenerate evaluation points.
DEFAULT_MAX_RETRIES = 16
T = TypeVar("T")


class Subgroup(str, Enum):
    H = "H"
    U = "U"
    B = "B"
    GL = "GL"


class GroupElement(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    subgroup: Subgroup
    matrix: Matrix

    @model_validator(mode="after")
    def check_shape(self):
        m = self.matrix
        if not m.is_square:
            raise ValueError("Group elements are square matrices.")

        n = m.nrows
        below = any(m[r, c] != 0 for r in range(n) for c in range(r))
        above = any(m[r, c] != 0 for r in range(n) for c in range(r + 1, n))
        diagonal = [m[k, k] for k in range(n)]
        if self.subgroup is Subgroup.H and (below or above or 0 in diagonal):
            raise ValueError("H elements are invertible diagonal matrices.")

        elif self.subgroup is Subgroup.U and (below or any(a != 1 for a in diagonal)):
            raise ValueError("U elements are upper unitriangular.")

        elif self.subgroup is Subgroup.B and (below or 0 in diagonal):
            raise ValueError("B elements are invertible upper triangular matrices.")

        elif self.subgroup is Subgroup.GL and det(m) == 0:
            raise ValueError("GL elements are invertible.")

        return self

    @property
    def diagonal(self) -> list[Fraction]:
        return [self.matrix[k, k] for k in range(self.matrix.nrows)]


def trial_stream(seed: int, trial_index: int) -> random.Random:
    # String seeds hash deterministically across processes and platforms.
    return random.Random(f"borel-invariants:{seed}:{trial_index}")


def draw_rational(rng: random.Random, bound: int) -> Fraction:
    """Numerator uniform in ``[-bound, bound]``, denominator uniform in ``[1, bound]``."""
    if bound < 1:
        raise ValueError(f"Sampling bound must be at least 1. Received {bound}.")

    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def draw_nonzero(rng: random.Random, bound: int) -> Fraction:
    for _ in range(MAX_DRAW_ATTEMPTS):
        if value := draw_rational(rng, bound):
            return value

    raise SamplingExhaustedError(f"No nonzero entry in {MAX_DRAW_ATTEMPTS} draws.")


def draw_matrix(rng: random.Random, n: int, bound: int) -> Matrix:
    """An arbitrary (possibly singular) point of Mat(n)."""
    return Matrix([draw_rational(rng, bound) for _ in range(n)] for _ in range(n))


def draw_group_element(
    rng: random.Random, subgroup: Subgroup, n: int, bound: int
) -> GroupElement:
    subgroup = Subgroup(subgroup)
    if subgroup is Subgroup.GL:
        for _ in range(MAX_DRAW_ATTEMPTS):
            candidate = draw_matrix(rng, n, bound)
            if det(candidate) != 0:
                return GroupElement(subgroup=subgroup, matrix=candidate)

        raise SamplingExhaustedError(f"No invertible {n}x{n} draw in {MAX_DRAW_ATTEMPTS} tries.")

    rows = []
    for r in range(n):
        row = []
        for c in range(n):
            if c < r:
                row.append(Fraction(0))
            elif c == r:
                row.append(Fraction(1) if subgroup is Subgroup.U else draw_nonzero(rng, bound))
            elif subgroup is Subgroup.H:
                row.append(Fraction(0))
            else:
                row.append(draw_rational(rng, bound))

        rows.append(row)

    return GroupElement(subgroup=subgroup, matrix=Matrix(rows))


def sample(subgroup: Subgroup, n: int, seed: int, trial_index: int, bound: int) -> GroupElement:
    return draw_group_element(trial_stream(seed, trial_index), subgroup, n, bound)


def borel_factors(element: GroupElement) -> tuple[GroupElement, GroupElement]:
    """Split ``b = h·u`` with ``h`` the diagonal of ``b`` and ``u = h⁻¹·b`` unitriangular."""
    m = element.matrix
    h = Matrix.diagonal(element.diagonal)
    u = Matrix([[m[r, c] / m[r, r] for c in range(m.ncols)] for r in range(m.nrows)])
    return (
        GroupElement(subgroup=Subgroup.H, matrix=h),
        GroupElement(subgroup=Subgroup.U, matrix=u),
    )


def with_resampling(
    rng: random.Random,
    attempt: Callable[[random.Random], T],
    max_retries: int = DEFAULT_MAX_RETRIES,
    context: str = "draw",
) -> T:
    """
    Call ``attempt`` until it does not hit a degenerate point. Every retry keeps drawing
    from the same stream, so the outcome stays a function of ``(seed, trial)``.
    """
    for retry in range(max_retries + 1):
        try:
            return attempt(rng)
        except DegeneratePointError as err:
            logger.debug(f"Degenerate {context} (retry {retry}): {err} Resampling.")

    raise SamplingExhaustedError(f"Every {context} was degenerate after {max_retries} resamples.")
