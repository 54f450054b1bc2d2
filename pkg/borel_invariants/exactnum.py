"""
Exact scalars: arbitrary-precision rationals and first-order dual numbers over them.

Rationals are :class:`fractions.Fraction` values. ``Fraction`` already keeps
``gcd(|numerator|, denominator) = 1`` with a strictly positive denominator after every
operation, so equality is structural.
"""

import operator
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Union

from .exceptions import DivisionByZero, RationalFormatError

Rational = Fraction
RationalLike = Union[Fraction, int]
Scalar = Union[Fraction, "DualRational"]

_RATIONAL_PATTERN = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")
# Unicode minus shows up in hand-written matrix files.
_MINUS_SIGNS = ("−", "–")


class ArithOp(str, Enum):
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"


def as_rational(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value

    elif isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)

    raise TypeError(f"Expecting an exact rational. Received '{type(value).__name__}'.")


def parse_rational(text: str) -> Fraction:
    """
    Parse ``"p/q"`` or ``"p"``. Decimal and float notations are rejected so that
    nothing inexact can enter a computation.
    """
    if not isinstance(text, str):
        raise RationalFormatError(f"Expecting a rational string. Received '{text!r}'.")

    normalized = text
    for sign in _MINUS_SIGNS:
        normalized = normalized.replace(sign, "-")

    match = _RATIONAL_PATTERN.match(normalized)
    if not match:
        raise RationalFormatError(f"'{text}' is not a rational of the form 'p/q' or 'p'.")

    numerator, denominator = match.groups()
    if denominator is not None and int(denominator) == 0:
        raise RationalFormatError(f"'{text}' has a zero denominator.")

    return Fraction(int(numerator), int(denominator or 1))


def format_rational(value: RationalLike) -> str:
    value = as_rational(value)
    if value.denominator == 1:
        return str(value.numerator)

    return f"{value.numerator}/{value.denominator}"


_RATIONAL_OPS: dict[ArithOp, Callable[[Fraction, Fraction], Fraction]] = {
    ArithOp.ADD: operator.add,
    ArithOp.SUB: operator.sub,
    ArithOp.MUL: operator.mul,
    ArithOp.DIV: operator.truediv,
}


def rational_arith(lhs: RationalLike, rhs: RationalLike, op: Union[ArithOp, str]) -> Fraction:
    op = ArithOp(op)
    lhs, rhs = as_rational(lhs), as_rational(rhs)
    if op is ArithOp.DIV and rhs == 0:
        raise DivisionByZero(f"Cannot divide {format_rational(lhs)} by zero.")

    return _RATIONAL_OPS[op](lhs, rhs)


@dataclass(frozen=True)
class DualRational:
    """
    ``value + ε·deriv`` with ``ε² = 0``. Seeding one matrix coordinate with ``deriv = 1``
    and evaluating a polynomial or rational function yields the exact partial derivative
    in that coordinate.
    """

    value: Fraction
    deriv: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "value", as_rational(self.value))
        object.__setattr__(self, "deriv", as_rational(self.deriv))

    @classmethod
    def lift(cls, other: Union["DualRational", RationalLike]) -> "DualRational":
        if isinstance(other, DualRational):
            return other

        return cls(as_rational(other))

    @classmethod
    def variable(cls, value: RationalLike) -> "DualRational":
        return cls(as_rational(value), Fraction(1))

    def __add__(self, other):
        other = self.lift(other)
        return DualRational(self.value + other.value, self.deriv + other.deriv)

    __radd__ = __add__

    def __sub__(self, other):
        other = self.lift(other)
        return DualRational(self.value - other.value, self.deriv - other.deriv)

    def __rsub__(self, other):
        return self.lift(other) - self

    def __neg__(self):
        return DualRational(-self.value, -self.deriv)

    def __mul__(self, other):
        other = self.lift(other)
        return DualRational(
            self.value * other.value,
            self.value * other.deriv + self.deriv * other.value,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self.lift(other)
        if other.value == 0:
            raise DivisionByZero(f"Cannot divide {self} by {other} (zero value part).")

        return DualRational(
            self.value / other.value,
            (self.deriv * other.value - self.value * other.deriv) / (other.value * other.value),
        )

    def __rtruediv__(self, other):
        return self.lift(other) / self

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            return NotImplemented

        base = self if exponent >= 0 else DualRational(1) / self
        result = DualRational(1)
        for _ in range(abs(exponent)):
            result = result * base

        return result

    def __eq__(self, other):
        if isinstance(other, (DualRational, Fraction, int)):
            other = self.lift(other)
            return self.value == other.value and self.deriv == other.deriv

        return NotImplemented

    def __hash__(self):
        if self.deriv == 0:
            return hash(self.value)

        return hash((self.value, self.deriv))

    def __str__(self) -> str:
        return f"{format_rational(self.value)}+ε{format_rational(self.deriv)}"

    def __repr__(self) -> str:
        return f"DualRational({self})"


_DUAL_OPS: dict[ArithOp, Callable[[DualRational, DualRational], DualRational]] = {
    ArithOp.ADD: operator.add,
    ArithOp.SUB: operator.sub,
    ArithOp.MUL: operator.mul,
    ArithOp.DIV: operator.truediv,
}


def dual_arith(
    lhs: Union[DualRational, RationalLike],
    rhs: Union[DualRational, RationalLike],
    op: Union[ArithOp, str],
) -> DualRational:
    return _DUAL_OPS[ArithOp(op)](DualRational.lift(lhs), DualRational.lift(rhs))


def value_of(scalar: Union[Scalar, int]) -> Fraction:
    """
    The rational part of a scalar. Degeneracy is decided on this part: a dual
    scalar is invertible exactly when its value is nonzero.
    """
    if isinstance(scalar, DualRational):
        return scalar.value

    return as_rational(scalar)


def is_zero(scalar: Union[Scalar, int]) -> bool:
    return value_of(scalar) == 0


def format_scalar(scalar: Union[Scalar, int]) -> str:
    if isinstance(scalar, DualRational):
        return str(scalar)

    return format_rational(scalar)
