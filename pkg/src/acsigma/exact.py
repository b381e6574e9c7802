"""Exact Gaussian-rational numbers used both as plane points and as function values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

Rational = Union[int, Fraction, str]


def to_fraction(value) -> Fraction:
    """Convert ints, Fractions and decimal strings exactly.

    Binary floats are rejected: a float literal like ``0.1`` is not the
    rational the user meant.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a coordinate")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} exactly; pass a decimal string")


@dataclass(frozen=True, order=True, eq=True)
class ExactComplex:
    re: Fraction
    im: Fraction = Fraction(0)
    _hash: int = field(default=0, init=False, repr=False, compare=False)

    def __post_init__(self):
        re, im = to_fraction(self.re), to_fraction(self.im)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)
        object.__setattr__(self, "_hash", hash((re, im)))

    def __hash__(self):
        return self._hash

    # plane-point vocabulary
    @property
    def x(self) -> Fraction:
        return self.re

    @property
    def y(self) -> Fraction:
        return self.im

    def __add__(self, other):
        other = as_exact(other)
        return ExactComplex(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = as_exact(other)
        return ExactComplex(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return as_exact(other) - self

    def __mul__(self, other):
        other = as_exact(other)
        return ExactComplex(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_exact(other)
        den = other.abs2()
        if den == 0:
            raise ZeroDivisionError("division by zero")
        num = self * other.conjugate()
        return ExactComplex(num.re / den, num.im / den)

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def conjugate(self) -> "ExactComplex":
        return ExactComplex(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return math.hypot(float(self.re), float(self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __repr__(self):
        if self.im == 0:
            return f"Q({self.re})"
        return f"Q({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"

    def to_json(self) -> list[str]:
        return [fraction_to_str(self.re), fraction_to_str(self.im)]


def as_exact(value) -> ExactComplex:
    if isinstance(value, ExactComplex):
        return value
    if isinstance(value, (tuple, list)) and len(value) == 2:
        return ExactComplex(value[0], value[1])
    if isinstance(value, complex):
        raise TypeError("complex floats are not exact; use ExactComplex or string pairs")
    return ExactComplex(to_fraction(value), Fraction(0))


def Q(re: Rational = 0, im: Rational = 0) -> ExactComplex:
    """Shorthand constructor: ``Q(1, -2)`` is 1 - 2i."""
    return ExactComplex(re, im)


ZERO = ExactComplex(0, 0)
ONE = ExactComplex(1, 0)
I = ExactComplex(0, 1)


def fraction_to_str(q: Fraction) -> str:
    """Shortest exact textual form: a terminating decimal when possible, else p/q."""
    if q.denominator == 1:
        return str(q.numerator)
    den = q.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{q.numerator}/{q.denominator}"
    digits = max(twos, fives)
    scaled = q * 10**digits
    sign = "-" if scaled < 0 else ""
    s = str(abs(scaled.numerator)).rjust(digits + 1, "0")
    return f"{sign}{s[:-digits]}.{s[-digits:]}"
