from fractions import Fraction

import pytest
from hypothesis import given

from acsigma.exact import I, ONE, ZERO, ExactComplex, Q, as_exact, fraction_to_str, to_fraction
from strategies import points


def test_decimal_strings_are_exact():
    assert to_fraction("0.1") == Fraction(1, 10)
    assert to_fraction(" -2.50 ") == Fraction(-5, 2)
    assert to_fraction("1e-3") == Fraction(1, 1000)


def test_floats_rejected():
    with pytest.raises(TypeError):
        to_fraction(0.1)
    with pytest.raises(TypeError):
        as_exact(1j)
    with pytest.raises(TypeError):
        to_fraction(True)


def test_arithmetic():
    assert I * I == -ONE
    assert (Q(1, 2) * Q(3, -1)) == Q(5, 5)
    assert Q(1, 1) / Q(1, -1) == I
    assert Q(3, 4).abs2() == 25 and abs(Q(3, 4)) == 5.0
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO


def test_fraction_to_str():
    assert fraction_to_str(Fraction(5)) == "5"
    assert fraction_to_str(Fraction(-3, 8)) == "-0.375"
    assert fraction_to_str(Fraction(1, 3)) == "1/3"


@given(points, points)
def test_hash_matches_equality(p, q):
    if p == q:
        assert hash(p) == hash(q)
    assert ExactComplex(p.x, p.y) == p and hash(ExactComplex(p.x, p.y)) == hash(p)


@given(points)
def test_json_round_trip(p):
    assert ExactComplex(*p.to_json()) == p
