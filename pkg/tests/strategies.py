"""Hypothesis strategies for exact plane data."""

from fractions import Fraction

from hypothesis import strategies as st

from acsigma.bvnorm import FiniteFunction
from acsigma.exact import ExactComplex
from acsigma.geometry import Polyline, SigmaSet

coords = st.integers(-4, 4).map(Fraction) | st.fractions(min_value=-4, max_value=4, max_denominator=4)
points = st.builds(ExactComplex, coords, coords)
values = st.builds(ExactComplex, st.integers(-3, 3), st.integers(-3, 3))
real_values = st.builds(ExactComplex, st.integers(-3, 3), st.just(0))


def sigma_sets(min_size=1, max_size=5):
    return st.lists(points, min_size=min_size, max_size=max_size, unique=True).map(SigmaSet)


@st.composite
def functions(draw, min_size=2, max_size=5, vals=values):
    sigma = draw(sigma_sets(min_size, max_size))
    vs = draw(st.lists(vals, min_size=len(sigma), max_size=len(sigma)))
    return FiniteFunction(sigma, dict(zip(sigma.points, vs)))


@st.composite
def polylines(draw, min_size=1, max_size=8):
    return Polyline(draw(st.lists(points, min_size=min_size, max_size=max_size)))


def rho_list(rng, length: int, span: int = 4) -> list:
    """A list of points with no two consecutive entries off the real axis."""
    out = []
    while len(out) < length:
        off = bool(out) and out[-1].y == 0 and rng.random() < 0.5
        off = off or (not out and rng.random() < 0.5)
        y = rng.choice([k for k in range(-span, span + 1) if k]) if off else 0
        p = ExactComplex(Fraction(rng.randint(-2 * span, 2 * span), 2), y)
        if not out or out[-1] != p:
            out.append(p)
    return out


def rho_counts(S) -> tuple[int, int]:
    """(k2, k3): steps from the real axis off it, and back onto it."""
    k2 = sum(1 for a, b in zip(S[:-1], S[1:]) if a.y == 0 and b.y != 0)
    k3 = sum(1 for a, b in zip(S[:-1], S[1:]) if a.y != 0 and b.y == 0)
    return k2, k3


@st.composite
def rho_lists(draw, max_len=8):
    import random

    seed = draw(st.integers(0, 2**32 - 1))
    length = draw(st.integers(2, max_len))
    return rho_list(random.Random(seed), length)
