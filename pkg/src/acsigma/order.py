"""Orders on spectra.

``prec``: the square-spiral order on C.  Points on larger squares
``|z|_inf = alpha`` come first; on one square, points are ranked by their
clockwise boundary position measured from the corner ``-alpha + i alpha``.

``succ``: the order on construction indices (n, m): larger modulus first,
and among equal moduli the smaller spoke angle first.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Sequence

from .exact import ExactComplex, as_exact

# True: earlier clockwise position comes first.  Flip to reverse the
# within-square tie-break.
CLOCKWISE_EARLIER_FIRST = True

# "sup" reads |mu|_inf as max(|x|, |y|); "literal" as max(x, y).
LEVEL_CONVENTION = "sup"

BEFORE, EQUAL, AFTER = -1, 0, 1


def sup_level(z, convention: str | None = None) -> Fraction:
    z = as_exact(z)
    convention = convention or LEVEL_CONVENTION
    if convention == "sup":
        return max(abs(z.x), abs(z.y))
    if convention == "literal":
        return max(z.x, z.y)
    raise ValueError(f"unknown level convention {convention!r}")


def square_position(z) -> Fraction:
    """Clockwise arclength on the square |w|_inf = |z|_inf, starting at -a + i a.

    Lies in [0, 8a).  Top edge first (left to right), then the right edge
    downwards, the bottom edge right to left, and the left edge upwards.
    """
    z = as_exact(z)
    a = max(abs(z.x), abs(z.y))
    x, y = z.x, z.y
    if a == 0:
        return Fraction(0)
    if y == a:
        return x + a
    if x == a:
        return 2 * a + (a - y)
    if y == -a:
        return 4 * a + (a - x)
    return 6 * a + (y + a)


@dataclass(frozen=True)
class SpiralKey:
    level: Fraction
    pos: Fraction


def spiral_key(z) -> SpiralKey:
    return SpiralKey(sup_level(z), square_position(z))


def prec_compare(mu1, mu2) -> int:
    """BEFORE if mu1 precedes mu2, AFTER if it follows, EQUAL for the same point."""
    mu1, mu2 = as_exact(mu1), as_exact(mu2)
    if mu1 == mu2:
        return EQUAL
    l1, l2 = sup_level(mu1), sup_level(mu2)
    if l1 != l2:
        return BEFORE if l1 > l2 else AFTER
    p1, p2 = square_position(mu1), square_position(mu2)
    if p1 == p2:
        # only possible under the literal level convention
        return BEFORE if (mu1.x, mu1.y) < (mu2.x, mu2.y) else AFTER
    earlier = p1 < p2
    if not CLOCKWISE_EARLIER_FIRST:
        earlier = not earlier
    return BEFORE if earlier else AFTER


def prec_sort(points: Sequence) -> list[ExactComplex]:
    return sorted((as_exact(p) for p in points), key=cmp_to_key(prec_compare))


def ray_angle_compare(u: tuple, v: tuple) -> int:
    """Compare the angles in [0, 2 pi) of two nonzero direction vectors."""

    def half(w):
        x, y = w
        return 0 if (y > 0 or (y == 0 and x > 0)) else 1

    hu, hv = half(u), half(v)
    if hu != hv:
        return -1 if hu < hv else 1
    cross = u[0] * v[1] - u[1] * v[0]
    return -1 if cross > 0 else (1 if cross < 0 else 0)


@dataclass(frozen=True)
class IndexKey:
    n: int
    m: int
    modulus2: Fraction
    theta: tuple


class OrderError(ValueError):
    pass


def succ_compare(k1: IndexKey, k2: IndexKey) -> int:
    """-1 when k1 comes first in the summation order."""
    if k1.modulus2 != k2.modulus2:
        return -1 if k1.modulus2 > k2.modulus2 else 1
    c = ray_angle_compare(k1.theta, k2.theta)
    if c == 0:
        if (k1.n, k1.m) == (k2.n, k2.m):
            return 0
        raise OrderError(f"indices {(k1.n, k1.m)} and {(k2.n, k2.m)} share modulus and angle")
    return c


def succ_sort(keys: Sequence[IndexKey]) -> list[IndexKey]:
    keys = list(keys)
    seen = {}
    for k in keys:
        tag = (k.modulus2, k.theta)
        if tag in seen and seen[tag] != (k.n, k.m):
            raise OrderError(f"indices {seen[tag]} and {(k.n, k.m)} share modulus and angle; order not total")
        seen[tag] = (k.n, k.m)
    return sorted(keys, key=cmp_to_key(succ_compare))
