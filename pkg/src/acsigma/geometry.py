"""Exact plane geometry: lines, polylines, entry components and the variation factor.

All predicates run on :class:`fractions.Fraction` coordinates; nothing here
rounds.  The variation factor of a polyline is the largest number of
connected pieces in which any single line meets it (a piece is a connected
component of the parameter set ``{t : gamma(t) on the line}``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from typing import Iterable, Sequence

from .exact import ExactComplex, as_exact

ExactPoint = ExactComplex


class SigmaSet:
    """A finite set of exact plane points, stored sorted by (x, y)."""

    def __init__(self, points: Iterable):
        pts = sorted({as_exact(p) for p in points})
        self.points: tuple[ExactPoint, ...] = tuple(pts)
        self._index = {p: i for i, p in enumerate(self.points)}
        self._hash = hash(self.points)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, p):
        return as_exact(p) in self._index

    def __eq__(self, other):
        return self is other or (isinstance(other, SigmaSet) and self.points == other.points)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"SigmaSet({list(self.points)!r})"

    def index(self, p) -> int:
        try:
            return self._index[as_exact(p)]
        except KeyError:
            raise KeyError(f"{p!r} is not in sigma") from None

    def subset(self, predicate) -> "SigmaSet":
        return SigmaSet(p for p in self.points if predicate(p))

    def union(self, other: Iterable) -> "SigmaSet":
        return SigmaSet(list(self.points) + list(other))


@dataclass(frozen=True)
class LineSpec:
    """The line ``a x + b y = c`` with (a, b) primitive and sign-normalized."""

    a: int
    b: int
    c: Fraction

    def __post_init__(self):
        a, b = self.a, self.b
        if a == 0 and b == 0:
            raise ValueError("line normal must be nonzero")
        if math.gcd(a, b) != 1:
            raise ValueError(f"normal ({a}, {b}) is not primitive")
        if a < 0 or (a == 0 and b < 0):
            raise ValueError(f"normal ({a}, {b}) is not sign-normalized")
        object.__setattr__(self, "c", Fraction(self.c))

    @classmethod
    def through(cls, normal: tuple, point: ExactPoint) -> "LineSpec":
        a, b = primitive(normal)
        if a < 0 or (a == 0 and b < 0):
            a, b = -a, -b
        return cls(a, b, a * point.x + b * point.y)

    @classmethod
    def from_points(cls, p: ExactPoint, q: ExactPoint) -> "LineSpec":
        d = q - p
        if d.is_zero():
            raise ValueError("two distinct points are needed")
        return cls.through((-d.y, d.x), p)

    def side(self, p: ExactPoint) -> int:
        v = self.a * p.x + self.b * p.y - self.c
        return (v > 0) - (v < 0)

    def contains(self, p: ExactPoint) -> bool:
        return self.side(p) == 0

    def to_json(self) -> dict:
        from .exact import fraction_to_str

        return {"a": self.a, "b": self.b, "c": fraction_to_str(self.c)}


def primitive(vec: tuple) -> tuple[int, int]:
    """Scale a nonzero rational vector to a primitive integer vector (same direction)."""
    x, y = Fraction(vec[0]), Fraction(vec[1])
    if x == 0 and y == 0:
        raise ValueError("zero vector has no direction")
    den = math.lcm(x.denominator, y.denominator)
    ix, iy = int(x * den), int(y * den)
    g = math.gcd(ix, iy)
    return ix // g, iy // g


class Polyline:
    """Vertex list of a piecewise linear path; adjacent duplicates are collapsed."""

    def __init__(self, vertices: Iterable):
        verts: list[ExactPoint] = []
        for v in vertices:
            v = as_exact(v)
            if not verts or verts[-1] != v:
                verts.append(v)
        if not verts:
            raise ValueError("a polyline needs at least one vertex")
        self.vertices: tuple[ExactPoint, ...] = tuple(verts)

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        return f"Polyline({list(self.vertices)!r})"

    def segments(self):
        return zip(self.vertices[:-1], self.vertices[1:])


@dataclass(frozen=True)
class VfResult:
    vf: int
    witness_line: LineSpec

    @property
    def rho(self) -> Fraction:
        return Fraction(1, self.vf)


def count_entries(signs: Sequence[int]) -> int:
    """Number of components of the preimage of a line, from the vertex side signs.

    A component starts at t = 0 when the first vertex is on the line, at a
    strict crossing inside a segment, or when an off-line vertex is
    followed by an on-line one.  Runs of on-line vertices continue the
    current component.
    """
    if not signs:
        return 0
    count = 1 if signs[0] == 0 else 0
    prev = signs[0]
    for s in signs[1:]:
        if (prev != 0 and s == 0) or prev * s < 0:
            count += 1
        prev = s
    return count


def entry_components(poly: Polyline, line: LineSpec) -> int:
    return count_entries([line.side(v) for v in poly.vertices])


def _upper_direction(d: tuple[int, int]) -> tuple[int, int]:
    # representative of a line direction with angle in [0, pi)
    x, y = d
    if y < 0 or (y == 0 and x < 0):
        return -x, -y
    return x, y


def _angle_cmp(u, v) -> int:
    # u, v both in the upper half-plane representation; cross > 0 means u before v
    cross = u[0] * v[1] - u[1] * v[0]
    return -1 if cross > 0 else (1 if cross < 0 else 0)


def critical_directions(points: Sequence[ExactPoint]) -> list[tuple[int, int]]:
    """Line directions that separate every combinatorial type of line.

    The directions spanned by point pairs, sorted by angle mod pi, with one
    exact bisector inserted between each cyclically consecutive pair.
    """
    pts = sorted(set(points))
    dirs = set()
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = pts[j] - pts[i]
            dirs.add(_upper_direction(primitive((d.x, d.y))))
    dirs = sorted(dirs, key=cmp_to_key(_angle_cmp))
    if not dirs:
        return [(1, 0)]
    if len(dirs) == 1:
        x, y = dirs[0]
        return [dirs[0], _upper_direction((-y, x))]
    out = []
    for k, d in enumerate(dirs):
        out.append(d)
        nxt = dirs[k + 1] if k + 1 < len(dirs) else (-dirs[0][0], -dirs[0][1])
        # sum of two vectors less than pi apart lies strictly between them
        out.append(_upper_direction(primitive((d[0] + nxt[0], d[1] + nxt[1]))))
    return out


def candidate_lines(points: Sequence[ExactPoint]) -> list[LineSpec]:
    """One line for every realizable side pattern of ``points``.

    For each critical direction the offsets are the point projections on the
    normal together with midpoints between consecutive projections.  Between
    two consecutive critical directions the order of the projections does
    not change, so these candidates meet every cell, edge and vertex of the
    dual arrangement.  Lines missing all points are omitted.
    """
    pts = sorted(set(points))
    lines = []
    for dx, dy in critical_directions(pts):
        a, b = -dy, dx
        if a < 0 or (a == 0 and b < 0):
            a, b = -a, -b
        proj = sorted({a * p.x + b * p.y for p in pts})
        offsets = list(proj)
        offsets += [(u + v) / 2 for u, v in zip(proj[:-1], proj[1:])]
        for c in sorted(offsets):
            lines.append(LineSpec(a, b, c))
    return lines


def side_table(points: Sequence[ExactPoint]):
    """Deduplicated candidate lines and their side signs on ``points``.

    Returns ``(lines, signs)`` where ``signs[k][i]`` is the side of
    ``points[i]`` relative to ``lines[k]``.  Patterns equal up to a global
    sign flip are merged, since they give equal entry counts.
    """
    seen = set()
    lines, signs = [], []
    for line in candidate_lines(points):
        s = tuple(line.side(p) for p in points)
        first = next((v for v in s if v != 0), 1)
        key = s if first > 0 else tuple(-v for v in s)
        if key in seen:
            continue
        seen.add(key)
        lines.append(line)
        signs.append(s)
    return lines, signs


def variation_factor(poly: Polyline) -> VfResult:
    """Maximum over all lines of the entry-component count.

    A single point has vf = 1 (the horizontal line through it).
    """
    verts = poly.vertices
    if len(set(verts)) == 1:
        return VfResult(1, LineSpec.through((0, 1), verts[0]))
    best, witness = 0, None
    for line in candidate_lines(verts):
        n = entry_components(poly, line)
        if n > best:
            best, witness = n, line
    return VfResult(best, witness)


def on_segment_param(p: ExactPoint, a: ExactPoint, b: ExactPoint):
    """Parameter t in [0, 1] with p = a + t (b - a), or None if p is off the segment."""
    d = b - a
    w = p - a
    if d.x * w.y - d.y * w.x != 0:
        return None
    t = (w.x * d.x + w.y * d.y) / d.abs2()
    if 0 <= t <= 1:
        return t
    return None


def sigma_hits(poly: Polyline, sigma: Iterable) -> list[ExactPoint]:
    """The sigma-points met by the path, in traversal order."""
    pts = list(sigma.points) if isinstance(sigma, SigmaSet) else [as_exact(p) for p in sigma]
    verts = poly.vertices
    hits: list[ExactPoint] = []
    if len(verts) == 1:
        return [verts[0]] if verts[0] in set(pts) else []
    for a, b in poly.segments():
        on = []
        for p in pts:
            t = on_segment_param(p, a, b)
            if t is not None:
                on.append((t, p))
        on.sort()
        for _, p in on:
            if not hits or hits[-1] != p:
                hits.append(p)
    return hits


def collinear(points: Sequence[ExactPoint]) -> bool:
    pts = sorted(set(points))
    if len(pts) <= 2:
        return True
    a, b = pts[0], pts[1]
    return all(on_line(p, a, b) for p in pts[2:])


def on_line(p: ExactPoint, a: ExactPoint, b: ExactPoint) -> bool:
    d, w = b - a, p - a
    return d.x * w.y - d.y * w.x == 0
