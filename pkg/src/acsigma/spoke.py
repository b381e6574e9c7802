"""Spoke sets, the spoke decomposition and the spoke norm.

Also collects the certified two-sided bounds on ``||f||_BV`` that do not
depend on a search budget: restriction to collinear subsets from below,
spoke equivalence, the real-slice estimate and a visit-counting bound from
above.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cmp_to_key, lru_cache
from typing import Optional

from .bvnorm import FiniteFunction, NormResult, ResourceLimitError, bv_norm, one_d_bv_norm
from .exact import ZERO, ExactComplex
from .geometry import LineSpec, SigmaSet, on_line, primitive
from .order import ray_angle_compare


@dataclass(frozen=True)
class SpokeSet:
    sigma: SigmaSet
    rays: tuple  # primitive integer directions, sorted by angle
    per_ray_points: tuple  # per ray, points sorted by radius
    origin_present: bool

    @property
    def N(self) -> int:
        return len(self.rays)

    def ray_of(self, p) -> int:
        if p.is_zero():
            raise ValueError("the origin lies on every ray")
        return self.rays.index(primitive((p.x, p.y)))

    def ray_domain(self, n: int) -> SigmaSet:
        """sigma intersected with the closed ray (origin included when present)."""
        pts = list(self.per_ray_points[n])
        if self.origin_present:
            pts.append(ExactComplex(0, 0))
        return SigmaSet(pts)


@dataclass
class SpokeDecomposition:
    f0: ExactComplex
    components: list

    def reassemble(self) -> FiniteFunction:
        total = FiniteFunction.constant(self.components[0].domain, self.f0) if self.components else None
        for g in self.components:
            total = total + g
        return total


def detect_spokes(sigma: SigmaSet) -> SpokeSet:
    if len(sigma) == 0:
        raise ValueError("sigma must be nonempty")
    groups: dict[tuple, list] = {}
    origin = False
    for p in sigma:
        if p.is_zero():
            origin = True
            continue
        groups.setdefault(primitive((p.x, p.y)), []).append(p)
    rays = sorted(groups, key=cmp_to_key(ray_angle_compare))
    per_ray = tuple(tuple(sorted(groups[r], key=lambda p: p.abs2())) for r in rays)
    return SpokeSet(sigma, tuple(rays), per_ray, origin)


def decompose(f: FiniteFunction, spokes: Optional[SpokeSet] = None) -> SpokeDecomposition:
    """f = f0 + sum_n f_n with f_n = f - f(0) on ray n and 0 elsewhere.

    When 0 is not in sigma, f(0) is taken to be 0.
    """
    spokes = spokes or detect_spokes(f.domain)
    f0 = f(ExactComplex(0, 0)) if spokes.origin_present else ZERO
    comps = []
    for n in range(spokes.N):
        on_ray = set(spokes.per_ray_points[n])
        comps.append(FiniteFunction.from_callable(
            f.domain, lambda p, on_ray=on_ray: f(p) - f0 if p in on_ray else ZERO))
    return SpokeDecomposition(f0, comps)


def spoke_norm(f: FiniteFunction, spokes: Optional[SpokeSet] = None) -> float:
    spokes = spokes or detect_spokes(f.domain)
    dec = decompose(f, spokes)
    total = abs(dec.f0)
    for n, fn in enumerate(dec.components):
        total += one_d_bv_norm(fn.restrict(spokes.ray_domain(n)))
    return total


# ---------------------------------------------------------------------------
# certified bounds


@lru_cache(maxsize=64)
def collinear_groups(sigma: SigmaSet) -> tuple:
    """Index tuples of the maximal collinear subsets with at least two points."""
    pts = sigma.points
    seen = set()
    groups = []
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            line = LineSpec.from_points(pts[i], pts[j])
            if line in seen:
                continue
            seen.add(line)
            groups.append(tuple(k for k, p in enumerate(pts) if line.contains(p)))
    return tuple(groups)


def restriction_lower(f: FiniteFunction, groups=None) -> float:
    """max over collinear subsets sigma_0 of the (exact) norm of f restricted to sigma_0."""
    vals = f.values()
    best = f.sup_norm()
    groups = collinear_groups(f.domain) if groups is None else groups
    for g in groups:
        # group indices are in sigma order, which is monotone along the line
        v = sum(abs(vals[b] - vals[a]) for a, b in zip(g[:-1], g[1:]))
        m = max(abs(vals[k]) for k in g)
        best = max(best, m + v)
    return best


def visit_bound(f: FiniteFunction) -> float:
    """Budget-free upper bound on var(f, sigma) by counting visits.

    A line through a visited point z in a generic direction meets the path
    once per visit, so vf >= visits(z).  Charging every jump to its
    endpoints gives var <= sum_z max_w |f(z) - f(w)|; charging it instead to
    the points off the most common value gives var <= 2 * (same sum over
    those points).  The smaller of the two is returned.
    """
    vals = f.values()
    if len(vals) <= 1:
        return 0.0
    distinct = set(vals)
    far = {v: max(abs(v - w) for w in distinct) for v in distinct}
    spread = [far[v] for v in vals]
    half_charge = sum(spread)
    counts: dict = {}
    for v in vals:
        counts[v] = counts.get(v, 0) + 1
    common = max(counts, key=lambda v: (counts[v], v))
    cover = 2 * sum(s for v, s in zip(vals, spread) if v != common)
    return min(half_charge, cover)


def star_bound(f: FiniteFunction, groups=None) -> Optional[float]:
    """3 ||f||_inf + var(f, sigma_0) when supp f lies on one line sigma_0 meets.

    The real-slice estimate, transported to any line by affine invariance.
    None when the support is not collinear.
    """
    supp = f.support()
    if not supp:
        return 0.0
    sigma = f.domain
    if len(sigma) == 1:
        return f.sup_norm()
    groups = collinear_groups(sigma) if groups is None else groups
    idx = {sigma.index(p) for p in supp}
    vals = f.values()
    best = None
    for g in groups:
        if not idx <= set(g):
            continue
        var = sum(abs(vals[b] - vals[a]) for a, b in zip(g[:-1], g[1:]))
        best = var if best is None else min(best, var)
    if best is None:
        return None
    return 3 * f.sup_norm() + best


@dataclass
class Bounds:
    lower: float
    upper: float
    sources: dict = field(default_factory=dict)
    search: Optional[NormResult] = None

    @property
    def exact(self) -> bool:
        return self.lower == self.upper


EXACT_SEARCH_LIMIT = int(os.environ.get("ACSIGMA_BOUNDS_SEARCH_LIMIT", 7))


def certified_bounds(
    f: FiniteFunction,
    spokes: Optional[SpokeSet] = None,
    search_mode: Optional[str] = "branch-bound",
    list_budget: Optional[int] = None,
    search_limit: int = EXACT_SEARCH_LIMIT,
    all_lines: Optional[bool] = None,
) -> Bounds:
    """Two-sided bounds on the true ||f||_BV(sigma).

    Lower bounds: sup norm, restrictions to collinear subsets, the spoke
    norm over 2N+1, and (for small sigma) a budgeted search.  Upper bounds:
    3 ||f||_Sp, the visit bound, and the real-slice estimate.  A collinear
    sigma gets the exact one-dimensional value.
    """
    sigma = f.domain
    n = len(sigma)
    sup = f.sup_norm()
    spokes = spokes or detect_spokes(sigma)
    src = {}
    if f.is_constant():
        return Bounds(sup, sup, {"constant": sup})
    groups = collinear_groups(sigma) if (all_lines if all_lines is not None else n <= 24) else _spoke_line_groups(spokes)
    if len(groups) == 1 and len(groups[0]) == n:
        v = one_d_bv_norm(f)
        return Bounds(v, v, {"collinear": v})
    src["restriction"] = restriction_lower(f, groups)
    sp = spoke_norm(f, spokes)
    src["spoke_lower"] = sp / (2 * spokes.N + 1)
    src["spoke_upper"] = 3 * sp
    src["visit_upper"] = sup + visit_bound(f)
    st = star_bound(f, groups)
    if st is not None:
        src["star_upper"] = st
    search = None
    if search_mode and n <= search_limit:
        try:
            search = bv_norm(f, mode=search_mode, list_budget=list_budget)
            src["search_lower"] = search.lower
        except ResourceLimitError:
            pass
    lower = max(v for k, v in src.items() if k.endswith("lower") or k == "restriction")
    upper = min(v for k, v in src.items() if k.endswith("upper"))
    return Bounds(lower, upper, src, search)


def _spoke_line_groups(spokes: SpokeSet) -> tuple:
    """Collinear groups along lines through the origin only (cheap)."""
    pts = spokes.sigma.points
    groups = []
    done = set()
    for r in spokes.rays:
        key = r if (r[1] > 0 or (r[1] == 0 and r[0] > 0)) else (-r[0], -r[1])
        if key in done:
            continue
        done.add(key)
        a = ExactComplex(0, 0)
        b = ExactComplex(r[0], r[1])
        groups.append(tuple(k for k, p in enumerate(pts) if on_line(p, a, b)))
    return tuple(g for g in groups if len(g) >= 2)


@dataclass
class EquivalenceCheck:
    N: int
    spoke: float
    bv: NormResult
    lower_ok: bool
    upper_ok: bool


def check_equivalence(f: FiniteFunction, mode="branch-bound", list_budget=None, tol=1e-9) -> EquivalenceCheck:
    """Both sides of ``||f||_Sp / (2N+1) <= ||f||_BV <= 3 ||f||_Sp``."""
    spokes = detect_spokes(f.domain)
    sp = spoke_norm(f, spokes)
    res = bv_norm(f, mode=mode, list_budget=list_budget)
    N = spokes.N
    return EquivalenceCheck(
        N, sp, res,
        sp / (2 * N + 1) <= res.lower + tol,
        res.lower <= 3 * sp + tol,
    )
