"""Compact operators built from disjoint projections, in the multiplier model.

Operators act on functions on a finite sigma by multiplication, so an
operator is a FiniteFunction ``g`` and its norm is ``||g||_BV(sigma)``.
Projections onto single eigenvalues are point indicators.  Norms of
large-sigma multipliers are reported as certified two-sided bounds.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Optional, Sequence

from .bvnorm import FiniteFunction, bv_norm, one_d_bv_norm
from .exact import ONE, ZERO, ExactComplex, as_exact
from .geometry import SigmaSet, collinear, primitive
from .order import IndexKey, succ_sort
from .spoke import Bounds, certified_bounds, detect_spokes, spoke_norm


class SpecError(ValueError):
    """A structural hypothesis on the construction data fails."""


# ---------------------------------------------------------------------------
# construction data


@dataclass(frozen=True)
class OperatorSpec:
    """Rays ``thetas[n]`` (primitive integer directions) and eigenvalues on them.

    ``lambdas[n]`` lists the eigenvalues on ray n, largest modulus first.
    """

    thetas: tuple
    lambdas: tuple

    def __post_init__(self):
        object.__setattr__(self, "thetas", tuple(tuple(int(c) for c in t) for t in self.thetas))
        object.__setattr__(self, "lambdas", tuple(tuple(as_exact(z) for z in row) for row in self.lambdas))

    @classmethod
    def from_scales(cls, thetas: Sequence, scales: Sequence[Sequence]) -> "OperatorSpec":
        """lambda_{n,m} = s_{n,m} * (a_n, b_n) for primitive directions (a_n, b_n)."""
        lams = []
        for (a, b), row in zip(thetas, scales):
            lams.append(tuple(ExactComplex(a, b) * as_exact(s) for s in row))
        return cls(tuple(thetas), tuple(lams))

    @property
    def N(self) -> int:
        return len(self.thetas)

    @cached_property
    def sigma(self) -> SigmaSet:
        return SigmaSet([ZERO] + [z for row in self.lambdas for z in row])

    def indices(self) -> list[tuple[int, int]]:
        return [(n, m) for n, row in enumerate(self.lambdas) for m in range(len(row))]

    def eigenvalue(self, n: int, m: int) -> ExactComplex:
        return self.lambdas[n][m]

    def index_keys(self) -> list[IndexKey]:
        return [IndexKey(n, m, self.lambdas[n][m].abs2(), self.thetas[n]) for n, m in self.indices()]

    def check_structure(self) -> None:
        """Raise SpecError unless the rays are distinct and each eigenvalue list
        lies on its ray with strictly decreasing moduli."""
        if len(self.thetas) != len(self.lambdas):
            raise SpecError("one eigenvalue list per ray is required")
        seen = set()
        for n, t in enumerate(self.thetas):
            if t == (0, 0):
                raise SpecError(f"ray {n} has zero direction")
            if primitive(t) != t:
                raise SpecError(f"ray {n} direction {t} is not primitive")
            if t in seen:
                raise SpecError(f"ray {n} repeats direction {t}")
            seen.add(t)
        for n, row in enumerate(self.lambdas):
            for m, z in enumerate(row):
                if z.is_zero() or primitive((z.x, z.y)) != self.thetas[n]:
                    raise SpecError(f"H1: lambda[{n}][{m}] = {z!r} is not on ray {self.thetas[n]}")
            for m in range(1, len(row)):
                if not row[m].abs2() < row[m - 1].abs2():
                    raise SpecError(f"H2: moduli on ray {n} are not strictly decreasing at m = {m}")


def random_spec(rng: random.Random, N: int = 2, max_m: int = 20, denom: int = 64) -> OperatorSpec:
    """Random spec with distinct small-integer rays and decreasing rational scales."""
    dirs = set()
    while len(dirs) < N:
        d = (rng.randint(-4, 4), rng.randint(-4, 4))
        if d != (0, 0):
            dirs.add(primitive(d))
    thetas = sorted(dirs, key=lambda d: (d[0], d[1]))
    scales = []
    for _ in thetas:
        M = rng.randint(1, max_m)
        ks = sorted(rng.sample(range(1, 4 * denom), M), reverse=True)
        scales.append([Fraction(k, denom) for k in ks])
    return OperatorSpec.from_scales(thetas, scales)


# ---------------------------------------------------------------------------
# multipliers


def norm_bounds(g: FiniteFunction, search_mode: Optional[str] = None) -> Bounds:
    return certified_bounds(g, search_mode=search_mode)


@dataclass(frozen=True)
class Multiplier:
    """Multiplication by ``g`` on functions over ``g.domain``."""

    g: FiniteFunction

    @classmethod
    def identity(cls, sigma: SigmaSet) -> "Multiplier":
        return cls(FiniteFunction.constant(sigma, ONE))

    @classmethod
    def projection(cls, sigma: SigmaSet, points) -> "Multiplier":
        return cls(FiniteFunction.indicator(sigma, points))

    @property
    def sigma(self) -> SigmaSet:
        return self.g.domain

    def apply(self, f: FiniteFunction) -> FiniteFunction:
        return self.g * f

    def compose(self, other: "Multiplier") -> "Multiplier":
        return Multiplier(self.g * other.g)

    def __add__(self, other: "Multiplier") -> "Multiplier":
        return Multiplier(self.g + other.g)

    def __sub__(self, other: "Multiplier") -> "Multiplier":
        return Multiplier(self.g - other.g)

    def scale(self, c) -> "Multiplier":
        return Multiplier(self.g * as_exact(c))

    def norm(self, search_mode: Optional[str] = None) -> Bounds:
        return norm_bounds(self.g, search_mode)


def point_projection(spec: OperatorSpec, n: int, m: int) -> Multiplier:
    return Multiplier.projection(spec.sigma, [spec.eigenvalue(n, m)])


def cumulative_projection(spec: OperatorSpec, n: int, M: int) -> Multiplier:
    """Sum of the first M point projections on ray n."""
    return Multiplier.projection(spec.sigma, spec.lambdas[n][:M])


@dataclass
class SpecReport:
    K: float  # certified upper bound on every cumulative projection norm
    K_lower: float
    K_search: Optional[float]
    exact: bool
    per_ray: list = field(default_factory=list)  # (n, M, lower, upper)

    def as_dict(self) -> dict:
        return {"K": self.K, "K_lower": self.K_lower, "K_search": self.K_search, "exact": self.exact}


def validate_spec(spec: OperatorSpec, search_mode: Optional[str] = None) -> SpecReport:
    """Check the hypotheses and bound the norms of all cumulative projections.

    K is the maximum certified upper bound, so it is a valid uniform bound;
    K_lower is the best lower estimate of the true maximum.  With
    ``search_mode`` set, small sigma also get a budgeted search value.
    """
    spec.check_structure()
    rows = []
    K, K_lower, K_search = 0.0, 0.0, None
    for n, row in enumerate(spec.lambdas):
        for M in range(1, len(row) + 1):
            b = cumulative_projection(spec, n, M).norm(search_mode)
            rows.append((n, M, b.lower, b.upper))
            K = max(K, b.upper)
            K_lower = max(K_lower, b.lower)
            if b.search is not None:
                K_search = max(K_search or 0.0, b.search.lower)
    if not rows:
        # no eigenvalues: only the identity, norm 1
        K = K_lower = 1.0
    return SpecReport(K, K_lower, K_search, K == K_lower, rows)


# ---------------------------------------------------------------------------
# functional calculus


def psi(spec: OperatorSpec, f: FiniteFunction) -> Multiplier:
    """f(0) I + sum over (n, m) of (f(lambda_{n,m}) - f(0)) E_{n,m}, summed term by term."""
    sigma = spec.sigma
    if f.domain != sigma:
        raise ValueError("f must be defined on the spectrum of the spec")
    f0 = f(ZERO)
    total = Multiplier.identity(sigma).scale(f0)
    for n, m in spec.indices():
        total = total + point_projection(spec, n, m).scale(f(spec.eigenvalue(n, m)) - f0)
    return total


def lam(spec: OperatorSpec) -> FiniteFunction:
    return FiniteFunction.identity(spec.sigma)


def random_function(sigma: SigmaSet, rng: random.Random, denom: int = 8, span: int = 8) -> FiniteFunction:
    return FiniteFunction.from_callable(
        sigma,
        lambda p: ExactComplex(Fraction(rng.randint(-span, span), denom), Fraction(rng.randint(-span, span), denom)),
    )


@dataclass
class CalculusCheck:
    psi_upper: float
    f_lower: float
    f_spoke: float
    K: float
    N: int
    homomorphism: bool
    reproduces: bool

    @property
    def bv_ok(self) -> bool:
        return self.psi_upper <= (2 * self.N + 1) * self.K * self.f_lower + 1e-9

    @property
    def spoke_ok(self) -> bool:
        return self.psi_upper <= self.K * self.f_spoke + 1e-9


def calculus_check(spec: OperatorSpec, f: FiniteFunction, g: FiniteFunction, K: float) -> CalculusCheck:
    """The norm estimates for Psi(f) and the exact identity Psi(fg) = Psi(f) Psi(g)."""
    pf = psi(spec, f)
    bounds = pf.norm()
    fb = bounds if pf.g == f else norm_bounds(f)
    hom = psi(spec, f * g).g == pf.compose(psi(spec, g)).g
    spokes = detect_spokes(spec.sigma)
    return CalculusCheck(bounds.upper, fb.lower, spoke_norm(f, spokes), K, spec.N, hom, pf.g == f)


# ---------------------------------------------------------------------------
# partial sums


ORDERINGS = ("succ", "modulus", "perm")


def order_indices(spec: OperatorSpec, ordering: str = "succ", permutation: Optional[Sequence[int]] = None):
    """Index list for a summation order.

    ``modulus`` sorts by decreasing modulus with ties broken by (n, m);
    ``perm`` applies ``permutation`` to the succ order.
    """
    if ordering == "succ":
        return [(k.n, k.m) for k in succ_sort(spec.index_keys())]
    if ordering == "modulus":
        return sorted(spec.indices(), key=lambda nm: (-spec.eigenvalue(*nm).abs2(), nm))
    if ordering == "perm":
        base = order_indices(spec, "succ")
        if permutation is None or sorted(permutation) != list(range(len(base))):
            raise ValueError("perm ordering needs a permutation of range(len(indices))")
        return [base[i] for i in permutation]
    raise ValueError(f"unknown ordering {ordering!r}")


def _ray_line_upper(spec: OperatorSpec, coeffs: dict, on_one_line: Optional[bool] = None) -> float:
    """Certified upper bound on ||sum c_{n,m} E_{n,m}||.

    Triangle inequality over rays; each ray component is bounded by the
    real-slice estimate 3 max|c| + (variation along its line).  When sigma is
    collinear the exact one-dimensional norm is used instead.
    """
    sigma = spec.sigma
    if on_one_line is None:
        on_one_line = collinear(sigma.points)
    if on_one_line:
        vals = {spec.eigenvalue(*nm): c for nm, c in coeffs.items()}
        g = FiniteFunction.from_callable(sigma, lambda p: vals.get(p, ZERO))
        return one_d_bv_norm(g)
    total = 0.0
    for n, row in enumerate(spec.lambdas):
        seq = [coeffs.get((n, m), ZERO) for m in range(len(row))]
        if all(c.is_zero() for c in seq):
            continue
        # along the line: origin, then the ray by increasing radius
        along = [ZERO] + seq[::-1]
        var = sum(abs(b - a) for a, b in zip(along[:-1], along[1:]))
        total += 3 * max(abs(c) for c in seq) + var
    return total


@dataclass
class TraceStep:
    position: int
    index: tuple
    eigenvalue: ExactComplex
    coefficient: ExactComplex
    increment_lower: float
    increment_upper: float


@dataclass
class GapRow:
    start: int
    stop: int  # window covers positions start .. stop - 1
    delta_upper: float
    bracket: float
    eps: float
    K: float

    @property
    def k_bracket(self) -> float:
        return self.K * self.bracket

    @property
    def eps_bound(self) -> float:
        return self.K * self.eps

    @property
    def ok(self) -> bool:
        tol = 1e-9 * (1 + self.eps_bound)
        return self.delta_upper <= self.k_bracket + tol and self.bracket <= self.eps + tol


@dataclass
class SumTrace:
    ordering: str
    order: list
    steps: list
    partial_sums: list  # Multiplier after each step (after the constant term)
    K: float
    gaps: list = field(default_factory=list)

    @property
    def final(self) -> Multiplier:
        return self.partial_sums[-1]

    @property
    def respects_bounds(self) -> bool:
        return all(r.ok for r in self.gaps)


def tail_eps(spec: OperatorSpec, coeffs: dict, order: list, start: int) -> float:
    """Smallest eps for which both tail estimates hold from position ``start``.

    eps/4N bounds every tail coefficient; eps/2N bounds, on every ray, the
    variation of the coefficients from the first tail index onwards.
    """
    N = spec.N
    tail = order[start:]
    if not tail:
        return 0.0
    e1 = 4 * N * max(abs(coeffs[nm]) for nm in tail)
    e2 = 0.0
    for n, row in enumerate(spec.lambdas):
        ms = [m for (k, m) in tail if k == n]
        if not ms:
            continue
        m0 = min(ms)
        seq = [coeffs[(n, m)] for m in range(m0, len(row))]
        e2 = max(e2, 2 * N * sum(abs(b - a) for a, b in zip(seq[:-1], seq[1:])))
    return max(e1, e2)


def window_bracket(spec: OperatorSpec, coeffs: dict, window: list) -> float:
    """Sum over rays of |c_s| + |c_t| + sum |c_m - c_{m+1}| on the window."""
    total = 0.0
    for n in range(spec.N):
        ms = sorted(m for (k, m) in window if k == n)
        if not ms:
            continue
        s, t = ms[0], ms[-1]
        seq = [coeffs[(n, m)] for m in range(s, t + 1)]
        total += abs(seq[0]) + abs(seq[-1]) + sum(abs(b - a) for a, b in zip(seq[:-1], seq[1:]))
    return total


def partial_sum_trace(
    spec: OperatorSpec,
    ordering: str = "succ",
    f: Optional[FiniteFunction] = None,
    permutation: Optional[Sequence[int]] = None,
    K: Optional[float] = None,
    gaps: bool = True,
    increment_norms: bool = True,
) -> SumTrace:
    """Partial sums of Psi(f) (default f = identity) in the given order.

    For the succ order, every window [start, stop) is checked against the
    increment bound (K times the bracket) and against K eps with eps from
    the tail estimates.  In succ order each window from ``start`` covers
    exactly the indices between the two cut points, so the bracket is taken
    per ray over contiguous index runs.
    """
    spec.check_structure()
    sigma = spec.sigma
    f = lam(spec) if f is None else f
    f0 = f(ZERO)
    K = validate_spec(spec).K if K is None else K
    order = order_indices(spec, ordering, permutation)
    coeffs = {nm: f(spec.eigenvalue(*nm)) - f0 for nm in spec.indices()}
    point_bounds = {}
    steps, sums = [], []
    total = Multiplier.identity(sigma).scale(f0)
    for pos, nm in enumerate(order):
        z = spec.eigenvalue(*nm)
        c = coeffs[nm]
        lo = hi = 0.0
        if increment_norms and not c.is_zero():
            if z not in point_bounds:
                point_bounds[z] = point_projection(spec, *nm).norm()
            b = point_bounds[z]
            lo, hi = abs(c) * b.lower, abs(c) * b.upper
        steps.append(TraceStep(pos, nm, z, c, lo, hi))
        total = total + point_projection(spec, *nm).scale(c)
        sums.append(total)
    trace = SumTrace(ordering, order, steps, sums, K)
    if gaps and ordering == "succ":
        P = len(order)
        flat = collinear(sigma.points)
        for start in range(P):
            eps = tail_eps(spec, coeffs, order, start)
            for stop in range(start + 1, P + 1):
                window = order[start:stop]
                delta = _ray_line_upper(spec, {nm: coeffs[nm] for nm in window}, flat)
                trace.gaps.append(GapRow(start, stop, delta, window_bracket(spec, coeffs, window), eps, K))
    return trace


# ---------------------------------------------------------------------------
# increasing projection families


@dataclass
class FamilyBound:
    lhs: float
    rhs: float
    K: float
    exact: bool

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs + 1e-9 * (1 + self.rhs)


def bv0_bound_check(
    family: Sequence[FiniteFunction],
    mu: Sequence,
    n: int,
    m: int,
    mode: str = "branch-bound",
    list_budget: Optional[int] = None,
) -> FamilyBound:
    """||sum_{j=n}^m mu_j (Q_j - Q_{j-1})|| against K (|mu_n| + |mu_m| + sum |mu_j - mu_{j+1}|).

    ``family[j]`` is the indicator Q_j (j = 0..), ``mu[j]`` its coefficient
    (mu[0] unused).  Every norm is a budgeted search value at the same
    budget, and K is the largest of them over the family.
    """
    if not 1 <= n <= m < len(family):
        raise ValueError("need 1 <= n <= m < len(family)")
    for j, q in enumerate(family):
        vals = set(q.values())
        if not vals <= {ZERO, ONE}:
            raise ValueError(f"Q_{j} is not an indicator")
        if j and any(family[j - 1](p) == ONE and q(p) != ONE for p in q.domain):
            raise ValueError(f"family is not increasing at j = {j}")
    mu = [as_exact(c) for c in mu]
    norms = [bv_norm(q, mode=mode, list_budget=list_budget) for q in family]
    K = max(r.lower for r in norms)
    total = family[0] * ZERO
    for j in range(n, m + 1):
        total = total + (family[j] - family[j - 1]) * mu[j]
    res = bv_norm(total, mode=mode, list_budget=list_budget)
    bracket = abs(mu[n]) + abs(mu[m]) + sum(abs(mu[j] - mu[j + 1]) for j in range(n, m))
    return FamilyBound(res.lower, K * bracket, K, res.exact and all(r.exact for r in norms))


def multiplier_soundness(
    g: FiniteFunction, rng: random.Random, trials: int = 20, mode: str = "branch-bound", list_budget=None
) -> tuple[float, float, float]:
    """(best ratio ||g f|| / ||f|| over random f, ratio at f = 1, ||g||)."""
    gn = bv_norm(g, mode=mode, list_budget=list_budget).lower
    one = FiniteFunction.constant(g.domain, ONE)
    at_one = bv_norm(g * one, mode=mode, list_budget=list_budget).lower
    best = at_one
    for _ in range(trials):
        f = random_function(g.domain, rng)
        fn = bv_norm(f, mode=mode, list_budget=list_budget).lower
        if fn == 0:
            continue
        best = max(best, bv_norm(g * f, mode=mode, list_budget=list_budget).lower / fn)
    return best, at_one, gn


# ---------------------------------------------------------------------------
# real and imaginary parts


def real_test_family(values: Sequence[Fraction], rng: random.Random, steps: int = 4) -> list[tuple[str, Callable]]:
    """Test functions on the real line: half-line indicators at every value,
    the identity, a constant, |t|, and seeded random step functions."""
    fam: list[tuple[str, Callable]] = [
        ("identity", lambda t: t),
        ("constant", lambda t: Fraction(1)),
        ("abs", lambda t: abs(t)),
    ]
    for c in sorted(set(values)):
        fam.append((f"ge[{c}]", lambda t, c=c: Fraction(1) if t >= c else Fraction(0)))
        fam.append((f"le[{c}]", lambda t, c=c: Fraction(1) if t <= c else Fraction(0)))
    vs = sorted(set(values))
    for k in range(steps):
        cuts = sorted(rng.sample(vs, min(len(vs), 3)))
        heights = [Fraction(rng.randint(-4, 4), 2) for _ in range(len(cuts) + 1)]

        def step(t, cuts=cuts, heights=heights):
            return heights[sum(1 for c in cuts if t >= c)]

        fam.append((f"step{k}", step))
    return fam


def calculus_constant(c: FiniteFunction, family) -> tuple[float, str]:
    """max over the family of ||h o c||_BV(sigma) (upper) / ||h||_BV(c(sigma)).

    ``c`` must be real-valued.  The denominator is the one-dimensional norm
    of h on the finite set of values of c.
    """
    vals = [v.x for v in c.values()]
    if any(v.y != 0 for v in c.values()):
        raise ValueError("calculus_constant needs a real-valued multiplier")
    line = SigmaSet([ExactComplex(v, 0) for v in set(vals)])
    best, arg = 0.0, ""
    for name, h in family:
        hc = c.map(lambda z: ExactComplex(h(z.x), 0))
        hl = FiniteFunction.from_callable(line, lambda z: ExactComplex(h(z.x), 0))
        den = one_d_bv_norm(hl)
        if den == 0:
            continue
        r = norm_bounds(hc).upper / den
        if r > best:
            best, arg = r, name
    return best, arg


@dataclass
class SplitReport:
    omega: ExactComplex
    A: Multiplier
    B: Multiplier
    U: Multiplier  # Re(omega T)
    V: Multiplier  # Im(omega T)
    identity_re: bool
    identity_im: bool
    constants: dict

    @property
    def identities_hold(self) -> bool:
        return self.identity_re and self.identity_im


def split_and_omega(spec: OperatorSpec, omega, seed: int = 0, constants: bool = True) -> SplitReport:
    """Real/imaginary splitting of omega T and the functional-calculus
    constants of alpha A - beta B, alpha B + beta A and A + B."""
    omega = as_exact(omega)
    alpha, beta = omega.x, omega.y
    sigma = spec.sigma
    x = FiniteFunction.real_part(sigma)
    y = FiniteFunction.imag_part(sigma)
    A, B = psi(spec, x), psi(spec, y)
    wl = lam(spec) * omega
    U = Multiplier(wl.map(lambda z: ExactComplex(z.x, 0)))
    V = Multiplier(wl.map(lambda z: ExactComplex(z.y, 0)))
    re_ok = U.g == (A.scale(alpha) - B.scale(beta)).g
    im_ok = V.g == (B.scale(alpha) + A.scale(beta)).g
    consts = {}
    if constants:
        for name, op in (("aA-bB", A.scale(alpha) - B.scale(beta)),
                         ("aB+bA", B.scale(alpha) + A.scale(beta)),
                         ("A+B", A + B)):
            vals = [v.x for v in op.g.values()]
            fam = real_test_family(vals, random.Random(seed))
            consts[name] = calculus_constant(op.g, fam)
    return SplitReport(omega, A, B, U, V, re_ok, im_ok, consts)


@dataclass
class RearrangementReport:
    K: float
    worst_positive: tuple  # (norm upper, t)
    worst_negative: tuple
    same_sum: bool
    half_lines_ok: bool


def rearrangement_check(spec: OperatorSpec, permutation: Sequence[int], K: Optional[float] = None) -> RearrangementReport:
    """Half-line projection bounds for a real spectrum and equality of the
    permuted and modulus-ordered full sums."""
    spec.check_structure()
    sigma = spec.sigma
    if any(z.y != 0 for z in sigma):
        raise ValueError("rearrangement_check needs a real spectrum")
    K = validate_spec(spec).K if K is None else K
    cs = sorted({z.x for z in sigma if z.x != 0})
    worst_pos, worst_neg = (0.0, None), (0.0, None)
    ok = True
    for t in cs:
        if t > 0:
            sel = [z for z in sigma if z.x >= t]
        else:
            sel = [z for z in sigma if z.x <= t]
        b = Multiplier.projection(sigma, sel).norm().upper
        if b > K + 1e-9:
            ok = False
        if t > 0 and b > worst_pos[0]:
            worst_pos = (b, t)
        if t < 0 and b > worst_neg[0]:
            worst_neg = (b, t)
    perm_final = partial_sum_trace(spec, "perm", permutation=permutation, K=K, gaps=False, increment_norms=False).final
    mod_final = partial_sum_trace(spec, "modulus", K=K, gaps=False, increment_norms=False).final
    return RearrangementReport(K, worst_pos, worst_neg, perm_final.g == mod_final.g, ok)

