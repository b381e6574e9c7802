"""BV(sigma) norms of functions on finite sets.

``||f|| = max |f| + var(f, sigma)`` with ``var`` the supremum over vertex
lists S drawn from sigma of ``cvar(f, Pi(S)) / vf(Pi(S))``.  The supremum
is searched over words of bounded length (the *list budget*); results are
exact relative to that budget, and every reported value carries the word
that attains it.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from . import _kernels
from .exact import ONE, ZERO, ExactComplex, as_exact
from .geometry import (
    ExactPoint,
    LineSpec,
    Polyline,
    SigmaSet,
    collinear,
    entry_components,
    side_table,
    sigma_hits,
    variation_factor,
)

MODES = ("exhaustive", "branch-bound", "heuristic")
_MODE_ALIASES = {"exact": "exhaustive", "bnb": "branch-bound"}

DEFAULT_NODE_LIMIT = int(os.environ.get("ACSIGMA_NODE_LIMIT", 200_000_000))
TIE_RTOL = 1e-11
# beyond this many points the line tables get too large; fall back to geometry
TABLE_POINT_LIMIT = 14


class DomainError(ValueError):
    """A point is used that is not in the function's domain."""


class PreconditionError(ValueError):
    pass


class ResourceLimitError(RuntimeError):
    """The requested search would exceed the configured node limit."""


class FiniteFunction:
    """A complex-valued function on a finite SigmaSet, with exact values."""

    def __init__(self, domain: SigmaSet, values: Mapping):
        if not isinstance(domain, SigmaSet):
            domain = SigmaSet(domain)
        vals = {as_exact(p): as_exact(v) for p, v in values.items()}
        if len(vals) != len(domain) or any(p not in vals for p in domain.points):
            missing = set(domain.points) - set(vals)
            extra = set(vals) - set(domain.points)
            raise DomainError(f"values must cover the domain exactly (missing {missing}, extra {extra})")
        self.domain = domain
        self._values = vals

    @classmethod
    def from_callable(cls, domain, fn: Callable[[ExactPoint], object]) -> "FiniteFunction":
        domain = domain if isinstance(domain, SigmaSet) else SigmaSet(domain)
        return cls(domain, {p: fn(p) for p in domain})

    @classmethod
    def constant(cls, domain, c=ONE) -> "FiniteFunction":
        c = as_exact(c)
        return cls.from_callable(domain, lambda p: c)

    @classmethod
    def indicator(cls, domain, subset: Iterable) -> "FiniteFunction":
        sub = {as_exact(p) for p in subset}
        return cls.from_callable(domain, lambda p: ONE if p in sub else ZERO)

    @classmethod
    def identity(cls, domain) -> "FiniteFunction":
        return cls.from_callable(domain, lambda p: p)

    @classmethod
    def real_part(cls, domain) -> "FiniteFunction":
        return cls.from_callable(domain, lambda p: ExactComplex(p.x, 0))

    @classmethod
    def imag_part(cls, domain) -> "FiniteFunction":
        return cls.from_callable(domain, lambda p: ExactComplex(p.y, 0))

    def __call__(self, p) -> ExactComplex:
        try:
            return self._values[as_exact(p)]
        except KeyError:
            raise DomainError(f"{p!r} is not in the domain") from None

    def items(self):
        return ((p, self._values[p]) for p in self.domain.points)

    def values(self) -> list[ExactComplex]:
        return [self._values[p] for p in self.domain.points]

    def _binary(self, other, op):
        if isinstance(other, FiniteFunction):
            if other.domain != self.domain:
                raise DomainError("functions live on different domains")
            return FiniteFunction(self.domain, {p: op(v, other._values[p]) for p, v in self._values.items()})
        c = as_exact(other)
        return FiniteFunction(self.domain, {p: op(v, c) for p, v in self._values.items()})

    def __add__(self, other):
        return self._binary(other, lambda u, v: u + v)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda u, v: u - v)

    def __rsub__(self, other):
        return self._binary(other, lambda u, v: v - u)

    def __mul__(self, other):
        return self._binary(other, lambda u, v: u * v)

    __rmul__ = __mul__

    def __neg__(self):
        return self * ExactComplex(-1, 0)

    def __eq__(self, other):
        return isinstance(other, FiniteFunction) and self.domain == other.domain and self._values == other._values

    def __hash__(self):
        return hash((self.domain, tuple(self.values())))

    def __repr__(self):
        return f"FiniteFunction({dict(self.items())!r})"

    def map(self, fn) -> "FiniteFunction":
        return FiniteFunction(self.domain, {p: as_exact(fn(v)) for p, v in self._values.items()})

    def restrict(self, sub) -> "FiniteFunction":
        sub = sub if isinstance(sub, SigmaSet) else SigmaSet(sub)
        return FiniteFunction(sub, {p: self(p) for p in sub})

    def extend(self, domain: SigmaSet, fill=ZERO) -> "FiniteFunction":
        fill = as_exact(fill)
        return FiniteFunction(domain, {p: self._values.get(p, fill) for p in domain})

    def sup_norm(self) -> float:
        return max((abs(v) for v in self._values.values()), default=0.0)

    def support(self) -> list[ExactPoint]:
        return [p for p, v in self.items() if not v.is_zero()]

    def is_constant(self) -> bool:
        return len(set(self._values.values())) <= 1


@dataclass(frozen=True)
class NormCertificate:
    """A vertex list and the quantities it witnesses."""

    vertex_list: tuple
    cvar_value: float
    vf: int
    witness_line: Optional[LineSpec]
    product: float

    def verify(self, f: FiniteFunction) -> bool:
        """Recompute cvar, vf and the product from the vertex list alone, and
        check that the witness line (if any) attains vf."""
        if len(self.vertex_list) < 2:
            return self.cvar_value == 0.0 and self.product == 0.0
        poly = Polyline(self.vertex_list)
        got_cvar = cvar(f, poly)
        got_vf = variation_factor(poly).vf
        same_cvar = got_cvar == self.cvar_value or math.isclose(got_cvar, self.cvar_value, rel_tol=4e-16, abs_tol=0)
        same_product = math.isclose(self.product, self.cvar_value / max(self.vf, 1), rel_tol=4e-16, abs_tol=0)
        line_ok = self.witness_line is None or entry_components(poly, self.witness_line) == got_vf
        return same_cvar and got_vf == self.vf and same_product and line_ok

    def to_json(self) -> dict:
        return {
            "vertex_list": [p.to_json() for p in self.vertex_list],
            "cvar": self.cvar_value,
            "vf": self.vf,
            "rho": f"1/{self.vf}",
            "witness_line": self.witness_line.to_json() if self.witness_line else None,
            "product": self.product,
        }


@dataclass
class NormResult:
    lower: float
    upper: Optional[float]
    exact: bool
    certificate: NormCertificate
    mode: str
    list_budget: int
    nodes: int = 0
    value_by_length: tuple = field(default=())

    @property
    def value(self) -> float:
        return self.lower

    def to_json(self) -> dict:
        out = {
            "lower": self.lower,
            "upper": self.upper if self.upper is not None else "unknown",
            "exact": self.exact,
            "mode": self.mode,
            "list_budget": self.list_budget,
            "nodes": self.nodes,
            "certificate": self.certificate.to_json(),
        }
        if self.value_by_length:
            out["value_by_length"] = list(self.value_by_length)
        return out


def _segment_transitions(values: Sequence[ExactComplex]) -> float:
    total = 0.0
    for u, v in zip(values[:-1], values[1:]):
        total += abs(v - u)
    return total


def cvar(f: FiniteFunction, poly: Polyline) -> float:
    """Variation of f along the sigma-points met by the path, in order.

    Summed segment by segment (the same association the search kernel
    uses, so certificates replay bit-for-bit).
    """
    for v in poly.vertices:
        if v not in f.domain:
            raise DomainError(f"vertex {v!r} is not in the domain")
    if len(poly) == 1:
        return 0.0
    total = 0.0
    last = None
    for a, b in poly.segments():
        hits = sigma_hits(Polyline([a, b]), f.domain)
        if last is not None and hits and hits[0] != last:
            total += abs(f(hits[0]) - f(last))
        total += _segment_transitions([f(p) for p in hits])
        if hits:
            last = hits[-1]
    return total


def var_lower(f: FiniteFunction, points: Sequence) -> NormCertificate:
    """The term of the variation supremum contributed by one vertex list."""
    pts = [as_exact(p) for p in points]
    for p in pts:
        if p not in f.domain:
            raise DomainError(f"{p!r} is not in the domain")
    poly_pts = []
    for p in pts:
        if not poly_pts or poly_pts[-1] != p:
            poly_pts.append(p)
    if len(poly_pts) < 2:
        return NormCertificate(tuple(poly_pts), 0.0, 1, None, 0.0)
    poly = Polyline(poly_pts)
    vfr = variation_factor(poly)
    c = cvar(f, poly)
    return NormCertificate(tuple(poly_pts), c, vfr.vf, vfr.witness_line, c / vfr.vf)


# ---------------------------------------------------------------------------
# search tables


@dataclass
class SearchTables:
    sigma: SigmaSet
    lines: list
    init: np.ndarray  # [n, lines] 1 where the point lies on the line
    inc: np.ndarray  # [n, n, lines] entry increment of segment a -> b
    hits: dict  # (a, b) -> tuple of point indices met by segment a -> b

    def weights(self, f: FiniteFunction) -> np.ndarray:
        vals = [f(p) for p in self.sigma.points]
        n = len(vals)
        diff = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                diff[i, j] = diff[j, i] = abs(vals[j] - vals[i])
        W = np.zeros((n, n))
        for (a, b), h in self.hits.items():
            total = 0.0
            for u, v in zip(h[:-1], h[1:]):
                total += diff[u, v]
            W[a, b] = total
        return W


@lru_cache(maxsize=64)
def search_tables(sigma: SigmaSet) -> SearchTables:
    pts = sigma.points
    n = len(pts)
    lines, signs = side_table(pts)
    S = np.array(signs, dtype=np.int64).reshape(len(lines), n)
    init = (S.T == 0).astype(np.int64)
    sa = S.T[:, None, :]
    sb = S.T[None, :, :]
    inc = (((sa != 0) & (sb == 0)) | (sa * sb < 0)).astype(np.int64)
    hits = {}
    for a in range(n):
        for b in range(n):
            if a != b:
                hs = sigma_hits(Polyline([pts[a], pts[b]]), sigma)
                hits[(a, b)] = tuple(sigma.index(p) for p in hs)
    return SearchTables(sigma, lines, np.ascontiguousarray(init), np.ascontiguousarray(inc), hits)


def word_count(n: int, lmax: int) -> int:
    """Number of words over n letters, adjacent letters distinct, length 1..lmax."""
    if n == 0:
        return 0
    return sum(n * (n - 1) ** (k - 1) for k in range(1, lmax + 1))


def default_budget(n: int, node_limit: int = DEFAULT_NODE_LIMIT) -> int:
    """2|sigma|, reduced until full enumeration fits the node limit."""
    lmax = max(2, 2 * n)
    while lmax > 2 and word_count(n, lmax) > node_limit:
        lmax -= 1
    return lmax


def _normalize_mode(mode: str) -> str:
    mode = _MODE_ALIASES.get(mode, mode)
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return mode


def _certificate_from_word(f, tables: SearchTables, word, cv, vf, line_idx) -> NormCertificate:
    pts = tuple(tables.sigma.points[i] for i in word)
    line = tables.lines[line_idx] if line_idx >= 0 else None
    if len(pts) < 2:
        return NormCertificate(pts, 0.0, max(vf, 1), line, 0.0)
    return NormCertificate(pts, cv, vf, line, cv / vf)


def tie_tolerance(W: np.ndarray, lmax: int) -> float:
    """Values closer than this are treated as ties by the search."""
    return TIE_RTOL * (1.0 + float(np.abs(W).max(initial=0.0)) * lmax)


def _mixed_weights(f: FiniteFunction, tables: SearchTables):
    """On a collinear domain, weight each separator of consecutive points by
    its share of the variation along the line; None elsewhere."""
    pts = tables.sigma.points
    n = len(pts)
    if n < 3 or not collinear(pts):
        return None
    # lexicographic order is monotone along any line
    steps = [abs(f(pts[k + 1]) - f(pts[k])) for k in range(n - 1)]
    total = sum(steps)
    if total == 0:
        return None
    signs = np.array(side_table(pts)[1], dtype=np.int64).reshape(len(tables.lines), n)
    lam = np.zeros(len(tables.lines))
    for k in range(n - 1):
        want = np.array([-1] * (k + 1) + [1] * (n - k - 1))
        hit = np.flatnonzero((signs == want).all(axis=1) | (signs == -want).all(axis=1))
        if len(hit) == 0:
            return None
        lam[hit[0]] += steps[k] / total
    initm = tables.init @ lam
    incm = np.tensordot(tables.inc, lam, axes=([2], [0]))
    return np.ascontiguousarray(initm), np.ascontiguousarray(incm), total


def _run_partitions(W, tables, lmax, bnb, node_limit, floor, threads, eta, mixed=None):
    n = W.shape[0]
    threads = max(1, min(threads, n))
    if threads == 1:
        parts = [(0, n)]
    else:
        bounds = np.linspace(0, n, threads + 1).astype(int)
        parts = [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]

    n_pts = W.shape[0]
    if mixed is None:
        initm, incm, use = np.zeros(n_pts), np.zeros((n_pts, n_pts)), False
    else:
        initm, incm, use = mixed[0], mixed[1], True

    def run(part):
        lo, hi = part
        return _kernels.word_search(W, tables.init, tables.inc, lmax, lo, hi, bnb, node_limit,
                                    floor, eta, initm, incm, use)

    if len(parts) == 1:
        results = [run(parts[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(parts)) as pool:
            results = list(pool.map(run, parts))
    # partitions are in first-letter order; the kernel's tie rule keeps the first
    best = None
    by_len = np.full(lmax + 1, -1.0)
    nodes = 0
    for res in results:
        val, word, wlen, vf, line, cv, bl, nn, status = res
        nodes += nn
        if status != _kernels.STATUS_OK:
            raise ResourceLimitError(f"search exceeded the node limit of {node_limit} (list budget {lmax})")
        by_len = np.maximum(by_len, bl)
        if best is None or val > best[0] + eta:
            best = (val, tuple(int(i) for i in word[:wlen]), vf, line, cv)
    return best, by_len, nodes


def var_search(
    f: FiniteFunction,
    mode: str = "exhaustive",
    list_budget: Optional[int] = None,
    node_limit: Optional[int] = None,
    threads: int = 1,
    seed: int = 0,
) -> NormResult:
    """Search the variation supremum over words of length <= list_budget.

    Values within ``tie_tolerance`` of each other are ties; the
    lexicographically first word among them is reported.
    """
    mode = _normalize_mode(mode)
    node_limit = DEFAULT_NODE_LIMIT if node_limit is None else node_limit
    sigma = f.domain
    n = len(sigma)
    lmax = default_budget(n, node_limit) if list_budget is None else list_budget
    if lmax < 2:
        raise PreconditionError("list budget must be at least 2")
    if n <= 1 or f.is_constant():
        pts = sigma.points[:1]
        line = LineSpec.through((0, 1), pts[0]) if pts else None
        cert = NormCertificate(tuple(pts), 0.0, 1, line, 0.0)
        return NormResult(0.0, 0.0, True, cert, mode, lmax)

    if mode == "heuristic":
        return _heuristic(f, lmax, seed)

    if mode == "exhaustive" and word_count(n, lmax) > node_limit:
        raise ResourceLimitError(
            f"exhaustive enumeration of {word_count(n, lmax)} words exceeds the node limit {node_limit}"
        )
    if n > TABLE_POINT_LIMIT:
        raise ResourceLimitError(f"|sigma| = {n} is too large for exact search (limit {TABLE_POINT_LIMIT})")
    tables = search_tables(sigma)
    W = tables.weights(f)
    bnb = mode == "branch-bound"
    eta = tie_tolerance(W, lmax)
    floor = 0.0
    mixed = None
    if bnb:
        h = _heuristic(f, lmax, seed, tables=tables, W=W)
        floor = max(0.0, h.lower - 2 * eta)
        mixed = _mixed_weights(f, tables)
    best, by_len, nodes = _run_partitions(W, tables, lmax, bnb, node_limit, floor, threads, eta, mixed)
    val, word, vf, line, cv = best
    cert = _certificate_from_word(f, tables, word, cv, vf, line)
    cumulative = ()
    if mode == "exhaustive":
        cumulative = tuple(float(v) for v in np.maximum.accumulate(by_len[1:]))
    return NormResult(float(val), float(val), True, cert, mode, lmax, nodes, cumulative)


def bv_norm(
    f: FiniteFunction,
    mode: str = "exhaustive",
    list_budget: Optional[int] = None,
    node_limit: Optional[int] = None,
    threads: int = 1,
    seed: int = 0,
) -> NormResult:
    """``max |f| + var(f, sigma)`` with the same exactness semantics as var_search."""
    res = var_search(f, mode, list_budget, node_limit, threads, seed)
    s = f.sup_norm()
    upper = None if res.upper is None else s + res.upper
    by_len = tuple(s + v for v in res.value_by_length)
    return NormResult(s + res.lower, upper, res.exact, res.certificate, res.mode, res.list_budget, res.nodes, by_len)


def one_d_bv_norm(f: FiniteFunction) -> float:
    """Norm on a collinear domain: max |f| plus the variation along the line."""
    pts = f.domain.points
    if not collinear(pts):
        raise PreconditionError("one_d_bv_norm needs a collinear domain")
    if len(pts) <= 1:
        return f.sup_norm()
    # sigma is sorted by (x, y); along any line that is a monotone order
    vals = [f(p) for p in pts]
    return f.sup_norm() + _segment_transitions(vals)


# ---------------------------------------------------------------------------
# heuristic search


class _Evaluator:
    """Value of a word; uses the compiled tables when sigma is small enough."""

    def __init__(self, f, tables=None, W=None):
        self.f = f
        self.tables = tables
        self.W = W
        self.cache = {}

    def __call__(self, word: tuple) -> float:
        if len(word) < 2:
            return 0.0
        got = self.cache.get(word)
        if got is not None:
            return got
        if self.tables is not None:
            cv, vf, _ = _kernels.word_value(self.W, self.tables.init, self.tables.inc, np.array(word, dtype=np.int64))
            val = cv / vf
        else:
            pts = [self.f.domain.points[i] for i in word]
            val = var_lower(self.f, pts).product
        self.cache[word] = val
        return val


def _neighbours(word, n, lmax):
    L = len(word)
    for i in range(L):
        for c in range(n):
            if c == word[i]:
                continue
            w = word[:i] + (c,) + word[i + 1:]
            if _valid(w):
                yield w
    if L < lmax:
        for i in range(L + 1):
            for c in range(n):
                w = word[:i] + (c,) + word[i:]
                if _valid(w):
                    yield w
    if L > 2:
        for i in range(L):
            w = word[:i] + word[i + 1:]
            if _valid(w):
                yield w
    for i in range(L):
        for j in range(i + 1, L):
            w = list(word)
            w[i], w[j] = w[j], w[i]
            w = tuple(w)
            if _valid(w):
                yield w


def _valid(word) -> bool:
    return all(a != b for a, b in zip(word[:-1], word[1:]))


def _heuristic(f: FiniteFunction, lmax: int, seed: int = 0, tables=None, W=None) -> NormResult:
    n = len(f.domain)
    if tables is None and n <= TABLE_POINT_LIMIT:
        tables = search_tables(f.domain)
        W = tables.weights(f)
    ev = _Evaluator(f, tables, W)
    rng = np.random.default_rng(seed)

    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    if W is not None:
        pairs.sort(key=lambda ab: (-W[ab], ab))
    else:
        vals = f.values()
        pairs.sort(key=lambda ab: (-abs(vals[ab[0]] - vals[ab[1]]), ab))
    starts = pairs[: min(len(pairs), 4)]
    if len(pairs) > 4:
        extra = rng.choice(len(pairs) - 4, size=min(4, len(pairs) - 4), replace=False)
        starts += [pairs[4 + int(k)] for k in sorted(extra)]

    best_word, best_val = (0,), 0.0
    for start in starts:
        word = tuple(start)
        # greedy extension at either end
        while len(word) < lmax:
            cands = [word + (c,) for c in range(n) if c != word[-1]]
            cands += [(c,) + word for c in range(n) if c != word[0]]
            nxt = max(cands, key=lambda w: (ev(w), tuple(-x for x in w)))
            if ev(nxt) <= ev(word):
                break
            word = nxt
        # first-improvement local search
        improved = True
        while improved:
            improved = False
            cur = ev(word)
            for w in _neighbours(word, n, lmax):
                if ev(w) > cur:
                    word, improved = w, True
                    break
        val = ev(word)
        if val > best_val or (val == best_val and word < best_word):
            best_word, best_val = word, val

    pts = tuple(f.domain.points[i] for i in best_word)
    if tables is not None and len(best_word) >= 2:
        cv, vf, li = _kernels.word_value(W, tables.init, tables.inc, np.array(best_word, dtype=np.int64))
        cert = _certificate_from_word(f, tables, best_word, cv, vf, li)
    else:
        cert = var_lower(f, pts)
    return NormResult(cert.product, None, False, cert, "heuristic", lmax)
