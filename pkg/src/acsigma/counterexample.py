"""Arc spectra on which the modulus-ordered eigenvalue sum fails to converge.

Level k holds k + 1 points ``lambda_{k,j} = exp(i j theta / k) / k`` on the
circle of radius 1/k (tan theta = 1/6) and the chord midpoints ``mu_{k,j}``
between consecutive ones.  Summed by modulus, the block of level-k
eigenvalues has norm at least 1/2 for every k.

Coordinates are rationalized: lambda_{k,0} = 1/k and lambda_{k,k} on the ray
through 6 + i are kept exactly on their rays, the rest are rounded to a
dyadic grid, and midpoints are exact.  Every structural fact the argument
needs is re-checked after rounding; on failure the precision is doubled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath

from .bvnorm import FiniteFunction, var_lower
from .exact import ZERO, ExactComplex
from .geometry import Polyline, SigmaSet, sigma_hits, variation_factor
from .operators import OperatorSpec, partial_sum_trace, tail_eps, validate_spec
from .spoke import certified_bounds

ARC_DIRECTION = (6, 1)
MAX_PRECISION_BITS = 4096


class PrecisionError(RuntimeError):
    pass


@dataclass(frozen=True)
class Level:
    k: int
    lambdas: tuple
    mus: tuple

    @property
    def path(self) -> Polyline:
        return Polyline(self.lambdas)

    @property
    def points(self) -> tuple:
        return self.lambdas + self.mus


@dataclass
class Counterexample:
    levels: dict
    sigma: SigmaSet
    precision_bits: int
    checks: dict = field(default_factory=dict)

    @property
    def k_max(self) -> int:
        return max(self.levels)


def _dyadic(x, bits: int) -> Fraction:
    return Fraction(int(mpmath.nint(x * mpmath.mpf(2) ** bits)), 2**bits)


def _level(k: int, bits: int) -> Level:
    with mpmath.workprec(bits + 32):
        theta = mpmath.atan(mpmath.mpf(1) / 6)
        lams = [ExactComplex(Fraction(1, k), 0)]
        for j in range(1, k):
            z = mpmath.expjpi(j * theta / (k * mpmath.pi)) / k
            lams.append(ExactComplex(_dyadic(z.real, bits), _dyadic(z.imag, bits)))
        a, b = ARC_DIRECTION
        t = _dyadic(1 / (k * mpmath.sqrt(a * a + b * b)), bits)
        lams.append(ExactComplex(a * t, b * t))
    mus = tuple((lams[j] + lams[j - 1]) / 2 for j in range(1, k + 1))
    return Level(k, tuple(lams), mus)


def _failed_check(levels: dict, sigma: SigmaSet) -> Optional[str]:
    ks = sorted(levels)
    allpts = [p for k in ks for p in levels[k].points]
    if len(set(allpts)) != len(allpts) or ZERO in allpts:
        return "distinct points"
    for k in ks:
        lv = levels[k]
        if lv.lambdas[0] != ExactComplex(Fraction(1, k), 0):
            return f"lambda_{{{k},0}} = 1/k"
        if any(lv.mus[j - 1] * 2 != lv.lambdas[j] + lv.lambdas[j - 1] for j in range(1, k + 1)):
            return f"midpoint identity at level {k}"
        d2 = max(m.abs2() for m in lv.mus)
        if not d2 < min(z.abs2() for z in lv.lambdas):
            return f"d_k < min |lambda_k| at level {k}"
        bound2 = Fraction(1, 36 * k * k)
        if any((z - lv.lambdas[0]).abs2() > bound2 for z in lv.lambdas):
            return f"|lambda_{{k,j}} - lambda_{{k,0}}| <= 1/(6k) at level {k}"
        if k + 1 in levels:
            lo = min(p.abs2() for p in lv.points)
            hi = max(p.abs2() for p in levels[k + 1].points)
            if not hi < lo:
                return f"level separation between {k} and {k + 1}"
        if variation_factor(lv.path).vf != 2 and k >= 2:
            return f"vf(gamma_{k}) = 2"
        want = [lv.lambdas[0]]
        for j in range(1, k + 1):
            want += [lv.mus[j - 1], lv.lambdas[j]]
        if sigma_hits(lv.path, sigma) != want:
            return f"hit order along gamma_{k}"
    return None


def counterexample_build(k_max: int, precision_bits: int = 64, max_bits: int = MAX_PRECISION_BITS) -> Counterexample:
    """Levels 1..k_max plus the origin, with all structural checks passed."""
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    bits = precision_bits
    while True:
        levels = {k: _level(k, bits) for k in range(1, k_max + 1)}
        sigma = SigmaSet([ZERO] + [p for lv in levels.values() for p in lv.points])
        failed = _failed_check(levels, sigma)
        if failed is None:
            return Counterexample(levels, sigma, bits, {"passed": True})
        if bits * 2 > max_bits:
            raise PrecisionError(f"check '{failed}' still fails at {bits} bits (limit {max_bits})")
        bits *= 2


@dataclass
class GapResult:
    k: int
    vf: int
    chi_lower: float  # certified lower bound on ||chi_{Lambda_k}||
    small_upper: float  # upper bound on the norm of the non-constant part
    decomposition: float
    direct: float
    d_min: float
    d_max: float

    @property
    def gap(self) -> float:
        return max(self.direct, self.decomposition)

    def as_dict(self) -> dict:
        return {
            "k": self.k, "vf": self.vf, "chi_norm_lb": self.chi_lower, "small_ub": self.small_upper,
            "gap_decomp_lb": self.decomposition, "gap_direct_lb": self.direct, "gap_lb": self.gap,
            "d_min": self.d_min, "d_max": self.d_max,
        }


def counterexample_gap(ce: Counterexample, k: int) -> GapResult:
    """Lower bounds on the norm of the level-k eigenvalue block.

    The block is the difference of the modulus-ordered partial sums taken
    just after and just before the eigenvalues lambda_{k,.}.  Two routes:
    the path gamma_k applied directly to the block, and
    (1/k) ||chi_{Lambda_k}|| minus the norm of the remaining part.
    """
    lv = ce.levels[k]
    sigma = ce.sigma
    walk = list(lv.lambdas)
    chi = FiniteFunction.indicator(sigma, lv.lambdas)
    cert = var_lower(chi, walk)
    chi_lower = chi.sup_norm() + cert.product
    small = 0.0
    for z in lv.lambdas[1:]:
        unit = min(3.0, certified_bounds(FiniteFunction.indicator(sigma, [z]), search_mode=None).upper)
        small += abs(z - lv.lambdas[0]) * unit
    vals = {z: z for z in lv.lambdas}
    block = FiniteFunction.from_callable(sigma, lambda p: vals.get(p, ZERO))
    direct = block.sup_norm() + var_lower(block, walk).product
    decomposition = chi_lower / k - small
    ds = [abs(m) for m in lv.mus]
    return GapResult(k, cert.vf, chi_lower, small, decomposition, direct, min(ds), max(ds))


def companion_spec(ce: Counterexample, M: Optional[int] = None) -> OperatorSpec:
    """Two-ray spec: 1/m on the positive real axis and lambda_{m,m} on the arc ray."""
    M = ce.k_max if M is None else M
    return OperatorSpec(
        ((1, 0), ARC_DIRECTION),
        (tuple(ExactComplex(Fraction(1, m), 0) for m in range(1, M + 1)),
         tuple(ce.levels[m].lambdas[-1] for m in range(1, M + 1))),
    )


@dataclass
class TailRow:
    k: int
    eps: float
    tail_bound: float  # K * eps
    window_sup: float  # largest certified window norm starting at level k


def succ_tail_bounds(ce: Counterexample, M: Optional[int] = None) -> list[TailRow]:
    """K eps_k for the companion spec summed in succ order, where eps_k is
    the tail estimate from the first level-k index onwards."""
    spec = companion_spec(ce, M)
    K = validate_spec(spec).K
    trace = partial_sum_trace(spec, "succ", K=K, increment_norms=False)
    coeffs = {nm: spec.eigenvalue(*nm) for nm in spec.indices()}
    rows = []
    for k in range(1, len(spec.lambdas[0]) + 1):
        start = next(p for p, (n, m) in enumerate(trace.order) if m >= k - 1)
        eps = tail_eps(spec, coeffs, trace.order, start)
        wsup = max((g.delta_upper for g in trace.gaps if g.start >= start), default=0.0)
        rows.append(TailRow(k, eps, K * eps, wsup))
    return rows
