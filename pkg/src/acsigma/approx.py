"""Square cut-off functions and the approximants of x, y and the identity."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .bvnorm import FiniteFunction, bv_norm
from .exact import ExactComplex, to_fraction
from .geometry import SigmaSet
from .order import sup_level


@dataclass(frozen=True)
class CutoffSpec:
    r: Fraction
    eps: Fraction

    def __post_init__(self):
        object.__setattr__(self, "r", to_fraction(self.r))
        object.__setattr__(self, "eps", to_fraction(self.eps))
        if self.r <= 0 or self.eps <= 0:
            raise ValueError("r and eps must be positive")


def cutoff_value(spec: CutoffSpec, z) -> Fraction:
    level = sup_level(z)
    if level <= spec.r:
        return Fraction(0)
    if level <= spec.r + spec.eps:
        return (level - spec.r) / spec.eps
    return Fraction(1)


def cutoff_function(spec: CutoffSpec, sigma: SigmaSet) -> FiniteFunction:
    """0 inside the square of radius r, 1 outside radius r + eps, linear in |z|_inf between."""
    return FiniteFunction.from_callable(sigma, lambda z: ExactComplex(cutoff_value(spec, z), 0))


def x_tilde(sigma: SigmaSet, spec: CutoffSpec) -> FiniteFunction:
    """Re z where |Re z| <= r + eps, else 0."""
    cut = spec.r + spec.eps
    return FiniteFunction.from_callable(
        sigma, lambda z: ExactComplex(z.x, 0) if abs(z.x) <= cut else ExactComplex(0, 0))


@dataclass
class ApproxRow:
    n: int
    r: Fraction
    eps: Fraction
    err_x: float
    err_y: float
    err_lambda: float
    bound: float
    exact: bool
    g_norm: float

    @property
    def ok(self) -> bool:
        tol = 1e-9
        return self.err_x <= self.bound + tol and self.err_y <= self.bound + tol

    def as_dict(self) -> dict:
        return {
            "n": self.n, "r": float(self.r), "eps": float(self.eps),
            "err_x": self.err_x, "err_y": self.err_y, "err_lambda": self.err_lambda,
            "bound": self.bound, "g_norm": self.g_norm, "exact": self.exact, "ok": self.ok,
        }


def identity_approximants(
    sigma: SigmaSet,
    r_seq: Sequence,
    eps_seq: Sequence,
    mode: str = "branch-bound",
    list_budget: Optional[int] = None,
) -> list[ApproxRow]:
    """Errors of g_n x, g_n y and g_n lambda against x, y, lambda.

    Each row also carries the bound 30 (r_n + eps_n) and ||g_n||.
    """
    if len(r_seq) != len(eps_seq):
        raise ValueError("r_seq and eps_seq must have equal length")
    x = FiniteFunction.real_part(sigma)
    y = FiniteFunction.imag_part(sigma)
    lam = FiniteFunction.identity(sigma)
    rows = []
    for n, (r, eps) in enumerate(zip(r_seq, eps_seq), start=1):
        spec = CutoffSpec(r, eps)
        g = cutoff_function(spec, sigma)
        results = [bv_norm(g * h - h, mode=mode, list_budget=list_budget) for h in (x, y, lam)]
        gn = bv_norm(g, mode=mode, list_budget=list_budget)
        rows.append(ApproxRow(
            n, spec.r, spec.eps,
            results[0].lower, results[1].lower, results[2].lower,
            30 * float(spec.r + spec.eps),
            all(res.exact for res in results + [gn]),
            gn.lower,
        ))
    return rows
