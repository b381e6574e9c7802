from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from acsigma.approx import CutoffSpec, cutoff_function, cutoff_value, identity_approximants, x_tilde
from acsigma.bvnorm import bv_norm
from acsigma.exact import Q
from acsigma.geometry import SigmaSet
from acsigma.order import sup_level
from strategies import sigma_sets

positive = st.fractions(min_value=Fraction(1, 8), max_value=4, max_denominator=8)

# frozen from exhaustive search at budget 8
S4 = SigmaSet([Q(Fraction(1, 2)), Q(0, Fraction(3, 4)), Q(-1, -1), Q(Fraction(1, 4), Fraction(-1, 4))])
S4_ROWS = [
    (1, 2.5, 2.75, 3.705217607257074, 0.0),
    (2, 1.0, 1.0, 1.2953087167723973, 2.0),
    (3, 0.5, 0.5, 0.7803300858899107, 2.0),
    (4, 0.5, 0.5, 0.7071067811865477, 2.0),
]


def test_spec_validation():
    with pytest.raises(ValueError):
        CutoffSpec(0, 1)
    with pytest.raises(ValueError):
        CutoffSpec(1, Fraction(-1, 2))


def test_three_branches():
    spec = CutoffSpec(1, 2)
    assert cutoff_value(spec, Q(1, -1)) == 0
    assert cutoff_value(spec, Q(2, Fraction(1, 2))) == Fraction(1, 2)
    assert cutoff_value(spec, Q(-3)) == 1
    assert cutoff_value(spec, Q(0, 4)) == 1


def test_trivial_cutoffs():
    far = SigmaSet([Q(5), Q(0, -6), Q(7, 7)])
    g = cutoff_function(CutoffSpec(1, 1), far)
    assert set(g.values()) == {Q(1)} and bv_norm(g).lower == 1.0
    near = SigmaSet([Q(0), Q(1, 1), Q(-1)])
    g = cutoff_function(CutoffSpec(1, 1), near)
    assert set(g.values()) == {Q(0)} and bv_norm(g).lower == 0.0


@given(sigma_sets(1, 6), positive, positive)
def test_cutoff_norm_at_most_six(sigma, r, eps):
    g = cutoff_function(CutoffSpec(r, eps), sigma)
    assert all(0 <= v.x <= 1 and v.y == 0 for v in g.values())
    assert bv_norm(g, "branch-bound", max(2, 2 * len(sigma))).lower <= 6 + 1e-9


@given(sigma_sets(1, 5), positive, positive)
def test_x_tilde_bound(sigma, r, eps):
    spec = CutoffSpec(r, eps)
    xt = x_tilde(sigma, spec)
    assert bv_norm(xt, "branch-bound", max(2, 2 * len(sigma))).lower <= 5 * float(r + eps) + 1e-9


def test_rows_frozen():
    rows = identity_approximants(S4, [Fraction(1, n) for n in range(1, 5)], [Fraction(1, n) for n in range(1, 5)],
                                 mode="exhaustive", list_budget=8)
    got = [(r.n, r.err_x, r.err_y, r.err_lambda, r.g_norm) for r in rows]
    assert got == [pytest.approx(row, rel=1e-12) for row in S4_ROWS]
    assert all(r.ok and r.exact for r in rows)


def test_five_point_rows_within_bound():
    sigma = SigmaSet([Q(0), Q(1, 2), Q(-2, 1), Q(Fraction(1, 3), Fraction(-1, 2)), Q(0, Fraction(1, 5))])
    seq = [Fraction(1, n) for n in range(1, 11)]
    rows = identity_approximants(sigma, seq, seq)
    assert all(r.ok for r in rows)
    # once r + eps is below every nonzero level the approximants are exact
    tiny = min(sup_level(z) for z in sigma if not z.is_zero())
    assert all(r.err_x == 0 and r.err_y == 0 and r.err_lambda == 0 for r in rows if r.r + r.eps < tiny)


def test_far_sigma_first_row_zero():
    sigma = SigmaSet([Q(3), Q(-3, 3), Q(0, 4)])
    row = identity_approximants(sigma, [1], [1])[0]
    assert (row.err_x, row.err_y, row.err_lambda) == (0.0, 0.0, 0.0)


def test_length_mismatch():
    with pytest.raises(ValueError):
        identity_approximants(S4, [1, 2], [1])
