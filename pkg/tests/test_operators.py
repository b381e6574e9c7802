import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from acsigma.bvnorm import FiniteFunction, bv_norm, one_d_bv_norm
from acsigma.exact import I, ONE, ZERO, Q
from acsigma.geometry import SigmaSet
from acsigma.operators import (
    Multiplier, OperatorSpec, SpecError, bv0_bound_check, calculus_check, calculus_constant, cumulative_projection,
    lam, multiplier_soundness, order_indices, partial_sum_trace, psi, random_function, random_spec,
    real_test_family, rearrangement_check, split_and_omega, validate_spec,
)

seeds = st.integers(0, 2**32 - 1)


def small_spec(seed, N=2, max_m=4):
    return random_spec(random.Random(seed), N=N, max_m=max_m, denom=8)


def test_structure_errors():
    with pytest.raises(SpecError, match="H1"):
        OperatorSpec([(1, 0)], [[Q(1), Q(1, 1)]]).check_structure()
    with pytest.raises(SpecError, match="H2"):
        OperatorSpec.from_scales([(1, 0)], [[1, 2]]).check_structure()
    with pytest.raises(SpecError, match="repeats"):
        OperatorSpec.from_scales([(1, 0), (1, 0)], [[1], [2]]).check_structure()
    with pytest.raises(SpecError, match="primitive"):
        OperatorSpec.from_scales([(2, 0)], [[1]]).check_structure()
    with pytest.raises(SpecError):
        validate_spec(OperatorSpec.from_scales([(0, 1)], [[1, 1]]))


def test_single_positive_spoke_constant():
    spec = OperatorSpec.from_scales([(1, 0)], [[5, 3, 2, 1, Fraction(1, 2)]])
    rep = validate_spec(spec)
    assert rep.K <= 3
    gs = [cumulative_projection(spec, 0, M).g for M in range(1, 6)]
    exact = max(bv_norm(g, "branch-bound", 12).lower for g in gs)
    assert exact == pytest.approx(max(one_d_bv_norm(g) for g in gs), rel=1e-12)
    assert rep.K_lower <= exact <= rep.K
    assert rep.exact and rep.K == 2.0


def test_empty_spoke_ignored():
    a = validate_spec(OperatorSpec.from_scales([(1, 0), (0, 1)], [[2, 1], []]))
    b = validate_spec(OperatorSpec.from_scales([(1, 0)], [[2, 1]]))
    assert a.K == b.K


def test_validate_with_search_bracket():
    spec = OperatorSpec.from_scales([(1, 0), (1, 2)], [[2, 1], [1]])
    rep = validate_spec(spec, search_mode="branch-bound")
    assert rep.K_lower <= rep.K_search <= rep.K


def test_psi_examples():
    spec = OperatorSpec.from_scales([(1, 1), (-1, 2)], [[3, 1], [2]])
    sigma = spec.sigma
    assert psi(spec, FiniteFunction.constant(sigma, ONE)) == Multiplier.identity(sigma)
    assert psi(spec, lam(spec)).g == FiniteFunction.identity(sigma)
    near0 = FiniteFunction.from_callable(sigma, lambda z: Q(2) if z.abs2() < 3 else Q(0, 1))
    other = FiniteFunction.from_callable(sigma, lambda z: Q(-1) if z.abs2() < 3 else Q(4, -1))
    assert psi(spec, near0 * other) == psi(spec, near0).compose(psi(spec, other))
    with pytest.raises(ValueError):
        psi(spec, FiniteFunction.constant(SigmaSet([Q(1)]), ONE))


@given(seeds)
def test_psi_homomorphism_and_linearity(seed):
    rng = random.Random(seed)
    spec = small_spec(seed, N=rng.randint(1, 3))
    f, g = random_function(spec.sigma, rng), random_function(spec.sigma, rng)
    c = Q(rng.randint(-3, 3), rng.randint(-3, 3))
    assert psi(spec, f * g) == psi(spec, f).compose(psi(spec, g))
    assert psi(spec, f + g * c) == psi(spec, f) + psi(spec, g).scale(c)
    assert psi(spec, f).g == f


@given(seeds)
def test_calculus_bounds(seed):
    rng = random.Random(seed)
    spec = small_spec(seed, N=rng.randint(1, 3), max_m=5)
    K = validate_spec(spec).K
    chk = calculus_check(spec, random_function(spec.sigma, rng), random_function(spec.sigma, rng), K)
    assert chk.bv_ok and chk.spoke_ok and chk.homomorphism and chk.reproduces


@given(seeds)
def test_multiplier_soundness(seed):
    rng = random.Random(seed)
    pts = {Q(rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(rng.randint(2, 5))}
    g = random_function(SigmaSet(pts), rng)
    L = 2 * len(pts)
    best, at_one, gn = multiplier_soundness(g, rng, trials=6, list_budget=L)
    assert at_one == gn
    assert best <= gn + 1e-9


def test_orders_and_final_sum():
    spec = OperatorSpec.from_scales([(1, 0), (0, 1), (-1, -1)], [[3, 2, 1], [3, Fraction(3, 2)], [2]])
    P = len(spec.indices())
    rng = random.Random(1)
    perm = list(range(P))
    rng.shuffle(perm)
    for ordering, p in (("succ", None), ("modulus", None), ("perm", perm)):
        tr = partial_sum_trace(spec, ordering, permutation=p, gaps=False)
        assert tr.final.g == lam(spec)
        assert sorted(tr.order) == sorted(spec.indices())
    succ = order_indices(spec, "succ")
    # equal moduli 3 and 3: smaller angle first
    assert succ[:2] == [(0, 0), (1, 0)]
    with pytest.raises(ValueError):
        order_indices(spec, "perm", [0, 0, 1])
    with pytest.raises(ValueError):
        order_indices(spec, "sideways")


def test_trace_increments_bracket_true_norm():
    spec = OperatorSpec.from_scales([(1, 0), (1, 2)], [[2, 1], [1]])
    tr = partial_sum_trace(spec, "succ")
    for step in tr.steps:
        exact = abs(step.coefficient) * bv_norm(
            FiniteFunction.indicator(spec.sigma, [step.eigenvalue]), "exhaustive", 8).lower
        assert step.increment_lower - 1e-12 <= exact <= step.increment_upper + 1e-12


@given(seeds)
def test_succ_windows_respect_bounds(seed):
    spec = small_spec(seed, N=2, max_m=6)
    tr = partial_sum_trace(spec, "succ", increment_norms=False)
    assert tr.gaps and tr.respects_bounds


def test_window_upper_bound_dominates_search():
    spec = OperatorSpec.from_scales([(1, 0), (-1, 1)], [[2, 1], [Fraction(3, 2), Fraction(1, 2)]])
    tr = partial_sum_trace(spec, "succ", increment_norms=False)
    coeffs = {nm: spec.eigenvalue(*nm) for nm in spec.indices()}
    for row in tr.gaps:
        window = tr.order[row.start: row.stop]
        vals = {spec.eigenvalue(*nm): coeffs[nm] for nm in window}
        g = FiniteFunction.from_callable(spec.sigma, lambda p: vals.get(p, ZERO))
        assert bv_norm(g, "branch-bound", 10).lower <= row.delta_upper + 1e-9


def _chain(sigma, order, cuts):
    fam = [FiniteFunction.indicator(sigma, [])]
    for c in cuts:
        fam.append(FiniteFunction.indicator(sigma, order[:c]))
    return fam


def test_bv0_examples():
    sigma = SigmaSet([Q(k) for k in range(6)])
    fam = _chain(sigma, list(sigma.points), [1, 2, 3, 4, 5, 6])
    const = bv0_bound_check(fam, [0] + [Q(2, 1)] * 6, 1, 6, list_budget=12)
    assert const.ok and const.rhs == pytest.approx(const.K * 2 * abs(Q(2, 1)))
    single = bv0_bound_check(fam, [0, 0, 0, Q(3)] + [0] * 3, 3, 3, list_budget=12)
    diff = bv_norm(fam[3] - fam[2], "branch-bound", 12).lower
    assert single.lhs == pytest.approx(3 * diff) and single.ok


def test_bv0_decreasing_on_single_spoke():
    rng = random.Random(11)
    sigma = SigmaSet([Q(k, k) for k in range(1, 7)])
    order = sorted(sigma.points, key=lambda z: -z.abs2())
    fam = _chain(sigma, order, range(1, 7))
    for _ in range(5):
        mu = [0] + sorted((Fraction(rng.randint(1, 40), 8) for _ in range(6)), reverse=True)
        n, m = sorted(rng.sample(range(1, 7), 2))
        res = bv0_bound_check(fam, mu, n, m, mode="exhaustive", list_budget=8)
        assert res.exact and res.ok


def test_bv0_validation():
    sigma = SigmaSet([Q(0), Q(1)])
    a, b = FiniteFunction.indicator(sigma, [Q(0)]), FiniteFunction.indicator(sigma, [Q(1)])
    with pytest.raises(ValueError, match="increasing"):
        bv0_bound_check([a, b], [0, 1], 1, 1)
    with pytest.raises(ValueError, match="indicator"):
        bv0_bound_check([a, a * Q(2)], [0, 1], 1, 1)


def test_split_trivial_omegas():
    spec = OperatorSpec.from_scales([(1, 2), (-3, 1)], [[2, 1], [1]])
    one = split_and_omega(spec, ONE, constants=False)
    assert one.identities_hold and one.U == one.A and one.V == one.B
    rot = split_and_omega(spec, I, constants=False)
    assert rot.identities_hold
    assert rot.U.g == -rot.B.g and rot.V == rot.A


@given(seeds, st.integers(-4, 4), st.integers(-4, 4))
def test_split_identities(seed, a, b):
    spec = small_spec(seed, N=2, max_m=3)
    rep = split_and_omega(spec, Q(Fraction(a, 3), Fraction(b, 5)), seed=seed, constants=False)
    assert rep.identities_hold


def test_split_constants_finite():
    spec = OperatorSpec.from_scales([(1, 0), (1, 1), (0, 1)], [[2, 1], [1], [3, Fraction(1, 2)]])
    rep = split_and_omega(spec, Q(Fraction(3, 5), Fraction(4, 5)), seed=3)
    assert set(rep.constants) == {"aA-bB", "aB+bA", "A+B"}
    for value, arg in rep.constants.values():
        assert 1.0 <= value < float("inf") and arg


def test_calculus_constant_of_collinear_multiplier_is_one():
    sigma = SigmaSet([Q(k) for k in range(-2, 3)])
    c = FiniteFunction.real_part(sigma)
    fam = real_test_family([z.x for z in sigma], random.Random(0))
    value, _ = calculus_constant(c, fam)
    assert value == pytest.approx(1.0)
    with pytest.raises(ValueError):
        calculus_constant(FiniteFunction.identity(SigmaSet([Q(0, 1)])), fam)


def _real_spec(rng, n_pos, n_neg):
    pos = sorted(rng.sample(range(1, 40), n_pos), reverse=True)
    neg = sorted(rng.sample(range(1, 40), n_neg), reverse=True)
    return OperatorSpec.from_scales([(1, 0), (-1, 0)], [[Fraction(k, 8) for k in pos], [Fraction(k, 8) for k in neg]])


def test_rearrangement_identity_permutation():
    spec = _real_spec(random.Random(0), 3, 2)
    rep = rearrangement_check(spec, list(range(5)))
    assert rep.same_sum and rep.half_lines_ok


def test_rearrangement_random_permutation_ten_points():
    rng = random.Random(5)
    spec = _real_spec(rng, 5, 5)
    perm = list(range(10))
    rng.shuffle(perm)
    rep = rearrangement_check(spec, perm)
    assert rep.same_sum and rep.half_lines_ok
    assert rep.worst_positive[0] <= rep.K + 1e-9 and rep.worst_negative[0] <= rep.K + 1e-9
    # the oracle: exact search on the worst half-line projection
    t = rep.worst_positive[1]
    sel = [z for z in spec.sigma if z.x >= t]
    assert bv_norm(FiniteFunction.indicator(spec.sigma, sel), "branch-bound", 8).lower <= rep.K + 1e-9


def test_rearrangement_alternating_signs():
    spec = OperatorSpec.from_scales([(1, 0), (-1, 0)], [[4, 2, 1], [3, Fraction(3, 2), Fraction(1, 2)]])
    order = order_indices(spec, "modulus")
    assert [spec.eigenvalue(*nm).x > 0 for nm in order] == [True, False, True, False, True, False]
    rep = rearrangement_check(spec, [5, 4, 3, 2, 1, 0])
    assert rep.half_lines_ok and rep.same_sum
    assert rep.worst_positive[1] > 0 and rep.worst_negative[1] < 0


def test_rearrangement_needs_real_spectrum():
    spec = OperatorSpec.from_scales([(0, 1)], [[1]])
    with pytest.raises(ValueError):
        rearrangement_check(spec, [0])
