import math
import random

import mpmath as mp
import numpy as np
import pytest

from mfres import arith, dseries, halfint, lfun, modforms
from mfres.errors import DomainError, TableExhaustedError


@pytest.fixture(scope="module")
def basis6():
    return halfint.plus_space_basis(6, 2000, lift_primes=256)


@pytest.fixture(scope="module")
def basis8():
    return halfint.plus_space_basis(8, 1200, lift_primes=256)


@pytest.fixture(scope="module")
def basis12():
    return halfint.plus_space_basis(12, 600, lift_primes=256)


def test_twist_coefficient_values(basis6):
    g = basis6.forms[0]
    for d in (1, 5, 8, 12, 13):
        assert dseries.twist_coefficient(d, g) == g.coeff(d)
    # n = 4 decomposes as D=1, m=2
    assert dseries.twist_coefficient(4, g) == -(2 ** 5)
    assert dseries.twist_coefficient(9, g) == -(3 ** 5)
    assert dseries.twist_coefficient(25, g) == -(5 ** 5)
    # D=5, m=2; kronecker(5,2) = -1
    assert dseries.twist_coefficient(20, g) == 32 * g.coeff(5)
    # no decomposition for the forbidden residues
    for n in (2, 3, 6, 7, 11):
        assert dseries.twist_coefficient(n, g) == 0
    # square factor in m kills the term
    assert dseries.twist_coefficient(16, g) == 0
    assert dseries.twist_coefficient(81, g) == 0
    with pytest.raises(DomainError):
        dseries.twist_coefficient(0, g)


def test_twist_table_matches_scalar(basis6):
    g = basis6.forms[0]
    table = dseries.twist_coefficient_table(g, 500)
    for n in range(1, 501):
        assert table[n] == float(dseries.twist_coefficient(n, g))
    with pytest.raises(TableExhaustedError):
        dseries.twist_coefficient_table(g, 10 ** 5)


def test_series_direct_basics(basis6):
    g = basis6.forms[0]
    zero = halfint.PlusForm(6, 400, [0] * 400)
    lv0 = dseries.series_via_coefficients(zero, 6.0, 300)
    assert lv0.value == 0 and lv0.tail_bound == 0.0
    # the n=1 term is c(1); stripping n >= 2 must leave exactly it
    full = dseries.series_via_coefficients(g, 6.0, 1999)
    table = dseries.twist_coefficient_table(g, 1999)
    n = np.arange(2000, dtype=np.float64)
    n[0] = 1.0
    rest = float(np.dot(table[2:], n[2:] ** -6.0))
    assert float(full.value) - rest == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(DomainError):
        dseries.series_via_coefficients(g, 4.4, 100)


def test_series_direct_self_consistency(basis6):
    g = basis6.forms[0]
    a = dseries.series_via_coefficients(g, 6.0, 1000)
    b = dseries.series_via_coefficients(g, 6.0, 1999)
    assert abs(float(a.value) - float(b.value)) <= a.tail_bound + b.tail_bound


def test_twist_sum_single_term(basis6):
    g = basis6.forms[0]
    # below |D|=5 only D=1 contributes and chi_1 is trivial: c(1)/zeta(7)
    lv = dseries.series_via_twists(g, 6.0, 4, bits=60)
    with mp.workprec(120):
        expected = 1 / mp.zeta(7)
        assert abs(lv.value - expected) < 1e-14
    assert "heuristic-tail" in lv.flags
    empty = dseries.series_via_twists(g, 6.0, 0, bits=48)
    assert empty.value == 0
    with pytest.raises(DomainError):
        dseries.series_via_twists(g, 2.9, 100)  # sigma barely below 1.25


def test_quotient_route_trivial(basis6):
    lv = dseries.series_via_quotients(basis6, [0], 6.0)
    assert lv.value == 0 and lv.tail_bound == 0.0
    one = dseries.series_via_quotients(basis6, [1], 6.0, bits=64)
    num = lfun.hecke_lvalue_halfint(basis6.forms[0], 6.0, bits=64)
    den = dseries.lift_lvalue_euler(basis6.lifts[0], 12.0, bits=64)
    assert abs(one.value - num.value / den.value) < 1e-18
    with pytest.raises(DomainError):
        dseries.series_via_quotients(basis6, [1, 1], 6.0)
    with pytest.raises(DomainError):
        dseries.series_via_quotients(basis6, [1], 4.0)


def test_euler_product_matches_direct_sum():
    f = modforms.hecke_eigenforms(12, 3000)[0]
    direct = lfun.hecke_lvalue_int(f, 13.0, bits=64)
    euler = dseries.lift_lvalue_euler(f, 13.0, bits=64)
    assert abs(direct.value - euler.value) <= direct.tail_bound + euler.tail_bound
    with pytest.raises(DomainError):
        dseries.lift_lvalue_euler(f, 6.0)
    with pytest.raises(TableExhaustedError):
        dseries.lift_lvalue_euler(f, 6.6, bits=256)


@pytest.mark.parametrize("offset", [2.0, 3.0])
def test_triple_agreement_k6(basis6, offset):
    s = 6 / 2 + offset
    ev = dseries.evaluate_triple(basis6, [1], s, 1999, 300, bits=48)
    assert ev.consistent()
    rep = ev.report()
    assert rep["passed"]
    assert all(p["diff"] <= p["bound"] for p in rep["pairwise"])


@pytest.mark.parametrize("offset", [2.0, 3.0])
def test_triple_agreement_k8(basis8, offset):
    s = 8 / 2 + offset
    ev = dseries.evaluate_triple(basis8, [1], s, 1199, 250, bits=48)
    assert ev.consistent()


@pytest.mark.parametrize("weights", [[1, 0], [0, 1], [0.25, 0.75]])
def test_triple_agreement_k12(basis12, weights):
    assert basis12.dim == 2
    ev = dseries.evaluate_triple(basis12, weights, 12 / 2 + 2.0, 599, 200,
                                 bits=48)
    assert ev.consistent()


def test_weighted_combination(basis12):
    g = dseries.weighted_plus_form(basis12, [0.5, 0.5])
    with mp.workprec(200):
        for n in (1, 4, 5, 8):
            want = 0.5 * basis12.forms[0].coeff(n) + 0.5 * basis12.forms[1].coeff(n)
            assert abs(g.coeff(n) - want) < 1e-20 * (1 + abs(want))
    same = dseries.weighted_plus_form(basis12, [1, 0])
    assert same is basis12.forms[0]


def test_gamma_factor_identity():
    rng = random.Random(11)
    for k in (6, 7, 8):
        for _ in range(40):
            s = rng.uniform(0.1, 2 * k - 0.6)
            args = (2 * s, k + 0.5 - s, s, 2 * k - 2 * s, s + 0.5, k - s)
            if any(a < 0.5 and abs(a - round(a)) < 1e-3 for a in args):
                continue
            fa, fb = dseries.gamma_factor(s, k)
            assert abs(fa - fb) <= abs(fb) * mp.mpf(2) ** -90
    # explicit sign flip between parities
    fa6 = dseries.gamma_factor(3.3, 6)[1]
    fa7 = dseries.gamma_factor(3.3, 7)[1]
    assert fa6 > 0 > fa7
    for bad in (0.0, 6.5, 1e-7):
        with pytest.raises(DomainError):
            dseries.gamma_factor(bad, 6)


def test_rational_ratio_limit_and_values():
    # k=6: (-1)^(6+3) = -1 approached like 7.5/s; k=7: +1 approached like
    # 10.5/s, so at s=1e4 the gap is 1.0498e-3 (computable exactly)
    assert abs(dseries.rational_gamma_ratio(10 ** 4, 6) + 1) < 1e-3
    gap7 = abs(dseries.rational_gamma_ratio(10 ** 4, 7) - 1)
    assert abs(gap7 - mp.mpf("1049317618.125") / mp.mpf("999550057498.125")) < 1e-12
    # k=6, s=0: 5*4*3 / ((-1/2)(-3/2)(-5/2)) = -32
    assert abs(dseries.rational_gamma_ratio(0, 6) + 32) < 1e-30
    # cross-check against the raw gamma quotient away from poles
    with mp.workprec(200):
        s = mp.mpf("7.375")
        raw = mp.gamma(6 - s) / mp.gamma(3 - s) * mp.gamma(s - mp.mpf("2.5")) \
            / mp.gamma(s + mp.mpf("0.5"))
        assert abs(dseries.rational_gamma_ratio(s, 6) - raw) < 1e-40
    with pytest.raises(DomainError):
        dseries.rational_gamma_ratio(0.5, 6)


def test_rational_ratio_interpolation():
    # fit at 8 points, predict a held-out 9th to 1e-20
    xs = [mp.mpf("6.3") + mp.mpf("0.45") * j for j in range(8)]
    ys = [dseries.rational_gamma_ratio(x, 6, bits=256) for x in xs]
    num, den = dseries.rational_fit(xs, ys, 3, 3, bits=320)
    held = mp.mpf("20.125")
    want = dseries.rational_gamma_ratio(held, 6, bits=256)
    with mp.workprec(320):
        got = dseries.rational_eval(num, den, held)
        assert abs(got - want) < abs(want) * mp.mpf(10) ** -20
    with pytest.raises(DomainError):
        dseries.rational_fit(xs[:3], ys[:3], 3, 3)


def test_fricke_relation(basis6):
    g = basis6.forms[0]
    at_fixed = dseries.fricke_relation_check(g, mp.mpc(0, 0.5), tol=1e-10)
    assert at_fixed["passed"]
    assert at_fixed["abs_diff"] < 1e-10
    generic = dseries.fricke_relation_check(g, 0.1 + 0.6j, tol=1e-10)
    assert generic["passed"]
    tripled = halfint.PlusForm(6, g.prec, [3 * c for c in g.coeffs])
    scaled = dseries.fricke_relation_check(tripled, 0.1 + 0.6j, tol=1e-10)
    assert scaled["passed"]
    with pytest.raises(DomainError):
        dseries.fricke_relation_check(g, 0.3 - 0.2j)


def test_fricke_fixed_point_reduction(basis6):
    # at z = i/2 the relation collapses to (g|U4)(i/2) = -64 g(i/2) for k=6
    g = basis6.forms[0]
    z = mp.mpc(0, 0.5)
    lhs, _ = halfint.evaluate(halfint.u4(g), z, bits=192)
    gz, _ = halfint.evaluate(g, z, bits=192)
    assert arith.kronecker(2, 13) == -1
    assert abs(lhs + 64 * gz) < 1e-10


def test_coefficient_identity(basis6):
    for d in (8, 12):
        for p in (3, 5, 7):
            if abs(d) * p * p >= 2000:
                continue
            rep = dseries.coefficient_identity_check(basis6, d, p)
            assert rep["passed"] and rep["exact"]
            assert rep["max_rel_deviation"] == 0.0
    # p | D: character vanishes, identity reduces to the bare lift relation
    rep = dseries.coefficient_identity_check(basis6, 12, 3)
    assert rep["passed"]
    for bad_d, bad_p in ((5, 3), (-8, 3), (8, 2), (8, 9)):
        with pytest.raises(DomainError):
            dseries.coefficient_identity_check(basis6, bad_d, bad_p)


def test_coefficient_identity_numeric(basis12):
    rep = dseries.coefficient_identity_check(basis12, 8, 3)
    assert rep["passed"] and not rep["exact"]
    assert rep["max_rel_deviation"] < 1e-15
