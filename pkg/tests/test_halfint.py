import math

import mpmath as mp
import pytest

from mfres import arith, halfint, modforms
from mfres.errors import DomainError, PrecisionError


@pytest.fixture(scope="module")
def basis6():
    return halfint.plus_space_basis(6, 400)


def test_theta_values():
    th = halfint.theta(30)
    assert th.coeff(0) == 1
    assert th.coeff(4) == 2
    assert th.coeff(3) == 0
    assert [n for n, _ in th.items()] == [0, 1, 4, 9, 16, 25]
    with pytest.raises(DomainError):
        halfint.theta(0)


def test_weight_two_F_values():
    f = halfint.weight_two_F(30)
    assert f.coeff(1) == 1
    assert f.coeff(2) == 0
    assert f.coeff(9) == 13
    assert f.coeff(15) == 24  # 1+3+5+15
    assert all(f.coeff(n) == 0 for n in range(0, 30, 2))


def test_plus_basis_k6(basis6):
    assert basis6.dim == 1 == modforms.cusp_dim(12)
    g = basis6.forms[0]
    assert g.exact and g.plus
    assert g.coeff(0) == 0
    assert g.coeff(1) == 1
    assert g.coeff(2) == 0
    assert g.coeff(3) == 0
    assert g.coeff(4) == -56
    # residue classes 2, 3 mod 4 vanish identically
    for n in range(g.prec):
        if n % 4 in (2, 3):
            assert g.coeff(n) == 0
    assert g.first_admissible() == 1
    assert g.first_nonzero_fourdiv() == 8
    assert g.witness >= 1.0


def test_c4_two_ways(basis6):
    # linear solve vs the coefficient relation at D=1, n=2
    g = basis6.forms[0]
    f = basis6.lifts[0]
    assert g.coeff(4) == f.coeff(2) - 2 ** 5
    assert g.coeff(4) == -56


def test_shimura_exact_small(basis6):
    g = basis6.forms[0]
    f = basis6.lifts[0]
    for d in (1, 5, 8, 12, 13):
        n_max = math.isqrt((g.prec - 1) // d)
        rep = halfint.shimura_check(g, f, d, n_max)
        assert rep["exact"]
        assert rep["max_deviation"] == 0


def test_shimura_domain_errors(basis6):
    g, f = basis6.forms[0], basis6.lifts[0]
    with pytest.raises(DomainError):
        halfint.shimura_check(g, f, -3, 2)  # wrong sign for even k
    with pytest.raises(DomainError):
        halfint.shimura_check(g, f, 20, 2)  # not fundamental
    with pytest.raises(DomainError):
        halfint.shimura_check(g, f, 1, 100)  # outside the table


def test_plus_basis_precondition():
    with pytest.raises(DomainError):
        halfint.plus_space_basis(6, 100)


def test_u4_picker(basis6):
    g = basis6.forms[0]
    gu = halfint.u4(g)
    assert not gu.plus
    assert gu.prec == g.prec // 4
    assert gu.coeff(0) == 0
    assert gu.coeff(1) == -56
    for n in range(gu.prec):
        assert gu.coeff(n) == g.coeff(4 * n)


def test_eigen_split_k12():
    basis = halfint.plus_space_basis(12, 420)
    assert basis.dim == 2 == modforms.cusp_dim(24)
    with mp.workprec(160):
        for g, f in zip(basis.forms, basis.lifts):
            assert not g.exact
            # normalized leading coefficient
            lead = next(c for c in g.coeffs if c)
            assert abs(lead - 1) < mp.mpf(2) ** -100
            # c(4) = a(2) - 2^11 for these forms (c(1) = 1, chi_1(2) = 1)
            assert abs(g.coeff(4) - (f.a2 - 2 ** 11)) < mp.mpf(2) ** -60 * abs(f.a2)
            rep = halfint.shimura_check(g, f, 1, 4)
            assert rep["rel_deviation"] < mp.mpf(2) ** -40
            for n in range(g.prec):
                if n % 4 in (2, 3):
                    assert g.coeff(n) == 0
    # lifts ordered by a(2) ascending
    assert basis.lifts[0].a2 < basis.lifts[1].a2


def test_plus_form_validation_rejects_bad_table():
    with pytest.raises(DomainError):
        halfint.PlusForm(6, 5, [0, 1, 1, 0, 0])  # c(2) != 0
    with pytest.raises(DomainError):
        halfint.PlusForm(6, 5, [1, 0, 0, 0, 0])  # constant term
    with pytest.raises(DomainError):
        halfint.PlusForm(6, 5, [0, 1, 0])  # length mismatch


def test_evaluate_zero_form():
    z = halfint.PlusForm(6, 50, [0] * 50)
    val, tail = halfint.evaluate(z, 0.3 + 1j)
    assert val == 0
    assert tail == 0.0


def test_evaluate_basic(basis6):
    g = basis6.forms[0]
    val, tail = halfint.evaluate(g, 1j)
    assert tail < 1e-30
    assert abs(val) > 0
    # periodicity under z -> z + 1
    v2, _ = halfint.evaluate(g, 1j + 1)
    assert abs(val - v2) < mp.mpf(2) ** -100 * abs(val)
    with pytest.raises(DomainError):
        halfint.evaluate(g, 0.5 - 0.1j)


def test_evaluate_truncation_consistency(basis6):
    g = basis6.forms[0]
    z = 0.17 + 0.8j
    full, tail_full = halfint.evaluate(g, z)
    short, tail_short = halfint.evaluate(g, z, tol=1e-25)
    assert tail_short < 1e-25
    assert abs(full - short) <= tail_short + tail_full + 1e-40


def test_evaluate_tail_failure(basis6):
    g = basis6.forms[0]
    with pytest.raises(PrecisionError):
        halfint.evaluate(g, 0.5 + 0.005j, tol=1e-280)


def test_shimura_rhs_uses_character():
    # D=5: chi_5(2) = kronecker(5, 2) = -1, so c(20) = c(5)(a(2) + 32)
    basis = halfint.plus_space_basis(6, 400)
    g, f = basis.forms[0], basis.lifts[0]
    assert arith.kronecker(5, 2) == -1
    assert g.coeff(20) == g.coeff(5) * (f.coeff(2) + 32)
    assert g.coeff(20) == 8 * g.coeff(5)
