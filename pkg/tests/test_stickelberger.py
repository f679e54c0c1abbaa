from fractions import Fraction
from math import gcd

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bidual import oracles
from bidual.ring import CharacterSpec, GroupRingElement, RingDescriptor
from bidual.stickelberger import (
    CyclotomicLevel,
    DirichletCharacter,
    IntegralityError,
    LevelField,
    StickelbergerError,
    build_window,
    dirichlet_characters,
    euler_window_validate,
    flat_coefficients,
    flat_projection,
    group_ring_of_level,
    modified_p_adic_L,
    partial_zeta_zero,
    project_level,
    sigma,
    stickelberger_element,
    tilde_L,
    tilde_L_via_projections,
    twist,
)
from bidual.kolyvagin import corrupt_window


def test_partial_zeta_values():
    assert partial_zeta_zero(5, 1) == Fraction(3, 10)
    assert partial_zeta_zero(5, 4) == Fraction(-3, 10)


def test_partial_zeta_against_fixture(derived):
    for m, table in derived["partial_zeta"].items():
        for a, v in table.items():
            assert partial_zeta_zero(int(m), int(a)) == Fraction(v)


@given(st.integers(3, 60), st.data())
def test_partial_zeta_symmetry(m, data):
    a = data.draw(st.sampled_from(CyclotomicLevel(m).units))
    assert partial_zeta_zero(m, a) + partial_zeta_zero(m, m - a) == 0
    assert partial_zeta_zero(m, a) == oracles.hurwitz_partial_zeta_zero(m, a)


def test_theta5():
    assert dict(stickelberger_element(5).coeffs) == {1: Fraction(3, 10), 2: Fraction(1, 10), 3: Fraction(-1, 10), 4: Fraction(-3, 10)}


@given(st.integers(2, 80))
def test_theta_denominator_divides_2m(m):
    assert (2 * m) % stickelberger_element(m).denominator() == 0


def test_quadratic_character_mod_7():
    psi = DirichletCharacter(7, (3,))
    assert psi.is_odd() and psi.conductor == 7
    assert str(stickelberger_element(7).evaluate(psi)) == "1"


def test_character_values_against_fixture(derived):
    for f in derived["characters"]:
        m = int(f["m"])
        psi = DirichletCharacter(m, tuple(int(e) for e in f["exponents"]))
        assert psi.conductor == int(f["conductor"])
        assert str(stickelberger_element(m).evaluate(psi)) == f["value"]


@pytest.mark.parametrize("m", [3, 4, 8, 15, 16, 20, 24, 35, 40])
def test_odd_character_evaluations(m):
    theta = stickelberger_element(m)
    for psi in dirichlet_characters(m):
        if not psi.is_odd():
            continue
        assert theta.evaluate(psi) == _b1_side(psi, m)


def _b1_side(psi, m):
    from bidual.ring import is_prime
    from bidual.stickelberger import CyclotomicNumber

    N = psi.root_order
    rhs = oracles.character_sum_b1(psi) * -1
    for q in range(2, m + 1):
        if is_prime(q) and m % q == 0 and psi.conductor % q:
            rhs = rhs * (CyclotomicNumber.rational(N, 1) - CyclotomicNumber.root(N, -psi.primitive_exponent(q)))
    return rhs


def test_even_characters_kill_theta():
    theta = stickelberger_element(13)
    for psi in dirichlet_characters(13):
        if not psi.is_odd() and not psi.is_trivial():
            assert str(theta.evaluate(psi)) == "0"


@pytest.mark.parametrize("m", [2, 3, 5, 7, 12, 15, 22])
@pytest.mark.parametrize("q", [2, 3, 5, 7, 11, 13])
def test_projection_identity(m, q):
    if m % q == 0:
        with pytest.raises(StickelbergerError):
            stickelberger_element(m, [q])
        return
    assert stickelberger_element(m * q).project(m) == stickelberger_element(m, [q])


def test_modulus_one_rejected():
    with pytest.raises(StickelbergerError):
        stickelberger_element(1)


@pytest.mark.parametrize("p,m", [(3, 3), (3, 21), (3, 39), (5, 5), (5, 55), (3, 63)])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_flat_projection_is_integral(p, m, n):
    flat_coefficients(m, p, n)


def test_flat_projection_kills_even_part():
    th = flat_projection(stickelberger_element(21), 3, 2)
    lev, R = group_ring_of_level(21, 3, 2)
    # the c = -1 part: x * c = -x
    c = sigma(lev, R, -1)
    assert th * c == -th


def test_twist_of_one_and_sigma():
    lev, R = group_ring_of_level(9, 3, 2)
    assert twist(R.one(), 9) == R.one()
    assert twist(sigma(lev, R, 2), 9) == sigma(lev, R, 5) * 2


@given(st.integers(0, 10**6))
def test_twist_commutes_with_projection(seed):
    rng = np.random.default_rng(seed)
    lev, R = group_ring_of_level(45, 3, 2)
    x = GroupRingElement.from_array(R, rng.integers(0, 9, R.order))
    lhs = project_level(twist(x, 45), 45, 9)
    rhs = twist(project_level(x, 45, 9), 9)
    assert lhs == rhs


def chi5(n):
    return CharacterSpec.from_exponents(5, 3, n, 2, [1])


@pytest.mark.parametrize("n", [1, 2])
def test_two_routes_to_tilde_L(n):
    for labels in [(), (7,), (19,)]:
        K = LevelField(3, n, labels)
        assert tilde_L(K, chi5(n)) == tilde_L_via_projections(K, chi5(n))


@pytest.mark.parametrize("q", [7, 13])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_window_norm_relation(q, n):
    w = build_window(3, n, chi5(n), [q], 1)
    assert euler_window_validate(w)["valid"]


def test_corrupted_window_breaks_norm_relation():
    w = build_window(3, 1, chi5(1), [7], 1)
    rep = euler_window_validate(corrupt_window(w, (7,)))
    assert not rep["valid"] and rep["failures"]


def test_odd_character_rejected_for_L():
    with pytest.raises(StickelbergerError):
        modified_p_adic_L(LevelField(3, 1, ()), CharacterSpec.from_exponents(7, 3, 1, 2, [1]))
