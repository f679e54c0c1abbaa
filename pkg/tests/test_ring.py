import numpy as np
import pytest
from hypothesis import given, strategies as st

from bidual.ring import (
    CharacterSpec,
    GroupRingElement,
    RingDescriptor,
    RingError,
    gr_mul,
    idempotent,
    inverse,
    involution,
    is_unit,
    teichmuller,
)

from conftest import SMALL_RINGS, elements, rings


def el(R, x):
    return GroupRingElement.from_array(R, x)


@st.composite
def triples(draw):
    R = draw(rings)
    return R, el(R, draw(elements(R))), el(R, draw(elements(R))), el(R, draw(elements(R)))


@given(triples())
def test_ring_axioms(t):
    R, a, b, c = t
    assert gr_mul(a, b) == gr_mul(b, a)
    assert gr_mul(gr_mul(a, b), c) == gr_mul(a, gr_mul(b, c))
    assert gr_mul(a, b + c) == gr_mul(a, b) + gr_mul(a, c)
    assert gr_mul(a, R.one()) == a


@given(triples())
def test_involution_is_ring_automorphism(t):
    R, a, b, _ = t
    assert involution(gr_mul(a, b)) == gr_mul(involution(a), involution(b))
    assert involution(involution(a)) == a


@given(triples())
def test_units_are_elements_with_unit_augmentation(t):
    R, a, _, _ = t
    assert is_unit(a) == (a.augmentation() % R.p != 0)
    if is_unit(a):
        assert gr_mul(a, inverse(a)) == R.one()


def test_orders_and_tables():
    R = RingDescriptor(3, 2, (3, 9))
    assert R.q == 9 and R.order == 27
    T = R.mul_table
    for i in range(R.order):
        assert sorted(T[i]) == list(range(R.order))
    assert R.from_json(R.to_json()) == R


def test_prime_to_p_group_gives_non_local_ring():
    assert not RingDescriptor(3, 2, (2,)).is_local()
    assert RingDescriptor(3, 2, (3, 9)).is_local()


def test_norm_element_kills_augmentation_ideal():
    R = RingDescriptor(3, 2, (3,))
    s = R.group_element(R.generator_indices[0])
    assert gr_mul(R.norm_element(), s - R.one()).is_zero()


@pytest.mark.parametrize("p,n", [(3, 1), (3, 3), (5, 2), (7, 2)])
def test_teichmuller(p, n):
    q = p**n
    for a in range(1, p):
        w = teichmuller(p, n, a)
        assert w % p == a and pow(w, p - 1, q) == 1


def test_character_table():
    chi = CharacterSpec.from_exponents(5, 3, 2, 2, [1])
    assert chi(1) == 1 and chi(4) == 1 and chi(2) == 8
    assert chi.is_even() and chi.conductor() == 5
    assert chi.value(2, precision=1) == 2


def test_idempotent_of_trivial_subgroup_is_one():
    R = RingDescriptor(3, 2, (3,))
    assert idempotent(R, [0], [1]) == R.one()


def test_idempotent_needs_invertible_order():
    R = RingDescriptor(3, 2, (3,))
    with pytest.raises(RingError):
        idempotent(R, list(range(3)), [1, 1, 1])


def test_odd_prime_required():
    with pytest.raises(RingError):
        RingDescriptor(2, 2)
