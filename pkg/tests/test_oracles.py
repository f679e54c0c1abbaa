from fractions import Fraction

import numpy as np
from hypothesis import given

from bidual import oracles
from bidual.modules import PresentedModule, fitting_ideal, minors
from bidual.ring import RingDescriptor

from conftest import modules


@given(modules(ring=RingDescriptor(3, 2)))
def test_order_oracle_matches_length(M):
    assert oracles.module_length(M.ring, M.gens, M.relations) == M.length()


@given(modules(ring=RingDescriptor(3, 1, (3,)), max_gens=2, max_rels=2))
def test_order_oracle_over_group_ring(M):
    assert oracles.module_length(M.ring, M.gens, M.relations) == M.length()


def test_leibniz_against_minors():
    R = RingDescriptor(3, 2, (3,))
    rng = np.random.default_rng(7)
    for _ in range(10):
        A = rng.integers(0, 9, (3, 3, 3))
        assert list(oracles.det_leibniz(A.tolist(), R)) == [int(c) for c in minors(A, 3, R)[0, 0]]


def test_count_homs_small():
    R = RingDescriptor(3, 2)
    # Hom(Z/3, Z/9) = Z/3
    assert oracles.count_homs(R, 1, [[3]], 1, np.zeros((0, 1))) == 3


def test_hurwitz():
    assert oracles.hurwitz_partial_zeta_zero(5, 1) == Fraction(3, 10)
    assert oracles.hurwitz_partial_zeta_zero(4, 3) == Fraction(-1, 4)


def test_ideal_closure():
    R = RingDescriptor(3, 2)
    assert oracles.ideal_elements(R, [[3]]) == {(0,), (3,), (6,)}
