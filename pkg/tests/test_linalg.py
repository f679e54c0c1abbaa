from itertools import product

import numpy as np
from hypothesis import given, strategies as st

from bidual.linalg import Lattice, howell_form, kernel, solve


@st.composite
def matrices(draw, q=9, max_rows=4, max_cols=3):
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    vals = draw(st.lists(st.integers(0, q - 1), min_size=r * c, max_size=r * c))
    return np.array(vals, dtype=np.int64).reshape(r, c)


def brute_span(M, q):
    out = set()
    for coeffs in product(range(q), repeat=M.shape[0]):
        out.add(tuple(int(x) for x in np.array(coeffs) @ M % q))
    return out


@given(matrices())
def test_howell_span_matches_brute_force(M):
    H = howell_form(M, 3, 2)
    assert brute_span(H, 9) == brute_span(M, 9) if H.shape[0] else brute_span(M, 9) == {(0,) * M.shape[1]}


@given(matrices(), st.integers(0, 10**6))
def test_howell_is_canonical(M, seed):
    rng = np.random.default_rng(seed)
    # a unimodular change of rows: permute, add multiples, scale by a unit
    N = M[rng.permutation(M.shape[0])].copy()
    if N.shape[0] > 1:
        N[0] = (N[0] + int(rng.integers(0, 9)) * N[1]) % 9
    N[-1] = N[-1] * 2 % 9
    assert np.array_equal(howell_form(M, 3, 2), howell_form(N, 3, 2))


@given(matrices())
def test_kernel_is_the_full_kernel(M):
    K = kernel(M, 3, 2)
    assert not (K @ M % 9).any()
    brute = {x for x in product(range(9), repeat=M.shape[0]) if not (np.array(x) @ M % 9).any()}
    assert brute_span(K, 9) == brute if K.shape[0] else brute == {(0,) * M.shape[0]}


@given(matrices(), st.lists(st.integers(0, 8), min_size=3, max_size=3))
def test_solve_matches_membership(M, b):
    b = np.array(b[: M.shape[1]], dtype=np.int64)
    x = solve(M, b, 3, 2)
    if x is None:
        assert tuple(b) not in brute_span(M, 9)
    else:
        assert np.array_equal(x @ M % 9, b % 9)


def test_lattice_ops():
    A = Lattice.span(np.array([[3, 0], [0, 1]]), 3, 2, 2)
    B = Lattice.span(np.array([[1, 1]]), 3, 2, 2)
    assert A.length() == 3
    assert (A + B) == Lattice.full(3, 2, 2)
    I = A.intersect(B)
    assert I == Lattice.span(np.array([[3, 3]]), 3, 2, 2)
    assert I <= A and I <= B
    assert Lattice.zero(3, 2, 2).length() == 0
