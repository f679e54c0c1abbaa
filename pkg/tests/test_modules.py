from itertools import product
from math import comb, log

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bidual.modules import (
    CartesianSquare,
    IdealHandle,
    KernelPresentation,
    ModuleError,
    PresentedModule,
    annihilator,
    apply_matrix,
    base_change,
    cartesian_map,
    characteristic_ideal,
    contract,
    dual,
    exterior_bidual,
    exterior_power,
    fitting_ideal,
    hom_module,
    ideal_compare,
    induced_bidual_map,
    minors,
    reflexive_image,
    submodule_presentation,
    RingMap,
)
from bidual.ring import RingDescriptor

from conftest import SMALL_RINGS, modules, ring_from_json

Z9 = RingDescriptor(3, 2)


def elements_of(I):
    R = I.ring
    return sorted(tuple(x) for x in product(range(R.q), repeat=R.order) if I.contains(np.array(x, dtype=np.int64)))


def fixture_module(f):
    return PresentedModule.from_json(f)


def as_set(rows):
    return sorted(tuple(int(c) for c in e) for e in rows)


# --- oracle-derived fixtures -------------------------------------------------


def test_fixture_lengths(derived):
    for f in derived["modules"]:
        M = fixture_module(f)
        assert M.length() == int(f["length"]), f["name"]


def test_fixture_annihilators(derived):
    for f in derived["modules"]:
        M = fixture_module(f)
        assert elements_of(annihilator(M)) == as_set(f["annihilator"]), f["name"]


def test_fixture_fitting_ideals(derived):
    for f in derived["modules"]:
        M = fixture_module(f)
        for i, expected in enumerate(f["fitting"]):
            assert elements_of(fitting_ideal(M, i)) == as_set(expected), (f["name"], i)


def test_fixture_determinants(derived):
    for f in derived["determinants"]:
        R = ring_from_json(f["ring"])
        A = np.array([[[int(c) for c in e] for e in row] for row in f["matrix"]], dtype=np.int64)
        k = A.shape[0]
        assert [int(c) for c in minors(A, k, R)[0, 0]] == [int(c) for c in f["det"]], f["name"]


def test_fixture_hom_counts(derived):
    by_name = {f["name"]: fixture_module(f) for f in derived["modules"]}
    for f in derived["homs"]:
        M, N = by_name[f["source"]], by_name[f["target"]]
        H = hom_module(M, N)
        assert M.ring.p ** H.module.length() == int(f["count"])


# --- fixed examples ----------------------------------------------------------


def test_cyclic_z3_over_z9():
    M = PresentedModule.cyclic(Z9, [Z9.scalar(3)])
    three = IdealHandle.from_generators(Z9, [Z9.scalar(3)])
    assert fitting_ideal(M, 0) == characteristic_ideal(M) == annihilator(M) == three
    assert three.describe() == "(3)"


def test_strict_inclusion_witness():
    X = PresentedModule.diagonal(Z9, [3, 3])
    assert fitting_ideal(X, 0).describe() == "(0)"
    assert characteristic_ideal(X).describe() == "(3)"
    assert ideal_compare(fitting_ideal(X, 0), characteristic_ideal(X)) == "a<b"


def test_free_module_has_zero_char():
    assert characteristic_ideal(PresentedModule.free(Z9, 1)).is_zero()
    assert characteristic_ideal(PresentedModule.free(Z9, 0)).is_unit()


def test_char_not_multiplicative_on_direct_sums():
    A = PresentedModule.cyclic(Z9, [Z9.scalar(3)])
    cs = characteristic_ideal(A.direct_sum(A))
    assert cs.describe() == "(3)"
    assert (characteristic_ideal(A) * characteristic_ideal(A)).is_zero()


def test_ideal_arithmetic():
    three = IdealHandle.from_generators(Z9, [Z9.scalar(3)])
    assert (three * three).is_zero()
    assert (three + IdealHandle.unit(Z9)).is_unit()
    assert IdealHandle.zero(Z9) <= three <= IdealHandle.unit(Z9)
    assert three.is_closed()


def test_ideals_over_group_ring_are_closed():
    R = RingDescriptor(3, 1, (3,))
    I = IdealHandle.from_generators(R, [[2, 1, 0]])  # s - 1
    assert I.is_closed() and I.length() == 2


def test_malformed_presentation():
    with pytest.raises(ModuleError):
        PresentedModule.from_json({"ring": {"p": 3, "n": 2}, "gens": 2, "relations": [["1"]]})


def test_json_roundtrip():
    M = PresentedModule(RingDescriptor(3, 2, (3,)), 2, [[[1, 2, 0], [3, 0, 0]]])
    N = PresentedModule.from_json(M.to_json())
    assert N.gens == M.gens and np.array_equal(N.relations, M.relations)


def test_contraction_of_top_wedge():
    F = PresentedModule.free(Z9, 2)
    B = exterior_bidual(F, 2)
    _, W = contract(B, np.array([[0], [1]]), 1)
    # (e1 ^ e2)(e2* ^ psi) = -psi(e1)
    assert apply_matrix(np.array([[1]]), W, Z9).ravel().tolist() == [8, 0]


def test_cartesian_map_is_contraction():
    F = PresentedModule.free(Z9, 2)
    M1 = PresentedModule.free(Z9, 1)
    sq = CartesianSquare(M1, F, np.array([[[1], [0]]]), np.zeros((1, 0, 1), dtype=np.int64), np.array([[[0]], [[1]]]), np.zeros((0, 1, 1), dtype=np.int64))
    assert sq.is_cartesian()
    f = cartesian_map(sq, 2, source=exterior_bidual(F, 2))
    assert f.apply(np.array([[1]])).ravel().tolist() == [8]


def test_non_cartesian_square_detected():
    F = PresentedModule.free(Z9, 2)
    M1 = PresentedModule.free(Z9, 1)
    # 3 e1 is in the kernel of e2* but the square uses it as M1
    sq = CartesianSquare(M1, F, np.array([[[3], [0]]]), np.zeros((1, 0, 1), dtype=np.int64), np.array([[[0]], [[1]]]), np.zeros((0, 1, 1), dtype=np.int64))
    assert sq.violations()


def test_base_change_to_residue_ring():
    M = PresentedModule.cyclic(Z9, [Z9.scalar(3)])
    Mb = base_change(M, RingMap.reduction(Z9, 1))
    assert Mb.ring == RingDescriptor(3, 1) and Mb.length() == 1


# --- properties ----------------------------------------------------------------


@given(modules())
def test_char_equals_annihilator(M):
    assert characteristic_ideal(M) == annihilator(M)


@given(modules())
def test_fitting_chain(M):
    fs = [fitting_ideal(M, i) for i in range(M.gens + 1)]
    assert fs[0] <= characteristic_ideal(M)
    assert all(a <= b for a, b in zip(fs, fs[1:]))
    assert fs[-1].is_unit()


@given(modules())
def test_padded_presentation_is_invisible(M):
    M2 = M.with_free_summand(2)
    assert M2.length() == M.length()
    assert characteristic_ideal(M2) == characteristic_ideal(M)
    assert all(fitting_ideal(M2, i) == fitting_ideal(M, i) for i in range(M.gens + 1))


@given(modules())
def test_direct_sum_with_free_shifts_fitting(M):
    S = M.direct_sum(PresentedModule.free(M.ring, 1))
    assert fitting_ideal(S, 0).is_zero()
    assert all(fitting_ideal(S, i + 1) == fitting_ideal(M, i) for i in range(M.gens + 1))


@given(modules())
def test_matlis_length_and_xi1(M):
    D = dual(M)
    assert D.module.length() == M.length()
    assert exterior_bidual(M, 1, dualmod=D).xi_is_bijective()


@given(modules(max_gens=2), st.integers(0, 3))
def test_reflexive_characteristic_ideal(M, _):
    c = characteristic_ideal(M)
    assert reflexive_image(c) == c


@pytest.mark.parametrize("R", SMALL_RINGS)
@pytest.mark.parametrize("k", [1, 2, 3])
def test_free_bidual_is_exterior_power(R, k):
    F = PresentedModule.free(R, k)
    for r in range(k + 2):
        B = exterior_bidual(F, r)
        assert B.length() == comb(k, r) * R.order * R.n
        assert exterior_power(F, r).length() == comb(k, r) * R.order * R.n
        if r <= k:
            assert B.xi_is_bijective()


@given(modules(max_gens=2), st.data())
def test_submodule_inequality_and_bidual_injectivity(M, data):
    R = M.ring
    v = np.array(data.draw(st.lists(st.integers(0, R.q - 1), min_size=M.gens * R.order, max_size=M.gens * R.order)), dtype=np.int64)
    N, inc = submodule_presentation(M, v.reshape(1, M.gens, R.order))
    assert characteristic_ideal(M) <= characteristic_ideal(N)
    assert induced_bidual_map(inc, 1).is_injective()


@given(st.sampled_from(SMALL_RINGS[:4]), st.data())
def test_kernel_formula(R, data):
    a = data.draw(st.integers(1, 3))
    b = data.draw(st.integers(1, 2))
    vals = data.draw(st.lists(st.integers(0, R.q - 1), min_size=a * b * R.order, max_size=a * b * R.order))
    alpha = np.array(vals, dtype=np.int64).reshape(a, b, R.order) * R.p % R.q
    KP = KernelPresentation(R, alpha)
    for r in range(1, a + 1):
        assert KP.bidual_in_free(r) == KP.koszul_kernel(r)
        assert KP.bidual_in_free(r).length() == KP.bidual_definitional_length(r)
