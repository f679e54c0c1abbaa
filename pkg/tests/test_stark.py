import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bidual.ring import RingDescriptor
from bidual.stark import (
    SelmerDatum,
    StarkError,
    check_coh_rel,
    corrupt_datum,
    descent_levels,
    divisors,
    find_z,
    fitting_comparison,
    integral_datum,
    is_stark_system,
    kappa_sigma,
    kolyvagin_relation_check,
    perturb_system,
    rank_reduction,
    reduction_by_contraction,
    regulator,
    regulator_cartesian,
    sort_sign,
    stark_basis,
    stark_ideals,
    stark_solve,
    stark_transition,
    synthetic_datum,
    tilde_kappa_identity_check,
    toy_datum,
    transition_by_contraction,
    validate_selmer_datum,
)
from bidual.suites import stark_datum_checks

Z9 = RingDescriptor(3, 2)
POOL = (7, 13, 19)


def test_divisors_and_signs():
    assert divisors((7, 13)) == [(), (7,), (13,), (7, 13)]
    assert sort_sign([13, 7]) == -1 and sort_sign([7, 13, 19]) == 1


@pytest.mark.parametrize("r", [0, 1, 2])
def test_toy_datum(r):
    d = toy_datum(Z9, POOL, r)
    assert validate_selmer_datum(d)["valid"]
    sol = stark_solve(d, r)
    assert sol.free_rank_one
    eps = sol.generators[0]
    assert is_stark_system(eps)[0]
    e0 = rank_reduction(d, eps)
    assert is_stark_system(e0)[0]
    # on the free toy datum every I_i is the unit ideal
    assert stark_ideals(d, e0, 0).is_unit()


def test_toy_transitions_two_routes():
    d = toy_datum(Z9, (7, 13), 1)
    for mm in divisors(d.labels):
        B = d.bidual(d.selmer(mm, False), 1 + len(mm))
        for nn in divisors(mm):
            f = stark_transition(d, mm, nn, 1)
            for y in B.lattice.basis:
                assert np.array_equal(f.apply(y) % 9, transition_by_contraction(d, mm, nn, 1, y) % 9)


def test_transition_to_itself_is_identity():
    d = toy_datum(Z9, (7, 13), 0)
    B = d.bidual(d.selmer((7, 13), False), 2)
    f = stark_transition(d, (7, 13), (7, 13), 0)
    for y in B.lattice.basis:
        assert np.array_equal(f.apply(y) % 9, y.reshape(-1, 1) % 9)


RINGS = [RingDescriptor(3, 2), RingDescriptor(3, 3), RingDescriptor(3, 1, (3,))]


@settings(max_examples=6)
@given(st.integers(0, 2**20), st.sampled_from(RINGS), st.integers(1, 2), st.integers(0, 2))
def test_synthetic_data_pass_every_check(seed, R, t, r):
    d = synthetic_datum(seed, R, POOL[:t], r)
    res = stark_datum_checks(d, seed)
    assert all(res["checks"].values()), res


def test_rank_reduction_routes_agree():
    d = synthetic_datum(5, Z9, (7, 13), 2)
    eps = stark_solve(d, 2).generators[0]
    e0 = rank_reduction(d, eps)
    for k in divisors(d.labels):
        assert np.array_equal(reduction_by_contraction(d, eps, k) % 9, e0[k] % 9)
        assert np.array_equal(regulator(d, eps, k) % 9, regulator_cartesian(d, eps, k) % 9)
    assert kolyvagin_relation_check(d, eps)["valid"]


def test_coh_rel_and_fitting_on_synthetic():
    d = synthetic_datum(11, RingDescriptor(3, 1, (3,)), POOL, 0)
    e0 = stark_basis(d)
    rep = check_coh_rel(d, e0)
    assert rep["valid"] and rep["sigmas"] == "27"
    assert fitting_comparison(d, e0)["valid"]


def test_corrupted_datum_is_flagged():
    d = synthetic_datum(3, Z9, (7, 13), 0)
    bad = corrupt_datum(d, (7,))
    rep = validate_selmer_datum(bad)
    assert not rep["valid"]
    assert rep["failures"][0]["check"] == "cartesian square"


def test_perturbed_system_breaks_relation_ii():
    d = synthetic_datum(3, Z9, (7, 13), 0)
    e0 = stark_basis(d)
    assert not is_stark_system(perturb_system(e0, ()))[0]
    rep = check_coh_rel(d, perturb_system(e0, ()))
    assert any(f["relation"] == "ii" for f in rep["failures"])


def test_kappa_independent_of_ordering():
    d = synthetic_datum(2, Z9, POOL, 0)
    e0 = stark_basis(d)
    sig = {7: 13, 13: 19, 19: 7}
    a = kappa_sigma(d, e0, (7, 13), 19, sig)
    b = kappa_sigma(d, e0, (7, 13), 19, sig, order=(13, 7))
    assert np.array_equal(a % 9, b % 9)


def test_tilde_kappa_on_toy_and_bad_z():
    d = toy_datum(Z9, POOL, 0)
    e0 = stark_basis(d)
    z = find_z(d, 7, 13)
    assert z is not None
    sig = {q: q for q in POOL}
    rep = tilde_kappa_identity_check(d, e0, (19,), 7, 13, sig, z=z)
    assert rep["applicable"] and rep["valid"]
    with pytest.raises(StarkError):
        tilde_kappa_identity_check(d, e0, (19,), 7, 13, sig, z=2 * z % 9)
    with pytest.raises(StarkError):
        tilde_kappa_identity_check(d, e0, (7,), 7, 13, sig)


def test_descent_on_integral_tower():
    d = integral_datum(1, 3, 7, POOL, 0, max_exp=1)
    levels = descent_levels(d, 1, 2)
    assert levels is not None and levels[0] == 1
    e0 = stark_basis(d)
    rep = tilde_kappa_identity_check(d, e0, (19,), 7, 13, {q: q for q in POOL}, levels=levels)
    assert rep["applicable"] and rep["valid"]
    assert set(rep["checked"]) >= {"descent", "congruence"}


def test_datum_json_roundtrip():
    d = corrupt_datum(synthetic_datum(4, RingDescriptor(3, 1, (3,)), (7, 13), 1), (13,))
    e = SelmerDatum.from_json(d.to_json())
    assert e.to_json() == d.to_json()
    assert validate_selmer_datum(e)["valid"] == validate_selmer_datum(d)["valid"] is False
