import pytest

from bidual.kolyvagin import (
    InvarianceError,
    derivative_operator,
    frobenius_residue,
    is_galois_fixed,
    kolyvagin_class,
    leading_coeff_check,
    norm_operator,
    theta_ideal,
    tilde_kappa,
    tilde_theta_ideal,
    _sigma_power,
)
from bidual.modules import IdealHandle
from bidual.ring import CharacterSpec
from bidual.stickelberger import LevelField, build_window


def chi5(n):
    return CharacterSpec.from_exponents(5, 3, n, 2, [1])


@pytest.mark.parametrize("labels,n,cap", [((7,), 1, None), ((19, 109), 1, None), ((109, 271), 2, 2), ((7, 13), 2, None)])
def test_telescoping(labels, n, cap):
    F = LevelField(3, n, labels, cap)
    for q in labels:
        D = derivative_operator(F, q).element
        s = _sigma_power(F, q, 1)
        o = F.orders[F.labels.index(q)]
        assert (s - F.ring.one()) * D == F.ring.one() * o - norm_operator(F, q)


ADMISSIBLE = [(1, (19, 109, 181), 1), (1, (19, 109), None), (2, (109, 271), 2)]


@pytest.mark.parametrize("n,pool,cap", ADMISSIBLE)
def test_admissible_windows(n, pool, cap):
    w = build_window(3, n, chi5(n), pool, 2, cap)
    from itertools import combinations

    for k in range(3):
        for nn in combinations(pool, k):
            assert is_galois_fixed(w, (), nn)
            assert leading_coeff_check(w, (), nn, squares=True)
    th = [theta_ideal(w, (), pool, i) for i in range(3)]
    assert th[0] == IdealHandle.from_generators(th[0].ring, [w.values[()]])
    assert th[0] <= th[1] <= th[2]
    assert all(tilde_theta_ideal(w, (), pool, i) == th[i] for i in range(3))


def test_literal_leading_form_fails_at_two_labels():
    w = build_window(3, 1, chi5(1), (19, 109), 2)
    assert leading_coeff_check(w, (), (19,))
    assert not leading_coeff_check(w, (), (19, 109))
    assert leading_coeff_check(w, (), (19, 109), squares=True)


def test_non_admissible_label_raises_with_witness():
    w = build_window(3, 1, chi5(1), (7,), 1)
    with pytest.raises(InvarianceError) as exc:
        kolyvagin_class(w, (), (7,))
    assert exc.value.witness["label"] == "7"


def test_kappa_at_empty_n_is_base_class():
    w = build_window(3, 1, chi5(1), (19,), 1)
    assert kolyvagin_class(w, (), ()) == w.values[()]


def test_tilde_kappa_one_label_is_kappa():
    w = build_window(3, 1, chi5(1), (19, 109), 2)
    assert tilde_kappa(w, (), (19,)) == kolyvagin_class(w, (), (19,))


def test_frobenius_residue_range():
    w = build_window(3, 1, chi5(1), (19, 109), 2)
    o = w.field((19,)).orders[0]
    assert 0 <= frobenius_residue(w, 19, 109) < o
