"""Kolyvagin derivative classes and Theta ideals from Euler-system windows."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations, product
from typing import Sequence

import numpy as np

from .linalg import Lattice
from .modules import IdealHandle
from .ring import GroupRingElement, RingDescriptor
from .stickelberger import (
    EulerSystemWindow,
    LevelField,
    StickelbergerError,
    _dlog_prime,
    frobenius_polynomial,
    project_field,
)


class KolyvaginError(ValueError):
    pass


class InvarianceError(KolyvaginError):
    """The derivative class is not fixed by Gal(K(n)/K)."""

    def __init__(self, msg, witness=None):
        super().__init__(msg)
        self.witness = witness


@dataclass(frozen=True)
class PrimeLabel:
    q: int
    p: int
    order: int
    generator: int = 1  # sigma_q corresponds to this exponent of the fixed primitive root

    def to_json(self):
        return {"q": str(self.q), "order": str(self.order), "sigma_q": f"g^{self.generator}"}


@dataclass(frozen=True, eq=False)
class DerivativeOperator:
    ring: RingDescriptor
    labels: tuple[int, ...]
    element: GroupRingElement


def _sigma_power(F: LevelField, q: int, i: int) -> GroupRingElement:
    ex = [0] * len(F.orders)
    ex[F.labels.index(q)] = i
    return F.ring.group_element(F.structure.index_in(F.ring, ex))


def derivative_operator(F: LevelField, labels: Sequence[int] | int) -> DerivativeOperator:
    """D = prod_q sum_i i sigma_q^i inside R_{F,n}."""
    if isinstance(labels, int):
        labels = (labels,)
    labels = tuple(sorted(labels))
    g = np.zeros(F.orders, dtype=np.int64)
    g[(0,) * len(F.orders)] = 1
    g = _apply_derivative(F, labels, g)
    return DerivativeOperator(F.ring, labels, F.from_grid(g))


def _apply_derivative(F: LevelField, labels: Sequence[int], g: np.ndarray) -> np.ndarray:
    for q in labels:
        ax = F.labels.index(q)
        o = F.orders[ax]
        acc = np.zeros_like(g)
        for i in range(1, o):
            acc += i * np.roll(g, i, axis=ax)
        g = acc % F.ring.q
    return g


def norm_operator(F: LevelField, q: int) -> GroupRingElement:
    o = F.orders[F.labels.index(q)]
    out = F.ring.zero()
    for i in range(o):
        out = out + _sigma_power(F, q, i)
    return out


def _fields(w: EulerSystemWindow, K: Sequence[int], nn: Sequence[int]):
    K = tuple(sorted(K))
    nn = tuple(sorted(nn))
    if set(K) & set(nn):
        raise KolyvaginError("labels of n must not ramify in K")
    big = tuple(sorted(K + nn))
    if big not in w.values:
        raise KolyvaginError(f"window has no level for labels {list(big)}")
    return w.field(K), w.field(big), big


def _axes(Fb: LevelField, nn: Sequence[int]) -> list[int]:
    return [Fb.labels.index(q) for q in sorted(nn)]


def _descent(F_small: LevelField, F_big: LevelField, g: np.ndarray, nn: Sequence[int]):
    """If the grid g is fixed by every sigma_q (q in nn), return y in R_small with g = y * N."""
    for q, ax in zip(sorted(nn), _axes(F_big, nn)):
        if not np.array_equal(np.roll(g, 1, axis=ax), g):
            return None, q
    idx = tuple(0 if j in _axes(F_big, nn) else slice(None) for j in range(g.ndim))
    return F_small.from_grid(g[idx]), None


def lift(F_small: LevelField, F_big: LevelField, y: GroupRingElement) -> GroupRingElement:
    """The section R_{K,n} -> R_{K(n),n} putting every G_q-coordinate at 0."""
    nn = [q for q in F_big.labels if q not in F_small.labels]
    g = np.zeros(F_big.orders, dtype=np.int64)
    idx = tuple(0 if j in _axes(F_big, nn) else slice(None) for j in range(g.ndim))
    g[idx] = F_small.to_grid(y)
    return F_big.from_grid(g)


def derivative_image(w: EulerSystemWindow, K: Sequence[int], nn: Sequence[int]) -> GroupRingElement:
    """D_n c_{K(n)} in R_{K(n),n} (before descent)."""
    _, Fb, big = _fields(w, K, nn)
    return Fb.from_grid(_apply_derivative(Fb, sorted(nn), Fb.to_grid(w.values[big])))


def kolyvagin_class(w: EulerSystemWindow, K: Sequence[int], nn: Sequence[int]) -> GroupRingElement:
    """pi(D_n c_{K(n)}), checked to be Gal(K(n)/K)-fixed and descended to R_{K,n}."""
    Fs, Fb, big = _fields(w, K, nn)
    g = _apply_derivative(Fb, sorted(nn), Fb.to_grid(w.values[big]))
    y, bad = _descent(Fs, Fb, g, nn)
    if y is None:
        raise InvarianceError(
            f"D c is not fixed by sigma_{bad} for n = {list(nn)}",
            witness={"n": [str(q) for q in sorted(nn)], "label": str(bad), "value": Fb.from_grid(g).to_json()},
        )
    return y


def is_galois_fixed(w: EulerSystemWindow, K: Sequence[int], nn: Sequence[int]) -> bool:
    try:
        kolyvagin_class(w, K, nn)
        return True
    except InvarianceError:
        return False


def _relative_slices(Fb: LevelField, nn: Sequence[int], x: GroupRingElement) -> np.ndarray:
    """Rows indexed by Gal(K k_n/Q), columns by prod G_q in mixed radix over sorted nn."""
    g = Fb.to_grid(x)
    axes = _axes(Fb, nn)
    rest = [j for j in range(g.ndim) if j not in axes]
    g = np.transpose(g, rest + axes)
    size = int(np.prod([Fb.orders[a] for a in axes])) if axes else 1
    return g.reshape(-1, size)


def _monomial(orders: Sequence[int], alpha: Sequence[int], q: int) -> np.ndarray:
    """prod (sigma_i - 1)^alpha_i in Z/q[prod C_orders] as a grid."""
    g = np.zeros(orders, dtype=np.int64)
    g[(0,) * len(orders)] = 1
    for ax, a in enumerate(alpha):
        for _ in range(a):
            g = (np.roll(g, 1, axis=ax) - g) % q
    return g


def relative_augmentation_lattice(orders: Sequence[int], p: int, n: int, k: int, squares: bool = False) -> Lattice:
    """I^k (plus every I_q^2 when squares=True) inside Z/p^n[prod C_orders], as a lattice."""
    q = p**n
    nv = len(orders)
    gens = [a for a in product(*(range(k + 1) for _ in orders)) if sum(a) == k]
    if squares:
        for i in range(nv):
            e = [0] * nv
            e[i] = 2
            gens.append(tuple(e))
    size = int(np.prod(orders)) if orders else 1
    rows = []
    for alpha in gens:
        g = _monomial(orders, alpha, q)
        for shift in product(*(range(o) for o in orders)):
            rows.append(np.roll(g, shift, axis=tuple(range(nv))).ravel() if nv else g.ravel())
    if not rows:
        return Lattice.zero(p, n, size)
    return Lattice.span(np.array(rows, dtype=np.int64), p, n, size)


def leading_coeff_check(
    w: EulerSystemWindow,
    K: Sequence[int],
    nn: Sequence[int],
    kappa: GroupRingElement | None = None,
    squares: bool = False,
) -> bool:
    """pi(c_{K(n)}) == (-1)^nu kappa prod(sigma_q - 1) modulo I^(nu+1).

    With squares=True the congruence is taken modulo I^(nu+1) + sum_q I_q^2,
    the quotient in which only square-free monomials in the sigma_q - 1 survive.
    """
    Fs, Fb, big = _fields(w, K, nn)
    nn = tuple(sorted(nn))
    nu = len(nn)
    if kappa is None:
        try:
            kappa = kolyvagin_class(w, K, nn)
        except InvarianceError:
            return False
    gk = Fb.to_grid(lift(Fs, Fb, kappa)) * ((-1) ** nu)
    for ax in _axes(Fb, nn):
        gk = np.roll(gk, 1, axis=ax) - gk
    diff = w.values[big] - Fb.from_grid(gk % Fb.ring.q)
    orders = [Fb.orders[a] for a in _axes(Fb, nn)]
    J = relative_augmentation_lattice(orders, w.p, w.n, nu + 1, squares)
    return J.contains_all(_relative_slices(Fb, nn, diff))


def frobenius_residue(w: EulerSystemWindow, q: int, r: int) -> int:
    """a with P_r(Frob_r^-1) = a (sigma_q - 1) mod I_q^2: the G_q-coordinate of Frob_r."""
    o = w.field((q,)).orders[0]
    return _dlog_prime(q, r % q) % o


def _fixed_point_free_part(tau: dict[int, int]) -> tuple[int, ...]:
    return tuple(sorted(q for q, v in tau.items() if q != v))


def _perm_sign(seq: Sequence[int], image: Sequence[int]) -> int:
    pos = {v: i for i, v in enumerate(seq)}
    perm = [pos[x] for x in image]
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, L = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            L += 1
        if L % 2 == 0:
            sign = -sign
    return sign


def tilde_kappa(w: EulerSystemWindow, K: Sequence[int], nn: Sequence[int], cache: dict | None = None) -> GroupRingElement:
    """sum over permutations tau of the labels of sgn(tau) prod_{q moved} a_{tau,q} kappa_{fixed(tau)}."""
    nn = tuple(sorted(nn))
    cache = {} if cache is None else cache
    Fs = w.field(tuple(sorted(K)))
    q_mod = Fs.ring.q
    out = Fs.ring.zero()
    for image in permutations(nn):
        tau = dict(zip(nn, image))
        moved = _fixed_point_free_part(tau)
        coeff = _perm_sign(nn, image)
        for q in moved:
            coeff = coeff * frobenius_residue(w, q, tau[q])
        coeff %= q_mod
        if not coeff:
            continue
        fixed = tuple(q for q in nn if tau[q] == q)
        if fixed not in cache:
            cache[fixed] = kolyvagin_class(w, K, fixed)
        out = out + cache[fixed] * coeff
    return out


def _subsets(pool: Sequence[int], i: int):
    for k in range(i + 1):
        yield from combinations(sorted(pool), k)


def theta_ideal(w: EulerSystemWindow, K: Sequence[int], pool: Sequence[int], i: int) -> IdealHandle:
    Fs = w.field(tuple(sorted(K)))
    gens = [kolyvagin_class(w, K, nn) for nn in _subsets(pool, i)]
    return IdealHandle.from_generators(Fs.ring, gens)


def tilde_theta_ideal(w: EulerSystemWindow, K: Sequence[int], pool: Sequence[int], i: int) -> IdealHandle:
    Fs = w.field(tuple(sorted(K)))
    cache: dict = {}
    gens = [tilde_kappa(w, K, nn, cache) for nn in _subsets(pool, i)]
    return IdealHandle.from_generators(Fs.ring, gens)


def corrupt_window(w: EulerSystemWindow, labels: Sequence[int], index: int = 0, delta: int = 1) -> EulerSystemWindow:
    labels = tuple(sorted(labels))
    v = w.values[labels]
    c = list(v.coeffs)
    c[index] = (c[index] + delta) % v.ring.q
    return w.with_value(labels, GroupRingElement(v.ring, tuple(c)))
