"""Brute-force oracles, kept independent of the Howell-form engine.

These enumerate or use textbook formulas directly.  They are slow and only
meant for the small instances that freeze expected values into tests and
fixtures.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations, product
from math import gcd

import numpy as np
from sympy import Matrix, Rational, bernoulli
from sympy.matrices.normalforms import smith_normal_form

from .ring import RingDescriptor


def _mul(a, b, ring: RingDescriptor) -> tuple[int, ...]:
    """Group-ring product by the multiplication table."""
    out = [0] * ring.order
    T = ring.mul_table
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if y:
                k = int(T[i, j])
                out[k] = (out[k] + x * y) % ring.q
    return tuple(out)


def ring_elements(ring: RingDescriptor):
    return product(range(ring.q), repeat=ring.order)


def module_order(ring: RingDescriptor, gens: int, relations) -> int:
    """|R^g / relations| via the Smith form of the relation lattice over Z."""
    m = ring.order
    rows = []
    rel = np.asarray(relations, dtype=np.int64).reshape(-1, gens, m)
    for r in rel:
        for h in range(m):
            # h * r: shift coefficients by the group element h
            v = [0] * (gens * m)
            for g in range(gens):
                for i, c in enumerate(r[g]):
                    if c:
                        v[g * m + int(ring.mul_table[h, i])] += int(c)
            rows.append(v)
    dim = gens * m
    for i in range(dim):
        rows.append([ring.q if j == i else 0 for j in range(dim)])
    if dim == 0:
        return 1
    S = smith_normal_form(Matrix(rows))
    out = 1
    for i in range(dim):
        out *= abs(int(S[i, i]))
    return out


def module_length(ring: RingDescriptor, gens: int, relations) -> int:
    n = module_order(ring, gens, relations)
    k = 0
    while n % ring.p == 0:
        n //= ring.p
        k += 1
    return k


def _in_span(v, ring: RingDescriptor, gens: int, relations) -> bool:
    """v in the relation module, decided by comparing orders (adding v does not grow it)."""
    rel = np.asarray(relations, dtype=np.int64).reshape(-1, gens, ring.order)
    ext = np.concatenate([rel, np.asarray(v, dtype=np.int64).reshape(1, gens, ring.order)], axis=0)
    return module_order(ring, gens, rel) == module_order(ring, gens, ext)


def annihilator_elements(ring: RingDescriptor, gens: int, relations) -> list[tuple[int, ...]]:
    """Every a in R with a M = 0, by exhaustion."""
    out = []
    base = module_order(ring, gens, relations)
    rel = np.asarray(relations, dtype=np.int64).reshape(-1, gens, ring.order)
    for a in ring_elements(ring):
        rows = []
        for g in range(gens):
            v = np.zeros((gens, ring.order), dtype=np.int64)
            v[g] = a
            rows.append(v)
        ext = np.concatenate([rel] + [r.reshape(1, gens, ring.order) for r in rows], axis=0) if rows else rel
        if module_order(ring, gens, ext) == base:
            out.append(a)
    return out


def ideal_elements(ring: RingDescriptor, generators) -> set[tuple[int, ...]]:
    """The ideal generated by the given elements, as a set, by closure."""
    gens = [tuple(int(c) % ring.q for c in g) for g in generators]
    zero = tuple([0] * ring.order)
    seen = {zero}
    frontier = [zero]
    steps = set()
    for g in gens:
        for h in range(ring.order):
            e = [0] * ring.order
            e[h] = 1
            steps.add(_mul(g, e, ring))
    steps.discard(zero)
    while frontier:
        nxt = []
        for x in frontier:
            for s in steps:
                y = tuple((a + b) % ring.q for a, b in zip(x, s))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def det_leibniz(M, ring: RingDescriptor) -> tuple[int, ...]:
    """Determinant of a square group-ring matrix by the permutation expansion."""
    k = len(M)
    acc = [0] * ring.order
    if k == 0:
        acc[0] = 1
        return tuple(acc)
    for perm in permutations(range(k)):
        sign = 1
        for i in range(k):
            for j in range(i + 1, k):
                if perm[i] > perm[j]:
                    sign = -sign
        term = tuple([1] + [0] * (ring.order - 1))
        for i in range(k):
            term = _mul(term, M[i][perm[i]], ring)
        acc = [(a + sign * b) % ring.q for a, b in zip(acc, term)]
    return tuple(acc)


def fitting_minors(ring: RingDescriptor, gens: int, relations, i: int) -> list[tuple[int, ...]]:
    """All (g - i)-minors of the relation matrix (padded with zero rows)."""
    from itertools import combinations

    rel = [[tuple(int(c) for c in e) for e in row] for row in np.asarray(relations, dtype=np.int64).reshape(-1, gens, ring.order)]
    size = gens - i
    if size <= 0:
        return [tuple([1] + [0] * (ring.order - 1))]
    out = []
    for rows in combinations(range(len(rel)), size):
        for cols in combinations(range(gens), size):
            out.append(det_leibniz([[rel[r][c] for c in cols] for r in rows], ring))
    return out


def count_homs(ring: RingDescriptor, g1: int, rel1, g2: int, rel2) -> int:
    """|Hom(M1, M2)| by trying every assignment of generators (scalar rings only)."""
    if ring.order != 1:
        raise ValueError("enumeration oracle only for scalar rings")
    rel1 = np.asarray(rel1, dtype=np.int64).reshape(-1, g1)
    rel2 = np.asarray(rel2, dtype=np.int64).reshape(-1, g2)
    q = ring.q
    # elements of M2 up to equality: reps of Z/q^g2 modulo the relation span
    span = set()
    for coeffs in product(range(q), repeat=rel2.shape[0]):
        span.add(tuple(int(x) % q for x in (np.array(coeffs) @ rel2 if rel2.shape[0] else np.zeros(g2, dtype=np.int64))))
    reps = {}
    for v in product(range(q), repeat=g2):
        key = min(tuple((a + b) % q for a, b in zip(v, s)) for s in span)
        reps.setdefault(key, v)
    elems = list(reps.values())
    count = 0
    for imgs in product(elems, repeat=g1):
        ok = True
        for r in rel1:
            w = [sum(int(r[i]) * imgs[i][j] for i in range(g1)) % q for j in range(g2)]
            if tuple(w) not in span:
                ok = False
                break
        count += ok
    return count


# ---------------------------------------------------------------------------
# number theory


def hurwitz_partial_zeta_zero(m: int, a: int) -> Fraction:
    """zeta_m(0, a) = -B_1(a/m) by the Bernoulli polynomial, a in [1, m]."""
    from sympy import Symbol

    x = Symbol("x")
    a = a % m or m
    val = -bernoulli(1, x).subs(x, Rational(a, m))
    return Fraction(int(val.p), int(val.q))


def character_sum_b1(psi, conj: bool = True):
    """B_{1, psibar} (or B_{1, psi}) as an exact cyclotomic number, psi primitive mod its conductor."""
    from .stickelberger import CyclotomicNumber

    f = psi.conductor
    N = psi.root_order
    acc = CyclotomicNumber.zero(N)
    for a in range(1, f + 1):
        if gcd(a, f) != 1:
            continue
        e = psi.primitive_exponent(a)
        acc = acc.add_root(Fraction(a, f), -e if conj else e)
    return acc
