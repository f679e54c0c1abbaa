"""Expected values computed by the brute-force oracles alone.

The test-suite reads the frozen copy in tests/fixtures/derived.json;
``bidual suite --oracle --output tests/fixtures/derived.json`` rebuilds it.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import oracles
from .ring import RingDescriptor
from .stickelberger import DirichletCharacter, CyclotomicNumber, dirichlet_characters
from .ring import is_prime

# small modules over small rings: (name, ring, gens, relations as nested lists)
MODULES = [
    ("Z/9: Z/3", (3, 2, ()), 1, [[[3]]]),
    ("Z/9: (Z/3)^2", (3, 2, ()), 2, [[[3], [0]], [[0], [3]]]),
    ("Z/9: Z/9 + Z/3", (3, 2, ()), 2, [[[0], [3]]]),
    ("Z/27: Z/3 + Z/9", (3, 3, ()), 2, [[[3], [0]], [[0], [9]]]),
    ("Z/27: coker [[3, 9], [0, 3]]", (3, 3, ()), 2, [[[3], [9]], [[0], [3]]]),
    ("Z/25: Z/5", (5, 2, ()), 1, [[[5]]]),
    ("Z/3[C3]: R/(s - 1)", (3, 1, (3,)), 1, [[[2, 1, 0]]]),
    ("Z/3[C3]: R/(s - 1)^2", (3, 1, (3,)), 1, [[[1, 1, 1]], [[1, 1, 1]]]),
    ("Z/9[C3]: R/(3, s - 1)", (3, 2, (3,)), 1, [[[3, 0, 0]], [[8, 1, 0]]]),
    ("Z/9[C3]: R/(3)", (3, 2, (3,)), 1, [[[3, 0, 0]]]),
    ("Z/9[C3]: R/(norm)", (3, 2, (3,)), 1, [[[1, 1, 1]]]),
]

# square matrices for the determinant oracle
DETERMINANTS = [
    ("Z/9[C3] 2x2", (3, 2, (3,)), [[[1, 2, 0], [3, 0, 1]], [[0, 1, 1], [2, 2, 5]]]),
    ("Z/9[C3] 3x3", (3, 2, (3,)), [[[1, 0, 0], [0, 1, 0], [2, 0, 7]], [[0, 3, 0], [1, 1, 1], [0, 0, 4]], [[5, 0, 1], [0, 2, 0], [1, 0, 0]]]),
    ("Z/27 3x3", (3, 3, ()), [[[2], [5], [7]], [[1], [3], [9]], [[4], [0], [1]]]),
    ("Z/25[C5] 2x2", (5, 2, (5,)), [[[1, 1, 0, 0, 0], [0, 0, 5, 0, 1]], [[3, 0, 0, 0, 2], [0, 1, 0, 0, 0]]]),
]

HOM_PAIRS = [
    ("Z/9", 0, 2), ("Z/9", 1, 0), ("Z/9", 2, 2), ("Z/27", 3, 4), ("Z/27", 4, 4),
]


def _ring(spec) -> RingDescriptor:
    return RingDescriptor(spec[0], spec[1], tuple(spec[2]))


def _elements(S) -> list[list[str]]:
    return [[str(c) for c in e] for e in sorted(S)]


def _frac(c: Fraction) -> str:
    return str(c)


def module_fixtures() -> list[dict]:
    out = []
    for name, rs, g, rel in MODULES:
        R = _ring(rs)
        relations = np.array(rel, dtype=np.int64).reshape(-1, g, R.order)
        ann = oracles.annihilator_elements(R, g, relations)
        fitt = []
        for i in range(g + 1):
            minors = oracles.fitting_minors(R, g, relations, i)
            fitt.append(_elements(oracles.ideal_elements(R, minors)))
        out.append(
            {
                "name": name,
                "ring": {"p": str(R.p), "n": str(R.n), "invariant_factors": [str(d) for d in R.invariant_factors]},
                "gens": str(g),
                "relations": [[[str(c) for c in e] for e in row] for row in relations],
                "order": str(oracles.module_order(R, g, relations)),
                "length": str(oracles.module_length(R, g, relations)),
                "annihilator": _elements(ann),
                "fitting": fitt,
            }
        )
    return out


def determinant_fixtures() -> list[dict]:
    out = []
    for name, rs, M in DETERMINANTS:
        R = _ring(rs)
        out.append({"name": name, "ring": {"p": str(R.p), "n": str(R.n), "invariant_factors": [str(d) for d in R.invariant_factors]}, "matrix": [[[str(c) for c in e] for e in row] for row in M], "det": [str(c) for c in oracles.det_leibniz(M, R)]})
    return out


def hom_fixtures() -> list[dict]:
    out = []
    for ring_name, i, j in HOM_PAIRS:
        _, rs1, g1, rel1 = MODULES[i]
        _, rs2, g2, rel2 = MODULES[j]
        R = _ring(rs1)
        r1 = np.array(rel1, dtype=np.int64).reshape(-1, g1)
        r2 = np.array(rel2, dtype=np.int64).reshape(-1, g2)
        out.append({"source": MODULES[i][0], "target": MODULES[j][0], "count": str(oracles.count_homs(R, g1, r1, g2, r2))})
    return out


def zeta_fixtures() -> dict:
    table = {}
    for m in (3, 4, 5, 7, 12, 21):
        table[str(m)] = {str(a): _frac(oracles.hurwitz_partial_zeta_zero(m, a)) for a in range(1, m + 1) if np.gcd(a, m) == 1}
    return table


def _euler_rhs(psi: DirichletCharacter, m: int) -> CyclotomicNumber:
    N = psi.root_order
    rhs = oracles.character_sum_b1(psi) * -1
    for q in range(2, m + 1):
        if is_prime(q) and m % q == 0 and psi.conductor % q:
            rhs = rhs * (CyclotomicNumber.rational(N, 1) - CyclotomicNumber.root(N, -psi.primitive_exponent(q)))
    return rhs


def character_fixtures() -> list[dict]:
    out = []
    for m in (7, 9, 12, 21):
        for psi in dirichlet_characters(m):
            if psi.is_odd():
                out.append({"m": str(m), "exponents": [str(e) for e in psi.exps], "conductor": str(psi.conductor), "value": str(_euler_rhs(psi, m))})
    return out


def derived_fixtures() -> dict:
    return {
        "modules": module_fixtures(),
        "determinants": determinant_fixtures(),
        "homs": hom_fixtures(),
        "partial_zeta": zeta_fixtures(),
        "characters": character_fixtures(),
    }
