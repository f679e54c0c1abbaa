"""Property suites: seeded random instances plus fixed exact identities.

Every suite returns a JSON-ready report whose content depends only on the
seed and the configuration.  Cases run on a thread pool; results are
collected in case-id order.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import combinations
from math import comb, gcd
from typing import Callable

import numpy as np

from . import oracles
from .kolyvagin import (
    InvarianceError,
    is_galois_fixed,
    kolyvagin_class,
    leading_coeff_check,
    theta_ideal,
    tilde_theta_ideal,
)
from .linalg import Lattice, expand_scalars, kernel, solve
from .modules import (
    CartesianSquare,
    IdealHandle,
    KernelPresentation,
    PresentedModule,
    annihilator,
    cartesian_map,
    characteristic_ideal,
    dual,
    exterior_bidual,
    fitting_ideal,
    ideal_compare,
    induced_bidual_map,
    preimage_submodule,
    reflexive_image,
    submodule_presentation,
)
from .ring import CharacterSpec, RingDescriptor, is_prime
from .stark import (
    StarkError,
    SelmerDatum,
    check_coh_rel,
    corrupt_datum,
    delta_ideal,
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
    stark_ideals,
    stark_solve,
    stark_transition,
    synthetic_datum,
    tilde_kappa_identity_check,
    toy_datum,
    transition_by_contraction,
)
from .stickelberger import (
    IntegralityError,
    build_window,
    dirichlet_characters,
    euler_window_validate,
    flat_coefficients,
    stickelberger_element,
)

log = logging.getLogger(__name__)

SUITE_NAMES = ("appendix-c", "bidual", "stickelberger", "kolyvagin", "stark")


class SuiteError(ValueError):
    pass


def _rng(seed: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) % 2**32, *[int(t) for t in tags]])


def _run_cases(fn: Callable, n: int, workers: int) -> list:
    if workers <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, range(n)))


def _section(name: str, results: list[dict], extra: dict | None = None) -> dict:
    """Merge per-case results: each is {"id", "checks": {name: bool}, optional "witness"}."""
    counts: dict[str, list[int]] = {}
    failures = []
    witnesses = []
    for r in sorted(results, key=lambda r: r["id"]):
        for k, ok in r["checks"].items():
            c = counts.setdefault(k, [0, 0])
            c[0] += 1
            c[1] += bool(ok)
            if not ok:
                failures.append({"case": r["id"], "check": k, **r.get("detail", {})})
        if r.get("witness"):
            witnesses.append({"case": r["id"], **r["witness"]})
    out = {
        "name": name,
        "cases": str(len(results)),
        "checks": {k: {"run": str(v[0]), "passed": str(v[1])} for k, v in sorted(counts.items())},
        "passed": not failures,
        "failures": failures[:10],
        "failure_count": str(len(failures)),
    }
    if witnesses:
        out["witnesses"] = witnesses[:10]
        out["witness_count"] = str(len(witnesses))
    if extra:
        out.update(extra)
    return out


# ---------------------------------------------------------------------------
# random modules


def random_element(rng: np.random.Generator, R: RingDescriptor) -> np.ndarray:
    """Zero, a unit-ish element, or one pushed into the maximal ideal by p^j or (s - 1)."""
    m = R.order
    u = rng.random()
    if u < 0.3:
        return np.zeros(m, dtype=np.int64)
    x = rng.integers(0, R.q, m).astype(np.int64)
    j = int(rng.integers(0, R.n + 1))
    x = x * R.p**j % R.q
    if m > 1 and rng.random() < 0.4:
        # multiply by (s - 1) for the first group generator
        s = np.zeros(m, dtype=np.int64)
        s[R.generator_indices[0]] = 1
        s[0] -= 1
        x = _gmul(x, s, R)
    return x % R.q


def _gmul(a, b, R: RingDescriptor) -> np.ndarray:
    from .modules import gmul

    return gmul(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64), R)


def random_module(rng: np.random.Generator, R: RingDescriptor, max_gens: int = 3, max_rels: int = 4) -> PresentedModule:
    g = int(rng.integers(1, max_gens + 1))
    k = int(rng.integers(0, max_rels + 1))
    rel = np.zeros((k, g, R.order), dtype=np.int64)
    for i in range(k):
        for j in range(g):
            rel[i, j] = random_element(rng, R)
    return PresentedModule(R, g, rel)


def random_invertible_matrix(rng: np.random.Generator, R: RingDescriptor, g: int) -> np.ndarray:
    from .stark import random_invertible

    return random_invertible(rng, R, g)


def _mod_json(M: PresentedModule) -> dict:
    return M.to_json()


APPENDIX_RINGS = (RingDescriptor(3, 2, (3,)), RingDescriptor(3, 3, (9,)), RingDescriptor(5, 2, (5,)))


def _appendix_case(seed: int, ri: int, i: int) -> dict:
    R = APPENDIX_RINGS[ri]
    rng = _rng(seed, 1, ri, i)
    M = random_module(rng, R)
    ch = characteristic_ideal(M)
    ann = annihilator(M)
    f0 = fitting_ideal(M, 0)
    out = {
        "id": f"{ri:02d}-{i:04d}",
        "checks": {"char = Ann": ch == ann, "Fitt0 in char": f0 <= ch},
    }
    if f0 <= ch and not (f0 == ch):
        out["witness"] = {"module": _mod_json(M), "fitt0": f0.describe(), "char": ch.describe()}
    if not out["checks"]["char = Ann"]:
        out["detail"] = {"module": _mod_json(M), "char": ch.describe(), "ann": ann.describe()}
    return out


def _submodule_case(seed: int, i: int) -> dict:
    ri = i % len(APPENDIX_RINGS)
    R = APPENDIX_RINGS[ri]
    rng = _rng(seed, 2, i)
    M = random_module(rng, R)
    k = int(rng.integers(1, 3))
    elems = np.array([[random_element(rng, R) for _ in range(M.gens)] for _ in range(k)], dtype=np.int64)
    N, inc = submodule_presentation(M, elems)
    cm, cn = characteristic_ideal(M), characteristic_ideal(N)
    out = {"id": f"{i:04d}", "checks": {"char(M) in char(N)": cm <= cn, "inclusion injective": inc.is_injective()}}
    if not cm <= cn:
        out["detail"] = {"module": _mod_json(M), "char_M": cm.describe(), "char_N": cn.describe()}
    return out


def _presentation_case(seed: int, i: int) -> dict:
    ri = i % len(APPENDIX_RINGS)
    R = APPENDIX_RINGS[ri]
    rng = _rng(seed, 3, i)
    M = random_module(rng, R)
    M2 = M.with_free_summand(1)
    # a third presentation: change of generators and a redundant relation
    U = random_invertible_matrix(rng, R, M.gens)
    from .modules import group_matmul

    rel = group_matmul(M.relations, U, R) if M.relations.shape[0] else M.relations
    if rel.shape[0]:
        c = np.array([[random_element(rng, R)] for _ in range(rel.shape[0])], dtype=np.int64).reshape(1, rel.shape[0], R.order)
        extra = group_matmul(c, rel, R)
        rel = np.concatenate([rel, extra], axis=0)
    M3 = PresentedModule(R, M.gens, rel)
    ok_char = characteristic_ideal(M) == characteristic_ideal(M2) == characteristic_ideal(M3)
    ok_fitt = all(fitting_ideal(M, j) == fitting_ideal(M2, j) == fitting_ideal(M3, j) for j in range(M.gens + 1))
    return {"id": f"{i:04d}", "checks": {"char independent": ok_char, "Fitt independent": ok_fitt}}


def _non_additivity_witness() -> dict:
    R = RingDescriptor(3, 2)
    A = PresentedModule.cyclic(R, [R.scalar(3)])
    S = A.direct_sum(A)
    cs = characteristic_ideal(S)
    prod = characteristic_ideal(A) * characteristic_ideal(A)
    return {"ring": "Z/9", "char_sum": cs.describe(), "char_product": prod.describe(), "differ": not (cs == prod)}


def suite_appendix_c(seed: int = 0, workers: int = 4, count: int = 200, pairs: int = 200, presentations: int = 100) -> dict:
    sections = []
    for ri, R in enumerate(APPENDIX_RINGS):
        res = _run_cases(lambda i: _appendix_case(seed, ri, i), count, workers)
        name = f"char vs Ann and Fitt0 over {_ring_name(R)}"
        sec = _section(name, res)
        sections.append(sec)
    # the named strict-inclusion example
    R = RingDescriptor(3, 2)
    X = PresentedModule.diagonal(R, [R.scalar(3), R.scalar(3)])
    f0, ch = fitting_ideal(X, 0), characteristic_ideal(X)
    fixed = {
        "id": "fixed",
        "checks": {"(Z/3)^2 over Z/9: Fitt0 = (0)": f0.is_zero(), "(Z/3)^2 over Z/9: char = (3)": ch == IdealHandle.from_generators(R, [R.scalar(3)])},
        "witness": {"module": "(Z/3)^2 over Z/9", "fitt0": f0.describe(), "char": ch.describe()},
    }
    na = _non_additivity_witness()
    refl = []
    for i in range(20):
        rng = _rng(seed, 4, i)
        Ri = APPENDIX_RINGS[i % 3]
        c = characteristic_ideal(random_module(rng, Ri))
        refl.append({"id": f"{i:04d}", "checks": {"char reflexive": reflexive_image(c) == c}})
    sections.append(_section("fixed witnesses", [fixed, {"id": "non-additive", "checks": {"char not additive on Z/3 + Z/3": na["differ"]}, "witness": na}]))
    sections.append(_section("reflexivity of char", refl))
    sections.append(_section("submodule inequality", _run_cases(lambda i: _submodule_case(seed, i), pairs, workers)))
    sections.append(_section("presentation independence", _run_cases(lambda i: _presentation_case(seed, i), presentations, workers)))
    strict = sum(int(s.get("witness_count", "0")) for s in sections[:3])
    sections[3]["strict_random_witnesses"] = str(strict)
    return _report("appendix-c", seed, sections)


def _ring_name(R: RingDescriptor) -> str:
    s = f"Z/{R.q}"
    if R.invariant_factors:
        s += "[" + " x ".join(f"C{d}" for d in R.invariant_factors) + "]"
    return s


# ---------------------------------------------------------------------------
# bi-duals

BIDUAL_RINGS = (RingDescriptor(3, 2), RingDescriptor(3, 1, (3,)), RingDescriptor(3, 2, (3,)), RingDescriptor(5, 1, (5,)))


def _matlis_case(seed: int, i: int) -> dict:
    R = BIDUAL_RINGS[i % len(BIDUAL_RINGS)]
    M = random_module(_rng(seed, 10, i), R)
    D = dual(M)
    B = exterior_bidual(M, 1, dualmod=D)
    return {"id": f"{i:04d}", "checks": {"length(M*) = length(M)": D.module.length() == M.length(), "xi^1 bijective": B.xi_is_bijective()}}


def _free_case(i: int) -> dict:
    R = BIDUAL_RINGS[i % len(BIDUAL_RINGS)]
    k = 1 + i // len(BIDUAL_RINGS) % 3
    out = {}
    F = PresentedModule.free(R, k)
    for r in range(k + 1):
        B = exterior_bidual(F, r)
        out[f"r={r}"] = B.length() == comb(k, r) * R.order * R.n and B.xi_is_bijective()
    return {"id": f"{i:04d}", "checks": {"free bi-dual = exterior power": all(out.values())}}


def _expre_case(seed: int, i: int) -> dict:
    R = BIDUAL_RINGS[i % len(BIDUAL_RINGS)]
    rng = _rng(seed, 11, i)
    a = int(rng.integers(1, 4))
    b = int(rng.integers(1, 3))
    alpha = np.array([[random_element(rng, R) for _ in range(b)] for _ in range(a)], dtype=np.int64)
    KP = KernelPresentation(R, alpha)
    ok = True
    inj = True
    for r in range(1, a + 1):
        img = KP.bidual_in_free(r)
        ok = ok and img == KP.koszul_kernel(r)
        inj = inj and img.length() == KP.bidual_definitional_length(r)
    return {"id": f"{i:04d}", "checks": {"kernel formula = definition": ok, "bi-dual into free injective": inj}}


def _nested_triple(rng: np.random.Generator, R: RingDescriptor):
    """M1 in M2 in M3 inside R^d, cut out by the last coordinates of a map to F3 = R^s3."""
    d = int(rng.integers(2, 4))
    s3 = int(rng.integers(1, 3))
    s2 = int(rng.integers(0, s3 + 1))
    s1 = int(rng.integers(0, s2 + 1))
    m = R.order
    pi = np.array([[random_element(rng, R) for _ in range(s3)] for _ in range(d)], dtype=np.int64)
    # M3: a random submodule of R^d
    k = int(rng.integers(1, d + 2))
    gens = np.array([[random_element(rng, R) for _ in range(d)] for _ in range(k)], dtype=np.int64)
    amb = PresentedModule.free(R, d)
    L3 = Lattice.span(expand_scalars(gens, R), R.p, R.n, d * m)

    def cut(s):
        if s == s3:
            return L3
        K = kernel(expand_scalars(pi[:, s:], R), R.p, R.n)
        return L3.intersect(Lattice.span(K, R.p, R.n, d * m))

    mods = []
    for s in (s1, s2, s3):
        mod, inc = preimage_submodule(amb, cut(s))
        mods.append((mod, np.asarray(inc.action), s))
    return mods, pi


def _incl(small, big, R) -> np.ndarray:
    g1, g2 = small.shape[0], big.shape[0]
    out = np.zeros((g1, g2, R.order), dtype=np.int64)
    E = expand_scalars(big, R) if g2 else None
    for i, v in enumerate(small):
        if not v.any():
            continue
        x = solve(E, v.ravel(), R.p, R.n)
        out[i] = x.reshape(g2, R.order)
    return out


def _square_of(a, b, pi, R) -> CartesianSquare:
    (M1, G1, s1), (M2, G2, s2) = a, b
    from .modules import group_matmul

    def vals(G, s):
        if G.shape[0] == 0 or s == 0:
            return np.zeros((G.shape[0], s, R.order), dtype=np.int64)
        return group_matmul(G, pi[:, :s], R)

    J = np.zeros((s1, s2, R.order), dtype=np.int64)
    for i in range(s1):
        J[i, i, 0] = 1
    return CartesianSquare(M1, M2, _incl(G1, G2, R), vals(G1, s1), vals(G2, s2), J)


def _composition_case(seed: int, i: int) -> dict:
    R = BIDUAL_RINGS[i % len(BIDUAL_RINGS)]
    rng = _rng(seed, 12, i)
    mods, pi = _nested_triple(rng, R)
    (M1, _, s1), (M2, _, s2), (M3, _, s3) = mods
    r = s3 - s1 + int(rng.integers(0, 2))
    sq32 = _square_of(mods[1], mods[2], pi, R)
    sq21 = _square_of(mods[0], mods[1], pi, R)
    sq31 = _square_of(mods[0], mods[2], pi, R)
    cart = sq32.is_cartesian() and sq21.is_cartesian() and sq31.is_cartesian()
    B3 = exterior_bidual(M3, r)
    B2 = exterior_bidual(M2, r - (s3 - s2))
    B1 = exterior_bidual(M1, r - (s3 - s1))
    f32 = cartesian_map(sq32, r, source=B3, target=B2)
    f21 = cartesian_map(sq21, r - (s3 - s2), source=B2, target=B1)
    f31 = cartesian_map(sq31, r, source=B3, target=B1)
    return {"id": f"{i:04d}", "checks": {"squares cartesian": cart, "Phi31 = Phi21 o Phi32": f32.compose(f21).agrees_with(f31)}}


def _sub_injective_case(seed: int, i: int) -> dict:
    R = BIDUAL_RINGS[i % len(BIDUAL_RINGS)]
    rng = _rng(seed, 13, i)
    M = random_module(rng, R)
    k = int(rng.integers(1, 3))
    elems = np.array([[random_element(rng, R) for _ in range(M.gens)] for _ in range(k)], dtype=np.int64)
    N, inc = submodule_presentation(M, elems)
    ok = True
    for r in range(1, 3):
        ok = ok and induced_bidual_map(inc, r).is_injective()
    return {"id": f"{i:04d}", "checks": {"bi-dual of submodule injects": ok}}


def suite_bidual(seed: int = 0, workers: int = 4, count: int = 60) -> dict:
    sections = [
        _section("Matlis duality and xi^1", _run_cases(lambda i: _matlis_case(seed, i), count, workers)),
        _section("bi-dual of free modules", _run_cases(_free_case, 12, workers)),
        _section("kernel formula for bi-duals", _run_cases(lambda i: _expre_case(seed, i), max(count, 50), workers)),
        _section("composition of cartesian maps", _run_cases(lambda i: _composition_case(seed, i), max(count, 50), workers)),
        _section("submodule injectivity", _run_cases(lambda i: _sub_injective_case(seed, i), max(2 * count, 100), workers)),
    ]
    return _report("bidual", seed, sections)


# ---------------------------------------------------------------------------
# Stickelberger


THETA5 = {1: Fraction(3, 10), 2: Fraction(1, 10), 3: Fraction(-1, 10), 4: Fraction(-3, 10)}


def _primes_upto(n: int) -> list[int]:
    return [q for q in range(2, n + 1) if is_prime(q)]


def _char_case(m: int) -> dict:
    from .stickelberger import CyclotomicNumber

    theta = stickelberger_element(m)
    ok = True
    count = 0
    detail = {}
    for psi in dirichlet_characters(m):
        if not psi.is_odd() or psi.conductor > 40:
            continue
        f = psi.conductor
        N = psi.root_order
        rhs = oracles.character_sum_b1(psi) * -1
        for q in _primes_upto(m):
            if m % q == 0 and f % q:
                e = psi.primitive_exponent(q)
                rhs = rhs * (CyclotomicNumber.rational(N, 1) - CyclotomicNumber.root(N, -e))
        lhs = theta.evaluate(psi)
        count += 1
        if lhs != rhs:
            ok = False
            detail = {"m": str(m), "exps": [str(e) for e in psi.exps], "lhs": str(lhs), "rhs": str(rhs)}
    out = {"id": f"{m:04d}", "checks": {"evaluation = -B1 times Euler factors": ok}, "count": count}
    if detail:
        out["detail"] = detail
    return out


def _rel_case(m: int) -> dict:
    ok = True
    bad = []
    for q in _primes_upto(13):
        if m % q == 0:
            continue
        lhs = stickelberger_element(m * q).project(m)
        rhs = stickelberger_element(m).euler_factor(q)
        if lhs != rhs:
            ok = False
            bad.append(str(q))
    out = {"id": f"{m:04d}", "checks": {"projection identity": ok}}
    if bad:
        out["detail"] = {"m": str(m), "q": bad}
    return out


def _flat_case(p: int, m: int) -> dict:
    ok = True
    for n in (1, 2, 3):
        try:
            flat_coefficients(m, p, n)
        except IntegralityError:
            ok = False
    return {"id": f"{p}-{m:04d}", "checks": {"flat projection integral": ok}}


def _window_case(q: int, n: int) -> dict:
    chi = CharacterSpec.from_exponents(5, 3, n, 2, [1])
    w = build_window(3, n, chi, [q], 1)
    rep = euler_window_validate(w)
    return {"id": f"{q:03d}-{n}", "checks": {"norm relation": rep["valid"]}}


def suite_stickelberger(seed: int = 0, workers: int = 4, max_m: int = 80) -> dict:
    theta5 = stickelberger_element(5)
    hur = all(stickelberger_element(m).coeffs[a] == oracles.hurwitz_partial_zeta_zero(m, a) for m in range(2, 41) for a in stickelberger_element(m).coeffs)
    fixed = [
        {"id": "theta5", "checks": {"theta_5 coefficients": dict(theta5.coeffs) == THETA5}},
        {"id": "hurwitz", "checks": {"coefficients match partial zeta oracle, m <= 40": hur}},
    ]
    chars = _run_cases(lambda i: _char_case(i + 3), max_m - 2, workers)
    ncha = sum(r.pop("count") for r in chars)
    flats = [(p, m) for p in (3, 5) for m in range(p, 3 * max_m + 1, p)]
    sections = [
        _section("theta coefficients", fixed),
        _section("character evaluations", chars, {"characters": str(ncha)}),
        _section("projection identity", _run_cases(lambda i: _rel_case(i + 2), 29, workers)),
        _section("flat integrality", _run_cases(lambda i: _flat_case(*flats[i]), len(flats), workers)),
        _section("window norm relations", _run_cases(lambda i: _window_case(*[(7, 1), (7, 2), (7, 3), (13, 1), (13, 2), (13, 3)][i]), 6, workers)),
    ]
    return _report("stickelberger", seed, sections)


# ---------------------------------------------------------------------------
# Kolyvagin


def kolyvagin_window_checks(n: int, pool, cap=None, max_size: int = 2, squares: bool = False, p: int = 3, chi=None, window=None) -> dict:
    """Invariance, leading terms and Theta ideals on the Stickelberger window at level K = Q."""
    if chi is None:
        chi = CharacterSpec.from_exponents(5, p, n, 2, [1])
    w = window if window is not None else build_window(p, n, chi, pool, max_size, cap)
    fixed, lead = True, True
    bad = []
    for k in range(max_size + 1):
        for nn in combinations(sorted(pool), k):
            f = is_galois_fixed(w, (), nn)
            lc = leading_coeff_check(w, (), nn, squares=squares)
            fixed &= f
            lead &= lc
            if not (f and lc):
                bad.append({"n": [str(q) for q in nn], "fixed": f, "leading": lc})
    R = w.field(()).ring
    theta0 = theta_ideal(w, (), pool, 0)
    t0_ok = theta0 == IdealHandle.from_generators(R, [w.values[()]])
    mono = True
    tilde = True
    try:
        prev = theta0
        for i in range(1, max_size + 1):
            cur = theta_ideal(w, (), pool, i)
            mono &= prev <= cur
            tilde &= tilde_theta_ideal(w, (), pool, i) == cur
            prev = cur
    except InvarianceError:
        mono = tilde = False
    checks = {
        "window norm relations": euler_window_validate(w)["valid"],
        "kappa Galois-fixed": fixed,
        "leading coefficient" + (" (square-free part)" if squares else ""): lead,
        "Theta0 = (L mod p^n)": t0_ok,
        "Theta monotone": mono,
        "<kappa~> = <kappa>": tilde,
    }
    return {"checks": checks, "bad": bad}


def suite_kolyvagin(seed: int = 0, workers: int = 4, labels=(7, 13, 31), controls=True, levels=(1, 2), cap=None, squares=False) -> dict:
    cases = [(n, tuple(labels), cap, squares) for n in levels]
    if controls:
        cases += [(1, (19, 109, 181), 1, True), (1, (19, 109), None, True), (2, (109, 271), 2, True)]

    def run(i):
        n, pool, cap, sq = cases[i]
        try:
            r = kolyvagin_window_checks(n, pool, cap, squares=sq)
        except Exception as exc:  # a hypothesis failure inside the window is a case failure
            return {"id": f"{i:02d}", "checks": {"window built": False}, "detail": {"error": str(exc)}}
        out = {"id": f"{i:02d}", "checks": r["checks"]}
        if r["bad"]:
            out["detail"] = {"n": str(n), "labels": [str(q) for q in pool], "first": r["bad"][0], "count": str(len(r["bad"]))}
        return out

    res = _run_cases(run, len(cases), workers)
    k = len(levels)
    sections = [_section("labels " + ",".join(str(q) for q in labels), res[:k])]
    if controls:
        sections.append(_section("admissible labels", res[k:]))
    return _report("kolyvagin", seed, sections)


# ---------------------------------------------------------------------------
# Stark


STARK_RINGS = (RingDescriptor(3, 2), RingDescriptor(3, 3), RingDescriptor(3, 1, (3,)), RingDescriptor(3, 2, (3,)))
STARK_POOL = (7, 13, 19, 31)


def stark_plan(seed: int, count: int = 24, pool_max: int = 4) -> list[tuple[int, RingDescriptor, tuple, int]]:
    rng = _rng(seed, 30)
    plan = []
    for i in range(count):
        R = STARK_RINGS[i % len(STARK_RINGS)]
        t = int(rng.integers(1, min(pool_max, 3) + 1))
        if R.order == 1 and pool_max >= 4 and i % 8 == 0:
            t = 4
        r = int(rng.integers(0, 3)) if t < 4 else int(rng.integers(0, 2))
        plan.append((int(rng.integers(0, 2**31)), R, STARK_POOL[:t], r))
    return plan


def stark_datum_checks(d: SelmerDatum, seed: int = 0, transitions_by_contraction: bool = False) -> dict:
    """Every Stark-layer check on one datum; returns {"checks": {...}, "detail": {...}}."""
    checks: dict[str, bool] = {}
    detail: dict = {}
    v = validate_report = None
    from .stark import validate_selmer_datum

    validate_report = validate_selmer_datum(d)
    checks["datum valid"] = validate_report["valid"]
    if not validate_report["valid"]:
        detail["validation"] = validate_report["failures"][:2]
        return {"checks": checks, "detail": detail}
    r = d.rank
    sol = stark_solve(d, r, False)
    checks["SS_r free of rank 1"] = sol.free_rank_one
    sol0 = stark_solve(d, 0, True)
    checks["SS_0 free of rank 1"] = sol0.free_rank_one
    if not (sol.free_rank_one and sol0.free_rank_one):
        detail["solve"] = [sol.describe(), sol0.describe()]
        return {"checks": checks, "detail": detail}
    eps = sol.generators[0]
    # composition law along the longest chain
    top = d.top
    ok = True
    for mm in divisors(top):
        for mid in divisors(mm):
            for nn in divisors(mid):
                if len(mm) - len(nn) < 2 or nn == mid or mid == mm:
                    continue
                f = stark_transition(d, mm, mid, r).compose(stark_transition(d, mid, nn, r))
                ok &= f.agrees_with(stark_transition(d, mm, nn, r))
    checks["transitions compose"] = ok
    if transitions_by_contraction:
        ok = True
        for mm in divisors(top):
            for nn in divisors(mm):
                f = stark_transition(d, mm, nn, r)
                B = d.bidual(d.selmer(mm), r + len(mm))
                for y in B.lattice.basis:
                    ok &= not ((f.apply(y) - transition_by_contraction(d, mm, nn, r, y)) % d.ring.q).any()
        checks["transitions = contraction"] = ok
    e0 = rank_reduction(d, eps)
    stark_ok, _ = is_stark_system(e0)
    checks["rank reduction commutes with transitions"] = stark_ok
    checks["rank reduction generates SS_0"] = _same_span(d, e0, sol0.generators[0])
    checks["rank reduction = contraction by lam"] = all(not ((reduction_by_contraction(d, eps, k) - e0[k]) % d.ring.q).any() for k in divisors(top))
    checks["regulator routes agree"] = all(not ((regulator(d, eps, k) - regulator_cartesian(d, eps, k)) % d.ring.q).any() for k in divisors(top))
    if r >= 1:
        kr = kolyvagin_relation_check(d, eps)
        checks["Kolyvagin relation on every edge"] = kr["valid"]
        if not kr["valid"]:
            detail["kolyvagin"] = kr["failures"][:2]
    coh = check_coh_rel(d, e0, seed=seed)
    checks["four kappa/delta relations"] = coh["valid"]
    if not coh["valid"]:
        detail["coh"] = coh["failures"][:2]
    fc = fitting_comparison(d, e0)
    checks["I_i = Fitt^i(X)"] = fc["valid"]
    if not fc["valid"]:
        detail["fitting"] = fc["rows"]
    ideals = [stark_ideals(d, e0, i) for i in range(len(top) + 1)]
    checks["I_i monotone"] = all(a <= b for a, b in zip(ideals, ideals[1:]))
    checks["I_i = <delta^sigma>"] = all(delta_ideal(d, e0, i, seed=seed) == ideals[i] for i in range(len(top) + 1))
    # ordering independence on the largest n with q outside
    if len(top) >= 3:
        nn, q = top[:2], top[2]
        sig = {x: x for x in top}
        a = kappa_sigma(d, e0, nn, q, sig)
        b = kappa_sigma(d, e0, nn, q, sig, order=tuple(reversed(nn)))
        checks["kappa independent of ordering"] = not ((a - b) % d.ring.q).any()
    # kappa~ identity wherever some z exists
    applicable = 0
    k2 = True
    for q, rr in combinations(top, 2):
        rest = tuple(x for x in top if x not in (q, rr))
        for nn in divisors(rest):
            if len(nn) > 1:
                continue
            sig = {x: top[(i + len(nn)) % len(top)] for i, x in enumerate(top)}
            rep = tilde_kappa_identity_check(d, e0, nn, q, rr, sig)
            if rep.get("applicable"):
                applicable += 1
                k2 &= rep["valid"]
                if not rep["valid"]:
                    detail["key2"] = rep["failures"][:2]
    if len(top) >= 2:
        checks["kappa~ compatibilities"] = k2
    return {"checks": checks, "detail": detail, "key2_applicable": applicable}


def _same_span(d: SelmerDatum, a, b) -> bool:
    R = d.ring
    keys = divisors(d.labels)

    def span(e):
        v = np.concatenate([e[k].reshape(-1, R.order) for k in keys], axis=0)
        return Lattice.span(expand_scalars(v.reshape(1, -1, R.order), R), R.p, R.n, v.size)

    return span(a) == span(b)


def _tower_case(seed: int, i: int) -> dict:
    d = integral_datum(seed + i, 3, 7, STARK_POOL[:3], 0, max_exp=1)
    eps = stark_solve(d, 0, True)
    if not eps.free_rank_one:
        return {"id": f"tower-{i}", "checks": {"SS_0 free of rank 1": False}}
    e0 = eps.generators[0]
    levels = descent_levels(d, 1, 2)
    if levels is None:
        return {"id": f"tower-{i}", "checks": {"descent levels exist": False}}
    ok = True
    applicable = 0
    top = d.top
    for q, rr in combinations(top, 2):
        rest = tuple(x for x in top if x not in (q, rr))
        sig = {x: x for x in top}
        rep = tilde_kappa_identity_check(d, e0, rest, q, rr, sig, levels=levels)
        if rep.get("applicable"):
            applicable += 1
            ok &= rep["valid"]
    return {"id": f"tower-{i}", "checks": {"kappa~ descends along the tower": ok}, "applicable": applicable}


def suite_stark(seed: int = 0, workers: int = 4, count: int = 24, pool_max: int = 4, datum: SelmerDatum | None = None) -> dict:
    if datum is not None:
        res = stark_datum_checks(datum, seed)
        out = {"id": "input", "checks": res["checks"]}
        if res["detail"]:
            out["detail"] = res["detail"]
        return _report("stark", seed, [_section("supplied datum", [out])])
    toys = [toy_datum(RingDescriptor(3, 2), STARK_POOL[: min(3, pool_max)], r) for r in (0, 1, 2)]
    plan = stark_plan(seed, count, pool_max)

    def run_toy(i):
        res = stark_datum_checks(toys[i], seed, transitions_by_contraction=True)
        return {"id": f"toy-r{i}", "checks": res["checks"], "detail": res["detail"], "key2": res.get("key2_applicable", 0)}

    def run_syn(i):
        s, R, labels, r = plan[i]
        d = synthetic_datum(s, R, labels, r)
        res = stark_datum_checks(d, seed, transitions_by_contraction=(i < 4))
        return {"id": f"syn-{i:03d}", "checks": res["checks"], "detail": res["detail"], "key2": res.get("key2_applicable", 0)}

    toy_res = _run_cases(run_toy, len(toys), workers)
    syn_res = _run_cases(run_syn, len(plan), workers)
    tower = _run_cases(lambda i: _tower_case(seed, i), 3, workers)
    k2 = sum(r.pop("key2") for r in toy_res + syn_res)
    k2t = sum(r.pop("applicable", 0) for r in tower)
    for r in toy_res + syn_res:
        if not r["detail"]:
            r.pop("detail")

    # corruption controls: each must be detected
    R = RingDescriptor(3, 2)
    base = synthetic_datum(seed, R, STARK_POOL[:2], 0)
    bad = corrupt_datum(base, STARK_POOL[:1])
    from .stark import validate_selmer_datum

    vbad = validate_selmer_datum(bad)
    e0 = stark_solve(base, 0, True).generators[0]
    cbad = check_coh_rel(base, perturb_system(e0, ()), seed=seed)
    controls = [
        {"id": "corrupted-datum", "checks": {"non-cartesian square flagged": not vbad["valid"]}, "witness": {"failure": vbad["failures"][0] if vbad["failures"] else {}}},
        {"id": "perturbed-system", "checks": {"relation (ii) fails": any(f["relation"] == "ii" for f in cbad["failures"])}, "witness": {"failure": cbad["failures"][0] if cbad["failures"] else {}}},
    ]
    try:
        from .stark import StarkError as _SE

        z = find_z(toys[0], 7, 13)
        ok = False
        try:
            tilde_kappa_identity_check(toys[0], stark_solve(toys[0], 0, True).generators[0], (), 7, 13, {x: x for x in toys[0].labels}, z=(2 * z) % 9)
        except _SE:
            ok = True
        controls.append({"id": "bad-z", "checks": {"z with div_q(z) != 1 rejected": ok}})
    except StarkError:
        controls.append({"id": "bad-z", "checks": {"z with div_q(z) != 1 rejected": False}})
    sections = [
        _section("free toy data", toy_res),
        _section("synthetic data", syn_res, {"kappa~ cases with a valid z": str(k2)}),
        _section("descent towers", tower, {"kappa~ cases with a valid z": str(k2t)}),
        _section("corruption controls", controls),
    ]
    return _report("stark", seed, sections)


# ---------------------------------------------------------------------------


def _report(name: str, seed: int, sections: list[dict]) -> dict:
    passed = all(s["passed"] for s in sections)
    return {"suite": name, "seed": str(seed), "passed": passed, "sections": sections}


def run_suite(name: str, seed: int = 0, workers: int = 4, **kw) -> dict:
    fns = {
        "appendix-c": suite_appendix_c,
        "bidual": suite_bidual,
        "stickelberger": suite_stickelberger,
        "kolyvagin": suite_kolyvagin,
        "stark": suite_stark,
    }
    if name not in fns:
        raise SuiteError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    log.info("running suite %s with seed %d", name, seed)
    return fns[name](seed=seed, workers=workers, **kw)
