"""Formal Stark systems on synthetic Selmer data.

A datum lives inside an ambient free module V = R^d.  Each label q carries
two functionals on V: phi_q, the coordinate of the finite line of the local
cohomology at q, and div_q, the coordinate of the transverse (singular)
line.  The r functionals lam_j are the localization at p.  Every Selmer
module is cut out of V by the vanishing of some of these functionals:

    H(n)           div_s = 0 for every label s not dividing n
    H_str(n)       H(n) and lam = 0
    H_F(n)         H(n) and phi_q = 0 for q | n

so the squares relating them are cartesian by construction, and a corrupted
datum (see `corrupt_datum`) overrides one of these modules explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable, Sequence

import numpy as np

from .linalg import Lattice, expand_scalars, kernel, solve
from .modules import (
    BidualMap,
    CartesianSquare,
    DualModule,
    ExteriorBidual,
    IdealHandle,
    ModuleError,
    PresentedModule,
    apply_matrix,
    cartesian_map,
    contraction_matrix,
    dual,
    exterior_bidual,
    fitting_ideal,
    group_matmul,
    minors,
    preimage_submodule,
    submodule_presentation,
    transpose,
)
from .ring import RingDescriptor


class StarkError(ValueError):
    pass


Key = tuple  # sorted tuple of labels


def _key(nn: Iterable[int]) -> Key:
    return tuple(sorted(int(q) for q in nn))


def divisors(labels: Sequence[int]) -> list[Key]:
    labels = _key(labels)
    return [c for k in range(len(labels) + 1) for c in combinations(labels, k)]


def sort_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation sorting seq."""
    s = list(seq)
    sign = 1
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if s[i] > s[j]:
                sign = -sign
    return sign


def _one(ring: RingDescriptor) -> np.ndarray:
    e = np.zeros(ring.order, dtype=np.int64)
    e[0] = 1
    return e


@dataclass(frozen=True, eq=False)
class SelmerModule:
    """A submodule of the ambient module, with its generators as ambient vectors."""

    conditions: frozenset
    module: PresentedModule
    gens: np.ndarray = field(repr=False)  # (g, d, |G|)
    lattice: Lattice = field(repr=False)

    def values(self, cols: np.ndarray) -> np.ndarray:
        """Functional values on the generators: cols (d, s, |G|) -> (g, s, |G|)."""
        R = self.module.ring
        if self.gens.shape[0] == 0 or cols.shape[1] == 0:
            return np.zeros((self.gens.shape[0], cols.shape[1], R.order), dtype=np.int64)
        return group_matmul(self.gens, cols, R)

    def contains(self, x) -> bool:
        return self.lattice.contains(np.asarray(x, dtype=np.int64).ravel())


@dataclass(eq=False)
class SelmerDatum:
    ring: RingDescriptor
    labels: tuple[int, ...]
    rank: int
    phi: np.ndarray = field(repr=False)  # (d, t, |G|)
    div: np.ndarray = field(repr=False)  # (d, t, |G|)
    lam: np.ndarray = field(repr=False)  # (d, r, |G|)
    planted: PresentedModule | None = None
    description: str = ""
    overrides: dict = field(default_factory=dict, repr=False)  # (key, strict) -> ambient generators
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.labels = _key(self.labels)
        R = self.ring
        t, r = len(self.labels), self.rank
        self.phi = np.asarray(self.phi, dtype=np.int64) % R.q
        self.div = np.asarray(self.div, dtype=np.int64) % R.q
        self.lam = np.asarray(self.lam, dtype=np.int64).reshape(self.phi.shape[0], r, R.order) % R.q
        d = self.phi.shape[0]
        for name, M, w in (("phi", self.phi, t), ("div", self.div, t), ("lam", self.lam, r)):
            if M.shape != (d, w, R.order):
                raise StarkError(f"{name} has shape {M.shape}, expected {(d, w, R.order)}")

    # ------------------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.phi.shape[0]

    @property
    def top(self) -> Key:
        return self.labels

    def ambient(self) -> PresentedModule:
        return PresentedModule.free(self.ring, self.dim)

    def column(self, cond: tuple) -> np.ndarray:
        kind, q = cond
        if kind == "lam":
            return self.lam[:, q]
        i = self.labels.index(q)
        return (self.phi if kind == "phi" else self.div)[:, i]

    def columns(self, conds: Sequence[tuple]) -> np.ndarray:
        if not conds:
            return np.zeros((self.dim, 0, self.ring.order), dtype=np.int64)
        return np.stack([self.column(c) for c in conds], axis=1)

    def evaluate(self, cond: tuple, x) -> np.ndarray:
        """The functional named by cond at an ambient vector x (d, |G|)."""
        R = self.ring
        x = np.asarray(x, dtype=np.int64).reshape(1, self.dim, R.order)
        return group_matmul(x, self.column(cond).reshape(self.dim, 1, R.order), R)[0, 0]

    def _check_labels(self, nn) -> Key:
        k = _key(nn)
        if not set(k) <= set(self.labels):
            raise StarkError(f"labels {list(k)} are not in the pool {list(self.labels)}")
        return k

    # ------------------------------------------------------------------
    def cut(self, conds: Iterable[tuple]) -> SelmerModule:
        conds = frozenset(conds)
        ck = ("cut", conds)
        if ck in self._cache:
            return self._cache[ck]
        R = self.ring
        dm = self.dim * R.order
        order = sorted(conds, key=lambda c: (c[0], c[1]))
        cols = self.columns(order)
        if cols.shape[1]:
            K = kernel(expand_scalars(cols, R), R.p, R.n)
            L = Lattice.span(K, R.p, R.n, dm)
        else:
            L = Lattice.full(R.p, R.n, dm)
        mod, incl = preimage_submodule(self.ambient(), L)
        sub = SelmerModule(conds, mod, np.asarray(incl.action), L)
        self._cache[ck] = sub
        return sub

    def selmer_conditions(self, nn, strict: bool = False) -> set:
        k = self._check_labels(nn)
        c = {("div", s) for s in self.labels if s not in k}
        if strict:
            c |= {("lam", j) for j in range(self.rank)}
        return c

    def selmer(self, nn, strict: bool = False) -> SelmerModule:
        """H(n), or H_str(n) when strict."""
        k = self._check_labels(nn)
        ov = self.overrides.get((k, strict))
        if ov is None:
            return self.cut(self.selmer_conditions(k, strict))
        ck = ("override", k, strict)
        if ck not in self._cache:
            R = self.ring
            gens = np.asarray(ov, dtype=np.int64).reshape(-1, self.dim, R.order) % R.q
            mod, incl = submodule_presentation(self.ambient(), gens)
            L = incl.image_lattice()
            self._cache[ck] = SelmerModule(frozenset({("override", k, strict)}), mod, np.asarray(incl.action), L)
        return self._cache[ck]

    def transverse(self, nn, strict: bool = False, extra: Iterable[tuple] = ()) -> SelmerModule:
        """H_F(n): classes of H(n) on the transverse line at every q | n."""
        k = self._check_labels(nn)
        return self.cut(self.selmer_conditions(k, strict) | {("phi", q) for q in k} | set(extra))

    def dual_of(self, sub: SelmerModule) -> DualModule:
        ck = ("dual", id(sub))
        if ck not in self._cache:
            self._cache[ck] = (sub, dual(sub.module))
        return self._cache[ck][1]

    def bidual(self, sub: SelmerModule, r: int) -> ExteriorBidual:
        ck = ("bidual", id(sub), r)
        if ck not in self._cache:
            self._cache[ck] = (sub, exterior_bidual(sub.module, r, dualmod=self.dual_of(sub)))
        return self._cache[ck][1]

    def inclusion(self, M1: SelmerModule, M2: SelmerModule) -> np.ndarray:
        """Group-ring matrix (g1, g2, |G|) writing the generators of M1 in those of M2."""
        R = self.ring
        g1, g2 = M1.gens.shape[0], M2.gens.shape[0]
        out = np.zeros((g1, g2, R.order), dtype=np.int64)
        if g1 == 0:
            return out
        E = expand_scalars(M2.gens, R) if g2 else np.zeros((0, self.dim * R.order), dtype=np.int64)
        for i, v in enumerate(M1.gens):
            if not v.any():
                continue
            x = solve(E, v.ravel(), R.p, R.n) if g2 else None
            if x is None:
                raise StarkError("module is not contained in the larger one")
            out[i] = x.reshape(g2, R.order)
        return out

    def square(self, M1: SelmerModule, M2: SelmerModule, conds2: Sequence[tuple], conds1: Sequence[tuple]) -> CartesianSquare:
        """M1 -> M2 over (coordinates conds1) -> (coordinates conds2)."""
        R = self.ring
        pos = [list(conds2).index(c) for c in conds1]
        J = np.zeros((len(conds1), len(conds2), R.order), dtype=np.int64)
        for i, j in enumerate(pos):
            J[i, j, 0] = 1
        pi2 = M2.values(self.columns(list(conds2)))
        pi1 = M1.values(self.columns(list(conds1)))
        return CartesianSquare(M1.module, M2.module, self.inclusion(M1, M2), pi1, pi2, J)

    def wedge_coeffs(self, sub: SelmerModule, conds: Sequence[tuple]) -> np.ndarray:
        """Coefficients of the wedge of the named functionals (in the given order) on the basis of Lambda sub*."""
        R = self.ring
        D = self.dual_of(sub)
        s = len(conds)
        if s == 0:
            return _one(R).reshape(1, -1)
        vals = sub.values(self.columns(list(conds)))  # (g, s, m)
        try:
            C = np.array([D.express(vals[:, j]) for j in range(s)], dtype=np.int64).reshape(s, D.k, R.order)
        except ModuleError as exc:
            raise StarkError(f"functional does not restrict: {exc}") from exc
        if D.k < s:
            return np.zeros((0, R.order), dtype=np.int64)
        return minors(C, s, R)[0]

    def reduce(self, n: int) -> "SelmerDatum":
        """The same datum with coefficients reduced to Z/p^n."""
        if n > self.ring.n or n < 1:
            raise StarkError("reduction level out of range")
        R = RingDescriptor(self.ring.p, n, self.ring.invariant_factors)
        planted = None
        if self.planted is not None:
            planted = PresentedModule(R, self.planted.gens, self.planted.relations % R.q)
        return SelmerDatum(R, self.labels, self.rank, self.phi % R.q, self.div % R.q, self.lam % R.q, planted, self.description)

    # ------------------------------------------------------------------
    def to_json(self) -> dict:
        def arr(M):
            return [[[str(int(c)) for c in e] for e in row] for row in M]

        out = {
            "ring": self.ring.to_json(),
            "labels": [str(q) for q in self.labels],
            "rank": str(self.rank),
            "dim": str(self.dim),
            "phi": arr(self.phi),
            "div": arr(self.div),
            "lam": arr(self.lam),
            "trivialization": "lexicographic wedge of div functionals",
            "description": self.description,
            "modules": {},
        }
        for k in divisors(self.labels):
            for strict in (False, True):
                sub = self.selmer(k, strict)
                name = ("str:" if strict else "can:") + ",".join(str(q) for q in k)
                out["modules"][name] = {"presentation": sub.module.to_json(), "generators": arr(sub.gens)}
        if self.planted is not None:
            out["planted"] = self.planted.to_json()
        if self.overrides:
            out["overrides"] = [
                {"n": [str(q) for q in k], "strict": strict, "generators": arr(np.asarray(v).reshape(-1, self.dim, self.ring.order))}
                for (k, strict), v in sorted(self.overrides.items())
            ]
        return out

    @classmethod
    def from_json(cls, data) -> "SelmerDatum":
        try:
            R = RingDescriptor.from_json(data["ring"])
            labels = tuple(int(q) for q in data["labels"])
            r = int(data["rank"])
            d = int(data["dim"])

            def arr(rows, w):
                A = np.array([[[int(c) for c in e] for e in row] for row in rows], dtype=np.int64)
                return A.reshape(d, w, R.order)

            planted = PresentedModule.from_json(data["planted"]) if "planted" in data else None
            dat = cls(R, labels, r, arr(data["phi"], len(labels)), arr(data["div"], len(labels)), arr(data.get("lam", []), r), planted, data.get("description", ""))
            for ov in data.get("overrides", []):
                G = np.array([[[int(c) for c in e] for e in row] for row in ov["generators"]], dtype=np.int64)
                dat.overrides[(_key(int(q) for q in ov["n"]), bool(ov["strict"]))] = G.reshape(-1, d, R.order)
            return dat
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, StarkError):
                raise
            raise StarkError(f"malformed Selmer datum: {exc}") from exc


# ---------------------------------------------------------------------------
# construction


def _random_element(rng: np.random.Generator, R: RingDescriptor, maximal: bool = False) -> np.ndarray:
    x = rng.integers(0, R.q, R.order)
    if maximal:
        # push the augmentation into pZ/p^n so that x lies in the maximal ideal
        x[0] = (x[0] - x.sum() + R.p * rng.integers(0, R.q)) % R.q
    return x % R.q


def _det_mod_p(M: np.ndarray, p: int) -> int:
    A = [[int(v) % p for v in row] for row in M]
    n = len(A)
    det = 1
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c]), None)
        if piv is None:
            return 0
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            det = -det
        det = det * A[c][c] % p
        inv = pow(A[c][c], -1, p)
        for r in range(c + 1, n):
            f = A[r][c] * inv % p
            if f:
                A[r] = [(a - f * b) % p for a, b in zip(A[r], A[c])]
    return det % p


def random_invertible(rng: np.random.Generator, R: RingDescriptor, d: int) -> np.ndarray:
    """A random matrix in GL_d(R) for local R (invertible iff its residue is)."""
    while True:
        U = rng.integers(0, R.q, (d, d, R.order)) % R.q
        if d == 0 or _det_mod_p(U.sum(axis=2), R.p):
            return U


def datum_from_matrices(
    ring: RingDescriptor,
    labels: Sequence[int],
    A: np.ndarray,
    C: np.ndarray | None = None,
    U: np.ndarray | None = None,
    description: str = "",
) -> SelmerDatum:
    """The datum whose strict Selmer module at the full pool has div-matrix A in the phi-dual basis.

    Before the change of coordinates U, V = R^(t+r) with phi_q the first t
    coordinates, lam the last r, and div_q(x) = x [A; C] e_q.  The planted
    module is coker(A).
    """
    R = ring
    m = R.order
    t = len(labels)
    A = np.asarray(A, dtype=np.int64).reshape(t, t, m) % R.q
    C = np.zeros((0, t, m), dtype=np.int64) if C is None else np.asarray(C, dtype=np.int64).reshape(-1, t, m) % R.q
    r = C.shape[0]
    d = t + r
    if U is None:
        U = np.zeros((d, d, m), dtype=np.int64)
        for i in range(d):
            U[i, i, 0] = 1
    D = np.concatenate([A, C], axis=0)
    phi = U[:, :t]
    lam = U[:, t:]
    div = group_matmul(U, D, R) if d else np.zeros((0, t, m), dtype=np.int64)
    planted = PresentedModule(R, t, A)
    return SelmerDatum(R, tuple(labels), r, phi, div, lam, planted, description)


def toy_datum(ring: RingDescriptor, labels: Sequence[int], r: int = 0) -> SelmerDatum:
    """H(n) = R^(nu(n) + r) with phi_q = div_q the coordinate at q."""
    t = len(labels)
    A = np.zeros((t, t, ring.order), dtype=np.int64)
    for i in range(t):
        A[i, i, 0] = 1
    C = np.zeros((r, t, ring.order), dtype=np.int64)
    return datum_from_matrices(ring, _key(labels), A, C, description=f"free toy datum, r={r}")


def planted_matrix(rng: np.random.Generator, R: RingDescriptor, t: int) -> np.ndarray:
    """U1 diag(e_i) U2 with each e_i a random unit, p-power, or maximal-ideal element."""
    m = R.order
    Dg = np.zeros((t, t, m), dtype=np.int64)
    for i in range(t):
        kind = rng.integers(0, 3)
        if kind == 0:
            Dg[i, i, 0] = R.p ** int(rng.integers(0, R.n + 1)) % R.q
        elif kind == 1:
            Dg[i, i] = _random_element(rng, R, maximal=True)
        else:
            Dg[i, i, 0] = R.p ** int(rng.integers(1, R.n + 1)) % R.q
    U1 = random_invertible(rng, R, t)
    U2 = random_invertible(rng, R, t)
    if t == 0:
        return Dg
    return group_matmul(group_matmul(U1, Dg, R), U2, R)


def synthetic_datum(seed: int, ring: RingDescriptor, labels: Sequence[int], r: int) -> SelmerDatum:
    rng = np.random.default_rng(seed)
    t = len(labels)
    A = planted_matrix(rng, ring, t)
    C = rng.integers(0, ring.q, (r, t, ring.order)) % ring.q
    U = random_invertible(rng, ring, t + r)
    return datum_from_matrices(ring, _key(labels), A, C, U, description=f"synthetic seed={seed}, r={r}")


def integral_datum(seed: int, p: int, N: int, labels: Sequence[int], r: int = 0, max_exp: int = 2) -> SelmerDatum:
    """A datum over Z/p^N whose planted matrix is nonsingular over Z_p (so tower levels exist)."""
    rng = np.random.default_rng(seed)
    R = RingDescriptor(p, N)
    t = len(labels)
    Dg = np.zeros((t, t, 1), dtype=np.int64)
    for i in range(t):
        Dg[i, i, 0] = p ** int(rng.integers(0, max_exp + 1))
    U1 = random_invertible(rng, R, t)
    U2 = random_invertible(rng, R, t)
    A = group_matmul(group_matmul(U1, Dg, R), U2, R) if t else Dg
    C = rng.integers(0, R.q, (r, t, 1))
    U = random_invertible(rng, R, t + r)
    return datum_from_matrices(R, _key(labels), A, C, U, description=f"integral seed={seed}, r={r}")


def corrupt_datum(d: SelmerDatum, nn: Sequence[int], strict: bool = False) -> SelmerDatum:
    """Replace H(n) by p H(n), breaking the cartesian squares through n."""
    k = _key(nn)
    sub = d.selmer(k, strict)
    out = SelmerDatum(d.ring, d.labels, d.rank, d.phi, d.div, d.lam, d.planted, d.description + " (corrupted)")
    out.overrides = dict(d.overrides)
    out.overrides[(k, strict)] = (sub.gens * d.ring.p) % d.ring.q
    return out


# ---------------------------------------------------------------------------
# validation


def _row_rank_full(d: SelmerDatum, cols: np.ndarray) -> bool:
    R = d.ring
    if cols.shape[1] == 0:
        return True
    img = Lattice.span(expand_scalars(cols, R), R.p, R.n, cols.shape[1] * R.order)
    return img.length() == cols.shape[1] * R.order * R.n


def validate_selmer_datum(d: SelmerDatum) -> dict:
    R = d.ring
    checks: dict[str, int] = {}
    failures: list[dict] = []

    def record(name, ok, witness):
        checks[name] = checks.get(name, 0) + 1
        if not ok:
            failures.append({"check": name, **witness})

    t = len(d.labels)
    # core vanishing at the full pool: (phi, lam) is an isomorphism V -> R^(t+r)
    frame = d.columns([("phi", q) for q in d.labels] + [("lam", j) for j in range(d.rank)])
    record("core vanishing at the full pool", frame.shape[1] == d.dim and _row_rank_full(d, frame), {})
    top = d.selmer(d.top)
    record("H(top) free of rank r + nu(top)", top.module.gens == d.dim and top.module.rel_lattice.length() == 0 and top.lattice.length() == d.dim * R.order * R.n, {})
    # defining vanishing: div_s kills H(n) for s not dividing n; phi_q kills H_F(n) for q | n
    for nn in divisors(d.labels):
        for strict in (False, True):
            sub = d.selmer(nn, strict)
            outside = [("div", s) for s in d.labels if s not in nn]
            if strict:
                outside += [("lam", j) for j in range(d.rank)]
            ok = not (sub.values(d.columns(outside)) % R.q).any()
            record("finite outside n", ok, {"n": [str(q) for q in nn], "strict": strict})
        tr = d.transverse(nn)
        ok = not (tr.values(d.columns([("phi", q) for q in nn])) % R.q).any()
        record("transverse at n", ok, {"n": [str(q) for q in nn]})
    # cartesian squares for every n | m
    for mm in divisors(d.labels):
        for nn in divisors(mm):
            for strict in (False, True):
                M1, M2 = d.selmer(nn, strict), d.selmer(mm, strict)
                c2 = [("div", q) for q in mm]
                c1 = [("div", q) for q in nn]
                try:
                    bad = d.square(M1, M2, c2, c1).violations()
                except StarkError as exc:
                    bad = [str(exc)]
                record("cartesian square", not bad, {"m": [str(q) for q in mm], "n": [str(q) for q in nn], "strict": strict, "reasons": bad})
    failures.sort(key=lambda f: repr(sorted(f.items())))
    return {
        "valid": not failures,
        "labels": [str(q) for q in d.labels],
        "rank": str(d.rank),
        "checks": {k: str(v) for k, v in sorted(checks.items())},
        "failure_count": str(len(failures)),
        "failures": failures[:5],
    }


# ---------------------------------------------------------------------------
# Stark systems


@dataclass(eq=False)
class StarkSystem:
    datum: SelmerDatum
    rank: int
    strict: bool
    values: dict  # key -> (width, |G|) value vector on the basis of Lambda H(n)*

    def bidual(self, nn) -> ExteriorBidual:
        k = _key(nn)
        return self.datum.bidual(self.datum.selmer(k, self.strict), self.rank + len(k))

    def __getitem__(self, nn) -> np.ndarray:
        return self.values[_key(nn)]

    def scaled(self, a) -> "StarkSystem":
        R = self.datum.ring
        a = np.asarray(a, dtype=np.int64).reshape(1, 1, R.order)
        vals = {}
        for k, v in self.values.items():
            vals[k] = group_matmul(a, v.reshape(1, -1, R.order), R)[0] if v.shape[0] else v
        return StarkSystem(self.datum, self.rank, self.strict, vals)

    def to_json(self) -> dict:
        return {
            "rank": str(self.rank),
            "strict": self.strict,
            "values": {",".join(str(q) for q in k): [[str(int(c)) for c in e] for e in v] for k, v in sorted(self.values.items())},
        }


def perturb_system(eps: StarkSystem, nn: Sequence[int], index: int = 0, delta: int = 1) -> StarkSystem:
    k = _key(nn)
    vals = {kk: v.copy() for kk, v in eps.values.items()}
    v = vals[k]
    if v.shape[0]:
        v[index, 0] = (v[index, 0] + delta) % eps.datum.ring.q
    return StarkSystem(eps.datum, eps.rank, eps.strict, vals)


def stark_transition(d: SelmerDatum, mm, nn, rank: int, strict: bool = False) -> BidualMap:
    """Phi_{m,n}: the map between bi-duals of H(m) and H(n) induced by the cartesian square."""
    mm, nn = _key(mm), _key(nn)
    if not set(nn) <= set(mm):
        raise StarkError(f"{list(nn)} does not divide {list(mm)}")
    ck = ("transition", mm, nn, rank, strict, id(d.selmer(mm, strict)), id(d.selmer(nn, strict)))
    if ck in d._cache:
        return d._cache[ck]
    M1, M2 = d.selmer(nn, strict), d.selmer(mm, strict)
    sq = d.square(M1, M2, [("div", q) for q in mm], [("div", q) for q in nn])
    try:
        f = cartesian_map(sq, rank + len(mm), source=d.bidual(M2, rank + len(mm)), target=d.bidual(M1, rank + len(nn)), check=False)
    except ModuleError as exc:
        raise StarkError(f"transition {list(mm)} -> {list(nn)}: {exc}") from exc
    d._cache[ck] = f
    return f


def _lift_functionals(d: SelmerDatum, M1: SelmerModule, M2: SelmerModule) -> np.ndarray:
    """Coefficients in the dual generators of M2 of lifts of the dual generators of M1."""
    R = d.ring
    D1, D2 = d.dual_of(M1), d.dual_of(M2)
    incl = d.inclusion(M1, M2)
    if D1.k == 0:
        return np.zeros((0, D2.k, R.order), dtype=np.int64)
    if D2.k == 0:
        raise StarkError("dual of the larger module is zero")
    res = group_matmul(D2.functionals, transpose(incl), R)  # (k2, g1)
    E = expand_scalars(res, R)
    out = []
    for chi in D1.functionals:
        x = solve(E, chi.ravel(), R.p, R.n)
        if x is None:
            raise StarkError("a functional on the smaller module does not lift")
        out.append(x.reshape(D2.k, R.order))
    return np.array(out, dtype=np.int64)


def transition_by_contraction(d: SelmerDatum, mm, nn, rank: int, y, strict: bool = False) -> np.ndarray:
    """Phi_{m,n}(y) computed as +-y(psi ^ div_{m/n}) on lifts psi of the dual generators of H(n).

    The sign is that of the shuffle of the lexicographic frames of n and m/n
    into the one of m, times (-1)^(r nu(m/n)).

    Independent of `cartesian_map`: the lifts of the dual generators of H(n)
    are wedged with the div functionals of the new labels and y is evaluated.
    """
    mm, nn = _key(mm), _key(nn)
    R = d.ring
    extra = [q for q in mm if q not in nn]
    M1, M2 = d.selmer(nn, strict), d.selmer(mm, strict)
    B1 = d.bidual(M1, rank + len(nn))
    D2 = d.dual_of(M2)
    lifts = _lift_functionals(d, M1, M2)
    vals = M2.values(d.columns([("div", q) for q in extra]))
    divs = np.array([D2.express(vals[:, j]) for j in range(len(extra))], dtype=np.int64).reshape(len(extra), D2.k, R.order)
    sign = sort_sign(list(nn) + extra) * (-1) ** (len(extra) * rank)
    y = np.asarray(y, dtype=np.int64).reshape(-1, R.order)
    out = np.zeros((B1.width, R.order), dtype=np.int64)
    for u, U in enumerate(B1.subsets):
        V = np.concatenate([lifts[list(U)], divs], axis=0) if U else divs
        if V.shape[0] == 0:
            out[u] = y[0] * sign
            continue
        if D2.k < V.shape[0]:
            continue
        w = minors(V, V.shape[0], R)[0]
        out[u] = sign * group_matmul(w.reshape(1, -1, R.order), y.reshape(-1, 1, R.order), R)[0, 0]
    return out % R.q


def _poset_pairs(labels: Key) -> list[tuple[Key, Key]]:
    out = []
    for mm in divisors(labels):
        for q in mm:
            out.append((mm, tuple(x for x in mm if x != q)))
    return out


@dataclass(eq=False)
class StarkSolution:
    datum: SelmerDatum
    rank: int
    strict: bool
    module: PresentedModule
    generators: list  # list of StarkSystem
    lattice_length: int

    @property
    def free_rank_one(self) -> bool:
        return self.module.gens == 1 and self.module.rel_lattice.length() == 0

    def describe(self) -> dict:
        return {
            "rank": str(self.rank),
            "strict": self.strict,
            "generators": str(self.module.gens),
            "length": str(self.lattice_length),
            "free_rank_one": self.free_rank_one,
        }


def stark_solve(d: SelmerDatum, rank: int, strict: bool = False) -> StarkSolution:
    """The inverse limit of the bi-duals over the divisibility poset of the pool.

    Unknowns are coordinates on the Howell bases of all the bi-dual lattices;
    the compatibility Phi_{m,n}(e_m) = e_n on every covering pair is solved
    as one kernel over Z/p^n.
    """
    R = d.ring
    m = R.order
    keys = divisors(d.labels)
    bases, offs, woffs = {}, {}, {}
    row = col = 0
    for k in keys:
        B = d.bidual(d.selmer(k, strict), rank + len(k))
        bases[k] = (B, B.lattice.basis)
        offs[k] = row
        woffs[k] = col
        row += B.lattice.basis.shape[0]
        col += B.width * m
    pairs = _poset_pairs(d.labels)
    blocks = []
    for mm, nn in pairs:
        Bn, basis_n = bases[nn]
        w = Bn.width * m
        if w == 0:
            continue
        blk = np.zeros((row, w), dtype=np.int64)
        f = stark_transition(d, mm, nn, rank, strict)
        basis_m = bases[mm][1]
        if basis_m.shape[0] and f.matrix.shape[0]:
            blk[offs[mm] : offs[mm] + basis_m.shape[0]] = basis_m @ expand_scalars(f.matrix, R) % R.q
        if basis_n.shape[0]:
            blk[offs[nn] : offs[nn] + basis_n.shape[0]] -= basis_n
        blocks.append(blk % R.q)
    if row == 0:
        K = np.zeros((0, 0), dtype=np.int64)
    elif blocks:
        K = kernel(np.hstack(blocks), R.p, R.n)
    else:
        K = np.eye(row, dtype=np.int64)
    # back to value vectors
    S = np.zeros((K.shape[0], col), dtype=np.int64)
    for k in keys:
        B, basis = bases[k]
        if basis.shape[0]:
            S[:, woffs[k] : woffs[k] + B.width * m] = K[:, offs[k] : offs[k] + basis.shape[0]] @ basis % R.q
    total = col // m if m else 0
    L = Lattice.span(S, R.p, R.n, col) if S.shape[0] else Lattice.zero(R.p, R.n, col)
    from .modules import subquotient

    mod, gens = subquotient(R, total, L)
    systems = []
    for g in gens.reshape(-1, col):
        vals = {}
        for k in keys:
            B = bases[k][0]
            vals[k] = g[woffs[k] : woffs[k] + B.width * m].reshape(B.width, m).copy()
        systems.append(StarkSystem(d, rank, strict, vals))
    return StarkSolution(d, rank, strict, mod, systems, L.length())


def stark_basis(d: SelmerDatum, rank: int = 0, strict: bool = True) -> StarkSystem:
    sol = stark_solve(d, rank, strict)
    if not sol.free_rank_one:
        raise StarkError(f"the module of Stark systems is not free of rank 1: {sol.describe()}")
    return sol.generators[0]


def is_stark_system(eps: StarkSystem) -> tuple[bool, list]:
    d = eps.datum
    bad = []
    for mm, nn in _poset_pairs(d.labels):
        f = stark_transition(d, mm, nn, eps.rank, eps.strict)
        got = f.apply(eps[mm]) if f.matrix.shape[1] else np.zeros((0, d.ring.order), dtype=np.int64)
        if not np.array_equal(got % d.ring.q, eps[nn] % d.ring.q):
            bad.append({"m": [str(q) for q in mm], "n": [str(q) for q in nn]})
    return not bad, bad


# ---------------------------------------------------------------------------
# rank reduction and regulators


def rank_reduction(d: SelmerDatum, eps: StarkSystem) -> StarkSystem:
    """(e_n) -> ((-1)^(r nu(n)) l_n(e_n)) where l_n comes from H_str(n) -> H(n) -> R^r."""
    if eps.strict:
        raise StarkError("rank reduction starts from a system on the relaxed structure")
    r = eps.rank
    if r != d.rank:
        raise StarkError("system rank differs from the rank of the localization at p")
    if r == 0:
        return StarkSystem(d, 0, True, {k: v.copy() for k, v in eps.values.items()})
    R = d.ring
    out = {}
    lam = [("lam", j) for j in range(r)]
    for k in divisors(d.labels):
        M1, M2 = d.selmer(k, True), d.selmer(k, False)
        sq = d.square(M1, M2, lam, [])
        f = cartesian_map(sq, r + len(k), source=d.bidual(M2, r + len(k)), target=d.bidual(M1, len(k)), check=False)
        out[k] = f.apply(eps[k]) * ((-1) ** (r * len(k))) % R.q
    return StarkSystem(d, 0, True, out)


def reduction_by_contraction(d: SelmerDatum, eps: StarkSystem, nn) -> np.ndarray:
    """(-1)^(r nu) e_n(lam_1 ^ ... ^ lam_r ^ psi) on lifts psi of the dual generators of H_str(n)."""
    k = _key(nn)
    R = d.ring
    r = eps.rank
    M1, M2 = d.selmer(k, True), d.selmer(k, False)
    B1 = d.bidual(M1, len(k))
    D2 = d.dual_of(M2)
    lifts = _lift_functionals(d, M1, M2)
    vals = M2.values(d.columns([("lam", j) for j in range(r)]))
    lams = np.array([D2.express(vals[:, j]) for j in range(r)], dtype=np.int64).reshape(r, D2.k, R.order)
    y = eps[k]
    out = np.zeros((B1.width, R.order), dtype=np.int64)
    for u, U in enumerate(B1.subsets):
        V = np.concatenate([lams, lifts[list(U)]], axis=0) if U else lams
        if V.shape[0] == 0:
            out[u] = y[0]
            continue
        w = minors(V, V.shape[0], R)[0]
        out[u] = group_matmul(w.reshape(1, -1, R.order), y.reshape(-1, 1, R.order), R)[0, 0]
    return out * ((-1) ** (r * len(k))) % R.q


def regulator(d: SelmerDatum, eps: StarkSystem, nn) -> np.ndarray:
    """Reg_n(e_n) = (-1)^nu e_n(phi_q1 ^ ... ^ phi_qnu ^ -), an element of the rank-r' bi-dual of H_F(n)."""
    k = _key(nn)
    R = d.ring
    rr = eps.rank
    nu = len(k)
    M2 = d.selmer(k, eps.strict)
    M1 = d.transverse(k, eps.strict)
    B2 = d.bidual(M2, rr + nu)
    B1 = d.bidual(M1, rr)
    D2 = d.dual_of(M2)
    phis = d.wedge_coeffs(M2, [("phi", q) for q in k])
    if phis.shape[0] == 0:
        return np.zeros((B1.width, R.order), dtype=np.int64)
    W = contraction_matrix(phis, D2.k, nu, rr + nu, R)
    partial = apply_matrix(eps[k], W, R)  # values on Lambda^rr H(n)*
    lifts = _lift_functionals(d, M1, M2)
    out = np.zeros((B1.width, R.order), dtype=np.int64)
    for u, U in enumerate(B1.subsets):
        if not U:
            out[u] = partial[0]
            continue
        w = minors(lifts[list(U)], rr, R)[0]
        out[u] = group_matmul(w.reshape(1, -1, R.order), partial.reshape(-1, 1, R.order), R)[0, 0]
    return out * ((-1) ** nu) % R.q


def regulator_cartesian(d: SelmerDatum, eps: StarkSystem, nn) -> np.ndarray:
    """Reg_n through the cartesian square H_F(n) -> H(n) over 0 -> R^nu.

    `cartesian_map` wedges the quotient functionals before the lifts, which
    puts it (-1)^nu away from the regulator.
    """
    k = _key(nn)
    rr = eps.rank
    M2 = d.selmer(k, eps.strict)
    M1 = d.transverse(k, eps.strict)
    sq = d.square(M1, M2, [("phi", q) for q in k], [])
    f = cartesian_map(sq, rr + len(k), source=d.bidual(M2, rr + len(k)), target=d.bidual(M1, rr), check=False)
    return f.apply(eps[k]) * ((-1) ** len(k)) % d.ring.q


def _localization_map(d: SelmerDatum, M1: SelmerModule, M2: SelmerModule, cond: tuple, r: int) -> BidualMap:
    sq = d.square(M1, M2, [cond], [])
    return cartesian_map(sq, r, source=d.bidual(M2, r), target=d.bidual(M1, r - 1), check=False)


def kolyvagin_relation_check(d: SelmerDatum, eps: StarkSystem) -> dict:
    """Reg(e) is a Kolyvagin system: on every edge (n, q) the localization of kappa_n into the
    transverse line at q agrees with the localization of kappa_{n/q} into the finite line."""
    R = d.ring
    rr = eps.rank
    if rr < 1:
        return {"valid": True, "applicable": False, "checked": "0", "failures": []}
    regs = {k: regulator(d, eps, k) for k in divisors(d.labels)}
    fails = []
    checked = 0
    for nn in divisors(d.labels):
        for q in nn:
            nq = tuple(x for x in nn if x != q)
            Mn = d.transverse(nn, eps.strict)
            Mq = d.transverse(nn, eps.strict, extra=[("div", q)])
            Mnq = d.transverse(nq, eps.strict)
            lhs = _localization_map(d, Mq, Mn, ("div", q), rr).apply(regs[nn])
            rhs = _localization_map(d, Mq, Mnq, ("phi", q), rr).apply(regs[nq])
            checked += 1
            if not np.array_equal(lhs % R.q, rhs % R.q):
                fails.append({"n": [str(x) for x in nn], "q": str(q)})
    return {"valid": not fails, "applicable": True, "checked": str(checked), "failures": fails[:5], "failure_count": str(len(fails))}


# ---------------------------------------------------------------------------
# the kappa^sigma / delta^sigma system


def _check_rank0(eps: StarkSystem):
    if not eps.strict or eps.rank != 0:
        raise StarkError("expected a rank-0 system on the strict structure")


def _from_rank_one(d: SelmerDatum, sub: SelmerModule, vals: np.ndarray) -> np.ndarray:
    """The element x of sub with xi(x) = vals, as an ambient vector."""
    R = d.ring
    B = d.bidual(sub, 1)
    if sub.gens.shape[0] == 0:
        if vals.any():
            raise StarkError("nonzero element of the bi-dual of the zero module")
        return np.zeros((d.dim, R.order), dtype=np.int64)
    if B.width == 0:
        return np.zeros((d.dim, R.order), dtype=np.int64)
    E = expand_scalars(B.xi_matrix, R)
    c = solve(E, np.asarray(vals, dtype=np.int64).ravel(), R.p, R.n)
    if c is None:
        raise StarkError("element of the bi-dual is not in the image of xi")
    c = c.reshape(1, -1, R.order)
    return group_matmul(c, sub.gens, R)[0]


def kappa_sigma(d: SelmerDatum, eps: StarkSystem, nn, q: int | None, sigma: dict, order: Sequence[int] | None = None) -> np.ndarray:
    """kappa^sigma_{n,q} as an ambient vector (q given), or delta^sigma_n in R (q None).

    order fixes the ordering of the prime divisors of n used for both the
    wedge of the phi_{sigma(r)} and the decomposition of the det twist.
    """
    _check_rank0(eps)
    R = d.ring
    k = _key(nn)
    order = list(k) if order is None else [int(x) for x in order]
    if sorted(order) != list(k):
        raise StarkError("order must list the prime divisors of n")
    nu = len(k)
    conds = [("phi", int(sigma[x])) for x in order]
    if q is None:
        sub = d.selmer(k, True)
        coeffs = d.wedge_coeffs(sub, conds)
        y = eps[k]
        if coeffs.shape[0] == 0:
            return np.zeros(R.order, dtype=np.int64)
        val = d.bidual(sub, nu).evaluate(y, coeffs)
        return val * (sort_sign(order) * (-1) ** nu) % R.q
    q = int(q)
    if q in k:
        raise StarkError("q must not divide n")
    nq = _key(k + (q,))
    sub = d.selmer(nq, True)
    D = d.dual_of(sub)
    coeffs = d.wedge_coeffs(sub, conds)
    y = eps[nq] * sort_sign(order + [q])
    if coeffs.shape[0] == 0 or D.k < nu + 1:
        return np.zeros((d.dim, R.order), dtype=np.int64)
    W = contraction_matrix(coeffs, D.k, nu, nu + 1, R)
    vals = apply_matrix(y, W, R)
    x = _from_rank_one(d, sub, vals)
    return x * ((-1) ** nu) % R.q


def _sigma_list(labels: Key, seed: int, limit: int = 64, sample: int = 16) -> list[dict]:
    t = len(labels)
    if t**t <= limit:
        return [dict(zip(labels, img)) for img in product(labels, repeat=t)]
    rng = np.random.default_rng(seed)
    out = [dict(zip(labels, labels))]
    seen = {tuple(labels)}
    while len(out) < sample:
        img = tuple(int(labels[i]) for i in rng.integers(0, t, t))
        if img not in seen:
            seen.add(img)
            out.append(dict(zip(labels, img)))
    return out


class _KappaCache:
    def __init__(self, d: SelmerDatum, eps: StarkSystem):
        self.d, self.eps = d, eps
        self.store: dict = {}

    def kappa(self, nn, q, sigma):
        k = _key(nn)
        key = ("k", k, q, tuple(sigma[x] for x in k))
        if key not in self.store:
            self.store[key] = kappa_sigma(self.d, self.eps, k, q, sigma)
        return self.store[key]

    def delta(self, nn, sigma):
        k = _key(nn)
        key = ("d", k, tuple(sigma[x] for x in k))
        if key not in self.store:
            self.store[key] = kappa_sigma(self.d, self.eps, k, None, sigma)
        return self.store[key]


def _json_vec(v) -> list:
    return [[str(int(c)) for c in e] for e in np.asarray(v).reshape(-1, np.asarray(v).shape[-1])]


def check_coh_rel(d: SelmerDatum, eps: StarkSystem, sigmas: list[dict] | None = None, seed: int = 0) -> dict:
    """The four relations between kappa^sigma and delta^sigma, over every (n, q, sigma)."""
    _check_rank0(eps)
    R = d.ring
    sigmas = _sigma_list(d.labels, seed) if sigmas is None else sigmas
    cache = _KappaCache(d, eps)
    counts = {"i": 0, "ii": 0, "iii": 0, "iv": 0}
    fails = []

    def eq(a, b):
        return np.array_equal(np.asarray(a) % R.q, np.asarray(b) % R.q)

    for si, sigma in enumerate(sigmas):
        for nn in divisors(d.labels):
            for q in d.labels:
                if q in nn:
                    continue
                kap = cache.kappa(nn, q, sigma)
                wit = {"n": [str(x) for x in nn], "q": str(q), "sigma": {str(a): str(b) for a, b in sorted(sigma.items())}}
                for rr in nn:
                    lhs = d.evaluate(("div", rr), kap)
                    rhs = d.evaluate(("phi", sigma[rr]), cache.kappa(tuple(x for x in nn if x != rr), q, sigma))
                    counts["i"] += 1
                    if not eq(lhs, rhs):
                        fails.append({"relation": "i", "r": str(rr), **wit, "lhs": _json_vec(lhs), "rhs": _json_vec(rhs)})
                    v = d.evaluate(("phi", sigma[rr]), kap)
                    counts["iii"] += 1
                    if v.any():
                        fails.append({"relation": "iii", "r": str(rr), **wit, "lhs": _json_vec(v)})
                lhs = d.evaluate(("div", q), kap)
                rhs = cache.delta(nn, sigma)
                counts["ii"] += 1
                if not eq(lhs, rhs):
                    fails.append({"relation": "ii", **wit, "lhs": _json_vec(lhs), "rhs": _json_vec(rhs)})
                lhs = d.evaluate(("phi", sigma[q]), kap)
                rhs = -cache.delta(_key(nn + (q,)), sigma)
                counts["iv"] += 1
                if not eq(lhs, rhs):
                    fails.append({"relation": "iv", **wit, "lhs": _json_vec(lhs), "rhs": _json_vec(rhs % R.q)})
    fails.sort(key=lambda f: (f["relation"], repr(sorted(f.items()))))
    return {
        "valid": not fails,
        "sigmas": str(len(sigmas)),
        "checked": {k: str(v) for k, v in counts.items()},
        "failure_count": str(len(fails)),
        "failures": fails[:5],
    }


def stark_ideals(d: SelmerDatum, eps: StarkSystem, i: int) -> IdealHandle:
    """I_i(e) = sum over nu(n) = i of the image of e_n."""
    _check_rank0(eps)
    R = d.ring
    gens = []
    for k in divisors(d.labels):
        if len(k) == i:
            gens.extend(list(eps[k]))
    return IdealHandle.from_generators(R, gens)


def delta_ideal(d: SelmerDatum, eps: StarkSystem, i: int, sigmas: list[dict] | None = None, seed: int = 0) -> IdealHandle:
    """The ideal generated by delta^sigma_n over nu(n) = i and the given sigma."""
    sigmas = _sigma_list(d.labels, seed) if sigmas is None else sigmas
    cache = _KappaCache(d, eps)
    gens = [cache.delta(k, s) for s in sigmas for k in divisors(d.labels) if len(k) == i]
    return IdealHandle.from_generators(d.ring, gens)


def selmer_quotient(d: SelmerDatum) -> PresentedModule:
    """coker(div: H_str(top) -> R^t), the module the Stark ideals are compared against."""
    R = d.ring
    top = d.selmer(d.top, True)
    rel = top.values(d.columns([("div", q) for q in d.labels]))
    return PresentedModule(R, len(d.labels), rel)


def fitting_comparison(d: SelmerDatum, eps: StarkSystem) -> dict:
    X = selmer_quotient(d)
    rows = []
    ok = True
    for i in range(len(d.labels) + 1):
        I = stark_ideals(d, eps, i)
        F = fitting_ideal(X, i)
        same = I == F
        if d.planted is not None:
            same = same and F == fitting_ideal(d.planted, i)
        ok = ok and same
        rows.append({"i": str(i), "stark": I.describe(), "fitting": F.describe(), "equal": same})
    return {"valid": ok, "rows": rows}


# ---------------------------------------------------------------------------
# the tilde-kappa identity


def find_z(d: SelmerDatum, q: int, r: int) -> np.ndarray | None:
    """Some z in H_str(qr) with div_q(z) = 1, or None."""
    R = d.ring
    sub = d.selmer(_key((q, r)), True)
    if sub.gens.shape[0] == 0:
        return None
    vals = sub.values(d.columns([("div", q)]))  # (g, 1, m)
    x = solve(expand_scalars(vals, R), _one(R), R.p, R.n)
    if x is None:
        return None
    return group_matmul(x.reshape(1, -1, R.order), sub.gens, R)[0]


def _scale(d: SelmerDatum, a, x) -> np.ndarray:
    R = d.ring
    return group_matmul(np.asarray(a, dtype=np.int64).reshape(1, 1, R.order), np.asarray(x, dtype=np.int64).reshape(1, -1, R.order), R)[0]


def tilde_kappa_vector(d: SelmerDatum, eps: StarkSystem, mm, q: int, r: int, sigma: dict, z, cache: _KappaCache | None = None) -> np.ndarray:
    """-div_r(z) kappa_{m,r} + delta_m z + sum_{s | m} phi_{sigma(s)}(z) kappa_{m/s,s}."""
    cache = cache or _KappaCache(d, eps)
    R = d.ring
    k = _key(mm)
    out = -_scale(d, d.evaluate(("div", r), z), cache.kappa(k, r, sigma))
    out = out + _scale(d, cache.delta(k, sigma), z)
    for s in k:
        rest = tuple(x for x in k if x != s)
        out = out + _scale(d, d.evaluate(("phi", sigma[s]), z), cache.kappa(rest, s, sigma))
    return out % R.q


def descent_levels(d: SelmerDatum, n0: int, steps: int) -> list[int] | None:
    """n0 < n1 < ... with H_str over Z/p^(n_j) mapping to zero modulo p^(n_(j-1)).

    Returns None if the precision of d runs out first.
    """
    levels = [n0]
    while len(levels) <= steps:
        prev = levels[-1]
        nxt = None
        for cand in range(prev + 1, d.ring.n + 1):
            sel = d.reduce(cand).selmer((), True)
            if not (sel.gens % (d.ring.p**prev)).any():
                nxt = cand
                break
        if nxt is None:
            return None
        levels.append(nxt)
    return levels


def tilde_kappa_identity_check(
    d: SelmerDatum,
    eps: StarkSystem,
    nn,
    q: int,
    r: int,
    sigma: dict,
    z=None,
    levels: Sequence[int] | None = None,
) -> dict:
    """The div-compatibilities of kappa~ against kappa, and with tower levels the descended identity.

    With levels n_0 < ... < n_i (i = nu(n) + 1) at which the strict Selmer
    module dies on reduction, kappa_{m,q} = kappa~_{m,q} modulo p^(n_(i-1-nu(m)))
    for every m | n, and f(kappa_{n,q}) = -div_r(z) f(kappa_{n,r}) modulo
    I_(i-1) at level n_0 for the coordinate functionals f.
    """
    _check_rank0(eps)
    R = d.ring
    k = _key(nn)
    q, r = int(q), int(r)
    if q in k or r in k or q == r:
        raise StarkError("need q, r distinct and prime to n")
    if z is None:
        z = find_z(d, q, r)
        if z is None:
            return {"valid": True, "applicable": False, "reason": "no z in H_str(qr) with div_q(z) = 1"}
    z = np.asarray(z, dtype=np.int64).reshape(d.dim, R.order) % R.q
    if not d.selmer(_key((q, r)), True).contains(z):
        raise StarkError("z is not in H_str(qr)")
    if not np.array_equal(d.evaluate(("div", q), z) % R.q, _one(R)):
        raise StarkError("div_q(z) is not 1")
    cache = _KappaCache(d, eps)
    tk = {m: tilde_kappa_vector(d, eps, m, q, r, sigma, z, cache) for m in divisors(k)}
    checks = {"div_q": 0, "div_r": 0, "div_s": 0}
    fails = []

    def eq(a, b, mod=None):
        mod = R.q if mod is None else mod
        return not ((np.asarray(a) - np.asarray(b)) % mod).any()

    for m, t in tk.items():
        kap = cache.kappa(m, q, sigma)
        wit = {"m": [str(x) for x in m]}
        checks["div_q"] += 1
        if not (eq(d.evaluate(("div", q), t), cache.delta(m, sigma)) and eq(d.evaluate(("div", q), kap), cache.delta(m, sigma))):
            fails.append({"check": "div_q", **wit})
        checks["div_r"] += 1
        if not (eq(d.evaluate(("div", r), t), 0) and eq(d.evaluate(("div", r), kap), 0)):
            fails.append({"check": "div_r", **wit})
        for s in m:
            rest = tuple(x for x in m if x != s)
            checks["div_s"] += 1
            if not eq(d.evaluate(("div", s), t), d.evaluate(("phi", sigma[s]), tk[rest])):
                fails.append({"check": "div_s", "s": str(s), **wit})
    report = {
        "applicable": True,
        "n": [str(x) for x in k],
        "q": str(q),
        "r": str(r),
        "z": _json_vec(z),
        "checked": {c: str(v) for c, v in checks.items()},
    }
    if levels is not None:
        i = len(k) + 1
        levels = list(levels)
        if len(levels) < i + 1 or levels[i] > R.n:
            raise StarkError("not enough tower levels")
        n_desc = 0
        for m, t in tk.items():
            mod = R.p ** levels[i - 1 - len(m)]
            n_desc += 1
            if not eq(cache.kappa(m, q, sigma), t, mod):
                fails.append({"check": "descent", "m": [str(x) for x in m], "level": str(levels[i - 1 - len(m)])})
        low = d.reduce(levels[0])
        eps_low = stark_basis(low, 0, True)
        I = stark_ideals(low, eps_low, i - 1)
        for j in range(1, i - 1):
            I = I + stark_ideals(low, eps_low, j)
        I = I + stark_ideals(low, eps_low, 0)
        kq, kr = cache.kappa(k, q, sigma), cache.kappa(k, r, sigma)
        dz = d.evaluate(("div", r), z)
        fs = [("phi", s) for s in d.labels] + [("div", s) for s in d.labels] + [("lam", j) for j in range(d.rank)]
        n_cong = 0
        for f in fs:
            diff = (d.evaluate(f, kq) + group_matmul(dz.reshape(1, 1, -1), d.evaluate(f, kr).reshape(1, 1, -1), R)[0, 0]) % (R.p ** levels[0])
            n_cong += 1
            if not I.contains(diff):
                fails.append({"check": "congruence", "f": f"{f[0]}_{f[1]}"})
        report["levels"] = [str(v) for v in levels]
        checks["descent"] = n_desc
        checks["congruence"] = n_cong
        report["checked"] = {c: str(v) for c, v in checks.items()}
    report["valid"] = not fails
    report["failure_count"] = str(len(fails))
    report["failures"] = fails[:5]
    return report
