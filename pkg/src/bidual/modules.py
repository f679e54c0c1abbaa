"""Finitely presented modules over (Z/p^n)[G], exterior bi-duals and ideals.

A module is the cokernel of its relations matrix.  Every module-level
question is answered by expanding scalars to Z/p^n and working with Howell
lattices; the group action is carried along by the regular representation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Sequence

import numpy as np

from .linalg import Lattice, expand_scalars, kernel, solve
from .ring import GroupRingElement, RingDescriptor, RingError


class ModuleError(ValueError):
    pass


# ---------------------------------------------------------------------------
# group-ring helpers


def gmul(a: np.ndarray, b: np.ndarray, ring: RingDescriptor) -> np.ndarray:
    return np.einsum("h,l,hlg->g", a, b, ring.perm_tensor) % ring.q


def orbit_rows(v: np.ndarray, ring: RingDescriptor) -> np.ndarray:
    """Z-span generators of the R-submodule generated by a vector of R^k."""
    v = np.asarray(v, dtype=np.int64).reshape(1, -1, ring.order)
    return expand_scalars(v, ring)


def as_rows(X, ring: RingDescriptor, k: int) -> np.ndarray:
    """Flat Z/p^n vectors -> array of shape (rows, k, |G|)."""
    X = np.asarray(X, dtype=np.int64)
    return X.reshape(-1, k, ring.order)


def flat(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.int64)
    return X.reshape(X.shape[0], -1)


def subsets(k: int, r: int) -> list[tuple[int, ...]]:
    return list(combinations(range(k), r))


def wedge_sign(T: Sequence[int], U: Sequence[int]) -> int:
    """Sign of the shuffle putting the concatenation T + U into increasing order."""
    inv = sum(1 for t in T for u in U if t > u)
    return -1 if inv % 2 else 1


def minors(C: np.ndarray, r: int, ring: RingDescriptor) -> np.ndarray:
    """All r x r minors of a group-ring matrix C of shape (a, b, |G|).

    Entry [i, j] is the minor on the i-th r-subset of rows and the j-th
    r-subset of columns (lexicographic order).
    """
    C = np.asarray(C, dtype=np.int64) % ring.q
    a, b, m = C.shape
    rows = subsets(a, r)
    cols = subsets(b, r)
    out = np.zeros((len(rows), len(cols), m), dtype=np.int64)
    if r == 0:
        out[0, 0, 0] = 1
        return out
    memo: dict = {}
    one = np.zeros(m, dtype=np.int64)
    one[0] = 1

    def det(T, S):
        if not T:
            return one
        key = (T, S)
        if key in memo:
            return memo[key]
        acc = np.zeros(m, dtype=np.int64)
        t0 = T[0]
        for j, s in enumerate(S):
            e = C[t0, s]
            if not e.any():
                continue
            sub = det(T[1:], S[:j] + S[j + 1 :])
            if not sub.any():
                continue
            term = gmul(e, sub, ring)
            acc = acc - term if j % 2 else acc + term
        acc %= ring.q
        memo[key] = acc
        return acc

    for i, T in enumerate(rows):
        for j, S in enumerate(cols):
            out[i, j] = det(T, S)
    return out


def wedge_matrix(C: np.ndarray, r: int, ring: RingDescriptor) -> np.ndarray:
    """Matrix of the r-th exterior power of the map given by C (rows -> combinations of columns)."""
    return minors(C, r, ring)


def transpose(A: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(np.swapaxes(np.asarray(A, dtype=np.int64), 0, 1))


def group_matmul(A, B, ring: RingDescriptor) -> np.ndarray:
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], B.shape[1], ring.order), dtype=np.int64)
    return np.einsum("ijh,jkl,hlg->ikg", A, B, ring.perm_tensor, optimize=True) % ring.q


def maximal_ideal_rows(ring: RingDescriptor) -> list[np.ndarray]:
    """Generators p and s_i - 1 of the maximal ideal of a local group ring."""
    gens = []
    e = np.zeros(ring.order, dtype=np.int64)
    e[0] = ring.p
    gens.append(e)
    for idx in ring.generator_indices:
        v = np.zeros(ring.order, dtype=np.int64)
        v[idx] += 1
        v[0] -= 1
        gens.append(v % ring.q)
    return gens


def scale_rows(B: np.ndarray, a: np.ndarray, ring: RingDescriptor, k: int) -> np.ndarray:
    """Multiply every flat vector in B (viewed in R^k) by the ring element a."""
    if B.shape[0] == 0:
        return B
    X = as_rows(B, ring, k)
    Ea = np.einsum("h,hgk->gk", a, ring.perm_tensor)
    return flat(np.einsum("ijg,gk->ijk", X, Ea) % ring.q)


def r_generators(
    lattice: Lattice,
    ring: RingDescriptor,
    k: int,
    forced: np.ndarray | None = None,
    modulo: Lattice | None = None,
) -> np.ndarray:
    """R-module generators (flat vectors in R^k) of lattice + modulo, modulo `modulo`.

    `forced` vectors are always kept first.  Over a local ring the greedy
    selection is done modulo m*lattice, which yields a minimal generating set
    by Nakayama's lemma.
    """
    p, n, dim = ring.p, ring.n, k * ring.order
    if dim == 0:
        return np.zeros((0, 0), dtype=np.int64)
    span = modulo if modulo is not None else Lattice.zero(p, n, dim)
    chosen = []
    if forced is not None:
        for v in np.asarray(forced, dtype=np.int64).reshape(-1, dim):
            chosen.append(v % ring.q)
            span = span + Lattice.span(orbit_rows(v, ring), p, n, dim)
    target = (lattice + span) if modulo is not None or forced is not None else lattice
    if span.length() == target.length():
        return np.array(chosen, dtype=np.int64).reshape(-1, dim)
    test = span
    if ring.is_local():
        mrows = [scale_rows(lattice.basis, a, ring, k) for a in maximal_ideal_rows(ring)]
        test = span + Lattice.span(np.vstack(mrows), p, n, dim)
    for v in lattice.basis:
        if test.contains(v):
            continue
        chosen.append(v)
        orb = Lattice.span(orbit_rows(v, ring), p, n, dim)
        span = span + orb
        test = test + orb
        if span.length() == target.length():
            break
    return np.array(chosen, dtype=np.int64).reshape(-1, dim)


# ---------------------------------------------------------------------------
# presented modules


@dataclass(frozen=True, eq=False)
class PresentedModule:
    """coker(R^r -> R^g) given by a relations array of shape (r, g, |G|)."""

    ring: RingDescriptor
    gens: int
    relations: np.ndarray = field(repr=False)

    def __post_init__(self):
        rel = np.asarray(self.relations, dtype=np.int64)
        if rel.size == 0:
            rel = np.zeros((0, self.gens, self.ring.order), dtype=np.int64)
        if rel.ndim == 2 and self.ring.order == 1:
            rel = rel[:, :, None]
        if rel.ndim != 3 or rel.shape[1] != self.gens or rel.shape[2] != self.ring.order:
            raise ModuleError(f"relations must have shape (r, {self.gens}, {self.ring.order}), got {rel.shape}")
        rel = rel % self.ring.q
        rel.setflags(write=False)
        object.__setattr__(self, "relations", rel)

    @classmethod
    def free(cls, ring: RingDescriptor, k: int) -> "PresentedModule":
        return cls(ring, k, np.zeros((0, k, ring.order), dtype=np.int64))

    @classmethod
    def cyclic(cls, ring: RingDescriptor, annihilators: Sequence) -> "PresentedModule":
        rels = [np.asarray(a.coeffs if isinstance(a, GroupRingElement) else a, dtype=np.int64) for a in annihilators]
        return cls(ring, 1, np.array(rels, dtype=np.int64).reshape(-1, 1, ring.order))

    @classmethod
    def diagonal(cls, ring: RingDescriptor, entries: Sequence) -> "PresentedModule":
        k = len(entries)
        rel = np.zeros((k, k, ring.order), dtype=np.int64)
        for i, a in enumerate(entries):
            rel[i, i] = np.asarray(a.coeffs if isinstance(a, GroupRingElement) else ring.scalar(a).coeffs)
        return cls(ring, k, rel)

    @classmethod
    def from_integer_matrix(cls, ring: RingDescriptor, rows: Sequence[Sequence[int]], gens: int | None = None):
        A = np.array(rows, dtype=np.int64)
        g = gens if gens is not None else (A.shape[1] if A.size else 0)
        A = A.reshape(-1, g)
        rel = np.zeros(A.shape + (ring.order,), dtype=np.int64)
        rel[:, :, 0] = A
        return cls(ring, g, rel)

    @property
    def dim(self) -> int:
        return self.gens * self.ring.order

    @cached_property
    def rel_lattice(self) -> Lattice:
        R = self.ring
        if self.relations.shape[0] == 0:
            return Lattice.zero(R.p, R.n, self.dim)
        return Lattice.span(expand_scalars(self.relations, R), R.p, R.n, self.dim)

    def length(self) -> int:
        return self.gens * self.ring.order * self.ring.n - self.rel_lattice.length()

    def is_zero(self) -> bool:
        return self.length() == 0

    def element(self, coeffs) -> np.ndarray:
        return np.asarray(coeffs, dtype=np.int64).reshape(self.gens, self.ring.order) % self.ring.q

    def is_zero_element(self, x) -> bool:
        return self.rel_lattice.contains(np.asarray(x, dtype=np.int64).ravel())

    def elements_equal(self, x, y) -> bool:
        return self.is_zero_element(np.asarray(x, dtype=np.int64).ravel() - np.asarray(y, dtype=np.int64).ravel())

    def direct_sum(self, other: "PresentedModule") -> "PresentedModule":
        if other.ring != self.ring:
            raise ModuleError("ring mismatch")
        g1, g2, m = self.gens, other.gens, self.ring.order
        r1, r2 = self.relations.shape[0], other.relations.shape[0]
        rel = np.zeros((r1 + r2, g1 + g2, m), dtype=np.int64)
        rel[:r1, :g1] = self.relations
        rel[r1:, g1:] = other.relations
        return PresentedModule(self.ring, g1 + g2, rel)

    def with_free_summand(self, s: int) -> "PresentedModule":
        """The same module presented on g+s generators with the extra ones killed."""
        g, m = self.gens, self.ring.order
        r = self.relations.shape[0]
        rel = np.zeros((r + s, g + s, m), dtype=np.int64)
        rel[:r, :g] = self.relations
        for i in range(s):
            rel[r + i, g + i, 0] = 1
        return PresentedModule(self.ring, g + s, rel)

    def to_json(self) -> dict:
        return {
            "ring": self.ring.to_json(),
            "gens": self.gens,
            "relations": [[[str(int(c)) for c in e] for e in row] for row in self.relations],
        }

    @classmethod
    def from_json(cls, data) -> "PresentedModule":
        try:
            ring = RingDescriptor.from_json(data["ring"])
            g = int(data["gens"])
            rows = data.get("relations", [])
            rel = np.zeros((len(rows), g, ring.order), dtype=np.int64)
            for i, row in enumerate(rows):
                if len(row) != g:
                    raise ModuleError("relation row length differs from generator count")
                for j, e in enumerate(row):
                    if isinstance(e, (list, tuple)):
                        if len(e) != ring.order:
                            raise ModuleError("group-ring entry has wrong length")
                        rel[i, j] = [int(c) for c in e]
                    else:
                        rel[i, j, 0] = int(e)
            return cls(ring, g, rel)
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ModuleError):
                raise
            raise ModuleError(f"malformed module presentation: {exc}") from exc


def subquotient(
    ring: RingDescriptor,
    k: int,
    lattice: Lattice,
    modulo: Lattice | None = None,
    forced: np.ndarray | None = None,
) -> tuple[PresentedModule, np.ndarray]:
    """Present (lattice + modulo)/modulo for R-stable lattices in R^k.

    Returns the module and its generators as an array (s, k, |G|) of ambient
    vectors.
    """
    dim = k * ring.order
    G = r_generators(lattice, ring, k, forced=forced, modulo=modulo)
    s = G.shape[0]
    if s == 0:
        return PresentedModule.free(ring, 0), np.zeros((0, k, ring.order), dtype=np.int64)
    E = expand_scalars(as_rows(G, ring, k), ring)
    mod_basis = modulo.basis if modulo is not None else None
    K = kernel(E, ring.p, ring.n, modulo=mod_basis)
    Klat = Lattice.span(K, ring.p, ring.n, s * ring.order)
    rel = r_generators(Klat, ring, s)
    return PresentedModule(ring, s, as_rows(rel, ring, s)), as_rows(G, ring, k)


# ---------------------------------------------------------------------------
# maps


@dataclass(frozen=True, eq=False)
class ModuleMap:
    """Sends source generator i to the target element action[i] (shape (g_s, g_t, |G|))."""

    source: PresentedModule
    target: PresentedModule
    action: np.ndarray = field(repr=False)

    def __post_init__(self):
        A = np.asarray(self.action, dtype=np.int64) % self.source.ring.q
        if A.shape != (self.source.gens, self.target.gens, self.source.ring.order):
            raise ModuleError(f"map matrix has shape {A.shape}")
        if self.source.ring != self.target.ring:
            raise ModuleError("ring mismatch")
        A.setflags(write=False)
        object.__setattr__(self, "action", A)
        if self.source.relations.shape[0]:
            img = group_matmul(self.source.relations, A, self.source.ring)
            if not self.target.rel_lattice.contains_all(flat(img)):
                raise ModuleError("map does not respect the source relations")

    @cached_property
    def matrix(self) -> np.ndarray:
        return expand_scalars(self.action, self.source.ring)

    def apply(self, x) -> np.ndarray:
        R = self.source.ring
        v = np.asarray(x, dtype=np.int64).ravel() @ self.matrix % R.q
        return v.reshape(self.target.gens, R.order)

    def image_lattice(self) -> Lattice:
        R = self.source.ring
        rows = self.matrix
        return Lattice.span(rows, R.p, R.n, self.target.dim) + self.target.rel_lattice

    def kernel_lattice(self) -> Lattice:
        R = self.source.ring
        K = kernel(self.matrix, R.p, R.n, modulo=self.target.rel_lattice.basis)
        return Lattice.span(K, R.p, R.n, self.source.dim) + self.source.rel_lattice

    def is_injective(self) -> bool:
        return self.kernel_lattice() == self.source.rel_lattice

    def is_surjective(self) -> bool:
        return self.image_lattice() == Lattice.full(self.source.ring.p, self.source.ring.n, self.target.dim)

    def compose(self, after: "ModuleMap") -> "ModuleMap":
        """after o self."""
        return ModuleMap(self.source, after.target, group_matmul(self.action, after.action, self.source.ring))


def identity_map(M: PresentedModule) -> ModuleMap:
    A = np.zeros((M.gens, M.gens, M.ring.order), dtype=np.int64)
    for i in range(M.gens):
        A[i, i, 0] = 1
    return ModuleMap(M, M, A)


# ---------------------------------------------------------------------------
# Hom, dual, exterior powers


@dataclass(frozen=True, eq=False)
class HomModule:
    """Hom_R(M, N) with each generator stored as a g_M x g_N assignment matrix."""

    source: PresentedModule
    target: PresentedModule
    module: PresentedModule
    assignments: np.ndarray = field(repr=False)  # (s, g_M, g_N, |G|)

    def evaluate(self, f_coeffs, x) -> np.ndarray:
        """Evaluate sum_j f_j * gen_j at the element x of the source."""
        R = self.source.ring
        f = np.asarray(f_coeffs, dtype=np.int64).reshape(-1, R.order)
        A = np.zeros((self.source.gens, self.target.gens, R.order), dtype=np.int64)
        for j, c in enumerate(f):
            if c.any():
                A = A + group_matmul(c.reshape(1, 1, -1), self.assignments[j].reshape(1, -1, R.order), R).reshape(A.shape)
        xr = np.asarray(x, dtype=np.int64).reshape(1, self.source.gens, R.order)
        return group_matmul(xr, A % R.q, R)[0]


def hom_module(M: PresentedModule, N: PresentedModule) -> HomModule:
    if M.ring != N.ring:
        raise ModuleError("ring mismatch")
    R = M.ring
    gM, gN, m = M.gens, N.gens, R.order
    dim = gM * gN * m
    if gM == 0 or gN == 0:
        return HomModule(M, N, PresentedModule.free(R, 0), np.zeros((0, gM, gN, m), dtype=np.int64))
    rels = M.relations
    r = rels.shape[0]
    # F (gM x gN) -> rho F for every relation rho, landing in N^r
    if r:
        T = np.zeros((gM * gN, r * gN, m), dtype=np.int64)
        for k in range(r):
            for i in range(gM):
                for j in range(gN):
                    T[i * gN + j, k * gN + j] = rels[k, i]
        modulo = np.zeros((0, r * gN * m), dtype=np.int64)
        NL = N.rel_lattice.basis
        blocks = []
        for k in range(r):
            Bk = np.zeros((NL.shape[0], r * gN * m), dtype=np.int64)
            Bk[:, k * gN * m : (k + 1) * gN * m] = NL
            blocks.append(Bk)
        modulo = np.vstack(blocks) if blocks else modulo
        K = kernel(expand_scalars(T, R), R.p, R.n, modulo=modulo)
        H = Lattice.span(K, R.p, R.n, dim)
    else:
        H = Lattice.full(R.p, R.n, dim)
    # functions with values in the relation lattice of N are zero
    NL = N.rel_lattice.basis
    zb = []
    for i in range(gM):
        B = np.zeros((NL.shape[0], dim), dtype=np.int64)
        B[:, i * gN * m : (i + 1) * gN * m] = NL
        zb.append(B)
    Z = Lattice.span(np.vstack(zb), R.p, R.n, dim) if zb else Lattice.zero(R.p, R.n, dim)
    mod, gens = subquotient(R, gM * gN, H, modulo=Z)
    return HomModule(M, N, mod, gens.reshape(-1, gM, gN, m))


@dataclass(frozen=True, eq=False)
class DualModule:
    """M* with generators stored as their values on the generators of M."""

    base: PresentedModule
    module: PresentedModule
    functionals: np.ndarray = field(repr=False)  # (k, g, |G|)
    lattice: Lattice = field(repr=False)

    @property
    def k(self) -> int:
        return self.functionals.shape[0]

    def express(self, values) -> np.ndarray:
        """Coefficients (k, |G|) writing a functional (given by its values) in the generators."""
        R = self.base.ring
        v = np.asarray(values, dtype=np.int64).ravel()
        if self.k == 0:
            if v.any():
                raise ModuleError("functional is not in M*")
            return np.zeros((0, R.order), dtype=np.int64)
        x = solve(self.expanded, v, R.p, R.n)
        if x is None:
            raise ModuleError("functional is not in M*")
        return x.reshape(self.k, R.order)

    @cached_property
    def expanded(self) -> np.ndarray:
        return expand_scalars(self.functionals, self.base.ring)


def dual(M: PresentedModule, forced=None) -> DualModule:
    R = M.ring
    g, m = M.gens, R.order
    rels = M.relations
    if rels.shape[0]:
        K = kernel(expand_scalars(transpose(rels), R), R.p, R.n)
        D = Lattice.span(K, R.p, R.n, g * m)
    else:
        D = Lattice.full(R.p, R.n, g * m)
    forced_flat = None if forced is None else np.asarray(forced, dtype=np.int64).reshape(-1, g * m)
    mod, gens = subquotient(R, g, D, forced=forced_flat)
    return DualModule(M, mod, gens, D)


def exterior_power(M: PresentedModule, r: int) -> PresentedModule:
    """Lambda^r M presented on r-subsets of the generators."""
    R = M.ring
    g, m = M.gens, R.order
    if r < 0:
        raise ModuleError("negative exterior degree")
    T = subsets(g, r)
    if r == 0:
        return PresentedModule.free(R, 1)
    if not T:
        return PresentedModule.free(R, 0)
    pos = {S: i for i, S in enumerate(T)}
    rows = []
    for rho in M.relations:
        for U in subsets(g, r - 1):
            row = np.zeros((len(T), m), dtype=np.int64)
            nz = False
            for i in range(g):
                if i in U or not rho[i].any():
                    continue
                S = tuple(sorted(U + (i,)))
                row[pos[S]] = (row[pos[S]] + wedge_sign((i,), U) * rho[i]) % R.q
                nz = True
            if nz:
                rows.append(row)
    rel = np.array(rows, dtype=np.int64).reshape(-1, len(T), m)
    return PresentedModule(R, len(T), rel)


# ---------------------------------------------------------------------------
# exterior bi-duals


@dataclass(frozen=True, eq=False)
class ExteriorBidual:
    """(Lambda^r M*)* stored as the lattice of value vectors on the basis phi_S of Lambda^r M*."""

    base: PresentedModule
    r: int
    dualmod: DualModule
    lattice: Lattice = field(repr=False)

    @property
    def ring(self) -> RingDescriptor:
        return self.base.ring

    @cached_property
    def subsets(self) -> list[tuple[int, ...]]:
        return subsets(self.dualmod.k, self.r)

    @property
    def width(self) -> int:
        return len(self.subsets)

    def length(self) -> int:
        return self.lattice.length()

    @cached_property
    def module(self) -> PresentedModule:
        return subquotient(self.ring, self.width, self.lattice)[0]

    def contains(self, y) -> bool:
        return self.lattice.contains(np.asarray(y, dtype=np.int64).ravel())

    def evaluate(self, y, wedge_coeffs) -> np.ndarray:
        """y(Psi) for Psi = sum_S c_S phi_S."""
        R = self.ring
        yy = np.asarray(y, dtype=np.int64).reshape(self.width, R.order)
        c = np.asarray(wedge_coeffs, dtype=np.int64).reshape(self.width, R.order)
        return group_matmul(c.reshape(1, -1, R.order), yy.reshape(-1, 1, R.order), R)[0, 0]

    @cached_property
    def xi_matrix(self) -> np.ndarray:
        """Group-ring matrix (C(g,r), C(k,r)) of xi^r: e_T -> (phi_S -> det phi_s(e_t))."""
        R = self.ring
        Phi = self.dualmod.functionals  # (k, g, m)
        if self.r == 0:
            return np.ones((1, 1, 1), dtype=np.int64) * np.eye(1, R.order, dtype=np.int64)[None]
        W = minors(Phi, self.r, R)  # (C(k,r), C(g,r), m)
        return transpose(W)

    def xi(self, wedge_coeffs) -> np.ndarray:
        """Image in the bi-dual of an element of Lambda^r M given on the basis e_T."""
        R = self.ring
        c = np.asarray(wedge_coeffs, dtype=np.int64).reshape(1, -1, R.order)
        return group_matmul(c, self.xi_matrix, R)[0]

    def xi_map_lattices(self) -> tuple[PresentedModule, np.ndarray]:
        return exterior_power(self.base, self.r), self.xi_matrix

    def xi_is_injective(self) -> bool:
        R = self.ring
        L = exterior_power(self.base, self.r)
        if L.gens == 0:
            return True
        E = expand_scalars(self.xi_matrix, R)
        K = kernel(E, R.p, R.n)
        return L.rel_lattice.contains_all(K)

    def xi_is_surjective(self) -> bool:
        R = self.ring
        if self.width == 0 or exterior_power(self.base, self.r).gens == 0:
            return self.lattice.length() == 0
        img = Lattice.span(expand_scalars(self.xi_matrix, R), R.p, R.n, self.width * R.order)
        return img == self.lattice

    def xi_is_bijective(self) -> bool:
        return self.xi_is_injective() and self.xi_is_surjective()


def exterior_bidual(M: PresentedModule, r: int, forced=None, dualmod: DualModule | None = None) -> ExteriorBidual:
    R = M.ring
    D = dualmod if dualmod is not None else dual(M, forced=forced)
    P = exterior_power(D.module, r)
    width = P.gens
    if width == 0:
        return ExteriorBidual(M, r, D, Lattice.zero(R.p, R.n, 0))
    if P.relations.shape[0]:
        K = kernel(expand_scalars(transpose(P.relations), R), R.p, R.n)
        B = Lattice.span(K, R.p, R.n, width * R.order)
    else:
        B = Lattice.full(R.p, R.n, width * R.order)
    return ExteriorBidual(M, r, D, B)


def xi_map(M: PresentedModule, r: int) -> tuple[ExteriorBidual, np.ndarray]:
    B = exterior_bidual(M, r)
    return B, B.xi_matrix


def contraction_matrix(coeffs: np.ndarray, k: int, r: int, s: int, ring: RingDescriptor) -> np.ndarray:
    """Matrix (C(k,s), C(k,s-r)) of the map dual to Psi -> Phi ^ Psi.

    coeffs gives Phi on the basis phi_T of Lambda^r M* (shape (C(k,r), |G|)).
    """
    if s < r:
        raise ModuleError("contraction needs s >= r")
    src = subsets(k, s)
    dst = subsets(k, s - r)
    spos = {S: i for i, S in enumerate(src)}
    W = np.zeros((len(src), len(dst), ring.order), dtype=np.int64)
    for t, T in enumerate(subsets(k, r)):
        c = coeffs[t]
        if not c.any():
            continue
        for u, U in enumerate(dst):
            if set(T) & set(U):
                continue
            S = tuple(sorted(T + U))
            W[spos[S], u] = (W[spos[S], u] + wedge_sign(T, U) * c) % ring.q
    return W


def contract(B_s: ExteriorBidual, coeffs, r: int) -> tuple[ExteriorBidual, np.ndarray]:
    """Contraction by Phi in Lambda^r M*: returns the target bi-dual and the map matrix."""
    R = B_s.ring
    s = B_s.r
    k = B_s.dualmod.k
    c = np.asarray(coeffs, dtype=np.int64).reshape(-1, R.order)
    W = contraction_matrix(c, k, r, s, R)
    target = exterior_bidual(B_s.base, s - r, dualmod=B_s.dualmod)
    return target, W


def apply_matrix(y, W, ring: RingDescriptor) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64).reshape(1, -1, ring.order)
    if y.shape[1] == 0:
        return np.zeros((W.shape[1], ring.order), dtype=np.int64)
    return group_matmul(y, W, ring)[0]


def induced_bidual_matrix(f: ModuleMap, r: int, DM: DualModule, DN: DualModule) -> np.ndarray:
    """Matrix of the bi-dual map induced by f: M -> N (rows over C(k_M,r), cols over C(k_N,r))."""
    R = f.source.ring
    # f*(psi_j) has values psi_j(f(e_i)) on the source generators
    vals = group_matmul(DN.functionals, transpose(f.action), R)  # (k_N, g_M)
    C = np.array([DM.express(v) for v in vals], dtype=np.int64).reshape(DN.k, DM.k, R.order)
    W = minors(C, r, R)  # (C(k_N,r), C(k_M,r))
    return transpose(W)


def lattice_map_length(B: Lattice, W: np.ndarray, ring: RingDescriptor) -> int:
    if B.basis.shape[0] == 0 or W.shape[1] == 0:
        return 0
    E = expand_scalars(W, ring)
    return Lattice.span(B.basis @ E % ring.q, ring.p, ring.n, E.shape[1]).length()


# ---------------------------------------------------------------------------
# submodules and base change


def submodule_presentation(M: PresentedModule, elements) -> tuple[PresentedModule, ModuleMap]:
    R = M.ring
    E = np.asarray(elements, dtype=np.int64).reshape(-1, M.gens, R.order) % R.q
    if E.shape[0] == 0:
        N = PresentedModule.free(R, 0)
        return N, ModuleMap(N, M, np.zeros((0, M.gens, R.order), dtype=np.int64))
    L = Lattice.span(expand_scalars(E, R), R.p, R.n, M.dim)
    mod, gens = subquotient(R, M.gens, L, modulo=M.rel_lattice)
    return mod, ModuleMap(mod, M, gens)


def preimage_submodule(M: PresentedModule, lattice: Lattice) -> tuple[PresentedModule, ModuleMap]:
    """Submodule of M given by an R-stable lattice of representatives (containing relations or not)."""
    mod, gens = subquotient(M.ring, M.gens, lattice, modulo=M.rel_lattice)
    return mod, ModuleMap(mod, M, gens)


@dataclass(frozen=True)
class RingMap:
    """Surjection (Z/p^n)[G] -> (Z/p^m)[G'] given by m <= n and a group epimorphism."""

    source: RingDescriptor
    target: RingDescriptor
    index_map: tuple[int, ...]

    def __post_init__(self):
        S, T = self.source, self.target
        if S.p != T.p or T.n > S.n:
            raise ModuleError("only reductions mod p^m with m <= n are supported")
        im = self.index_map
        if len(im) != S.order:
            raise ModuleError("index map has wrong length")
        if set(im) != set(range(T.order)):
            raise ModuleError("group map is not surjective")
        tabS, tabT = S.mul_table, T.mul_table
        for a in range(S.order):
            for b in range(S.order):
                if im[tabS[a, b]] != tabT[im[a], im[b]]:
                    raise ModuleError("index map is not a homomorphism")

    @classmethod
    def identity(cls, R: RingDescriptor) -> "RingMap":
        return cls(R, R, tuple(range(R.order)))

    @classmethod
    def reduction(cls, R: RingDescriptor, m: int) -> "RingMap":
        return cls(R, RingDescriptor(R.p, m, R.invariant_factors), tuple(range(R.order)))

    @classmethod
    def factor_projection(cls, R: RingDescriptor, new_factors: Sequence[int], m: int | None = None) -> "RingMap":
        """Send the i-th cyclic factor Z/d_i onto Z/d'_i (d'_i | d_i); d'_i = 1 kills it."""
        if len(new_factors) != len(R.invariant_factors):
            raise ModuleError("one target order per invariant factor")
        for d, e in zip(R.invariant_factors, new_factors):
            if d % e:
                raise ModuleError("target order must divide source order")
        kept = [(i, e) for i, e in enumerate(new_factors) if e > 1]
        T = RingDescriptor(R.p, R.n if m is None else m, tuple(sorted(e for _, e in kept)))
        order = sorted(range(len(kept)), key=lambda j: kept[j][1])
        im = []
        for idx in range(R.order):
            ex = R.exponents(idx)
            im.append(T.index([ex[kept[j][0]] % kept[j][1] for j in order]))
        return cls(R, T, tuple(im))

    def push(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        out = np.zeros(a.shape[:-1] + (self.target.order,), dtype=np.int64)
        for g, h in enumerate(self.index_map):
            out[..., h] += a[..., g]
        return out % self.target.q


def base_change(M: PresentedModule, proj: RingMap) -> PresentedModule:
    if proj.source != M.ring:
        raise ModuleError("projection source differs from module ring")
    return PresentedModule(proj.target, M.gens, proj.push(M.relations))


@dataclass(frozen=True, eq=False)
class KernelPresentation:
    """M = ker(alpha: R^a -> R^b) with alpha of shape (a, b, |G|)."""

    ring: RingDescriptor
    alpha: np.ndarray = field(repr=False)

    @property
    def a(self) -> int:
        return self.alpha.shape[0]

    @property
    def b(self) -> int:
        return self.alpha.shape[1]

    @cached_property
    def kernel_lattice(self) -> Lattice:
        R = self.ring
        K = kernel(expand_scalars(self.alpha, R), R.p, R.n)
        return Lattice.span(K, R.p, R.n, self.a * R.order)

    @cached_property
    def submodule(self) -> tuple[PresentedModule, ModuleMap]:
        return preimage_submodule(PresentedModule.free(self.ring, self.a), self.kernel_lattice)

    def bidual_in_free(self, r: int) -> Lattice:
        """Image of the definitional bi-dual under the canonical map into Lambda^r R^a."""
        R = self.ring
        N, inc = self.submodule
        B = exterior_bidual(N, r)
        P1 = PresentedModule.free(R, self.a)
        DP = dual(P1)
        W = induced_bidual_matrix(inc, r, B.dualmod, DP)
        width = len(subsets(self.a, r))
        if B.lattice.basis.shape[0] == 0 or width == 0:
            return Lattice.zero(R.p, R.n, width * R.order)
        # the dual basis of R^a is the standard one, so Lambda^r R^a = bi-dual coordinates
        return Lattice.span(B.lattice.basis @ expand_scalars(W, R) % R.q, R.p, R.n, width * R.order)

    def bidual_definitional_length(self, r: int) -> int:
        N, _ = self.submodule
        return exterior_bidual(N, r).length()

    def koszul_kernel(self, r: int) -> Lattice:
        """ker(Lambda^r P1 -> P2 (x) Lambda^{r-1} P1), e_T -> sum (-1)^i alpha(e_{t_i}) (x) e_{T - t_i}."""
        R = self.ring
        a, b, m = self.a, self.b, R.order
        src = subsets(a, r)
        dst = subsets(a, r - 1)
        dpos = {U: i for i, U in enumerate(dst)}
        T = np.zeros((len(src), b * len(dst), m), dtype=np.int64)
        for i, S in enumerate(src):
            for j, t in enumerate(S):
                U = S[:j] + S[j + 1 :]
                u = dpos[U]
                sign = -1 if j % 2 else 1
                for col in range(b):
                    T[i, col * len(dst) + u] = (T[i, col * len(dst) + u] + sign * self.alpha[t, col]) % R.q
        if len(src) == 0:
            return Lattice.zero(R.p, R.n, 0)
        K = kernel(expand_scalars(T, R), R.p, R.n)
        return Lattice.span(K, R.p, R.n, len(src) * m)

    def base_change(self, proj: RingMap) -> "KernelPresentation":
        return KernelPresentation(proj.target, proj.push(self.alpha))

    def reduction_map(self, proj: RingMap, r: int) -> tuple[Lattice, Lattice]:
        """Push the Koszul-kernel description of the bi-dual through proj.

        Returns (pushed image, target Koszul kernel); the canonical map exists
        because the image lies inside the target.
        """
        src = self.koszul_kernel(r)
        tgt = self.base_change(proj).koszul_kernel(r)
        R, T = self.ring, proj.target
        width = len(subsets(self.a, r))
        if src.basis.shape[0] == 0:
            return Lattice.zero(T.p, T.n, width * T.order), tgt
        pushed = proj.push(src.basis.reshape(-1, width, R.order)).reshape(-1, width * T.order)
        return Lattice.span(pushed, T.p, T.n, width * T.order), tgt


# ---------------------------------------------------------------------------
# ideals


@dataclass(frozen=True, eq=False)
class IdealHandle:
    ring: RingDescriptor
    lattice: Lattice = field(repr=False)
    generators_echo: tuple = ()

    @classmethod
    def from_generators(cls, ring: RingDescriptor, gens) -> "IdealHandle":
        G = np.asarray([np.asarray(g.coeffs if isinstance(g, GroupRingElement) else g, dtype=np.int64) for g in gens], dtype=np.int64).reshape(-1, ring.order)
        if G.shape[0] == 0:
            return cls(ring, Lattice.zero(ring.p, ring.n, ring.order), ())
        rows = expand_scalars(G.reshape(-1, 1, ring.order), ring)
        echo = tuple(tuple(int(c) % ring.q for c in g) for g in G)
        return cls(ring, Lattice.span(rows, ring.p, ring.n, ring.order), echo)

    @classmethod
    def from_lattice(cls, ring: RingDescriptor, lattice: Lattice) -> "IdealHandle":
        # close under the group action, which is a no-op for kernels/images of R-maps
        rows = expand_scalars(lattice.basis.reshape(-1, 1, ring.order), ring) if lattice.basis.shape[0] else lattice.basis
        return cls(ring, Lattice.span(rows, ring.p, ring.n, ring.order))

    @classmethod
    def unit(cls, ring: RingDescriptor) -> "IdealHandle":
        return cls.from_generators(ring, [ring.one()])

    @classmethod
    def zero(cls, ring: RingDescriptor) -> "IdealHandle":
        return cls.from_generators(ring, [])

    @property
    def basis(self) -> np.ndarray:
        return self.lattice.basis

    def contains(self, a) -> bool:
        v = a.coeffs if isinstance(a, GroupRingElement) else a
        return self.lattice.contains(np.asarray(v, dtype=np.int64))

    def is_closed(self) -> bool:
        R = self.ring
        for idx in R.generator_indices:
            s = np.zeros(R.order, dtype=np.int64)
            s[idx] = 1
            if not self.lattice.contains_all(scale_rows(self.basis, s, R, 1)):
                return False
        return True

    def __le__(self, other: "IdealHandle") -> bool:
        _same(self, other)
        return self.lattice <= other.lattice

    def __eq__(self, other) -> bool:
        if not isinstance(other, IdealHandle):
            return NotImplemented
        return self.ring == other.ring and self.lattice == other.lattice

    def __hash__(self):
        return hash((self.ring, self.lattice))

    def __add__(self, other: "IdealHandle") -> "IdealHandle":
        _same(self, other)
        return IdealHandle(self.ring, self.lattice + other.lattice)

    def __mul__(self, other: "IdealHandle") -> "IdealHandle":
        _same(self, other)
        R = self.ring
        prods = [gmul(a, b, R) for a in self.basis for b in other.basis]
        return IdealHandle.from_generators(R, prods)

    def is_zero(self) -> bool:
        return self.basis.shape[0] == 0

    def is_unit(self) -> bool:
        return self.contains(self.ring.one())

    def length(self) -> int:
        return self.lattice.length()

    def describe(self) -> str:
        """Short human form: (0), (1), (p^k) when principal by a scalar, else a Howell listing."""
        R = self.ring
        if self.is_zero():
            return "(0)"
        for k in range(R.n):
            if self == IdealHandle.from_generators(R, [R.scalar(R.p**k)]):
                return "(1)" if k == 0 else f"({R.p**k})"
        return "<" + "; ".join("[" + ",".join(str(int(c)) for c in row) + "]" for row in self.basis) + ">"

    def to_json(self) -> dict:
        return {
            "ring": self.ring.to_json(),
            "howell_basis": [[str(int(c)) for c in row] for row in self.basis],
            "generators_echo": [[str(c) for c in g] for g in self.generators_echo],
            "description": self.describe(),
        }


def _same(a: IdealHandle, b: IdealHandle):
    if a.ring != b.ring:
        raise ModuleError("ring mismatch")


def ideal_compare(a: IdealHandle, b: IdealHandle) -> str:
    _same(a, b)
    ab, ba = a <= b, b <= a
    if ab and ba:
        return "equal"
    if ab:
        return "a<b"
    if ba:
        return "b<a"
    return "incomparable"


def fitting_ideal(M: PresentedModule, i: int) -> IdealHandle:
    R = M.ring
    g, r = M.gens, M.relations.shape[0]
    size = g - i
    if size <= 0:
        return IdealHandle.unit(R)
    if size > r:
        return IdealHandle.zero(R)
    W = minors(M.relations, size, R)
    return IdealHandle.from_generators(R, W.reshape(-1, R.order))


def annihilator(M: PresentedModule) -> IdealHandle:
    R = M.ring
    g, m = M.gens, R.order
    if g == 0:
        return IdealHandle.unit(R)
    # a -> (a e_1, ..., a e_g) inside M^g
    E = np.zeros((1, g * g, m), dtype=np.int64)
    for i in range(g):
        E[0, i * g + i, 0] = 1
    L = M.rel_lattice.basis
    blocks = []
    for i in range(g):
        B = np.zeros((L.shape[0], g * g * m), dtype=np.int64)
        B[:, i * g * m : (i + 1) * g * m] = L
        blocks.append(B)
    K = kernel(expand_scalars(E, R), R.p, R.n, modulo=np.vstack(blocks))
    return IdealHandle.from_lattice(R, Lattice.span(K, R.p, R.n, m))


def characteristic_ideal(M: PresentedModule) -> IdealHandle:
    """Image of the top bi-dual of the presentation kernel N in the top bi-dual of R^g."""
    R = M.ring
    g = M.gens
    if g == 0:
        return IdealHandle.unit(R)
    N, inc = submodule_presentation(PresentedModule.free(R, g), M.relations)
    if N.gens == 0:
        return IdealHandle.zero(R)
    # restrictions of the coordinate functionals e_i^* to N
    ebar = transpose(inc.action)  # (g, t): value of e_i^* on the j-th generator of N
    B = exterior_bidual(N, g, forced=ebar)
    if B.width == 0 or B.lattice.basis.shape[0] == 0:
        return IdealHandle.zero(R)
    # phi_{0..g-1} is the wedge of the forced generators, which comes first
    proj = B.lattice.basis[:, : R.order]
    return IdealHandle.from_lattice(R, Lattice.span(proj, R.p, R.n, R.order))


def reflexive_image(I: IdealHandle) -> IdealHandle:
    """Image of I** -> R computed through the module I itself."""
    R = I.ring
    if I.is_zero():
        return I
    M, inc = submodule_presentation(PresentedModule.free(R, 1), I.basis.reshape(-1, 1, R.order))
    D = dual(M)
    DD = dual(D.module)
    # I -> R is the inclusion; I** -> R** = R via double dual of the inclusion
    # element w of I** gives a functional on I*; its image in R is w(res(1^*))
    res = D.express(inc.action[:, 0, :].reshape(-1, R.order))  # restriction of id in I*
    vals = []
    for w in DD.functionals:
        # w assigns values to the generators of I*; evaluate at res = sum c_j gen_j
        vals.append(group_matmul(res.reshape(1, -1, R.order), w.reshape(-1, 1, R.order), R)[0, 0])
    return IdealHandle.from_generators(R, vals)


# ---------------------------------------------------------------------------
# maps attached to cartesian squares


@dataclass(frozen=True, eq=False)
class CartesianSquare:
    """M1 -> M2 (inclusion), M_i -> F_i, F1 -> F2 (inclusion of frees).

    incl: (g1, g2), pi1: (g1, s1), pi2: (g2, s2), J: (s1, s2), all group-ring matrices.
    """

    M1: PresentedModule
    M2: PresentedModule
    incl: np.ndarray = field(repr=False)
    pi1: np.ndarray = field(repr=False)
    pi2: np.ndarray = field(repr=False)
    J: np.ndarray = field(repr=False)

    @property
    def ring(self) -> RingDescriptor:
        return self.M1.ring

    @property
    def s1(self) -> int:
        return self.J.shape[0]

    @property
    def s2(self) -> int:
        return self.J.shape[1]

    def violations(self) -> list[str]:
        R = self.ring
        out = []
        F1 = PresentedModule.free(R, self.s1)
        F2 = PresentedModule.free(R, self.s2)
        try:
            inc = ModuleMap(self.M1, self.M2, self.incl)
            p1 = ModuleMap(self.M1, F1, self.pi1)
            p2 = ModuleMap(self.M2, F2, self.pi2)
            j = ModuleMap(F1, F2, self.J)
        except ModuleError as exc:
            return [f"ill-defined map: {exc}"]
        if not inc.is_injective():
            out.append("M1 -> M2 is not injective")
        if not j.is_injective():
            out.append("F1 -> F2 is not injective")
        a = group_matmul(self.incl, self.pi2, R)
        b = group_matmul(self.pi1, self.J, R)
        if not np.array_equal(a % R.q, b % R.q):
            out.append("square does not commute")
        # pullback {x in M2 : pi2(x) in F1} must be the image of M1
        Jl = Lattice.span(expand_scalars(self.J, R), R.p, R.n, self.s2 * R.order) if self.s1 else None
        K = kernel(expand_scalars(self.pi2, R), R.p, R.n, modulo=None if Jl is None else Jl.basis)
        pull = Lattice.span(K, R.p, R.n, self.M2.dim) + self.M2.rel_lattice
        if not (pull == inc.image_lattice()):
            out.append("square is not cartesian")
        return out

    def is_cartesian(self) -> bool:
        return not self.violations()


@dataclass(frozen=True, eq=False)
class BidualMap:
    source: ExteriorBidual
    target: ExteriorBidual
    matrix: np.ndarray = field(repr=False)  # (width_source, width_target, |G|)

    def apply(self, y) -> np.ndarray:
        return apply_matrix(y, self.matrix, self.source.ring)

    def compose(self, after: "BidualMap") -> "BidualMap":
        R = self.source.ring
        if self.matrix.shape[1] == 0:
            M = np.zeros((self.matrix.shape[0], after.matrix.shape[1], R.order), dtype=np.int64)
        else:
            M = group_matmul(self.matrix, after.matrix, R)
        return BidualMap(self.source, after.target, M)

    def agrees_with(self, other: "BidualMap") -> bool:
        """Equality as maps on the source lattice."""
        R = self.source.ring
        B = self.source.lattice.basis
        if B.shape[0] == 0:
            return True
        if self.matrix.shape[1] == 0:
            return True
        E1 = expand_scalars(self.matrix, R)
        E2 = expand_scalars(other.matrix, R)
        return not ((B @ E1 - B @ E2) % R.q).any()

    def is_injective(self) -> bool:
        return lattice_map_length(self.source.lattice, self.matrix, self.source.ring) == self.source.length()


def _unit_inverse(a: np.ndarray, ring: RingDescriptor) -> np.ndarray:
    E = expand_scalars(a.reshape(1, 1, -1), ring)
    one = np.zeros(ring.order, dtype=np.int64)
    one[0] = 1
    x = solve(E, one, ring.p, ring.n)
    if x is None:
        raise ModuleError("determinant twist is not a unit")
    return x


def cartesian_map(
    sq: CartesianSquare,
    r: int,
    source: ExteriorBidual | None = None,
    target: ExteriorBidual | None = None,
    check: bool = True,
) -> BidualMap:
    """The map from the r-th bi-dual of M2 to the (r - s2 + s1)-th bi-dual of M1.

    det(F_i^*) are trivialized by the wedge of the standard coordinate
    functionals in increasing order.
    """
    R = sq.ring
    m = R.order
    if check:
        bad = sq.violations()
        if bad:
            raise ModuleError("; ".join(bad))
    t = sq.s2 - sq.s1
    if r < t:
        raise ModuleError("rank deficit: r < s2 - s1")
    B2 = source if source is not None else exterior_bidual(sq.M2, r)
    B1 = target if target is not None else exterior_bidual(sq.M1, r - t)
    D2, D1 = B2.dualmod, B1.dualmod
    # basis of (F2/F1)^*: functionals on F2 vanishing on F1
    if sq.s1:
        K = kernel(expand_scalars(transpose(sq.J), R), R.p, R.n)
        Klat = Lattice.span(K, R.p, R.n, sq.s2 * m)
    else:
        Klat = Lattice.full(R.p, R.n, sq.s2 * m)
    if sq.s2:
        fbasis = r_generators(Klat, R, sq.s2).reshape(-1, sq.s2, m)
    else:
        fbasis = np.zeros((0, 0, m), dtype=np.int64)
    if fbasis.shape[0] != t or Klat.length() != t * m * R.n:
        raise ModuleError("F2/F1 is not free of the expected rank")
    # lifts of the coordinate functionals of F1
    lifts = []
    EJt = expand_scalars(transpose(sq.J), R) if sq.s1 else None
    for i in range(sq.s1):
        e = np.zeros((sq.s1, m), dtype=np.int64)
        e[i, 0] = 1
        x = solve(EJt, e.ravel(), R.p, R.n)
        if x is None:
            raise ModuleError("F1 -> F2 is not split")
        lifts.append(x.reshape(sq.s2, m))
    if sq.s2:
        frame = np.concatenate([fbasis, np.array(lifts, dtype=np.int64).reshape(-1, sq.s2, m)], axis=0)
        det = minors(frame, sq.s2, R)[0, 0]
    else:
        det = np.eye(1, m, dtype=np.int64)[0]
    cinv = _unit_inverse(det, R)
    # h(f_j) = f_j o pi2 in M2^*
    hvals = group_matmul(fbasis, transpose(sq.pi2), R) if t else np.zeros((0, sq.M2.gens, m), dtype=np.int64)
    hco = np.array([D2.express(v) for v in hvals], dtype=np.int64).reshape(t, D2.k, m)
    # lifts of the generators of M1^* to M2^*
    res = group_matmul(D2.functionals, transpose(sq.incl), R) if D2.k else np.zeros((0, sq.M1.gens, m), dtype=np.int64)
    ERes = expand_scalars(res, R) if D2.k else None
    chil = []
    for chi in D1.functionals:
        if D2.k == 0:
            if chi.any():
                raise ModuleError("restriction M2^* -> M1^* is not surjective")
            chil.append(np.zeros((0, m), dtype=np.int64))
            continue
        x = solve(ERes, chi.ravel(), R.p, R.n)
        if x is None:
            raise ModuleError("restriction M2^* -> M1^* is not surjective")
        chil.append(x.reshape(D2.k, m))
    chil = np.array(chil, dtype=np.int64).reshape(D1.k, D2.k, m)
    W = np.zeros((B2.width, B1.width, m), dtype=np.int64)
    for u, U in enumerate(B1.subsets):
        V = np.concatenate([hco, chil[list(U)]], axis=0) if U else hco
        if V.shape[0] != r:
            raise ModuleError("internal degree mismatch")
        if r == 0:
            W[0, u, 0] = 1
            continue
        w = minors(V, r, R)[0]  # over r-subsets of D2 generators
        W[:, u] = w
    Cm = np.zeros((1, 1, m), dtype=np.int64)
    Cm[0, 0] = cinv
    W = group_matmul(W.reshape(-1, 1, m), Cm, R).reshape(W.shape) if W.size else W
    return BidualMap(B2, B1, W)


def induced_bidual_map(f: ModuleMap, r: int, source: ExteriorBidual | None = None, target: ExteriorBidual | None = None) -> BidualMap:
    B1 = source if source is not None else exterior_bidual(f.source, r)
    B2 = target if target is not None else exterior_bidual(f.target, r)
    if B1.width == 0 or B2.width == 0:
        return BidualMap(B1, B2, np.zeros((B1.width, B2.width, f.source.ring.order), dtype=np.int64))
    W = induced_bidual_matrix(f, r, B1.dualmod, B2.dualmod)
    return BidualMap(B1, B2, W)


def contract_map(B_s: ExteriorBidual, coeffs, r: int) -> BidualMap:
    target, W = contract(B_s, coeffs, r)
    return BidualMap(B_s, target, W)
