"""Howell-form linear algebra over the chain ring Z/p^n.

Everything is row-vector convention: a matrix A acts as x -> x @ A, and a
lattice is the row span of its basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


def _valuations(x: np.ndarray, p: int, n: int) -> np.ndarray:
    """Elementwise p-adic valuation of residues mod p^n, with 0 -> n."""
    v = np.zeros(x.shape, dtype=np.int64)
    pk = 1
    for k in range(1, n + 1):
        pk *= p
        v += (x % pk == 0)
    return v


def howell_form(M, p: int, n: int) -> np.ndarray:
    """Canonical Howell basis of the row span of M over Z/p^n.

    Pivot columns are scanned left to right; the pivot row is the one of
    minimal valuation, ties broken by smallest residue then smallest row index.
    """
    q = p**n
    W = np.asarray(M, dtype=np.int64) % q
    if W.ndim == 1:
        W = W.reshape(1, -1)
    ncols = W.shape[1]
    W = W[W.any(axis=1)]
    pivots: list[tuple[int, int]] = []
    out: list[np.ndarray] = []
    for c in range(ncols):
        if W.shape[0] == 0:
            break
        col = W[:, c]
        vals = _valuations(col, p, n)
        vmin = int(vals.min())
        if vmin >= n:
            continue
        cand = np.nonzero(vals == vmin)[0]
        r = int(cand[np.argmin(col[cand])])
        pk = p**vmin
        unit = int(col[r]) // pk
        row = W[r] * pow(unit, -1, q) % q
        rest = np.delete(W, r, axis=0)
        if rest.shape[0]:
            t = rest[:, c] // pk
            rest = (rest - np.outer(t, row)) % q
        if vmin > 0:
            ann = row * (p ** (n - vmin)) % q
            if ann.any():
                rest = np.vstack([rest, ann[None, :]])
        W = rest[rest.any(axis=1)]
        out.append(row)
        pivots.append((c, vmin))
    if not out:
        return np.zeros((0, ncols), dtype=np.int64)
    H = np.array(out, dtype=np.int64)
    for i, (c, v) in enumerate(pivots):
        pk = p**v
        if i:
            k = H[:i, c] // pk
            H[:i] = (H[:i] - np.outer(k, H[i])) % q
    return H


def _pivots(H: np.ndarray, p: int, n: int) -> list[tuple[int, int]]:
    out = []
    for row in H:
        nz = np.nonzero(row)[0]
        c = int(nz[0])
        v = 0
        x = int(row[c])
        while x % p == 0:
            x //= p
            v += 1
        out.append((c, v))
    return out


def reduce_vector(H: np.ndarray, pivots, b, p: int, n: int, track: bool = False):
    """Reduce b against a Howell basis.

    Returns the canonical coset representative, and with track=True also
    coefficients c with b - rep == c @ H.
    """
    q = p**n
    b = np.asarray(b, dtype=np.int64).copy() % q
    coeffs = np.zeros(H.shape[0], dtype=np.int64) if track else None
    for i, (c, v) in enumerate(pivots):
        k = int(b[c]) // (p**v)
        if k:
            b = (b - k * H[i]) % q
            if track:
                coeffs[i] = k
    return (b, coeffs) if track else b


def reduce_rows(H: np.ndarray, pivots, B: np.ndarray, p: int, n: int) -> np.ndarray:
    """Vectorized reduce_vector over the rows of B."""
    q = p**n
    B = np.asarray(B, dtype=np.int64) % q
    for i, (c, v) in enumerate(pivots):
        k = B[:, c] // (p**v)
        if k.any():
            B = (B - np.outer(k, H[i])) % q
    return B


def kernel(M, p: int, n: int, modulo=None) -> np.ndarray:
    """Howell basis of {x : x M in span(modulo)} (modulo defaults to 0)."""
    q = p**n
    M = np.asarray(M, dtype=np.int64) % q
    r, c = M.shape
    if r == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if c == 0:
        return np.eye(r, dtype=np.int64)
    blocks = [np.hstack([M, np.eye(r, dtype=np.int64)])]
    if modulo is not None:
        L = np.asarray(modulo, dtype=np.int64).reshape(-1, c)
        if L.shape[0]:
            blocks.append(np.hstack([L, np.zeros((L.shape[0], r), dtype=np.int64)]))
    H = howell_form(np.vstack(blocks), p, n)
    keep = ~H[:, :c].any(axis=1)
    return howell_form(H[keep, c:], p, n) if keep.any() else np.zeros((0, r), dtype=np.int64)


def solve(A, b, p: int, n: int, modulo=None):
    """Some x with x A == b (mod span(modulo)), or None.

    The solution is the one produced by reducing b against the Howell form of
    [A | I], so it is deterministic.
    """
    q = p**n
    A = np.asarray(A, dtype=np.int64) % q
    r, c = A.shape
    b = np.asarray(b, dtype=np.int64).ravel() % q
    if not b.any():
        return np.zeros(r, dtype=np.int64)
    if r == 0:
        return None
    blocks = [np.hstack([A, np.eye(r, dtype=np.int64)])]
    if modulo is not None:
        L = np.asarray(modulo, dtype=np.int64).reshape(-1, c)
        if L.shape[0]:
            blocks.append(np.hstack([L, np.zeros((L.shape[0], r), dtype=np.int64)]))
    H = howell_form(np.vstack(blocks), p, n)
    piv = _pivots(H, p, n)
    ext = np.concatenate([b, np.zeros(r, dtype=np.int64)])
    x = np.zeros(r, dtype=np.int64)
    for i, (col, v) in enumerate(piv):
        if col >= c:
            break
        e = int(ext[col])
        if e % (p**v):
            return None
        k = e // (p**v)
        if k:
            ext = (ext - k * H[i]) % q
    if ext[:c].any():
        return None
    # ext[c:] now holds -x
    x = (-ext[c:]) % q
    return x


def expand_scalars(A, ring) -> np.ndarray:
    """Regular-representation expansion of a group-ring matrix.

    A has shape (rows, cols, |G|); the result has shape (rows*|G|, cols*|G|)
    and row (i, g) is the image of g*e_i.
    """
    A = np.asarray(A, dtype=np.int64)
    if A.ndim == 2:
        # plain integer matrix: scalars sit on the identity element
        S = np.zeros(A.shape + (ring.order,), dtype=np.int64)
        S[:, :, 0] = A
        A = S
    r, c, m = A.shape
    if m != ring.order:
        raise ValueError("last axis must have length |G|")
    E = np.einsum("ijh,hgk->igjk", A, ring.perm_tensor, optimize=True)
    return E.reshape(r * m, c * m) % ring.q


def group_matmul(A, B, ring) -> np.ndarray:
    """Product of group-ring matrices of shapes (a,b,|G|) and (b,c,|G|)."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    # (AB)_ik[g] = sum_j sum_{h h' = g} A_ij[h] B_jk[h']
    T = np.einsum("ijh,jkl,hlg->ikg", A, B, ring.perm_tensor, optimize=True)
    return T % ring.q


def to_group_rows(X: np.ndarray, ring) -> np.ndarray:
    """Reshape Z/p^n vectors of length k*|G| into (k, |G|) group-ring rows."""
    X = np.asarray(X, dtype=np.int64)
    return X.reshape(X.shape[0], -1, ring.order)


@dataclass(frozen=True, eq=False)
class Lattice:
    """A Z/p^n-submodule of (Z/p^n)^dim, stored by its Howell basis."""

    basis: np.ndarray
    p: int
    n: int
    dim: int

    @classmethod
    def span(cls, rows, p: int, n: int, dim: int | None = None) -> "Lattice":
        rows = np.asarray(rows, dtype=np.int64)
        if dim is None:
            dim = rows.shape[-1]
        rows = rows.reshape(-1, dim) if dim else np.zeros((0, 0), dtype=np.int64)
        H = howell_form(rows, p, n) if rows.shape[0] else np.zeros((0, dim), dtype=np.int64)
        H.setflags(write=False)
        return cls(H, p, n, dim)

    @classmethod
    def zero(cls, p: int, n: int, dim: int) -> "Lattice":
        return cls.span(np.zeros((0, dim), dtype=np.int64), p, n, dim)

    @classmethod
    def full(cls, p: int, n: int, dim: int) -> "Lattice":
        return cls.span(np.eye(dim, dtype=np.int64), p, n, dim)

    @cached_property
    def pivots(self):
        return _pivots(self.basis, self.p, self.n)

    def reduce(self, v) -> np.ndarray:
        return reduce_vector(self.basis, self.pivots, v, self.p, self.n)

    def reduce_rows(self, B) -> np.ndarray:
        return reduce_rows(self.basis, self.pivots, B, self.p, self.n)

    def contains(self, v) -> bool:
        return not self.reduce(v).any()

    def contains_all(self, B) -> bool:
        if self.dim == 0:
            return True
        B = np.asarray(B, dtype=np.int64).reshape(-1, self.dim)
        if B.shape[0] == 0:
            return True
        return not self.reduce_rows(B).any()

    def length(self) -> int:
        return sum(self.n - v for _, v in self.pivots)

    def __add__(self, other: "Lattice") -> "Lattice":
        return Lattice.span(np.vstack([self.basis, other.basis]), self.p, self.n, self.dim)

    def intersect(self, other: "Lattice") -> "Lattice":
        # x in self and x in other: x = a B1 with a B1 in span(B2)
        B1 = self.basis
        if B1.shape[0] == 0 or other.basis.shape[0] == 0:
            return Lattice.zero(self.p, self.n, self.dim)
        K = kernel(B1, self.p, self.n, modulo=other.basis)
        return Lattice.span(K @ B1 % (self.p**self.n), self.p, self.n, self.dim)

    def image(self, T) -> "Lattice":
        T = np.asarray(T, dtype=np.int64)
        return Lattice.span(self.basis @ T % (self.p**self.n), self.p, self.n, T.shape[1])

    def __le__(self, other: "Lattice") -> bool:
        return other.contains_all(self.basis)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Lattice):
            return NotImplemented
        return self.dim == other.dim and np.array_equal(self.basis, other.basis)

    def __hash__(self):
        return hash((self.dim, self.basis.tobytes()))
