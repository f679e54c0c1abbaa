"""Coefficient rings (Z/p^n)[G] for finite abelian groups G.

Group elements are enumerated in mixed-radix order over the invariant
factors d_1 | d_2 | ... | d_k, last factor varying fastest.  Every
coefficient array in the package uses this order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from math import gcd
from typing import Iterable, Mapping, Sequence

import numpy as np


class RingError(ValueError):
    pass


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    i = 2
    while i * i <= m:
        if m % i == 0:
            return False
        i += 1
    return True


def factorize(m: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= m:
        while m % d == 0:
            out[d] = out.get(d, 0) + 1
            m //= d
        d += 1
    if m > 1:
        out[m] = out.get(m, 0) + 1
    return out


def valuation(x: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if x == 0:
        raise RingError("valuation of zero")
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def is_power_of(d: int, p: int) -> bool:
    while d % p == 0:
        d //= p
    return d == 1


@dataclass(frozen=True)
class RingDescriptor:
    """The ring (Z/p^n)[G] with G = Z/d_1 x ... x Z/d_k."""

    p: int
    n: int
    invariant_factors: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "invariant_factors", tuple(int(d) for d in self.invariant_factors))
        if self.p == 2 or not is_prime(self.p):
            raise RingError(f"p must be an odd prime, got {self.p}")
        if self.n < 1:
            raise RingError(f"n must be positive, got {self.n}")
        ds = self.invariant_factors
        for d in ds:
            if d < 1:
                raise RingError(f"invalid invariant factor {d}")
        for a, b in zip(ds, ds[1:]):
            if b % a:
                raise RingError(f"invariant factors must divide successively: {ds}")

    @property
    def q(self) -> int:
        return self.p**self.n

    @property
    def order(self) -> int:
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    def is_local(self) -> bool:
        return all(is_power_of(d, self.p) for d in self.invariant_factors)

    def is_gorenstein(self) -> bool:
        # finite group rings over Z/p^n are self-injective
        return True

    def length(self) -> int:
        """Length of R as a module over itself (in composition factors F_p)."""
        return self.n * self.order

    @cached_property
    def _strides(self) -> tuple[int, ...]:
        strides = []
        s = 1
        for d in reversed(self.invariant_factors):
            strides.append(s)
            s *= d
        return tuple(reversed(strides))

    def index(self, exps: Sequence[int]) -> int:
        if len(exps) != len(self.invariant_factors):
            raise RingError("exponent tuple has wrong length")
        return sum((e % d) * s for e, d, s in zip(exps, self.invariant_factors, self._strides))

    def exponents(self, idx: int) -> tuple[int, ...]:
        return tuple((idx // s) % d for d, s in zip(self.invariant_factors, self._strides))

    @cached_property
    def elements(self) -> tuple[tuple[int, ...], ...]:
        return tuple(product(*(range(d) for d in self.invariant_factors)))

    @cached_property
    def mul_table(self) -> np.ndarray:
        """mul_table[i, j] is the index of g_i * g_j."""
        els = np.array(self.elements, dtype=np.int64).reshape(self.order, len(self.invariant_factors))
        ds = np.array(self.invariant_factors, dtype=np.int64)
        st = np.array(self._strides, dtype=np.int64)
        s = (els[:, None, :] + els[None, :, :]) % ds
        tab = (s * st).sum(axis=2)
        tab.setflags(write=False)
        return tab

    @cached_property
    def inverse_table(self) -> np.ndarray:
        els = np.array(self.elements, dtype=np.int64).reshape(self.order, len(self.invariant_factors))
        ds = np.array(self.invariant_factors, dtype=np.int64)
        st = np.array(self._strides, dtype=np.int64)
        inv = ((-els) % ds * st).sum(axis=1)
        inv.setflags(write=False)
        return inv

    @cached_property
    def generator_indices(self) -> tuple[int, ...]:
        k = len(self.invariant_factors)
        return tuple(self.index([1 if j == i else 0 for j in range(k)]) for i in range(k))

    @cached_property
    def perm_tensor(self) -> np.ndarray:
        """P[h, g, k] = 1 iff h*g = k (regular representation)."""
        m = self.order
        P = np.zeros((m, m, m), dtype=np.int64)
        hh, gg = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        P[hh, gg, self.mul_table] = 1
        P.setflags(write=False)
        return P

    def element_order(self, idx: int) -> int:
        o = 1
        for e, d in zip(self.exponents(idx), self.invariant_factors):
            o = o * (d // gcd(e, d)) // gcd(o, d // gcd(e, d))
        return o

    # constructors ---------------------------------------------------------
    def zero(self) -> "GroupRingElement":
        return GroupRingElement(self, (0,) * self.order)

    def one(self) -> "GroupRingElement":
        return self.scalar(1)

    def scalar(self, c: int) -> "GroupRingElement":
        coeffs = [0] * self.order
        coeffs[0] = c % self.q
        return GroupRingElement(self, tuple(coeffs))

    def group_element(self, idx_or_exps) -> "GroupRingElement":
        idx = idx_or_exps if isinstance(idx_or_exps, (int, np.integer)) else self.index(idx_or_exps)
        coeffs = [0] * self.order
        coeffs[int(idx)] = 1
        return GroupRingElement(self, tuple(coeffs))

    def element(self, coeffs: Iterable[int]) -> "GroupRingElement":
        return GroupRingElement(self, tuple(int(c) for c in coeffs))

    def norm_element(self) -> "GroupRingElement":
        return GroupRingElement(self, (1,) * self.order)

    def to_json(self) -> dict:
        return {"p": self.p, "n": self.n, "invariant_factors": list(self.invariant_factors)}

    @classmethod
    def from_json(cls, data: Mapping) -> "RingDescriptor":
        try:
            return cls(int(data["p"]), int(data["n"]), tuple(int(d) for d in data.get("invariant_factors", [])))
        except (KeyError, TypeError) as exc:
            raise RingError(f"malformed ring descriptor: {data!r}") from exc


@dataclass(frozen=True)
class GroupRingElement:
    ring: RingDescriptor
    coeffs: tuple[int, ...]

    def __post_init__(self):
        q = self.ring.q
        if len(self.coeffs) != self.ring.order:
            raise RingError("coefficient array length differs from group order")
        object.__setattr__(self, "coeffs", tuple(int(c) % q for c in self.coeffs))

    def array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=np.int64)

    @classmethod
    def from_array(cls, ring: RingDescriptor, arr) -> "GroupRingElement":
        return cls(ring, tuple(int(c) for c in np.asarray(arr).ravel()))

    def _check(self, other: "GroupRingElement"):
        if not isinstance(other, GroupRingElement) or other.ring != self.ring:
            raise RingError("ring mismatch")

    def __add__(self, other):
        if isinstance(other, int):
            other = self.ring.scalar(other)
        self._check(other)
        return GroupRingElement(self.ring, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return GroupRingElement(self.ring, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        if isinstance(other, int):
            other = self.ring.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return GroupRingElement(self.ring, tuple(a * int(other) for a in self.coeffs))
        return gr_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        out = self.ring.one()
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def augmentation(self) -> int:
        return sum(self.coeffs) % self.ring.q

    def is_unit(self) -> bool:
        return is_unit(self)

    def to_json(self) -> list[str]:
        return [str(c) for c in self.coeffs]

    def __repr__(self):
        terms = [f"{c}*g{i}" for i, c in enumerate(self.coeffs) if c]
        return "GroupRingElement(" + (" + ".join(terms) or "0") + ")"


def gr_mul(a: GroupRingElement, b: GroupRingElement) -> GroupRingElement:
    """Convolution product: coefficient of g is sum over h*h' = g of a_h b_h'."""
    if not isinstance(b, GroupRingElement) or a.ring != b.ring:
        raise RingError("ring mismatch")
    R = a.ring
    out = np.zeros(R.order, dtype=np.int64)
    bb = b.array()
    tab = R.mul_table
    for h, c in enumerate(a.coeffs):
        if c:
            np.add.at(out, tab[h], c * bb)
    return GroupRingElement.from_array(R, out % R.q)


def involution(a: GroupRingElement) -> GroupRingElement:
    """The ring automorphism induced by g -> g^-1."""
    inv = a.ring.inverse_table
    arr = a.array()
    return GroupRingElement.from_array(a.ring, arr[inv])


def mult_matrix(a: GroupRingElement) -> np.ndarray:
    """Matrix E with x @ E == (a*x) on coefficient row vectors."""
    return np.einsum("h,hgk->gk", a.array(), a.ring.perm_tensor) % a.ring.q


def is_unit(a: GroupRingElement) -> bool:
    R = a.ring
    E = mult_matrix(a)
    from .linalg import solve

    return solve(E, R.one().array(), R.p, R.n) is not None


def inverse(a: GroupRingElement) -> GroupRingElement:
    R = a.ring
    from .linalg import solve

    x = solve(mult_matrix(a), R.one().array(), R.p, R.n)
    if x is None:
        raise RingError("element is not a unit")
    return GroupRingElement.from_array(R, x)


def teichmuller(p: int, n: int, a: int) -> int:
    """The (p-1)-th root of unity mod p^n congruent to a mod p."""
    if a % p == 0:
        raise RingError("Teichmuller lift of a non-unit")
    q = p**n
    x = a % q
    while True:
        y = pow(x, p, q)
        if y == x:
            return x
        x = y


def primitive_root(p: int) -> int:
    facs = factorize(p - 1)
    for g in range(2, p + 1):
        if all(pow(g, (p - 1) // f, p) != 1 for f in facs):
            return g
    return 1


def root_of_unity(p: int, n: int, d: int) -> int:
    """A primitive d-th root of unity in (Z/p^n)^x, d | p-1 (Teichmuller-generated)."""
    if (p - 1) % d:
        raise RingError(f"{d} does not divide p-1")
    if p == 3 and d == 1:
        return 1
    return pow(teichmuller(p, n, primitive_root(p)), (p - 1) // d, p**n)


def idempotent(ring: RingDescriptor, delta: Sequence[int], chi: Sequence[int]) -> GroupRingElement:
    """e_chi = |delta|^-1 sum chi(s) s^-1 for a subgroup delta with character values chi."""
    delta = [int(d) for d in delta]
    if len(delta) != len(chi):
        raise RingError("character table length differs from subgroup size")
    q = ring.q
    m = len(delta)
    if m % ring.p == 0:
        raise RingError("|delta| is not invertible mod p")
    pos = {d: i for i, d in enumerate(delta)}
    if len(pos) != m:
        raise RingError("repeated subgroup element")
    tab = ring.mul_table
    for i, a in enumerate(delta):
        for j, b in enumerate(delta):
            ab = int(tab[a, b])
            if ab not in pos:
                raise RingError("delta is not a subgroup")
            if (chi[i] * chi[j] - chi[pos[ab]]) % q:
                raise RingError("character is not multiplicative")
    inv_m = pow(m, -1, q)
    out = np.zeros(ring.order, dtype=np.int64)
    inv = ring.inverse_table
    for d, c in zip(delta, chi):
        out[inv[d]] += c
    return GroupRingElement.from_array(ring, out * inv_m % q)


@dataclass(frozen=True)
class CharacterSpec:
    """A Dirichlet character mod f with values in the (p-1)-th roots of unity of Z/p^n."""

    modulus: int
    p: int
    n: int
    value_table: Mapping[int, int] = field(hash=False, compare=False)
    order: int = 1
    parity: int = 1
    exponents: tuple[int, ...] = ()

    def __call__(self, a: int) -> int:
        a %= self.modulus
        if a not in self.value_table:
            raise RingError(f"{a} is not a unit mod {self.modulus}")
        return self.value_table[a]

    def value(self, a: int, precision: int | None = None) -> int:
        """Value as a root of unity modulo p^precision (default p^n)."""
        prec = self.n if precision is None else precision
        if prec == self.n:
            return self(a)
        return CharacterSpec.from_exponents(self.modulus, self.p, prec, self.order, self.exponents)(a)

    def is_even(self) -> bool:
        return self.parity == 1

    def is_trivial(self) -> bool:
        return all(v == 1 for v in self.value_table.values())

    def conductor(self) -> int:
        f = self.modulus
        for d in sorted(divisor for divisor in range(1, f + 1) if f % divisor == 0):
            if all(v == 1 for a, v in self.value_table.items() if a % d == 1 % d):
                return d
        return f

    @classmethod
    def from_exponents(cls, modulus: int, p: int, n: int, order: int, exponents: Sequence[int]) -> "CharacterSpec":
        from .stickelberger import CyclotomicLevel

        if (p - 1) % order:
            raise RingError(f"character order {order} must divide p-1")
        level = CyclotomicLevel(modulus)
        exps = tuple(int(e) % order for e in exponents)
        if len(exps) != len(level.cyclic_orders):
            raise RingError("one exponent per cyclic factor of (Z/f)^x is required")
        zeta = root_of_unity(p, n, order)
        q = p**n
        table = {}
        for a in level.units:
            logs = level.dlog(a)
            e = sum(l * x * (order // gcd(order, o)) for l, x, o in zip(logs, exps, level.cyclic_orders))
            # a generator of order o must map to an element whose order divides gcd(o, order)
            table[a] = pow(zeta, e % order, q)
        for g, o in zip(level.generators, level.cyclic_orders):
            if pow(table[g], o, q) != 1:
                raise RingError("exponents do not define a character")
        minus = table[(modulus - 1) % modulus] if modulus > 2 else 1
        parity = 1 if minus == 1 else -1
        true_order = 1
        while any(pow(v, true_order, q) != 1 for v in table.values()):
            true_order += 1
        return cls(modulus, p, n, table, true_order, parity, exps)

    @classmethod
    def trivial(cls, modulus: int, p: int, n: int) -> "CharacterSpec":
        from .stickelberger import CyclotomicLevel

        level = CyclotomicLevel(modulus)
        return cls.from_exponents(modulus, p, n, 1, [0] * len(level.cyclic_orders))

    def to_json(self) -> dict:
        return {
            "modulus": self.modulus,
            "order": self.order,
            "exponents": list(self.exponents),
            "values": {str(a): str(v) for a, v in sorted(self.value_table.items())},
        }


def characters_mod(modulus: int, p: int, n: int, order: int) -> list[CharacterSpec]:
    """All characters mod `modulus` whose order divides `order` (order | p-1)."""
    from .stickelberger import CyclotomicLevel

    level = CyclotomicLevel(modulus)
    out = []
    seen = set()
    for exps in product(*(range(order) for _ in level.cyclic_orders)):
        try:
            chi = CharacterSpec.from_exponents(modulus, p, n, order, exps)
        except RingError:
            continue
        key = tuple(sorted(chi.value_table.items()))
        if key not in seen:
            seen.add(key)
            out.append(chi)
    return out


@dataclass(frozen=True)
class CyclicProduct:
    """Z/n_1 x ... x Z/n_k with an explicit isomorphism onto invariant-factor form."""

    orders: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "orders", tuple(int(o) for o in self.orders))

    @cached_property
    def _primary(self):
        # for each cyclic factor, its prime-power parts
        parts = []
        for j, o in enumerate(self.orders):
            for pr, e in factorize(o).items():
                parts.append((pr, pr**e, j))
        by_prime: dict[int, list] = {}
        for pr, pe, j in parts:
            by_prime.setdefault(pr, []).append((pe, j))
        for pr in by_prime:
            by_prime[pr].sort()
        k = max((len(v) for v in by_prime.values()), default=0)
        # invariant factor slot t (0-based, ascending) collects the t-th largest
        # prime power of every prime, aligned from the top
        slots: list[list[tuple[int, int]]] = [[] for _ in range(k)]
        for pr, lst in by_prime.items():
            offset = k - len(lst)
            for t, (pe, j) in enumerate(lst):
                slots[offset + t].append((pe, j))
        return slots

    @cached_property
    def invariant_factors(self) -> tuple[int, ...]:
        out = []
        for slot in self._primary:
            d = 1
            for pe, _ in slot:
                d *= pe
            out.append(d)
        return tuple(out)

    def ring(self, p: int, n: int) -> RingDescriptor:
        return RingDescriptor(p, n, self.invariant_factors)

    def invariant_exponents(self, exps: Sequence[int]) -> tuple[int, ...]:
        out = []
        for slot, d in zip(self._primary, self.invariant_factors):
            # CRT the prime-power components into Z/d
            x = 0
            for pe, j in slot:
                comp = exps[j] % pe
                m = d // pe
                x += comp * m * pow(m, -1, pe)
            out.append(x % d)
        return tuple(out)

    def index_in(self, ring: RingDescriptor, exps: Sequence[int]) -> int:
        return ring.index(self.invariant_exponents(exps))

    @cached_property
    def elements(self) -> tuple[tuple[int, ...], ...]:
        return tuple(product(*(range(o) for o in self.orders)))
