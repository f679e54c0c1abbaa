"""Stickelberger elements over Q and the modified p-adic L-elements built from them.

Levels are the cyclotomic fields Q(mu_m) with Galois group (Z/m)^x, a -> sigma_a.
theta_m = sum_a zeta_m(0, sigma_a) sigma_a^-1 is stored with the rational
coefficient of sigma_a^-1 under the key a.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd
from typing import Iterable, Mapping, Sequence

import numpy as np

from .ring import (
    CharacterSpec,
    CyclicProduct,
    GroupRingElement,
    RingDescriptor,
    RingError,
    factorize,
    is_prime,
    primitive_root,
    teichmuller,
    valuation,
)


class StickelbergerError(ValueError):
    pass


class IntegralityError(StickelbergerError):
    """A projection that should be p-integral was not."""


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _prime_power_generator(pr: int, e: int) -> int:
    g = primitive_root(pr)
    if e >= 2 and pow(g, pr - 1, pr * pr) == 1:
        g += pr
    return g


@dataclass(frozen=True)
class CyclotomicLevel:
    """(Z/m)^x as a product of cyclic groups with explicit generators."""

    modulus: int

    def __post_init__(self):
        if self.modulus < 1:
            raise StickelbergerError("modulus must be positive")

    @cached_property
    def units(self) -> tuple[int, ...]:
        m = self.modulus
        if m == 1:
            return (0,)
        return tuple(a for a in range(1, m) if gcd(a, m) == 1)

    @cached_property
    def _components(self):
        # (prime power, generator mod prime power, order, lift to mod m)
        m = self.modulus
        comps = []
        for pr, e in sorted(factorize(m).items()):
            pe = pr**e
            rest = m // pe

            def lift(x, pe=pe, rest=rest):
                # x mod pe, 1 mod rest
                if rest == 1:
                    return x % pe
                t = ((x - 1) * pow(rest, -1, pe)) % pe
                return (1 + rest * t) % m

            if pr == 2:
                if e == 1:
                    continue
                comps.append((pe, pe - 1, 2, lift(pe - 1)))
                if e >= 3:
                    comps.append((pe, 5, 2 ** (e - 2), lift(5)))
            else:
                g = _prime_power_generator(pr, e)
                comps.append((pe, g, (pr - 1) * pr ** (e - 1), lift(g)))
        return tuple(comps)

    @property
    def cyclic_orders(self) -> tuple[int, ...]:
        return tuple(c[2] for c in self._components)

    @property
    def generators(self) -> tuple[int, ...]:
        return tuple(c[3] for c in self._components)

    @property
    def order(self) -> int:
        return len(self.units) if self.modulus > 1 else 1

    @cached_property
    def _log_tables(self):
        tabs = []
        for pe, g, o, _ in self._components:
            if pe % 2 == 0:
                tab = {}
                if g == pe - 1:
                    tabs.append(("sign", pe))
                    continue
                x = 1
                for k in range(o):
                    tab[x] = k
                    x = x * 5 % pe
                tabs.append(("five", pe, tab))
            else:
                tab = {}
                x = 1
                for k in range(o):
                    tab[x] = k
                    x = x * g % pe
                tabs.append(("cyc", pe, tab))
        return tabs

    def dlog(self, a: int) -> tuple[int, ...]:
        if gcd(a, self.modulus) != 1:
            raise StickelbergerError(f"{a} is not a unit mod {self.modulus}")
        out = []
        for t in self._log_tables:
            if t[0] == "sign":
                out.append(0 if a % 4 == 1 else 1)
            elif t[0] == "five":
                pe, tab = t[1], t[2]
                b = a % pe
                if b % 4 == 3:
                    b = (-b) % pe
                out.append(tab[b])
            else:
                out.append(t[2][a % t[1]])
        return tuple(out)

    @cached_property
    def structure(self) -> CyclicProduct:
        return CyclicProduct(self.cyclic_orders)

    def ring(self, p: int, n: int) -> RingDescriptor:
        return self.structure.ring(p, n)

    def ring_index(self, ring: RingDescriptor, a: int) -> int:
        return self.structure.index_in(ring, self.dlog(a))

    def complex_conjugation(self) -> int:
        return (self.modulus - 1) % self.modulus


def partial_zeta_zero(m: int, a: int) -> Fraction:
    """zeta_m(0, sigma_a) = 1/2 - <a/m> with <x> in (0, 1]."""
    if m <= 1:
        raise StickelbergerError("modulus must exceed 1")
    if gcd(a, m) != 1:
        raise StickelbergerError(f"gcd({a}, {m}) != 1")
    r = a % m
    if r == 0:
        r = m
    return Fraction(1, 2) - Fraction(r, m)


@dataclass(frozen=True, eq=False)
class StickelbergerElement:
    """Rational group-ring element at level m; coeffs[a] multiplies sigma_a^-1."""

    modulus: int
    coeffs: Mapping[int, Fraction] = field(repr=False)

    @property
    def level(self) -> CyclotomicLevel:
        return CyclotomicLevel(self.modulus)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StickelbergerElement):
            return NotImplemented
        return self.modulus == other.modulus and dict(self.coeffs) == dict(other.coeffs)

    def __hash__(self):
        return hash((self.modulus, tuple(sorted(self.coeffs.items()))))

    def denominator(self) -> int:
        d = 1
        for c in self.coeffs.values():
            d = _lcm(d, c.denominator)
        return d

    def euler_factor(self, q: int) -> "StickelbergerElement":
        """Multiply by 1 - Frob_q^-1 = 1 - sigma_q^-1."""
        m = self.modulus
        if gcd(q, m) != 1:
            raise StickelbergerError(f"{q} divides the level {m}")
        qi = pow(q, -1, m)
        return StickelbergerElement(m, {b: self.coeffs[b] - self.coeffs[b * qi % m] for b in self.coeffs})

    def project(self, m2: int) -> "StickelbergerElement":
        """Image under Gal(Q(mu_m)/Q) -> Gal(Q(mu_m2)/Q) for m2 | m."""
        if self.modulus % m2:
            raise StickelbergerError(f"{m2} does not divide {self.modulus}")
        out: dict[int, Fraction] = {}
        for a, c in self.coeffs.items():
            b = a % m2 if m2 > 1 else 0
            out[b] = out.get(b, Fraction(0)) + c
        units = CyclotomicLevel(m2).units
        return StickelbergerElement(m2, {b: out.get(b, Fraction(0)) for b in units})

    def evaluate(self, psi: "DirichletCharacter") -> "CyclotomicNumber":
        """Image under sigma_a -> psi(a), i.e. sum_a c_a * psi(a)^-1."""
        if self.modulus % psi.modulus:
            raise StickelbergerError("character modulus must divide the level")
        acc = CyclotomicNumber.zero(psi.root_order)
        for a, c in self.coeffs.items():
            if c:
                acc = acc.add_root(c, -psi.exponent(a))
        return acc

    def to_json(self) -> dict:
        return {"m": self.modulus, "coeffs": {str(a): _frac_str(c) for a, c in sorted(self.coeffs.items())}}


def _frac_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def stickelberger_element(m: int, extra_primes: Iterable[int] = ()) -> StickelbergerElement:
    if m <= 1:
        raise StickelbergerError("modulus must exceed 1")
    theta = StickelbergerElement(m, {a: partial_zeta_zero(m, a) for a in CyclotomicLevel(m).units})
    for q in sorted(set(extra_primes)):
        if not is_prime(q):
            raise StickelbergerError(f"{q} is not prime")
        theta = theta.euler_factor(q)
    return theta


# ---------------------------------------------------------------------------
# exact cyclotomic numbers and complex Dirichlet characters


@lru_cache(maxsize=None)
def _cyclotomic_coeffs(N: int) -> tuple[int, ...]:
    from sympy import Poly, Symbol, cyclotomic_poly

    x = Symbol("x")
    return tuple(int(c) for c in reversed(Poly(cyclotomic_poly(N, x), x).all_coeffs()))


@lru_cache(maxsize=None)
def _root_table(N: int) -> tuple[tuple[int, ...], ...]:
    """Coordinates of zeta_N^e, e = 0..N-1, in the power basis of Q(zeta_N)."""
    phi = _cyclotomic_coeffs(N)
    d = len(phi) - 1
    rows = []
    cur = [0] * d
    cur[0] = 1
    for _ in range(N):
        rows.append(tuple(cur))
        # multiply by x and reduce by the monic Phi_N
        top = cur[-1]
        nxt = [0] + cur[:-1]
        if top:
            nxt = [nxt[i] - top * phi[i] for i in range(d)]
        cur = nxt
    return tuple(rows)


@dataclass(frozen=True)
class CyclotomicNumber:
    N: int
    coords: tuple[Fraction, ...]

    @classmethod
    def zero(cls, N: int) -> "CyclotomicNumber":
        return cls(N, tuple(Fraction(0) for _ in range(len(_cyclotomic_coeffs(N)) - 1)))

    @classmethod
    def rational(cls, N: int, c) -> "CyclotomicNumber":
        z = list(cls.zero(N).coords)
        z[0] = Fraction(c)
        return cls(N, tuple(z))

    @classmethod
    def root(cls, N: int, e: int) -> "CyclotomicNumber":
        return cls(N, tuple(Fraction(x) for x in _root_table(N)[e % N]))

    def add_root(self, c: Fraction, e: int) -> "CyclotomicNumber":
        row = _root_table(self.N)[e % self.N]
        return CyclotomicNumber(self.N, tuple(a + c * r for a, r in zip(self.coords, row)))

    def __add__(self, other: "CyclotomicNumber") -> "CyclotomicNumber":
        return CyclotomicNumber(self.N, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return CyclotomicNumber(self.N, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CyclotomicNumber(self.N, tuple(a * other for a in self.coords))
        acc = CyclotomicNumber.zero(self.N)
        for i, a in enumerate(self.coords):
            if not a:
                continue
            for j, b in enumerate(other.coords):
                if b:
                    acc = acc.add_root(a * b, i + j)
        return acc

    __rmul__ = __mul__

    def is_rational(self) -> bool:
        return not any(self.coords[1:])

    def __str__(self):
        terms = [f"{_frac_str(c)}*z^{i}" if i else _frac_str(c) for i, c in enumerate(self.coords) if c]
        return " + ".join(terms) or "0"


@dataclass(frozen=True)
class DirichletCharacter:
    """psi(g_i) = zeta_{N}^{exps_i * N / o_i} on the generators g_i of (Z/m)^x, N the group exponent."""

    modulus: int
    exps: tuple[int, ...]

    @cached_property
    def level(self) -> CyclotomicLevel:
        return CyclotomicLevel(self.modulus)

    @cached_property
    def root_order(self) -> int:
        N = 1
        for o in self.level.cyclic_orders:
            N = _lcm(N, o)
        return N

    def exponent(self, a: int) -> int:
        N = self.root_order
        logs = self.level.dlog(a % self.modulus)
        return sum(l * e * (N // o) for l, e, o in zip(logs, self.exps, self.level.cyclic_orders)) % N

    def value(self, a: int) -> CyclotomicNumber:
        if gcd(a, self.modulus) != 1:
            return CyclotomicNumber.zero(self.root_order)
        return CyclotomicNumber.root(self.root_order, self.exponent(a))

    def is_odd(self) -> bool:
        if self.modulus <= 2:
            return False
        return self.exponent(self.modulus - 1) == self.root_order // 2 and self.root_order % 2 == 0

    def is_trivial(self) -> bool:
        return all(self.exponent(a) == 0 for a in self.level.units)

    @cached_property
    def conductor(self) -> int:
        m = self.modulus
        for d in range(1, m + 1):
            if m % d:
                continue
            if all(self.exponent(a) == 0 for a in self.level.units if (a - 1) % d == 0):
                return d
        return m

    def primitive_exponent(self, a: int) -> int | None:
        """Exponent of the associated primitive character at a, or None when gcd(a, f) > 1."""
        f = self.conductor
        if gcd(a, f) != 1:
            return None
        # lift a to a unit mod m congruent to a mod f
        m = self.modulus
        b = a % f
        while gcd(b, m) != 1:
            b += f
        return self.exponent(b)


def dirichlet_characters(m: int) -> list[DirichletCharacter]:
    from itertools import product

    level = CyclotomicLevel(m)
    return [DirichletCharacter(m, e) for e in product(*(range(o) for o in level.cyclic_orders))]


# ---------------------------------------------------------------------------
# p-adic projections


def _scaled_integral(theta: StickelbergerElement, p: int, n: int):
    """(k, dict a -> p^k theta_a mod p^(n+k)) with k = v_p(denominator)."""
    D = theta.denominator()
    k = valuation(D, p) if D % p == 0 else 0
    mod = p ** (n + k)
    out = {}
    for a, c in theta.coeffs.items():
        f = c * p**k  # p-free denominator after scaling
        out[a] = f.numerator * pow(f.denominator, -1, mod) % mod
    return k, out


def teichmuller_subgroup(m: int, p: int) -> list[int]:
    """Units mod m congruent to Teichmuller lifts mod the p-part and 1 elsewhere."""
    t = valuation(m, p)
    pt = p**t
    rest = m // pt
    out = []
    for a in range(1, p):
        w = teichmuller(p, t, a)
        if rest == 1:
            out.append(w % m)
        else:
            x = (w - 1) * pow(rest, -1, pt) % pt
            out.append((1 + rest * x) % m)
    return out


def tame_subgroup(m: int, p: int) -> list[int]:
    """The maximal subgroup of (Z/m)^x of order prime to p."""
    level = CyclotomicLevel(m)
    units = level.units
    e = 1
    for o in level.cyclic_orders:
        e = _lcm(e, o)
    pp = 1
    while e % p == 0:
        e //= p
        pp *= p
    return sorted({pow(a, pp, m) for a in units})


def _units_array(m: int) -> np.ndarray:
    r = np.arange(m, dtype=np.int64)
    return r[np.gcd(r, m) == 1]


def _powmod_array(a: np.ndarray, e: int, m: int) -> np.ndarray:
    out = np.ones_like(a)
    base = a % m
    while e:
        if e & 1:
            out = out * base % m
        base = base * base % m
        e >>= 1
    return out


@lru_cache(maxsize=32)
def flat_coefficients(m: int, p: int, n: int, extra_primes: tuple[int, ...] = ()) -> tuple[np.ndarray, np.ndarray]:
    """(units a, coefficient mod p^n of sigma_a^-1 in theta^flat) at level m.

    The flat part is the c = -1 part with its omega-component over the tame
    subgroup Delta of (Z/m)^x removed.  omega is trivial on
    Delta' = {d in Delta : d = 1 mod p}, so e_omega is an average over
    Delta'-cosets followed by a (p-1)-term sum.  Everything is computed at
    precision p^(n+k), k = v_p(2m), and the result must be divisible by p^k.
    """
    if m % p:
        raise StickelbergerError("the level must contain mu_p")
    if p == 2:
        raise StickelbergerError("p must be odd")
    units = _units_array(m)
    k = valuation(2 * m, p)
    P = p ** (n + k)
    u = (2 * m) // p**k
    full = np.zeros(m, dtype=np.int64)
    # p^k zeta(0, sigma_a) = (m - 2a) / u
    full[units] = (m - 2 * units) % P * pow(u, -1, P) % P
    for q in sorted(set(extra_primes)):
        if gcd(q, m) != 1:
            raise StickelbergerError(f"{q} divides the level {m}")
        qi = pow(q, -1, m)
        shifted = np.zeros(m, dtype=np.int64)
        shifted[units] = full[units * qi % m]
        full = (full - shifted) % P
    odd = np.zeros(m, dtype=np.int64)
    odd[units] = (full[units] - full[(m - units) % m]) % P * pow(2, -1, P) % P
    level = CyclotomicLevel(m)
    G = level.order
    pp = p ** valuation(G, p)
    tame = G // pp
    # a -> its p-Sylow component a^E with E = 1 mod pp, E = 0 mod tame
    E = tame * pow(tame, -1, pp) % (G) if pp > 1 else 0
    a_p = _powmod_array(units, E, m) if pp > 1 else np.ones_like(units)
    code = a_p * p + units % p
    sizes = np.bincount(code, minlength=m * p)
    inner = tame // (p - 1)
    if (sizes[code] != inner).any():
        raise StickelbergerError("coset decomposition of the tame subgroup failed")
    sums = np.zeros(m * p, dtype=np.int64)
    np.add.at(sums, code, odd[units])
    sums %= P
    A = sums * pow(inner, -1, P) % P
    acc = np.zeros(len(units), dtype=np.int64)
    for j in range(1, p):
        w = teichmuller(p, n + k, j)
        shifted = a_p * p + units * pow(j, -1, p) % p
        acc = (acc + w * A[shifted]) % P
    acc = acc * pow(p - 1, -1, P) % P
    flat = (odd[units] - acc) % P
    if (flat % p**k).any():
        raise IntegralityError(f"flat projection at level {m} is not {p}-integral")
    out = (flat // p**k) % p**n
    units.setflags(write=False)
    out.setflags(write=False)
    return units, out


def flat_projection(theta: StickelbergerElement, p: int, n: int) -> GroupRingElement:
    """theta^flat in (Z/p^n)[(Z/m)^x]."""
    m = theta.modulus
    if theta != stickelberger_element(m):
        raise StickelbergerError("flat_projection expects an unmodified Stickelberger element")
    level = theta.level
    units, flat = flat_coefficients(m, p, n)
    ring = level.ring(p, n)
    coeffs = [0] * ring.order
    for a, v in zip(units.tolist(), flat.tolist()):
        coeffs[level.ring_index(ring, pow(a, -1, m))] = v
    return GroupRingElement(ring, tuple(coeffs))


def group_ring_of_level(m: int, p: int, n: int) -> tuple[CyclotomicLevel, RingDescriptor]:
    level = CyclotomicLevel(m)
    return level, level.ring(p, n)


def sigma(level: CyclotomicLevel, ring: RingDescriptor, a: int) -> GroupRingElement:
    return ring.group_element(level.ring_index(ring, a % level.modulus))


def twist(x: GroupRingElement, m: int) -> GroupRingElement:
    """Linear extension of sigma_a -> (a mod p^n) sigma_a^-1 on the group ring of (Z/m)^x."""
    ring = x.ring
    if m % ring.p**ring.n:
        raise StickelbergerError("twist needs p^n | m")
    level = CyclotomicLevel(m)
    out = [0] * ring.order
    for a in level.units:
        i = level.ring_index(ring, a)
        c = x.coeffs[i]
        if c:
            j = level.ring_index(ring, pow(a, -1, m))
            out[j] = (out[j] + c * a) % ring.q
    return GroupRingElement(ring, tuple(out))


def project_level(x: GroupRingElement, m: int, m2: int, ring2: RingDescriptor | None = None) -> GroupRingElement:
    """Image under (Z/m)^x -> (Z/m2)^x on group rings (coefficients reduced to ring2's modulus)."""
    if m % m2:
        raise StickelbergerError("projection needs m2 | m")
    L1, L2 = CyclotomicLevel(m), CyclotomicLevel(m2)
    R1 = x.ring
    R2 = ring2 or L2.ring(R1.p, R1.n)
    out = [0] * R2.order
    for a in L1.units:
        c = x.coeffs[L1.ring_index(R1, a)]
        if c:
            j = L2.ring_index(R2, a % m2 if m2 > 1 else 0) if m2 > 1 else 0
            out[j] = (out[j] + c) % R2.q
    return GroupRingElement(R2, tuple(out))


# ---------------------------------------------------------------------------
# fields K inside the maximal p-abelian extension unramified outside the labels


def admissible_orders(p: int, labels: Sequence[int], cap: int | None = None) -> tuple[int, ...]:
    out = []
    for q in labels:
        if not is_prime(q) or (q - 1) % p:
            raise StickelbergerError(f"label {q} is not a prime congruent to 1 mod {p}")
        v = valuation(q - 1, p)
        if cap is not None:
            v = min(v, cap)
        out.append(p**v)
    return tuple(out)


@dataclass(frozen=True)
class LevelField:
    """K = compositum of the degree-p^v subfields k(q) of Q(mu_q), together with k_n.

    Galois group coordinates: one cyclic factor per label (dlog of a mod q
    with respect to a fixed primitive root), then Gamma_n = Gal(k_n/Q).
    """

    p: int
    n: int
    labels: tuple[int, ...] = ()
    cap: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(sorted(self.labels)))
        if len(set(self.labels)) != len(self.labels):
            raise StickelbergerError("labels must be distinct")
        admissible_orders(self.p, self.labels, self.cap)

    @cached_property
    def orders(self) -> tuple[int, ...]:
        return admissible_orders(self.p, self.labels, self.cap) + (self.p**self.n,)

    @cached_property
    def structure(self) -> CyclicProduct:
        return CyclicProduct(self.orders)

    @cached_property
    def ring(self) -> RingDescriptor:
        return self.structure.ring(self.p, self.n)

    def conductor(self) -> int:
        out = 1
        for q in self.labels:
            out *= q
        return out

    def sub(self, labels: Sequence[int]) -> "LevelField":
        return LevelField(self.p, self.n, tuple(labels), self.cap)

    def coordinates(self, a: int) -> tuple[int, ...]:
        """Coordinates of the image of sigma_a (a coprime to the conductor and p)."""
        p, n = self.p, self.n
        out = []
        for q, o in zip(self.labels, self.orders):
            out.append(_dlog_prime(q, a % q) % o)
        # Gamma_n: <a> = a / omega(a) in 1 + pZ_p, log base 1+p
        M = p ** (n + 1)
        w = teichmuller(p, n + 1, a % p)
        u = a * pow(w, -1, M) % M
        out.append(_dlog_one_plus_p(p, n, u))
        return tuple(out)

    def index(self, a: int) -> int:
        return self.structure.index_in(self.ring, self.coordinates(a))

    @cached_property
    def _code_to_index(self) -> np.ndarray:
        out = np.zeros(self.ring.order, dtype=np.int64)
        for ex in self.structure.elements:
            code = 0
            for e, o in zip(ex, self.orders):
                code = code * o + e
            out[code] = self.structure.index_in(self.ring, ex)
        return out

    def to_grid(self, x: GroupRingElement) -> np.ndarray:
        """Coefficients arranged on the coordinate grid (labels..., Gamma_n)."""
        return x.array()[self._code_to_index].reshape(self.orders)

    def from_grid(self, arr: np.ndarray) -> GroupRingElement:
        out = np.zeros(self.ring.order, dtype=np.int64)
        out[self._code_to_index] = np.asarray(arr, dtype=np.int64).ravel()
        return GroupRingElement.from_array(self.ring, out % self.ring.q)

    def shift(self, x: GroupRingElement, coords: Sequence[int]) -> GroupRingElement:
        """Multiplication by the group element with the given coordinates."""
        g = self.to_grid(x)
        return self.from_grid(np.roll(g, tuple(int(c) for c in coords), axis=tuple(range(len(self.orders)))))

    def index_array(self, units: np.ndarray) -> np.ndarray:
        """Vectorized index() over an array of integers prime to p and the labels."""
        p, n = self.p, self.n
        code = np.zeros(len(units), dtype=np.int64)
        for q, o in zip(self.labels, self.orders):
            tab = np.zeros(q, dtype=np.int64)
            for x, k in _dlog_table_prime(q).items():
                tab[x] = k % o
            code = code * o + tab[units % q]
        M = p ** (n + 1)
        winv = np.zeros(p, dtype=np.int64)
        for r in range(1, p):
            winv[r] = pow(teichmuller(p, n + 1, r), -1, M)
        uu = units % M * winv[units % p] % M
        tab = np.zeros(M, dtype=np.int64)
        for x, k in _dlog_table_one_plus_p(p, n).items():
            tab[x] = k
        code = code * p**n + tab[uu]
        return self._code_to_index[code]

    def frobenius_coordinates(self, q: int) -> tuple[int, ...]:
        """Coordinates of the fixed Frobenius at q.

        For q unramified this is sigma_q.  For a label q of K the chosen lift is
        the idele class of a uniformizer at q: trivial on k(q), sigma_q elsewhere.
        """
        coords = list(self.coordinates_unramified_part(q))
        return tuple(coords)

    def coordinates_unramified_part(self, q: int) -> tuple[int, ...]:
        p, n = self.p, self.n
        out = []
        for r, o in zip(self.labels, self.orders):
            out.append(0 if r == q else _dlog_prime(r, q % r) % o)
        M = p ** (n + 1)
        w = teichmuller(p, n + 1, q % p)
        u = q * pow(w, -1, M) % M
        out.append(_dlog_one_plus_p(p, n, u))
        return tuple(out)

    def frobenius(self, q: int) -> GroupRingElement:
        return self.ring.group_element(self.structure.index_in(self.ring, self.frobenius_coordinates(q)))

    def sigma_label(self, q: int) -> GroupRingElement:
        """The fixed generator sigma_q of G_q: coordinate 1 in the q-factor."""
        i = self.labels.index(q)
        ex = [0] * len(self.orders)
        ex[i] = 1
        return self.ring.group_element(self.structure.index_in(self.ring, ex))


def project_field(x: GroupRingElement, big: LevelField, small: LevelField) -> GroupRingElement:
    """Image under Gal(K' k_n/Q) -> Gal(K k_n/Q), K inside K'."""
    if not set(small.labels) <= set(big.labels) or (small.p, small.n) != (big.p, big.n):
        raise StickelbergerError("not a sub-level")
    g = big.to_grid(x)
    for ax in reversed(range(len(big.labels))):
        q = big.labels[ax]
        if q not in small.labels:
            g = g.sum(axis=ax)
        else:
            o_small = small.orders[small.labels.index(q)]
            o_big = big.orders[ax]
            if o_small != o_big:
                shape = list(g.shape)
                shape[ax : ax + 1] = [o_big // o_small, o_small]
                g = g.reshape(shape).sum(axis=ax)
    return small.from_grid(g % small.ring.q)


@lru_cache(maxsize=None)
def _dlog_table_prime(q: int) -> dict[int, int]:
    g = primitive_root(q)
    tab = {}
    x = 1
    for k in range(q - 1):
        tab[x] = k
        x = x * g % q
    return tab


def _dlog_prime(q: int, a: int) -> int:
    return _dlog_table_prime(q)[a % q]


@lru_cache(maxsize=None)
def _dlog_table_one_plus_p(p: int, n: int) -> dict[int, int]:
    M = p ** (n + 1)
    tab = {}
    x = 1
    for k in range(p**n):
        tab[x] = k
        x = x * (1 + p) % M
    return tab


def _dlog_one_plus_p(p: int, n: int, u: int) -> int:
    return _dlog_table_one_plus_p(p, n)[u % p ** (n + 1)]


def check_character(chi: CharacterSpec, p: int):
    if chi.p != p:
        raise StickelbergerError("character is defined for a different prime")
    if not chi.is_even():
        raise StickelbergerError("character must be even")
    if chi.is_trivial():
        raise StickelbergerError("character must be non-trivial")
    if (p - 1) % chi.order:
        raise StickelbergerError("character order must divide p-1")
    if chi.conductor() % p == 0:
        raise StickelbergerError("character conductor must be prime to p")


def level_modulus(K: LevelField, chi: CharacterSpec) -> int:
    f = chi.conductor()
    m = _lcm(f, K.p ** (K.n + 1))
    for q in K.labels:
        m = _lcm(m, q)
    return m


def _check_level_character(K: "LevelField", chi: CharacterSpec):
    check_character(chi, K.p)
    for q in K.labels:
        if chi.conductor() % q == 0:
            raise StickelbergerError(f"label {q} divides the conductor of chi")


def tilde_L(K: LevelField, chi: CharacterSpec, level: int | None = None) -> GroupRingElement:
    """e_chi Tw(theta^flat) in R_{K,n}.

    With theta^flat = sum f_a sigma_a^-1 at level m, the twist gives
    sum f_a a^-1 sigma_a and e_chi sends sigma_a to chi(a) times its image in
    Gal(K k_n / Q).
    """
    _check_level_character(K, chi)
    p, n = K.p, K.n
    m = level or level_modulus(K, chi)
    if m % level_modulus(K, chi):
        raise StickelbergerError("level must be a multiple of the minimal level")
    q = p**n
    units, flat = flat_coefficients(m, p, n)
    f = chi.modulus
    chi_tab = np.zeros(f, dtype=np.int64)
    for a, v in chi.value_table.items():
        chi_tab[a] = v
    inv_tab = np.zeros(q, dtype=np.int64)
    for r in range(q):
        if r % p:
            inv_tab[r] = pow(r, -1, q)
    vals = flat * inv_tab[units % q] % q * chi_tab[units % f] % q
    acc = np.zeros(K.ring.order, dtype=np.int64)
    np.add.at(acc, K.index_array(units), vals)
    return GroupRingElement.from_array(K.ring, acc % q)


def tilde_L_via_projections(K: LevelField, chi: CharacterSpec, extra_p: int = 1) -> GroupRingElement:
    """The same element through group-ring operations at level m * p^extra_p.

    theta^flat is built as an element of (Z/p^n)[(Z/m')^x], twisted there,
    pushed down to (Z/m)^x and only then sent through e_chi.
    """
    _check_level_character(K, chi)
    p, n = K.p, K.n
    m = level_modulus(K, chi)
    big = m * p**extra_p
    flat = flat_projection(stickelberger_element(big), p, n)
    tw = project_level(twist(flat, big), big, m)
    level = CyclotomicLevel(m)
    R = K.ring
    acc = [0] * R.order
    for a in level.units:
        c = tw.coeffs[level.ring_index(tw.ring, a)]
        if c:
            i = K.index(a)
            acc[i] = (acc[i] + c * chi(a % chi.modulus)) % R.q
    return GroupRingElement(R, tuple(acc))


def u_element(K: LevelField, chi: CharacterSpec, q: int) -> GroupRingElement:
    """u_q = chi(q)^-1 * q * Frob_q^-1 in R_{K,n}."""
    R = K.ring
    c = pow(chi(q % chi.modulus), -1, R.q) * q % R.q
    fr = K.frobenius(q)
    from .ring import involution

    return involution(fr) * c


def frobenius_polynomial(K: LevelField, chi: CharacterSpec, q: int) -> GroupRingElement:
    """P_q(Frob_q^-1) = 1 - chi(q)^-1 q Frob_q^-1 = 1 - u_q."""
    return K.ring.one() - u_element(K, chi, q)


def apply_u(K: LevelField, chi: CharacterSpec, q: int, x: GroupRingElement) -> GroupRingElement:
    """u_q * x, computed as a coordinate shift."""
    R = K.ring
    c = pow(chi(q % chi.modulus), -1, R.q) * q % R.q
    fr = K.frobenius_coordinates(q)
    return K.shift(x, [-e for e in fr]) * c


def apply_frobenius_polynomial(K: LevelField, chi: CharacterSpec, q: int, x: GroupRingElement) -> GroupRingElement:
    return x - apply_u(K, chi, q, x)


def modified_p_adic_L(K: LevelField, chi: CharacterSpec) -> GroupRingElement:
    out = tilde_L(K, chi)
    for q in K.labels:
        out = -apply_u(K, chi, q, out)
    return out


@dataclass(frozen=True, eq=False)
class EulerSystemWindow:
    """Values c_K for a family of fields K (keyed by their label tuples) over a common base."""

    p: int
    n: int
    chi: CharacterSpec
    values: Mapping[tuple[int, ...], GroupRingElement] = field(repr=False)
    cap: int | None = None

    def field(self, labels: Sequence[int]) -> LevelField:
        return LevelField(self.p, self.n, tuple(sorted(labels)), self.cap)

    def with_value(self, labels, value: GroupRingElement) -> "EulerSystemWindow":
        vals = dict(self.values)
        vals[tuple(sorted(labels))] = value
        return EulerSystemWindow(self.p, self.n, self.chi, vals, self.cap)

    def covering_pairs(self):
        keys = sorted(self.values, key=lambda t: (len(t), t))
        for big in keys:
            for small in keys:
                if small != big and set(small) <= set(big):
                    yield big, small


def build_window(p: int, n: int, chi: CharacterSpec, pool: Sequence[int], max_size: int, cap: int | None = None) -> EulerSystemWindow:
    from itertools import combinations

    vals = {}
    for k in range(max_size + 1):
        for labels in combinations(sorted(pool), k):
            vals[labels] = modified_p_adic_L(LevelField(p, n, labels, cap), chi)
    return EulerSystemWindow(p, n, chi, vals, cap)


def euler_window_validate(w: EulerSystemWindow) -> dict:
    failures = []
    checked = 0
    for big, small in w.covering_pairs():
        Fb, Fs = w.field(big), w.field(small)
        lhs = project_field(w.values[big], Fb, Fs)
        rhs = w.values[small]
        for q in sorted(set(big) - set(small)):
            rhs = apply_frobenius_polynomial(Fs, w.chi, q, rhs)
        checked += 1
        if lhs != rhs:
            failures.append({"pair": [list(big), list(small)], "lhs": lhs.to_json(), "rhs": rhs.to_json()})
    return {"valid": not failures, "checked": checked, "failures": failures[:1], "failure_count": len(failures)}
