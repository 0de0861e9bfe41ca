"""Characteristic-p coefficient rings with exact, canonical elements.

Three ring kinds are supported, all with fully deterministic canonical forms:

* ``FiniteFieldSpec`` -- F_q = F_p[u]/(modulus), q = p^e, elements stored as
  coefficient vectors of length e with entries in [0, p).
* ``FracLaurentRing`` -- (Laurent) polynomials over F_q whose exponents live in
  the lattice (1/B)Z with B = 2^depth_2 * p^depth_p, optionally cut down by a
  monomial ideal.  The p-part of B is the declared perfection depth; the 2-part
  exists so square roots of monomials have a home.
* ``UnivariateQuotient`` -- F_q[T]/(g) for a monic g.

Elements are immutable: a ``RingElement`` holds a sorted tuple of
(exponent key, field coefficient) pairs, so equal elements have identical
representations and hash equal.  All operations return new elements.

Inverse Frobenius is partial: on a ``FracLaurentRing`` it fails with
``DepthExhausted`` once an exponent denominator would leave the lattice, and on
a ``UnivariateQuotient`` it only sees p-th powers of canonical representatives
(a residue class can have a root the representative hides; ``NoRoot`` then).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DepthExhausted,
    LatticeError,
    MismatchError,
    NoRoot,
    NotAUnit,
    SpecParseError,
)

FieldCoeff = tuple[int, ...]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# ---------------------------------------------------------------------------
# finite fields


@dataclass(frozen=True)
class FiniteFieldSpec:
    """F_p[u]/(modulus); modulus is monic of degree e, stored low-to-high."""

    p: int
    e: int
    modulus: tuple[int, ...]
    gen_name: str = "u"

    @property
    def q(self) -> int:
        return self.p ** self.e

    def zero(self) -> FieldCoeff:
        return (0,) * self.e

    def one(self) -> FieldCoeff:
        return (1,) + (0,) * (self.e - 1)

    def from_int(self, n: int) -> FieldCoeff:
        return (n % self.p,) + (0,) * (self.e - 1)

    def gen(self) -> FieldCoeff:
        if self.e == 1:
            raise SpecParseError("prime field has no generator symbol")
        return (0, 1) + (0,) * (self.e - 2)

    def cadd(self, a: FieldCoeff, b: FieldCoeff) -> FieldCoeff:
        p = self.p
        return tuple((x + y) % p for x, y in zip(a, b))

    def csub(self, a: FieldCoeff, b: FieldCoeff) -> FieldCoeff:
        p = self.p
        return tuple((x - y) % p for x, y in zip(a, b))

    def cneg(self, a: FieldCoeff) -> FieldCoeff:
        p = self.p
        return tuple((-x) % p for x in a)

    def cmul(self, a: FieldCoeff, b: FieldCoeff) -> FieldCoeff:
        p, e = self.p, self.e
        if e == 1:
            return ((a[0] * b[0]) % p,)
        prod = [0] * (2 * e - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] = (prod[i + j] + x * y) % p
        # reduce by the monic modulus
        for d in range(2 * e - 2, e - 1, -1):
            c = prod[d]
            if c:
                prod[d] = 0
                for j in range(e):
                    prod[d - e + j] = (prod[d - e + j] - c * self.modulus[j]) % p
        return tuple(prod[:e])

    def cpow(self, a: FieldCoeff, n: int) -> FieldCoeff:
        if n < 0:
            return self.cpow(self.cinv(a), -n)
        r = self.one()
        b = a
        while n:
            if n & 1:
                r = self.cmul(r, b)
            b = self.cmul(b, b)
            n >>= 1
        return r

    def cinv(self, a: FieldCoeff) -> FieldCoeff:
        if a == self.zero():
            raise NotAUnit("zero is not invertible")
        # a^(q-2); q is desk-sized so this is fine
        return self.cpow(a, self.q - 2)

    def cfrob(self, a: FieldCoeff, k: int) -> FieldCoeff:
        """k-fold Frobenius c -> c^(p^k); every k is defined since Frob^e = id."""
        k %= self.e
        if k == 0:
            return a
        return self.cpow(a, self.p ** k)

    def nth_root(self, a: FieldCoeff, n: int) -> FieldCoeff:
        """Some b with b^n = a, or NoRoot.  Deterministic choice."""
        if n <= 0:
            raise SpecParseError("root index must be positive")
        if a == self.zero():
            return a
        q = self.q
        from math import gcd

        if gcd(n, q - 1) == 1:
            return self.cpow(a, pow(n, -1, q - 1))
        if q <= 1 << 14:
            best = None
            for b in self.iter_elements():
                if self.cpow(b, n) == a:
                    if best is None or b < best:
                        best = b
            if best is not None:
                return best
            raise NoRoot(f"no {n}-th root in F_{q}")
        raise NoRoot(f"{n}-th root search not supported for q={q}")

    def iter_elements(self):
        p, e = self.p, self.e
        total = p ** e
        for idx in range(total):
            vec = []
            t = idx
            for _ in range(e):
                vec.append(t % p)
                t //= p
            yield tuple(vec)


def _poly_is_irreducible(p: int, coeffs: tuple[int, ...]) -> bool:
    """Brute-force irreducibility over F_p by trial division; desk scale only."""
    deg = len(coeffs) - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for idx in range(p ** d):
            div = []
            t = idx
            for _ in range(d):
                div.append(t % p)
                t //= p
            div.append(1)  # monic
            if _fp_poly_divides(p, div, list(coeffs)):
                return False
    return True


def _fp_poly_divides(p: int, div: list[int], num: list[int]) -> bool:
    num = num[:]
    dd = len(div) - 1
    for k in range(len(num) - 1, dd - 1, -1):
        c = num[k] % p
        if c:
            for j in range(dd + 1):
                num[k - dd + j] = (num[k - dd + j] - c * div[j]) % p
    return all(c % p == 0 for c in num)


def _default_modulus(p: int, e: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree e over F_p."""
    if e == 1:
        return (0, 1)
    for idx in range(p ** e):
        low = []
        t = idx
        for _ in range(e):
            low.append(t % p)
            t //= p
        cand = tuple(low) + (1,)
        if _poly_is_irreducible(p, cand):
            return cand
    raise SpecParseError(f"no irreducible modulus found for p={p}, e={e}")


def make_field(p: int, e: int, modulus: tuple[int, ...] | None = None,
               gen_name: str = "u") -> FiniteFieldSpec:
    if not _is_prime(p):
        raise SpecParseError(f"p={p} is not prime")
    if e < 1:
        raise SpecParseError("e must be >= 1")
    if p ** e > 1 << 20:
        raise SpecParseError(f"q = p^e = {p ** e} exceeds the 2^20 desk bound")
    if modulus is None:
        modulus = _default_modulus(p, e)
    else:
        modulus = tuple(c % p for c in modulus)
        if len(modulus) != e + 1 or modulus[-1] != 1:
            raise SpecParseError("modulus must be monic of degree e")
        if e > 1 and not _poly_is_irreducible(p, modulus):
            raise SpecParseError("modulus is reducible")
    return FiniteFieldSpec(p, e, modulus, gen_name)


# ---------------------------------------------------------------------------
# ring descriptors


@dataclass(frozen=True)
class FracLaurentRing:
    """F_q[x_1^(1/B), ...] (or Laurent), exponent lattice (1/B)Z, B = 2^a p^m."""

    base: FiniteFieldSpec
    variables: tuple[str, ...]
    depth_p: int
    depth_2: int
    laurent: bool
    quotient: tuple[tuple[Fraction, ...], ...] = ()

    @property
    def lattice_b(self) -> int:
        return (2 ** self.depth_2) * (self.base.p ** self.depth_p)


@dataclass(frozen=True)
class UnivariateQuotient:
    """F_q[T]/(g) with g monic of degree >= 1, stored low-to-high."""

    base: FiniteFieldSpec
    var: str
    modulus: tuple[FieldCoeff, ...]

    @property
    def degree(self) -> int:
        return len(self.modulus) - 1


Ring = FiniteFieldSpec | FracLaurentRing | UnivariateQuotient


def base_field(ring: Ring) -> FiniteFieldSpec:
    return ring if isinstance(ring, FiniteFieldSpec) else ring.base


def ring_char(ring: Ring) -> int:
    return base_field(ring).p


# ---------------------------------------------------------------------------
# elements

# exponent keys: () for field constants, tuple[Fraction,...] for FracLaurent,
# plain int (T-degree) for UnivariateQuotient.


@dataclass(frozen=True)
class RingElement:
    ring: Ring
    terms: tuple

    def __add__(self, other):
        return add(self, coerce(self.ring, other))

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, coerce(self.ring, other))

    def __rsub__(self, other):
        return sub(coerce(self.ring, other), self)

    def __mul__(self, other):
        return mul(self, coerce(self.ring, other))

    __rmul__ = __mul__

    def __neg__(self):
        return neg(self)

    def __pow__(self, n):
        if isinstance(n, Fraction):
            return pow_fraction(self, n)
        return pow_int(self, n)

    def is_zero(self) -> bool:
        return not self.terms

    def __str__(self) -> str:
        return format_element(self)


def _mk(ring: Ring, d: dict) -> RingElement:
    F = base_field(ring)
    zero = F.zero()
    items = [(k, c) for k, c in d.items() if c != zero]
    items.sort(key=lambda kc: kc[0], reverse=True)
    return RingElement(ring, tuple(items))


def _reduce_key(ring: Ring, key, coeff: FieldCoeff, out: dict) -> None:
    """Fold one raw (key, coeff) term into out, applying the ring's relations."""
    F = base_field(ring)
    if isinstance(ring, FiniteFieldSpec):
        out[()] = F.cadd(out.get((), F.zero()), coeff)
        return
    if isinstance(ring, FracLaurentRing):
        b = ring.lattice_b
        for ex in key:
            if b % ex.denominator != 0:
                raise LatticeError(
                    f"exponent {ex} outside lattice (denominator must divide {b})")
            if not ring.laurent and ex < 0:
                raise LatticeError(f"negative exponent {ex} in a non-Laurent ring")
        for gen in ring.quotient:
            if all(e >= g for e, g in zip(key, gen)):
                return  # killed by the monomial ideal
        out[key] = F.cadd(out.get(key, F.zero()), coeff)
        return
    # UnivariateQuotient: reduce T^k by the monic modulus
    deg = ring.degree
    if key < deg:
        out[key] = F.cadd(out.get(key, F.zero()), coeff)
        return
    work = {key: coeff}
    while work:
        k = max(work)
        c = work.pop(k)
        if c == F.zero():
            continue
        if k < deg:
            out[k] = F.cadd(out.get(k, F.zero()), c)
            continue
        for j in range(deg):
            mj = ring.modulus[j]
            if mj != F.zero():
                delta = F.cneg(F.cmul(c, mj))
                kk = k - deg + j
                work[kk] = F.cadd(work.get(kk, F.zero()), delta)


def zero(ring: Ring) -> RingElement:
    return RingElement(ring, ())


def one(ring: Ring) -> RingElement:
    return from_coeff(ring, base_field(ring).one())


def from_coeff(ring: Ring, c: FieldCoeff) -> RingElement:
    if isinstance(ring, FiniteFieldSpec):
        key = ()
    elif isinstance(ring, FracLaurentRing):
        key = (Fraction(0),) * len(ring.variables)
    else:
        key = 0
    d: dict = {}
    _reduce_key(ring, key, c, d)
    return _mk(ring, d)


def from_int(ring: Ring, n: int) -> RingElement:
    return from_coeff(ring, base_field(ring).from_int(n))


def coerce(ring: Ring, v) -> RingElement:
    if isinstance(v, RingElement):
        if v.ring != ring:
            raise MismatchError("elements from different rings")
        return v
    if isinstance(v, int):
        return from_int(ring, v)
    return NotImplemented


def variable(ring: Ring, name: str) -> RingElement:
    F = base_field(ring)
    if isinstance(ring, FracLaurentRing) and name in ring.variables:
        i = ring.variables.index(name)
        key = tuple(Fraction(int(i == j)) for j in range(len(ring.variables)))
        d: dict = {}
        _reduce_key(ring, key, F.one(), d)
        return _mk(ring, d)
    if isinstance(ring, UnivariateQuotient) and name == ring.var:
        d = {}
        _reduce_key(ring, 1, F.one(), d)
        return _mk(ring, d)
    if name == F.gen_name and F.e > 1:
        return from_coeff(ring, F.gen())
    raise SpecParseError(f"unknown symbol {name!r} in this ring")


def monomial(ring: FracLaurentRing, exps, coeff: FieldCoeff | None = None) -> RingElement:
    F = ring.base
    key = tuple(Fraction(e) for e in exps)
    d: dict = {}
    _reduce_key(ring, key, coeff if coeff is not None else F.one(), d)
    return _mk(ring, d)


def add(x: RingElement, y: RingElement) -> RingElement:
    if x.ring != y.ring:
        raise MismatchError("elements from different rings")
    F = base_field(x.ring)
    d = {k: c for k, c in x.terms}
    for k, c in y.terms:
        d[k] = F.cadd(d.get(k, F.zero()), c)
    return _mk(x.ring, d)


def neg(x: RingElement) -> RingElement:
    F = base_field(x.ring)
    return RingElement(x.ring, tuple((k, F.cneg(c)) for k, c in x.terms))


def sub(x: RingElement, y: RingElement) -> RingElement:
    return add(x, neg(y))


def _key_mul(ring: Ring, k1, k2):
    if isinstance(ring, FiniteFieldSpec):
        return ()
    if isinstance(ring, FracLaurentRing):
        return tuple(a + b for a, b in zip(k1, k2))
    return k1 + k2


def mul(x: RingElement, y: RingElement) -> RingElement:
    if x.ring != y.ring:
        raise MismatchError("elements from different rings")
    ring = x.ring
    F = base_field(ring)
    d: dict = {}
    for k1, c1 in x.terms:
        for k2, c2 in y.terms:
            _reduce_key(ring, _key_mul(ring, k1, k2), F.cmul(c1, c2), d)
    return _mk(ring, d)


def scalar_mul(x: RingElement, c: FieldCoeff) -> RingElement:
    F = base_field(x.ring)
    d = {}
    for k, cc in x.terms:
        d[k] = F.cmul(cc, c)
    return _mk(x.ring, d)


def pow_int(x: RingElement, n: int) -> RingElement:
    if n < 0:
        return pow_int(invert(x), -n)
    r = one(x.ring)
    b = x
    while n:
        if n & 1:
            r = mul(r, b)
        b = mul(b, b)
        n >>= 1
    return r


def is_monomial(x: RingElement) -> bool:
    return len(x.terms) == 1


def invert(x: RingElement) -> RingElement:
    """Multiplicative inverse where one exists; NotAUnit otherwise."""
    ring = x.ring
    F = base_field(ring)
    if x.is_zero():
        raise NotAUnit("zero is not invertible")
    if isinstance(ring, FiniteFieldSpec):
        return from_coeff(ring, F.cinv(x.terms[0][1]))
    if isinstance(ring, FracLaurentRing):
        if not is_monomial(x):
            raise NotAUnit("only monomials are invertible here")
        key, c = x.terms[0]
        if not ring.laurent and any(e != 0 for e in key):
            raise NotAUnit("non-constant monomial in a non-Laurent ring")
        inv_key = tuple(-e for e in key)
        d: dict = {}
        _reduce_key(ring, inv_key, F.cinv(c), d)
        return _mk(ring, d)
    # UnivariateQuotient: extended gcd of the representative with the modulus
    g = _uq_poly(x)
    r = _fq_poly_invmod(F, g, list(ring.modulus))
    if r is None:
        raise NotAUnit("representative shares a factor with the modulus")
    d = {}
    for k, c in enumerate(r):
        if c != F.zero():
            _reduce_key(ring, k, c, d)
    return _mk(ring, d)


def pow_fraction(x: RingElement, r: Fraction) -> RingElement:
    """x^r for rational r; only single-term elements support a fractional part."""
    ring = x.ring
    monomial_route = isinstance(ring, FracLaurentRing) and is_monomial(x) and (
        r.denominator != 1 or r < 0)
    if r.denominator == 1 and not monomial_route:
        return pow_int(x, r.numerator)
    if not isinstance(ring, FracLaurentRing):
        raise LatticeError("fractional powers need an exponent lattice")
    if not is_monomial(x):
        raise NoRoot("fractional power of a non-monomial")
    F = ring.base
    key, c = x.terms[0]
    new_key = tuple(e * r for e in key)
    croot = F.nth_root(F.cpow(c, r.numerator) if r.numerator >= 0 else
                       F.cpow(F.cinv(c), -r.numerator), r.denominator)
    d: dict = {}
    _reduce_key(ring, new_key, croot, d)
    return _mk(ring, d)


# ---------------------------------------------------------------------------
# Frobenius


def frobenius(x: RingElement, k: int) -> RingElement:
    """k-fold Frobenius y -> y^(p^k); k < 0 walks the partial inverse."""
    if k == 0:
        return x
    step = 1 if k > 0 else -1
    for _ in range(abs(k)):
        x = _frob_once(x, step)
    return x


def _frob_once(x: RingElement, step: int) -> RingElement:
    ring = x.ring
    F = base_field(ring)
    p = F.p
    if isinstance(ring, FiniteFieldSpec):
        return from_coeff(ring, F.cfrob(x.terms[0][1], step) if x.terms else F.zero())
    if isinstance(ring, FracLaurentRing):
        d: dict = {}
        if step > 0:
            for key, c in x.terms:
                _reduce_key(ring, tuple(e * p for e in key), F.cfrob(c, 1), d)
        else:
            b = ring.lattice_b
            for key, c in x.terms:
                new_key = tuple(e / p for e in key)
                for e in new_key:
                    if b % e.denominator != 0:
                        raise DepthExhausted(
                            f"p-th root of exponent {e * p} leaves the lattice "
                            f"(denominator {e.denominator} does not divide {b})")
                _reduce_key(ring, new_key, F.cfrob(c, -1), d)
        return _mk(ring, d)
    # UnivariateQuotient
    if step > 0:
        return pow_int(x, p)
    d = {}
    for k, c in x.terms:
        if k % p != 0:
            raise NoRoot(
                "canonical representative is not a p-th power "
                f"(T-exponent {k} not divisible by {p})")
        _reduce_key(ring, k // p, F.cfrob(c, -1), d)
    return _mk(ring, d)


# ---------------------------------------------------------------------------
# polynomial helpers over F_q (coefficient lists, low-to-high, normalized)


def _uq_poly(x: RingElement) -> list[FieldCoeff]:
    F = base_field(x.ring)
    deg = max((k for k, _ in x.terms), default=-1)
    out = [F.zero()] * (deg + 1)
    for k, c in x.terms:
        out[k] = c
    return out


def _fq_norm(F: FiniteFieldSpec, a: list[FieldCoeff]) -> list[FieldCoeff]:
    while a and a[-1] == F.zero():
        a.pop()
    return a


def _fq_deg(a: list[FieldCoeff]) -> int:
    return len(a) - 1


def _fq_add(F, a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else F.zero()
        y = b[i] if i < len(b) else F.zero()
        out.append(F.cadd(x, y))
    return _fq_norm(F, out)


def _fq_mul(F, a, b):
    if not a or not b:
        return []
    out = [F.zero()] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x != F.zero():
            for j, y in enumerate(b):
                if y != F.zero():
                    out[i + j] = F.cadd(out[i + j], F.cmul(x, y))
    return _fq_norm(F, out)


def _fq_scale(F, a, c):
    return _fq_norm(F, [F.cmul(x, c) for x in a])


def _fq_divmod(F, a, b):
    a = a[:]
    if not b:
        raise ZeroDivisionError
    inv_lead = F.cinv(b[-1])
    q = [F.zero()] * max(0, len(a) - len(b) + 1)
    while _fq_deg(a) >= _fq_deg(b) and a:
        k = _fq_deg(a) - _fq_deg(b)
        c = F.cmul(a[-1], inv_lead)
        q[k] = F.cadd(q[k], c)
        for j in range(len(b)):
            a[k + j] = F.csub(a[k + j], F.cmul(c, b[j]))
        a = _fq_norm(F, a)
    return _fq_norm(F, q), a


def _fq_monic(F, a):
    if not a:
        return a
    return _fq_scale(F, a, F.cinv(a[-1]))


def _fq_gcd(F, a, b):
    a, b = a[:], b[:]
    while b:
        _, r = _fq_divmod(F, a, b)
        a, b = b, r
    return _fq_monic(F, a)


def _fq_deriv(F, a):
    out = []
    for i in range(1, len(a)):
        out.append(F.cmul(a[i], F.from_int(i)))
    return _fq_norm(F, out)


def _fq_pth_root(F, a):
    """Root of a polynomial that is a p-th power (all exponents divisible by p)."""
    p = F.p
    out = []
    for i in range(0, len(a), p):
        out.append(F.cfrob(a[i], -1))
    for i, c in enumerate(a):
        if i % p != 0 and c != F.zero():
            raise NoRoot("polynomial is not a p-th power")
    return _fq_norm(F, out)


def _fq_pow(F, a, n):
    r = [F.one()]
    b = a
    while n:
        if n & 1:
            r = _fq_mul(F, r, b)
        b = _fq_mul(F, b, b)
        n >>= 1
    return r


def fq_radical(F: FiniteFieldSpec, g: list[FieldCoeff]) -> list[FieldCoeff]:
    """Squarefree radical of a monic g, char-p aware (handles g' = 0)."""
    if _fq_deg(g) <= 0:
        return [F.one()]
    gp = _fq_deriv(F, g)
    if not gp:
        return fq_radical(F, _fq_pth_root(F, g))
    d = _fq_gcd(F, g, gp)
    if _fq_deg(d) == 0:
        return _fq_monic(F, g)
    w, r = _fq_divmod(F, g, d)
    assert not r
    y = d
    while True:
        cg = _fq_gcd(F, y, w)
        if _fq_deg(cg) == 0:
            break
        y, r = _fq_divmod(F, y, cg)
        assert not r
    # y = product of factors whose multiplicity is divisible by p
    if _fq_deg(y) == 0:
        return _fq_monic(F, w)
    return _fq_monic(F, _fq_mul(F, w, fq_radical(F, y)))


def fq_multiplicity_layers(F: FiniteFieldSpec, g: list[FieldCoeff]) -> list[tuple[int, list[FieldCoeff]]]:
    """[(k, A_k)] with g = prod A_k^k, A_k squarefree and pairwise coprime."""
    g = _fq_monic(F, g)
    rad = fq_radical(F, g)
    layers = []
    prev = [F.one()]
    k = 0
    acc = [F.one()]
    while _fq_deg(acc) < _fq_deg(g):
        k += 1
        acc = _fq_gcd(F, g, _fq_pow(F, rad, k))
        step, r = _fq_divmod(F, acc, prev)
        assert not r
        layers.append((k, step))  # step = prod of factors with multiplicity >= k
        prev = acc
    out = []
    for i, (k, step) in enumerate(layers):
        nxt = layers[i + 1][1] if i + 1 < len(layers) else [F.one()]
        exact, r = _fq_divmod(F, step, nxt)
        assert not r
        if _fq_deg(exact) > 0:
            out.append((k, exact))
    return out


# ---------------------------------------------------------------------------
# reducedness certificate (derivative/gcd route, nilpotent witness on failure)


@dataclass(frozen=True)
class ReducednessReport:
    reduced: bool
    witness: RingElement | None
    nilpotency: int | None


def is_reduced_univariate(ring: UnivariateQuotient) -> ReducednessReport:
    """Decide whether F_q[T]/(g) is reduced; if not, exhibit a nilpotent.

    The witness is the class of the radical of g, which is nonzero of degree
    < deg g and satisfies witness^(deg g) = 0.
    """
    F = ring.base
    g = list(ring.modulus)
    rad = fq_radical(F, g)
    if _fq_deg(rad) == _fq_deg(g):
        return ReducednessReport(True, None, None)
    d: dict = {}
    for k, c in enumerate(rad):
        if c != F.zero():
            _reduce_key(ring, k, c, d)
    w = _mk(ring, d)
    # smallest k with witness^k = 0, bounded by deg g
    k = 1
    acc = w
    while not acc.is_zero():
        acc = mul(acc, w)
        k += 1
        if k > ring.degree + 1:
            raise AssertionError("radical witness failed to nilpotentiate")
    return ReducednessReport(False, w, k)


# ---------------------------------------------------------------------------
# monomial intersection certificates (desk colon-ideal checks)


@dataclass(frozen=True)
class IntersectionWitness:
    status: str  # "member" | "refuted" | "not_applicable"
    element: RingElement | None
    note: str


def _support(x: RingElement) -> set[int]:
    vs: set[int] = set()
    for key, _ in x.terms:
        for i, e in enumerate(key):
            if e != 0:
                vs.add(i)
    return vs


def intersection_witness(f: RingElement, g: RingElement, a: RingElement,
                         b: RingElement, m: int, n: int) -> IntersectionWitness:
    """Certify a*g^n = b*f^m and produce h with h*f^m = a, h*g^n = b.

    Only handles the monomial regular-sequence shape: f and g monomials on
    disjoint variable sets in a polynomial (non-Laurent, quotient-free)
    FracLaurentRing.  Everything else is reported not_applicable.
    """
    ring = f.ring
    if not isinstance(ring, FracLaurentRing) or ring.laurent or ring.quotient:
        return IntersectionWitness("not_applicable", None,
                                  "needs a quotient-free polynomial ring")
    if any(x.ring != ring for x in (g, a, b)):
        raise MismatchError("all inputs must share one ring")
    if not (is_monomial(f) and is_monomial(g)):
        return IntersectionWitness("not_applicable", None, "f and g must be monomials")
    sf, sg = _support(f), _support(g)
    if not sf or not sg or sf & sg:
        return IntersectionWitness(
            "not_applicable", None,
            "monomial criterion needs disjoint nonempty supports")
    if m < 1 or n < 1:
        return IntersectionWitness("not_applicable", None, "exponents must be >= 1")
    fm = pow_int(f, m)
    gn = pow_int(g, n)
    if mul(a, gn) != mul(b, fm):
        return IntersectionWitness("refuted", None, "a*g^n != b*f^m")
    # divide a by f^m termwise
    F = ring.base
    fkey, fc = fm.terms[0]
    fcinv = F.cinv(fc)
    d: dict = {}
    for key, c in a.terms:
        new_key = tuple(e - fe for e, fe in zip(key, fkey))
        if any(e < 0 for e in new_key):
            return IntersectionWitness("refuted", None,
                                      "termwise division by f^m leaves the ring")
        _reduce_key(ring, new_key, F.cmul(c, fcinv), d)
    h = _mk(ring, d)
    if mul(h, fm) != a or mul(h, gn) != b:
        return IntersectionWitness("refuted", None, "candidate failed re-verification")
    return IntersectionWitness("member", h, "h*f^m = a and h*g^n = b hold exactly")


# ---------------------------------------------------------------------------
# descriptor and expression grammar

_TOKEN_RE = re.compile(r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
                       r"|(?P<sym>[()=+\-*^,/]))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos = 0
    out = []
    while pos < len(text):
        mt = _TOKEN_RE.match(text, pos)
        if not mt or mt.end() == pos:
            if text[pos:].strip():
                raise SpecParseError(f"bad character at {text[pos:pos + 10]!r}")
            break
        pos = mt.end()
        if mt.group("int") is not None:
            out.append(("int", mt.group("int")))
        elif mt.group("ident") is not None:
            out.append(("ident", mt.group("ident")))
        else:
            out.append(("sym", mt.group("sym")))
    return out


class _Tokens:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def next(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, kind, val=None):
        k, v = self.next()
        if k != kind or (val is not None and v != val):
            raise SpecParseError(f"expected {val or kind}, got {v!r}")
        return v

    def at_end(self):
        return self.i >= len(self.toks)


def _expect_kv_int(ts: _Tokens, key: str) -> int:
    k, v = ts.next()
    if k != "ident" or v != key:
        raise SpecParseError(f"expected {key}=..., got {v!r}")
    ts.expect("sym", "=")
    sign = 1
    if ts.peek() == ("sym", "-"):
        ts.next()
        sign = -1
    return sign * int(ts.expect("int"))


def make_ring(text: str) -> Ring:
    """Parse a ring descriptor: ``ff ...``, ``frac ...`` or ``uq ...``."""
    ts = _Tokens(_tokenize(text))
    ring = _parse_ring(ts)
    if not ts.at_end():
        raise SpecParseError(f"trailing junk after descriptor: {ts.peek()[1]!r}")
    return ring


def _parse_ring(ts: _Tokens) -> Ring:
    kind = ts.expect("ident")
    if kind == "ff":
        p = _expect_kv_int(ts, "p")
        e = _expect_kv_int(ts, "e")
        modulus = None
        gen_name = "u"
        if ts.peek() == ("ident", "modulus"):
            ts.next()
            ts.expect("sym", "=")
            modulus, name = _parse_field_poly(ts, p)
            if name is not None:
                gen_name = name
        return make_field(p, e, modulus, gen_name)
    if kind == "frac":
        k, v = ts.next()
        if (k, v) != ("ident", "base"):
            raise SpecParseError("frac needs base=(...)")
        ts.expect("sym", "=")
        ts.expect("sym", "(")
        base = _parse_ring(ts)
        if not isinstance(base, FiniteFieldSpec):
            raise SpecParseError("frac base must be a finite field")
        ts.expect("sym", ")")
        k, v = ts.next()
        if (k, v) != ("ident", "vars"):
            raise SpecParseError("frac needs vars=...")
        ts.expect("sym", "=")
        names = [ts.expect("ident")]
        while ts.peek() == ("sym", ","):
            ts.next()
            names.append(ts.expect("ident"))
        depth_p = _expect_kv_int(ts, "depth_p")
        depth_2 = _expect_kv_int(ts, "depth_2")
        k, v = ts.next()
        if (k, v) != ("ident", "laurent"):
            raise SpecParseError("frac needs laurent=true|false")
        ts.expect("sym", "=")
        flag = ts.expect("ident")
        if flag not in ("true", "false"):
            raise SpecParseError("laurent must be true or false")
        laurent = flag == "true"
        quotient: list[tuple[Fraction, ...]] = []
        if ts.peek() == ("ident", "mod"):
            ts.next()
            ts.expect("sym", "=")
            ring0 = FracLaurentRing(base, tuple(names), depth_p, depth_2, laurent, ())
            while True:
                mexp = _parse_monomial_exps(ts, ring0)
                quotient.append(mexp)
                if ts.peek() == ("sym", ","):
                    ts.next()
                    continue
                break
        if depth_p < 0 or depth_2 < 0:
            raise SpecParseError("depths must be >= 0")
        ring = FracLaurentRing(base, tuple(names), depth_p, depth_2, laurent,
                               tuple(quotient))
        if quotient and laurent:
            raise SpecParseError("a monomial quotient needs laurent=false "
                                 "(monomials are units in a Laurent ring)")
        b = ring.lattice_b
        for gen in quotient:
            if all(e == 0 for e in gen):
                raise SpecParseError("quotient generator must be non-constant")
            for e in gen:
                if b % e.denominator != 0 or e < 0:
                    raise LatticeError(f"quotient exponent {e} outside the lattice")
        if len(set(names)) != len(names):
            raise SpecParseError("duplicate variable names")
        return ring
    if kind == "uq":
        k, v = ts.next()
        if (k, v) != ("ident", "base"):
            raise SpecParseError("uq needs base=(...)")
        ts.expect("sym", "=")
        ts.expect("sym", "(")
        base = _parse_ring(ts)
        if not isinstance(base, FiniteFieldSpec):
            raise SpecParseError("uq base must be a finite field")
        ts.expect("sym", ")")
        k, v = ts.next()
        if (k, v) != ("ident", "var"):
            raise SpecParseError("uq needs var=...")
        ts.expect("sym", "=")
        var = ts.expect("ident")
        if var == base.gen_name and base.e > 1:
            raise SpecParseError("quotient variable collides with the field generator")
        k, v = ts.next()
        if (k, v) != ("ident", "modulus"):
            raise SpecParseError("uq needs modulus=...")
        ts.expect("sym", "=")
        coeffs = _parse_uq_modulus(ts, base, var)
        if len(coeffs) < 2:
            raise SpecParseError("uq modulus must have degree >= 1")
        if coeffs[-1] != base.one():
            raise SpecParseError("uq modulus must be monic")
        return UnivariateQuotient(base, var, tuple(coeffs))
    raise SpecParseError(f"unknown ring kind {kind!r}")


def _parse_field_poly(ts: _Tokens, p: int) -> tuple[tuple[int, ...], str | None]:
    """Parse a modulus like u^2+u+1 into F_p coefficients (low-to-high)."""
    coeffs: dict[int, int] = {}
    name: str | None = None
    sign = 1
    while True:
        k, v = ts.peek()
        c, d = 1, 0
        if k == "int":
            ts.next()
            c = int(v)
            if ts.peek() == ("sym", "*"):
                ts.next()
                k2, v2 = ts.next()
                if k2 != "ident":
                    raise SpecParseError("expected generator symbol")
                if name is None:
                    name = v2
                elif name != v2:
                    raise SpecParseError("mixed generator symbols in modulus")
                d = 1
                if ts.peek() == ("sym", "^"):
                    ts.next()
                    d = int(ts.expect("int"))
        elif k == "ident":
            ts.next()
            if name is None:
                name = v
            elif name != v:
                raise SpecParseError("mixed generator symbols in modulus")
            d = 1
            if ts.peek() == ("sym", "^"):
                ts.next()
                d = int(ts.expect("int"))
        else:
            raise SpecParseError("bad modulus term")
        coeffs[d] = (coeffs.get(d, 0) + sign * c) % p
        k, v = ts.peek()
        if (k, v) == ("sym", "+"):
            ts.next()
            sign = 1
            continue
        if (k, v) == ("sym", "-"):
            ts.next()
            sign = -1
            continue
        break
    deg = max(coeffs)
    return tuple(coeffs.get(i, 0) for i in range(deg + 1)), name


def _parse_uq_modulus(ts: _Tokens, base: FiniteFieldSpec, var: str) -> list[FieldCoeff]:
    """Parse g(T) with coefficients in the base field."""
    tmp_ring = UnivariateQuotient(base, var, (base.zero(),) * 512 + (base.one(),))
    expr = _parse_expr(ts, tmp_ring)
    return _uq_poly(expr)


def _parse_monomial_exps(ts: _Tokens, ring: FracLaurentRing) -> tuple[Fraction, ...]:
    elt = _parse_expr(ts, ring)
    if not is_monomial(elt) or elt.terms[0][1] != ring.base.one():
        raise SpecParseError("quotient generators must be coefficient-1 monomials")
    return elt.terms[0][0]


# expression evaluation ------------------------------------------------------


def evaluate(ring: Ring, text: str) -> RingElement:
    """Evaluate an element expression (ints, symbols, + - *, ^int, ^(rational))."""
    ts = _Tokens(_tokenize(text))
    v = _parse_expr(ts, ring)
    if not ts.at_end():
        raise SpecParseError(f"trailing junk in expression: {ts.peek()[1]!r}")
    return v


def _parse_expr(ts: _Tokens, ring: Ring) -> RingElement:
    v = _parse_term(ts, ring)
    while True:
        k, s = ts.peek()
        if (k, s) == ("sym", "+"):
            ts.next()
            v = add(v, _parse_term(ts, ring))
        elif (k, s) == ("sym", "-"):
            ts.next()
            v = sub(v, _parse_term(ts, ring))
        else:
            break
    return v


def _parse_term(ts: _Tokens, ring: Ring) -> RingElement:
    v = _parse_unary(ts, ring)
    while ts.peek() == ("sym", "*"):
        ts.next()
        v = mul(v, _parse_unary(ts, ring))
    return v


def _parse_unary(ts: _Tokens, ring: Ring) -> RingElement:
    if ts.peek() == ("sym", "-"):
        ts.next()
        return neg(_parse_unary(ts, ring))
    return _parse_power(ts, ring)


def _parse_power(ts: _Tokens, ring: Ring) -> RingElement:
    base_v = _parse_atom(ts, ring)
    if ts.peek() == ("sym", "^"):
        ts.next()
        k, v = ts.peek()
        if k == "int":
            ts.next()
            return pow_int(base_v, int(v))
        if (k, v) == ("sym", "("):
            ts.next()
            sign = 1
            if ts.peek() == ("sym", "-"):
                ts.next()
                sign = -1
            num = int(ts.expect("int"))
            den = 1
            if ts.peek() == ("sym", "/"):
                ts.next()
                den = int(ts.expect("int"))
            ts.expect("sym", ")")
            return pow_fraction(base_v, Fraction(sign * num, den))
        raise SpecParseError("exponent must be an integer or (rational)")
    return base_v


def _parse_atom(ts: _Tokens, ring: Ring) -> RingElement:
    k, v = ts.next()
    if k == "int":
        return from_int(ring, int(v))
    if k == "ident":
        return variable(ring, v)
    if (k, v) == ("sym", "("):
        inner = _parse_expr(ts, ring)
        ts.expect("sym", ")")
        return inner
    raise SpecParseError(f"unexpected token {v!r} in expression")


# canonical printing ---------------------------------------------------------


def format_coeff(F: FiniteFieldSpec, c: FieldCoeff) -> str:
    if F.e == 1:
        return str(c[0])
    parts = []
    for d in range(F.e - 1, -1, -1):
        v = c[d]
        if v == 0:
            continue
        if d == 0:
            parts.append(str(v))
        else:
            head = "" if v == 1 else f"{v}*"
            tail = F.gen_name if d == 1 else f"{F.gen_name}^{d}"
            parts.append(head + tail)
    return "+".join(parts) if parts else "0"


def _format_exp(name: str, e) -> str:
    if isinstance(e, Fraction) and e.denominator == 1:
        e = e.numerator
    if e == 1:
        return name
    if isinstance(e, int):
        if e < 0:
            return f"{name}^({e})"
        return f"{name}^{e}"
    if e.numerator < 0:
        return f"{name}^(-{-e.numerator}/{e.denominator})"
    return f"{name}^({e.numerator}/{e.denominator})"


def format_element(x: RingElement) -> str:
    ring = x.ring
    F = base_field(ring)
    if not x.terms:
        return "0"
    parts = []
    for key, c in x.terms:
        if isinstance(ring, FiniteFieldSpec):
            mono = ""
        elif isinstance(ring, FracLaurentRing):
            factors = [
                _format_exp(ring.variables[i], e)
                for i, e in enumerate(key) if e != 0
            ]
            mono = "*".join(factors)
        else:
            mono = "" if key == 0 else _format_exp(ring.var, key)
        cs = format_coeff(F, c)
        if not mono:
            parts.append(cs)
        elif c == F.one():
            parts.append(mono)
        else:
            if "+" in cs:
                cs = f"({cs})"
            parts.append(f"{cs}*{mono}")
    return "+".join(parts)


def canonical_descriptor(ring: Ring) -> str:
    if isinstance(ring, FiniteFieldSpec):
        if ring.e == 1:
            return f"ff p={ring.p} e=1"
        mod_parts = []
        for d in range(ring.e, -1, -1):
            v = ring.modulus[d]
            if v == 0:
                continue
            if d == 0:
                mod_parts.append(str(v))
            else:
                head = "" if v == 1 else f"{v}*"
                tail = ring.gen_name if d == 1 else f"{ring.gen_name}^{d}"
                mod_parts.append(head + tail)
        return f"ff p={ring.p} e={ring.e} modulus={'+'.join(mod_parts)}"
    if isinstance(ring, FracLaurentRing):
        s = (f"frac base=({canonical_descriptor(ring.base)}) "
             f"vars={','.join(ring.variables)} depth_p={ring.depth_p} "
             f"depth_2={ring.depth_2} laurent={'true' if ring.laurent else 'false'}")
        if ring.quotient:
            monos = []
            for gen in ring.quotient:
                factors = [_format_exp(ring.variables[i], e)
                           for i, e in enumerate(gen) if e != 0]
                monos.append("*".join(factors) if factors else "1")
            s += f" mod={','.join(monos)}"
        return s
    parts = []
    for d in range(ring.degree, -1, -1):
        c = ring.modulus[d]
        if c == ring.base.zero():
            continue
        if d == 0:
            parts.append(format_coeff(ring.base, c))
        else:
            mono = ring.var if d == 1 else f"{ring.var}^{d}"
            if c == ring.base.one():
                parts.append(mono)
            else:
                cs = format_coeff(ring.base, c)
                if "+" in cs:
                    cs = f"({cs})"
                parts.append(f"{cs}*{mono}")
    return (f"uq base=({canonical_descriptor(ring.base)}) var={ring.var} "
            f"modulus={'+'.join(parts)}")


def _fq_poly_invmod(F, a, mod):
    """Inverse of a modulo mod via extended Euclid, or None."""
    r0, r1 = mod[:], a[:]
    s0, s1 = [], [F.one()]
    while r1:
        q, r = _fq_divmod(F, r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _fq_add(F, s0, _fq_scale(F, _fq_mul(F, q, s1), F.from_int(-1)))
    if _fq_deg(r0) != 0:
        return None
    c = F.cinv(r0[0])
    return _fq_scale(F, s0, c)


# random elements for property tests ----------------------------------------


def random_coeff(F: FiniteFieldSpec, rng) -> FieldCoeff:
    return tuple(rng.randrange(F.p) for _ in range(F.e))


def random_element(ring: Ring, rng, max_terms: int = 3, exp_bound: int = 3,
                   denom_depth: int = 0, allow_zero: bool = True) -> RingElement:
    """Random canonical element; denom_depth controls p-power denominators."""
    F = base_field(ring)
    if isinstance(ring, FiniteFieldSpec):
        c = random_coeff(F, rng)
        if not allow_zero and c == F.zero():
            c = F.one()
        return from_coeff(ring, c)
    d: dict = {}
    nterms = rng.randint(0 if allow_zero else 1, max_terms)
    for _ in range(nterms):
        if isinstance(ring, FracLaurentRing):
            key = []
            for _ in ring.variables:
                num = rng.randint(0 if not ring.laurent else -exp_bound, exp_bound)
                den = F.p ** rng.randint(0, min(denom_depth, ring.depth_p))
                ex = Fraction(num, den)
                if not ring.laurent and ex < 0:
                    ex = -ex
                key.append(ex)
            try:
                _reduce_key(ring, tuple(key), random_coeff(F, rng), d)
            except LatticeError:
                continue
        else:
            k = rng.randrange(ring.degree)
            _reduce_key(ring, k, random_coeff(F, rng), d)
    out = _mk(ring, d)
    if not allow_zero and out.is_zero():
        return one(ring)
    return out
