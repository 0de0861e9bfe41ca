"""Ramified Witt vectors: the free-basis tensor model over an Eisenstein base.

An element is stored as coordinates r_0..r_{f-1} on the basis 1, pi, ...,
pi^(f-1), each r_i a length-n p-typical Witt vector over the coefficient ring
A.  The uniformizer satisfies E(pi) = 0 for a monic Eisenstein polynomial
E(X) = X^f + e_{f-1} X^{f-1} + ... + e_0 over W_n(F_q), so multiplication is
polynomial convolution followed by reduction of pi^f = -sum e_i pi^i.

Precision bookkeeping is zealous: every element carries the number N of
certified Teichmueller pi-digits, operations state their output N explicitly,
and division by pi costs exactly one digit.  The internal Witt length is
n = ceil(N_max/f) + 1: the +1 guard coordinate absorbs the Witt-coordinate
lost by each divide_by_p, so an untrusted top coordinate only ever influences
pi-digits at order >= (n-1)*f >= N.  Equality is equality of canonical digit
expansions at the shared precision, never raw coordinate comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import base_rings as br
from . import witt_core as wc
from .base_rings import FiniteFieldSpec, Ring, RingElement
from .errors import (
    MismatchError,
    NoConvergence,
    NotAUnit,
    NotDivisible,
    NotEisenstein,
    SpecParseError,
)


@dataclass(frozen=True)
class RamifiedBase:
    p: int
    e: int
    f: int
    level: int  # internal Witt length n of every coordinate
    field: FiniteFieldSpec  # F_q, q = p^e
    eis: tuple  # e_0..e_{f-1}, WittVectors over field, length = level

    @property
    def q(self) -> int:
        return self.p ** self.e

    @property
    def default_precision(self) -> int:
        # the guard margin: (level-1)*f pi-digits are certifiable
        return (self.level - 1) * self.f


def make_ramified_base(p: int, e: int, f: int, coeffs, level: int) -> RamifiedBase:
    """Validated Eisenstein base for E(X) = X^f + sum coeffs[i] X^i.

    Each coefficient may be an int (mapped through W_n(F_q)), or a WittVector
    over F_q of length `level`.  Raises NotEisenstein when a coefficient is
    not divisible by p or the constant term is not p times a unit.
    """
    if f < 1:
        raise NotEisenstein("degree f must be >= 1")
    if level < 2:
        raise SpecParseError("working level must be >= 2")
    if len(coeffs) != f:
        raise SpecParseError(f"expected {f} coefficients e_0..e_{f - 1}")
    field = br.make_field(p, e)
    eis = []
    for i, c in enumerate(coeffs):
        if isinstance(c, int):
            v = wc.int_to_witt(c, field, level)
        elif isinstance(c, wc.WittVector):
            if c.ring != field or c.length != level:
                raise MismatchError(f"coefficient e_{i} has the wrong ring or length")
            v = c
        else:
            raise SpecParseError(f"bad Eisenstein coefficient {c!r}")
        if not v.coords[0].is_zero():
            raise NotEisenstein(f"coefficient e_{i} is not divisible by p")
        eis.append(v)
    if eis[0].coords[1].is_zero():
        raise NotEisenstein(
            "constant term lies in the square of the maximal ideal")
    return RamifiedBase(p, e, f, level, field, tuple(eis))


def parse_eisenstein(text: str):
    """Parse E as a monic integer polynomial in X; returns (f, [e_0..e_{f-1}])."""
    toks = br._tokenize(text)
    ts = br._Tokens(toks)
    coeffs: dict[int, int] = {}
    sign = 1
    while True:
        k, v = ts.peek()
        c, d = 1, 0
        if k == "int":
            ts.next()
            c = int(v)
            if ts.peek() == ("sym", "*"):
                ts.next()
                name = ts.expect("ident")
                if name != "X":
                    raise SpecParseError("Eisenstein variable must be X")
                d = 1
                if ts.peek() == ("sym", "^"):
                    ts.next()
                    d = int(ts.expect("int"))
        elif k == "ident":
            ts.next()
            if v != "X":
                raise SpecParseError("Eisenstein variable must be X")
            d = 1
            if ts.peek() == ("sym", "^"):
                ts.next()
                d = int(ts.expect("int"))
        else:
            raise SpecParseError("bad term in Eisenstein polynomial")
        coeffs[d] = coeffs.get(d, 0) + sign * c
        k, v = ts.peek()
        if (k, v) == ("sym", "+"):
            ts.next()
            sign = 1
        elif (k, v) == ("sym", "-"):
            ts.next()
            sign = -1
        else:
            break
    if not ts.at_end():
        raise SpecParseError("trailing junk in Eisenstein polynomial")
    fdeg = max(coeffs)
    if coeffs[fdeg] != 1:
        raise NotEisenstein("Eisenstein polynomial must be monic")
    return fdeg, [coeffs.get(i, 0) for i in range(fdeg)]


@dataclass(frozen=True, eq=False)
class RamifiedWitt:
    base: RamifiedBase
    ring: Ring
    coords: tuple  # f WittVectors over ring, common length base.level
    precision: int

    def __eq__(self, other):
        if not isinstance(other, RamifiedWitt):
            return NotImplemented
        return rw_equal(self, other)

    def __add__(self, other):
        return rw_arith("add", self, other)

    def __sub__(self, other):
        return rw_arith("add", self, rw_arith("neg", other))

    def __mul__(self, other):
        return rw_arith("mul", self, other)

    def __neg__(self):
        return rw_arith("neg", self)

    def __str__(self) -> str:
        inner = " | ".join(str(w) for w in self.coords)
        return f"RW[N={self.precision}]{{ {inner} }}"


@dataclass(frozen=True)
class DigitExpansion:
    base: RamifiedBase
    ring: Ring
    digits: tuple  # RingElements of ring

    def __str__(self) -> str:
        inner = ";".join(br.format_element(d) for d in self.digits)
        return f"DIGITS[{len(self.digits)}]{{{inner}}}"


# per-(base, ring) data: Eisenstein coefficients mapped into W_n(A) and the
# negated inverse unit -(e_0/p)^(-1)
_CTX: dict = {}


def _check_ring(base: RamifiedBase, ring: Ring) -> None:
    F = br.base_field(ring)
    if (F.p, F.e, F.modulus) != (base.field.p, base.field.e, base.field.modulus):
        raise MismatchError("coefficient ring does not extend the base's F_q")


def _ctx(base: RamifiedBase, ring: Ring):
    key = (base, ring)
    got = _CTX.get(key)
    if got is not None:
        return got
    _check_ring(base, ring)

    def map_witt(w):
        return wc.WittVector(ring, tuple(
            br.from_coeff(ring, c.terms[0][1]) if c.terms else br.zero(ring)
            for c in w.coords))

    eis = tuple(map_witt(v) for v in base.eis)
    u = wc.divide_by_p_fixed(base.eis[0])
    neg_inv_u = wc.witt_neg(wc.witt_inv_unit(u))
    ctx = (eis, map_witt(neg_inv_u))
    _CTX[key] = ctx
    return ctx


def rw_zero(base: RamifiedBase, ring: Ring, precision: int | None = None) -> RamifiedWitt:
    _check_ring(base, ring)
    n = base.level
    z = wc.witt_zero(ring, n)
    return RamifiedWitt(base, ring, (z,) * base.f,
                        base.default_precision if precision is None else precision)


def rw_one(base: RamifiedBase, ring: Ring, precision: int | None = None) -> RamifiedWitt:
    z = rw_zero(base, ring, precision)
    coords = (wc.witt_one(ring, base.level),) + z.coords[1:]
    return RamifiedWitt(base, ring, coords, z.precision)


def rw_from_int(m: int, base: RamifiedBase, ring: Ring,
                precision: int | None = None) -> RamifiedWitt:
    z = rw_zero(base, ring, precision)
    coords = (wc.int_to_witt(m, ring, base.level),) + z.coords[1:]
    return RamifiedWitt(base, ring, coords, z.precision)


def rw_pi(base: RamifiedBase, ring: Ring, precision: int | None = None) -> RamifiedWitt:
    """The uniformizer: basis vector pi (for f = 1, the element -e_0 = p*unit)."""
    z = rw_zero(base, ring, precision)
    if base.f == 1:
        eis, _ = _ctx(base, ring)
        return RamifiedWitt(base, ring, (wc.witt_neg(eis[0]),), z.precision)
    coords = (z.coords[0], wc.witt_one(ring, base.level)) + z.coords[2:]
    return RamifiedWitt(base, ring, coords, z.precision)


def teich_embed(a: RingElement, base: RamifiedBase,
                precision: int | None = None) -> RamifiedWitt:
    """Teichmueller section of reduce_mod_pi: a -> [a] in the zeroth slot."""
    z = rw_zero(base, a.ring, precision)
    coords = (wc.teichmuller(a, base.level),) + z.coords[1:]
    return RamifiedWitt(base, a.ring, coords, z.precision)


def _match(x: RamifiedWitt, y: RamifiedWitt) -> None:
    if x.base != y.base or x.ring != y.ring:
        raise MismatchError("ramified operands over different bases or rings")


def rw_arith(op: str, x: RamifiedWitt, y: RamifiedWitt | None = None) -> RamifiedWitt:
    """Ring operation; op in {add, mul, neg, inv}.  Precision: min of inputs."""
    if op == "neg":
        return RamifiedWitt(x.base, x.ring,
                            tuple(wc.witt_neg(r) for r in x.coords), x.precision)
    if op == "inv":
        return _rw_inv(x)
    if y is None:
        raise SpecParseError(f"op {op!r} needs two operands")
    _match(x, y)
    prec = min(x.precision, y.precision)
    if op == "add":
        coords = tuple(wc.witt_add(a, b) for a, b in zip(x.coords, y.coords))
        return RamifiedWitt(x.base, x.ring, coords, prec)
    if op == "mul":
        return _rw_mul(x, y, prec)
    raise SpecParseError(f"unknown op {op!r}")


def rw_add(x, y):
    return rw_arith("add", x, y)


def rw_sub(x, y):
    return rw_arith("add", x, rw_arith("neg", y))


def rw_mul(x, y):
    return rw_arith("mul", x, y)


def rw_neg(x):
    return rw_arith("neg", x)


def rw_inv(x):
    return rw_arith("inv", x)


def _rw_mul(x: RamifiedWitt, y: RamifiedWitt, prec: int) -> RamifiedWitt:
    f = x.base.f
    ring = x.ring
    n = x.base.level
    eis, _ = _ctx(x.base, ring)
    zero = wc.witt_zero(ring, n)
    s = [zero] * (2 * f - 1)
    for i, a in enumerate(x.coords):
        if wc.witt_ord(a) is None:
            continue
        for j, b in enumerate(y.coords):
            if wc.witt_ord(b) is None:
                continue
            s[i + j] = wc.witt_add(s[i + j], wc.witt_mul(a, b))
    # reduce pi^k for k >= f via pi^f = -sum e_j pi^j
    for k in range(2 * f - 2, f - 1, -1):
        c = s[k]
        if wc.witt_ord(c) is None:
            continue
        s[k] = zero
        for j in range(f):
            if wc.witt_ord(eis[j]) is None:
                continue
            s[k - f + j] = wc.witt_sub(s[k - f + j], wc.witt_mul(c, eis[j]))
    return RamifiedWitt(x.base, ring, tuple(s[:f]), prec)


def rw_mul_pi(x: RamifiedWitt) -> RamifiedWitt:
    """Fast multiply by pi: shift the basis coordinates and fold the overflow."""
    f = x.base.f
    eis, _ = _ctx(x.base, x.ring)
    top = x.coords[f - 1]
    out = []
    for j in range(f):
        prev = x.coords[j - 1] if j > 0 else wc.witt_zero(x.ring, x.base.level)
        if wc.witt_ord(top) is None or wc.witt_ord(eis[j]) is None:
            out.append(prev)
        else:
            out.append(wc.witt_sub(prev, wc.witt_mul(top, eis[j])))
    return RamifiedWitt(x.base, x.ring, tuple(out), x.precision)


def _rw_inv(x: RamifiedWitt) -> RamifiedWitt:
    a0 = reduce_mod_pi(x)
    try:
        seed = br.invert(a0)
    except NotAUnit as exc:
        raise NotAUnit(f"not a unit mod pi: {exc}") from exc
    y = teich_embed(seed, x.base, x.precision)
    one = rw_one(x.base, x.ring, x.precision)
    two = rw_add(one, one)
    steps = 1
    target = max(x.precision, 1)
    correct = 1  # Teichmueller seed is correct mod pi
    while correct < target:
        y = rw_mul(y, rw_sub(two, rw_mul(x, y)))
        correct *= 2
        steps += 1
        if steps > 40:
            raise NoConvergence("inversion failed to stabilize")
    return RamifiedWitt(x.base, x.ring, y.coords, x.precision)


def frobenius_pi(x: RamifiedWitt, k: int = 1) -> RamifiedWitt:
    """The q-Witt-Frobenius: e*k iterated Frobenius on every coordinate."""
    ek = x.base.e * k
    coords = tuple(wc.frobenius_map(r, ek) for r in x.coords)
    return RamifiedWitt(x.base, x.ring, coords, x.precision)


def reduce_mod_pi(x: RamifiedWitt) -> RingElement:
    """The residue map onto A: zeroth Witt coordinate of the zeroth slot."""
    return x.coords[0].coords[0]


def divide_by_pi(x: RamifiedWitt) -> RamifiedWitt:
    """The unique y with pi*y = x mod pi^N; precision drops by exactly one."""
    if not reduce_mod_pi(x).is_zero():
        raise NotDivisible("element is not divisible by pi (nonzero residue)")
    if x.precision < 1:
        raise NotDivisible("no certified digits left to divide")
    f = x.base.f
    eis, neg_inv_u = _ctx(x.base, x.ring)
    y_top = wc.witt_mul(neg_inv_u, wc.divide_by_p_fixed(x.coords[0]))
    out = [None] * f
    out[f - 1] = y_top
    for i in range(f - 1, 0, -1):
        if wc.witt_ord(eis[i]) is None or wc.witt_ord(y_top) is None:
            out[i - 1] = x.coords[i]
        else:
            out[i - 1] = wc.witt_add(x.coords[i], wc.witt_mul(eis[i], y_top))
    return RamifiedWitt(x.base, x.ring, tuple(out), x.precision - 1)


def rw_ord(x: RamifiedWitt, limit: int | None = None) -> int | None:
    """pi-adic order up to the certified precision; None when 0 mod pi^N.

    Walks the digit expansion but stops at the first nonzero digit, so the
    common case (small order) costs a handful of divisions.
    """
    bound = x.precision if limit is None else min(limit, x.precision)
    cur = x
    for i in range(bound):
        if not reduce_mod_pi(cur).is_zero():
            return i
        cur = divide_by_pi(cur)
    return None


def rw_is_zero(x: RamifiedWitt) -> bool:
    return rw_ord(x) is None


def rw_equal(x: RamifiedWitt, y: RamifiedWitt, precision: int | None = None) -> bool:
    """Equality mod pi^min(Nx, Ny) via canonical digit expansion."""
    if x.base != y.base or x.ring != y.ring:
        return False
    prec = min(x.precision, y.precision)
    if precision is not None:
        prec = min(prec, precision)
    return rw_ord(rw_sub(x, y), prec) is None


def digit_expand(x: RamifiedWitt, digits: int | None = None) -> DigitExpansion:
    """Greedy Teichmueller digit extraction: a_i = residue, then divide by pi."""
    want = x.precision if digits is None else digits
    if want > x.precision:
        raise NotDivisible(
            f"requested {want} digits but only {x.precision} are certified")
    out = []
    cur = x
    for _ in range(want):
        a = reduce_mod_pi(cur)
        out.append(a)
        cur = divide_by_pi(rw_sub(cur, teich_embed(a, x.base, cur.precision)))
    return DigitExpansion(x.base, x.ring, tuple(out))


def digits_assemble(d: DigitExpansion) -> RamifiedWitt:
    """Sum [a_i] pi^i by a Horner walk from the top digit down."""
    acc = rw_zero(d.base, d.ring, len(d.digits))
    for a in reversed(d.digits):
        acc = rw_mul_pi(acc)
        acc = rw_add(acc, teich_embed(a, d.base, acc.precision))
    return RamifiedWitt(d.base, d.ring, acc.coords, len(d.digits))


# ---------------------------------------------------------------------------
# the polynomial-model embedding and twisted products


def embed_expr(base: RamifiedBase, ring: Ring, text: str,
               precision: int | None = None) -> RamifiedWitt:
    """Embed a V-polynomial expression: variables of A, `pi`, and integers.

    Every monomial maps to the Teichmueller lift of its residue, pi maps to
    pi, integer constants go through W_n; sums and products are then formed in
    the ramified ring, which makes the map a homomorphism by construction.
    The multiplicativity across separate embeds is a theorem checked by the
    test suite, not by this function.
    """
    ts = br._Tokens(br._tokenize(text))
    val = _embed_expr(ts, base, ring, precision)
    if not ts.at_end():
        raise SpecParseError(f"trailing junk in embed expression: {ts.peek()[1]!r}")
    return val


def _embed_expr(ts, base, ring, prec) -> RamifiedWitt:
    v = _embed_term(ts, base, ring, prec)
    while True:
        k, s = ts.peek()
        if (k, s) == ("sym", "+"):
            ts.next()
            v = rw_add(v, _embed_term(ts, base, ring, prec))
        elif (k, s) == ("sym", "-"):
            ts.next()
            v = rw_sub(v, _embed_term(ts, base, ring, prec))
        else:
            return v


def _embed_term(ts, base, ring, prec) -> RamifiedWitt:
    v = _embed_factor(ts, base, ring, prec)
    while ts.peek() == ("sym", "*"):
        ts.next()
        v = rw_mul(v, _embed_factor(ts, base, ring, prec))
    return v


def _embed_factor(ts, base, ring, prec) -> RamifiedWitt:
    k, v = ts.peek()
    if (k, v) == ("sym", "-"):
        ts.next()
        return rw_neg(_embed_factor(ts, base, ring, prec))
    if (k, v) == ("sym", "("):
        ts.next()
        inner = _embed_expr(ts, base, ring, prec)
        ts.expect("sym", ")")
        return _embed_pow(ts, inner, None, base, ring, prec)
    if k == "int":
        ts.next()
        return _embed_pow(ts, rw_from_int(int(v), base, ring, prec),
                          None, base, ring, prec)
    if k == "ident":
        ts.next()
        if v == "pi":
            return _embed_pow(ts, rw_pi(base, ring, prec), None, base, ring, prec)
        elt = br.variable(ring, v)
        return _embed_pow(ts, None, elt, base, ring, prec)
    raise SpecParseError(f"unexpected token {v!r} in embed expression")


def _embed_pow(ts, val, atom_elt, base, ring, prec) -> RamifiedWitt:
    # atom_elt set: a ring variable, which supports rational exponents before
    # being Teichmueller-lifted; val set: a ramified value, integer powers only
    if ts.peek() == ("sym", "^"):
        ts.next()
        k, v = ts.peek()
        if k == "int":
            ts.next()
            exp = Fraction(int(v))
        elif (k, v) == ("sym", "("):
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
            exp = Fraction(sign * num, den)
        else:
            raise SpecParseError("exponent must be an integer or (rational)")
        if atom_elt is not None:
            return teich_embed(br.pow_fraction(atom_elt, exp), base, prec)
        if exp.denominator != 1 or exp < 0:
            raise SpecParseError("only variables take fractional or negative powers")
        out = rw_one(base, ring, prec)
        b = val
        n = exp.numerator
        while n:
            if n & 1:
                out = rw_mul(out, b)
            n >>= 1
            if n:
                b = rw_mul(b, b)
        return out
    if atom_elt is not None:
        return teich_embed(atom_elt, base, prec)
    return val


def twisted_product(base: RamifiedBase, ring: Ring, text: str, n: int,
                    precision: int | None = None) -> RamifiedWitt:
    """prod_{k=-n..n} F_pi^k of the embedded expression."""
    if n < 0:
        raise SpecParseError("twist index must be >= 0")
    a = embed_expr(base, ring, text, precision)
    acc = a
    for k in range(1, n + 1):
        acc = rw_mul(acc, frobenius_pi(a, k))
        acc = rw_mul(acc, frobenius_pi(a, -k))
    return acc
