"""Truncated p-typical Witt vectors W_n(A) over characteristic-p rings.

Two independent arithmetic routes are kept alive on purpose:

* route="table": evaluate the universal structural polynomials (generated by
  the exact ghost recursion over Z, reduced mod p at evaluation time).
* route="lift": lift coordinates to a Z/p^K coefficient ring (K = n+1), apply
  the ghost map there, do the operation componentwise, and solve the
  triangular system back.  Every division by p^i in the solve is checked for
  exactness; a failure is a bug, not an input condition.

The table route is exact but its term counts explode combinatorially, so it
only covers small (p, level) pairs; ``term_count_bound`` gives the a-priori
monomial-count ceiling that the generation guard enforces.  The lift route
works at any length and is the default.  Cross-route agreement is part of the
test suite, so neither can drift.

Precision ledger for the lift route: with K = n+1, the solved coordinate r_i
is correct mod p^(K-i).  Proof sketch: the subtracted term p^j r_j^(p^(i-j))
carries trust (K-j) + (i-j) + j >= K, so the numerator is trusted mod p^K and
dividing by p^i leaves K-i; since K-i >= 2 for i <= n-1, reduction mod p at
the end is safe with a digit to spare.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from fractions import Fraction

from . import base_rings as br
from .base_rings import (
    FiniteFieldSpec,
    FracLaurentRing,
    Ring,
    RingElement,
    UnivariateQuotient,
)
from .errors import (
    DepthExhausted,
    CacheCorrupt,
    IntegralityViolation,
    LevelTooLarge,
    MismatchError,
    NoConvergence,
    NoRoot,
    NotDivisible,
    NotInGhostImage,
    RelationViolated,
    SpecParseError,
)

KINDS = ("sum", "product", "negation")
DEFAULT_LEVEL_CAP = 6
DEFAULT_TERM_BUDGET = 1_500_000

# ---------------------------------------------------------------------------
# sparse integer polynomials
#
# A monomial is one Python int: the exponent of variable v is packed into
# bits [16v, 16v+16).  Variable 2i encodes X_i and 2i+1 encodes Y_i.  The
# polynomials here are isobaric of weight p^level <= 2^14, so exponents never
# reach 2^16 and monomial multiplication is integer addition, carry-free.
# A polynomial is a dict monomial-int -> nonzero coefficient.

_EXP_BITS = 16
_EXP_MASK = (1 << _EXP_BITS) - 1


def _mono_key(pairs) -> int:
    key = 0
    for v, e in pairs:
        key |= e << (_EXP_BITS * v)
    return key


def _mono_decode(key: int):
    out = []
    v = 0
    while key:
        e = key & _EXP_MASK
        if e:
            out.append((v, e))
        key >>= _EXP_BITS
        v += 1
    return tuple(out)


def _ip_mul(a: dict, b: dict) -> dict:
    if not a or not b:
        return {}
    if len(a) > len(b):
        a, b = b, a
    out: dict = {}
    get = out.get
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = ka + kb
            c = get(k)
            if c is None:
                out[k] = ca * cb
            else:
                c += ca * cb
                if c:
                    out[k] = c
                else:
                    del out[k]
    return out


def _ip_pow(a: dict, n: int) -> dict:
    r = {0: 1}
    b = a
    while n:
        if n & 1:
            r = _ip_mul(r, b)
        n >>= 1
        if n:
            b = _ip_mul(b, b)
    return r


def _ip_add_scaled(acc: dict, a: dict, s: int) -> None:
    for k, c in a.items():
        v = acc.get(k, 0) + s * c
        if v:
            acc[k] = v
        elif k in acc:
            del acc[k]


def _ghost_poly(p: int, i: int, side: int) -> dict:
    """w_i as a polynomial in one variable family (side 0 = X, 1 = Y)."""
    out = {}
    for j in range(i + 1):
        e = p ** (i - j)
        var = 2 * j + side
        out[_mono_key(((var, e),))] = p ** j
    return out


def _ghost_target(p: int, i: int, kind: str) -> dict:
    wx = _ghost_poly(p, i, 0)
    if kind == "negation":
        return {k: -c for k, c in wx.items()}
    wy = _ghost_poly(p, i, 1)
    if kind == "sum":
        out = dict(wx)
        _ip_add_scaled(out, wy, 1)
        return out
    return _ip_mul(wx, wy)


# ---------------------------------------------------------------------------
# feasibility guard


def _weighted_count(weights: tuple[int, ...], total: int) -> int:
    """Number of monomials of exact weighted degree `total`."""
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def f(idx: int, rem: int) -> int:
        if rem == 0:
            return 1
        if idx == len(weights):
            return 0
        w = weights[idx]
        return sum(f(idx + 1, rem - k * w) for k in range(rem // w + 1))

    return f(0, total)


def term_count_bound(p: int, level: int, kind: str = "sum") -> int:
    """Ceiling on the term count of the level-`level` structural polynomial.

    The polynomial is isobaric of weight p^level when X_j, Y_j carry weight
    p^j; product tables are bihomogeneous of that weight in each family
    separately, so their bound is the square of the one-family count.
    """
    one_side = tuple(p ** j for j in range(level + 1))
    c = _weighted_count(one_side, p ** level)
    if kind == "negation":
        return c
    if kind == "product":
        return c * c
    return _weighted_count(one_side + one_side, p ** level)


# ---------------------------------------------------------------------------
# structural polynomial tables


@dataclass(frozen=True)
class StructuralPolynomialTable:
    p: int
    kind: str
    level: int
    polys: tuple  # tuple of dicts, index i = level-i polynomial


_TABLE_MEMO: dict = {}


def _resolve_cache_dir(cache_dir: str | None) -> str | None:
    if cache_dir is not None:
        return cache_dir
    env = os.environ.get("WITTFORGE_CACHE")
    if env:
        return env
    xdg = os.environ.get("XDG_CACHE_HOME")
    root = xdg if xdg else os.path.join(os.path.expanduser("~"), ".cache")
    return os.path.join(root, "wittforge")


def _table_payload(p: int, kind: str, level: int, polys) -> dict:
    ser = []
    for poly in polys:
        terms = sorted(poly.items())
        ser.append([[list(map(list, _mono_decode(k))), c] for k, c in terms])
    return {"p": p, "kind": kind, "level": level, "polys": ser}


def _payload_digest(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _write_cache(path: str, payload: dict) -> None:
    doc = dict(payload)
    doc["sha256"] = _payload_digest(payload)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh)
        os.replace(tmp, path)  # last writer wins, readers never see partials
    except OSError:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


_SYMBOLIC_VERIFY_LIMIT = 60_000


def _load_cache(path: str, p: int, kind: str, level: int) -> StructuralPolynomialTable:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, ValueError) as exc:
        raise CacheCorrupt(f"unreadable table cache {path}: {exc}") from exc
    digest = doc.pop("sha256", None)
    if (doc.get("p"), doc.get("kind"), doc.get("level")) != (p, kind, level):
        raise CacheCorrupt(f"cache {path} is for a different table")
    if digest != _payload_digest(doc):
        raise CacheCorrupt(f"cache {path} failed its checksum")
    try:
        polys = []
        for ser in doc["polys"]:
            poly = {}
            for k, c in ser:
                poly[_mono_key((int(v), int(e)) for v, e in k)] = int(c)
            polys.append(poly)
    except (TypeError, ValueError, KeyError) as exc:
        raise CacheCorrupt(f"malformed cache {path}: {exc}") from exc
    table = StructuralPolynomialTable(p, kind, level, tuple(polys))
    # mathematical re-verification: full symbolic recheck when affordable,
    # exact random-point ghost evaluation otherwise
    try:
        if term_count_bound(p, level, kind) <= _SYMBOLIC_VERIFY_LIMIT:
            verify_table(table)
        else:
            spot_check_table(table, trials=3, seed=0)
    except IntegralityViolation as exc:
        raise CacheCorrupt(f"cache {path} fails the ghost identity: {exc}") from exc
    return table


def structural_polys(p: int, level: int, kind: str, *, cache_dir: str | None = None,
                     level_cap: int = DEFAULT_LEVEL_CAP,
                     term_budget: int = DEFAULT_TERM_BUDGET) -> StructuralPolynomialTable:
    """Generate (or load) the structural table for (p, kind, level)."""
    if kind not in KINDS:
        raise SpecParseError(f"kind must be one of {KINDS}")
    if not br._is_prime(p):
        raise SpecParseError(f"p={p} is not prime")
    if level < 0:
        raise SpecParseError("level must be >= 0")
    if level > level_cap:
        raise LevelTooLarge(f"level {level} above cap {level_cap}")
    bound = term_count_bound(p, level, kind)
    if bound > term_budget:
        raise LevelTooLarge(
            f"term-count bound {bound} for (p={p}, {kind}, level {level}) "
            f"exceeds budget {term_budget}")
    key = (p, kind, level)
    if key in _TABLE_MEMO:
        return _TABLE_MEMO[key]
    cdir = _resolve_cache_dir(cache_dir)
    path = os.path.join(cdir, "tables", f"p{p}_{kind}_l{level}.json") if cdir else None
    if path and os.path.exists(path):
        try:
            table = _load_cache(path, p, kind, level)
            _TABLE_MEMO[key] = table
            return table
        except CacheCorrupt:
            pass  # regenerate and overwrite below
    polys = _generate_polys(p, level, kind)
    table = StructuralPolynomialTable(p, kind, level, tuple(polys))
    if path:
        try:
            _write_cache(path, _table_payload(p, kind, level, polys))
        except OSError:
            pass
    _TABLE_MEMO[key] = table
    return table


def _generate_polys(p: int, level: int, kind: str) -> list[dict]:
    polys: list[dict] = []
    pw: list[dict] = []  # pw[j] = polys[j]^(p^(i-j)), maintained across levels
    for i in range(level + 1):
        for j in range(i):
            pw[j] = _ip_pow(pw[j], p)
        num = dict(_ghost_target(p, i, kind))
        for j in range(i):
            _ip_add_scaled(num, pw[j], -(p ** j))
        pi = p ** i
        poly = {}
        for k, c in num.items():
            if c % pi:
                raise IntegralityViolation(
                    f"level-{i} recursion for (p={p}, {kind}) left coefficient "
                    f"{c} not divisible by p^{i}")
            poly[k] = c // pi
        polys.append(poly)
        pw.append(poly)
    return polys


def verify_table(table: StructuralPolynomialTable) -> None:
    """Recheck the ghost identities symbolically; raises on any mismatch."""
    p = table.p
    pw = []
    for i in range(table.level + 1):
        for j in range(i):
            pw[j] = _ip_pow(pw[j], p)
        pw.append(table.polys[i])
        lhs: dict = {}
        for j in range(i + 1):
            _ip_add_scaled(lhs, pw[j], p ** j)
        rhs = _ghost_target(p, i, table.kind)
        if lhs != rhs:
            raise IntegralityViolation(
                f"ghost identity fails at level {i} for (p={p}, {table.kind})")


def spot_check_table(table: StructuralPolynomialTable, trials: int = 3,
                     seed: int = 0) -> None:
    """Exact ghost-identity check at random integer points (cache-load guard)."""
    import random

    rng = random.Random(seed)
    fns = compile_table(table)
    n = table.level + 1
    p = table.p
    for _ in range(trials):
        xs = tuple(rng.randint(-50, 50) for _ in range(n))
        ys = tuple(rng.randint(-50, 50) for _ in range(n))
        res = tuple(fns[i](xs, ys) for i in range(n))
        gx, gy, gr = (ghost(v, p).components for v in (xs, ys, res))
        for i in range(n):
            if table.kind == "sum":
                want = gx[i] + gy[i]
            elif table.kind == "product":
                want = gx[i] * gy[i]
            else:
                want = -gx[i]
            if gr[i] != want:
                raise IntegralityViolation(
                    f"point check fails at level {i} for (p={p}, {table.kind})")


def table_lines(table: StructuralPolynomialTable) -> list[str]:
    """Printable form, one polynomial per line, terms in descending lex order."""
    letter = {"sum": "S", "product": "P", "negation": "I"}[table.kind]
    lines = []
    for i, poly in enumerate(table.polys):
        lines.append(f"{letter}_{i} = {_poly_str(poly)}")
    return lines


def _mono_sort_key(key: int) -> tuple:
    # full exponent vector ordered X0, X1, ..., Y0, Y1, ...
    mono = _mono_decode(key)
    d = dict(mono)
    top = 1 + max((v for v, _ in mono), default=0)
    xs = tuple(d.get(2 * i, 0) for i in range(top))
    ys = tuple(d.get(2 * i + 1, 0) for i in range(top))
    return xs + ys


def _mono_factors(key: int):
    # display order: all X's before all Y's, each by ascending index
    return sorted(_mono_decode(key), key=lambda ve: (ve[0] & 1, ve[0] >> 1))


def _poly_str(poly: dict) -> str:
    if not poly:
        return "0"
    terms = sorted(poly.items(), key=lambda kc: _mono_sort_key(kc[0]), reverse=True)
    parts = []
    for mono, c in terms:
        factors = []
        for v, e in _mono_factors(mono):
            name = f"X{v // 2}" if v % 2 == 0 else f"Y{v // 2}"
            factors.append(name if e == 1 else f"{name}^{e}")
        body = "*".join(factors)
        mag = abs(c)
        if not body:
            s = str(mag)
        elif mag == 1:
            s = body
        else:
            s = f"{mag}*{body}"
        if not parts:
            parts.append(s if c > 0 else f"-{s}")
        else:
            parts.append(f"+{s}" if c > 0 else f"-{s}")
    return "".join(parts)


_COMPILED: dict = {}


def compile_table(table: StructuralPolynomialTable):
    """Compile each polynomial to a Python function f(xs, ys) -> int."""
    key = (table.p, table.kind, table.level)
    if key in _COMPILED:
        return _COMPILED[key]
    fns = []
    for poly in table.polys:
        fns.append(_compile_poly(poly))
    _COMPILED[key] = fns
    return fns


def _compile_poly(poly: dict):
    decoded = {k: _mono_decode(k) for k in poly}
    src = ["def _f(xs, ys=None):"]
    used_x = sorted({v // 2 for mono in decoded.values() for v, _ in mono if v % 2 == 0})
    used_y = sorted({v // 2 for mono in decoded.values() for v, _ in mono if v % 2 == 1})
    for i in used_x:
        src.append(f"    x{i} = xs[{i}]")
    for i in used_y:
        src.append(f"    y{i} = ys[{i}]")
    powers = sorted({(v, e) for mono in decoded.values() for v, e in mono if e > 1})
    for v, e in powers:
        name = f"x{v // 2}" if v % 2 == 0 else f"y{v // 2}"
        src.append(f"    {name}_{e} = {name}**{e}")
    terms = sorted(poly.items(), key=lambda kc: _mono_sort_key(kc[0]), reverse=True)
    chunks: list[str] = []
    src.append("    acc = 0")
    buf: list[str] = []
    for key, c in terms:
        factors = []
        for v, e in _mono_factors(key):
            name = f"x{v // 2}" if v % 2 == 0 else f"y{v // 2}"
            factors.append(name if e == 1 else f"{name}_{e}")
        if factors:
            body = "*".join(factors)
            piece = body if c == 1 else (f"-{body}" if c == -1 else f"{c}*{body}")
        else:
            piece = str(c)
        buf.append(piece)
        if len(buf) >= 400:
            chunks.append(buf)
            buf = []
    if buf:
        chunks.append(buf)
    for chunk in chunks:
        expr = chunk[0]
        for piece in chunk[1:]:
            expr += piece if piece.startswith("-") else f"+{piece}"
        src.append(f"    acc += {expr}")
    src.append("    return acc")
    ns: dict = {}
    exec("\n".join(src), {"__builtins__": {}}, ns)
    return ns["_f"]


# ---------------------------------------------------------------------------
# ghost oracle over Z


@dataclass(frozen=True)
class GhostVector:
    p: int
    components: tuple[int, ...]


def ghost(coords, p: int) -> GhostVector:
    """Ghost components w_i = sum_j p^j a_j^(p^(i-j)) of integer coordinates."""
    coords = tuple(int(a) for a in coords)
    n = len(coords)
    comps = []
    pw = []
    for i in range(n):
        for j in range(i):
            pw[j] = pw[j] ** p
        pw.append(coords[i])
        comps.append(sum((p ** j) * pw[j] for j in range(i + 1)))
    return GhostVector(p, tuple(comps))


def from_ghost(g: GhostVector | tuple, p: int | None = None) -> tuple[int, ...]:
    """Invert the ghost map over Z; NotInGhostImage if the triangle is inexact."""
    if isinstance(g, GhostVector):
        comps, p = g.components, g.p
    else:
        if p is None:
            raise SpecParseError("from_ghost needs p when given a bare tuple")
        comps = tuple(int(v) for v in g)
    coords: list[int] = []
    pw: list[int] = []
    for i in range(len(comps)):
        for j in range(i):
            pw[j] = pw[j] ** p
        num = comps[i] - sum((p ** j) * pw[j] for j in range(i))
        pi = p ** i
        if num % pi:
            raise NotInGhostImage(
                f"component {i}: {num} is not divisible by p^{i} = {pi}")
        coords.append(num // pi)
        pw.append(coords[i])
    return tuple(coords)


# ---------------------------------------------------------------------------
# lift rings: the base ring rebuilt with Z/p^K coefficients


class _LiftCoeffs:
    """(Z/p^K)[u]/(M~) where M~ is the integer lift of the field modulus."""

    __slots__ = ("p", "e", "pk", "mod")

    def __init__(self, F: FiniteFieldSpec, K: int):
        self.p = F.p
        self.e = F.e
        self.pk = F.p ** K
        self.mod = tuple(int(c) for c in F.modulus)

    def zero(self):
        return (0,) * self.e

    def one(self):
        return (1,) + (0,) * (self.e - 1)

    def from_field(self, c):
        return tuple(int(v) for v in c)

    def to_field(self, v):
        p = self.p
        return tuple(x % p for x in v)

    def vadd(self, a, b):
        pk = self.pk
        return tuple((x + y) % pk for x, y in zip(a, b))

    def vsub(self, a, b):
        pk = self.pk
        return tuple((x - y) % pk for x, y in zip(a, b))

    def vneg(self, a):
        pk = self.pk
        return tuple((-x) % pk for x in a)

    def vscale(self, a, s):
        pk = self.pk
        return tuple((x * s) % pk for x in a)

    def vmul(self, a, b):
        e, pk = self.e, self.pk
        if e == 1:
            return ((a[0] * b[0]) % pk,)
        prod = [0] * (2 * e - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] = (prod[i + j] + x * y) % pk
        for d in range(2 * e - 2, e - 1, -1):
            c = prod[d]
            if c:
                prod[d] = 0
                for j in range(e):
                    prod[d - e + j] = (prod[d - e + j] - c * self.mod[j]) % pk
        return tuple(prod[:e])

    def vdiv_exact(self, a, pi):
        out = []
        for x in a:
            if x % pi:
                raise IntegralityViolation(
                    f"lift coefficient {x} not divisible by {pi}")
            out.append(x // pi)
        return tuple(out)


class _LiftFF:
    def __init__(self, ring: FiniteFieldSpec, K: int):
        self.ring = ring
        self.C = _LiftCoeffs(ring, K)

    def zero(self):
        return self.C.zero()

    def lift(self, x: RingElement):
        if not x.terms:
            return self.C.zero()
        return self.C.from_field(x.terms[0][1])

    def reduce(self, v) -> RingElement:
        return br.from_coeff(self.ring, self.C.to_field(v))

    def add(self, a, b):
        return self.C.vadd(a, b)

    def sub(self, a, b):
        return self.C.vsub(a, b)

    def neg(self, a):
        return self.C.vneg(a)

    def mul(self, a, b):
        return self.C.vmul(a, b)

    def scale_int(self, a, s):
        return self.C.vscale(a, s)

    def div_exact_p(self, a, i):
        return self.C.vdiv_exact(a, self.C.p ** i)

    def pow_p(self, a):
        out = self.C.one()
        r = a
        n = self.C.p
        while n:
            if n & 1:
                out = self.C.vmul(out, r)
            n >>= 1
            if n:
                r = self.C.vmul(r, r)
        return out


class _LiftFrac:
    def __init__(self, ring: FracLaurentRing, K: int):
        self.ring = ring
        self.C = _LiftCoeffs(ring.base, K)
        self.quotient = ring.quotient

    def zero(self):
        return {}

    def lift(self, x: RingElement):
        C = self.C
        return {k: C.from_field(c) for k, c in x.terms}

    def reduce(self, obj) -> RingElement:
        C = self.C
        d = {}
        zero = tuple(0 for _ in range(C.e))
        for k, v in obj.items():
            fv = C.to_field(v)
            if fv != zero:
                d[k] = fv
        return br._mk(self.ring, d)

    def _fold(self, out, k, v):
        cur = out.get(k)
        if cur is None:
            out[k] = v
        else:
            nv = self.C.vadd(cur, v)
            if any(nv):
                out[k] = nv
            else:
                del out[k]

    def add(self, a, b):
        out = dict(a)
        for k, v in b.items():
            self._fold(out, k, v)
        return out

    def sub(self, a, b):
        out = dict(a)
        for k, v in b.items():
            self._fold(out, k, self.C.vneg(v))
        return out

    def neg(self, a):
        return {k: self.C.vneg(v) for k, v in a.items()}

    def mul(self, a, b):
        if len(a) > len(b):
            a, b = b, a
        C = self.C
        out: dict = {}
        quo = self.quotient
        for k1, v1 in a.items():
            for k2, v2 in b.items():
                k = tuple(x + y for x, y in zip(k1, k2))
                if quo and any(all(e >= g for e, g in zip(k, gen)) for gen in quo):
                    continue
                self._fold(out, k, C.vmul(v1, v2))
        return out

    def scale_int(self, a, s):
        C = self.C
        out = {}
        for k, v in a.items():
            nv = C.vscale(v, s)
            if any(nv):
                out[k] = nv
        return out

    def div_exact_p(self, a, i):
        pi = self.C.p ** i
        return {k: self.C.vdiv_exact(v, pi) for k, v in a.items()}

    def pow_p(self, a):
        r = a
        acc = None
        n = self.C.p
        while n:
            if n & 1:
                acc = r if acc is None else self.mul(acc, r)
            n >>= 1
            if n:
                r = self.mul(r, r)
        return acc if acc is not None else {}


class _LiftUQ:
    def __init__(self, ring: UnivariateQuotient, K: int):
        self.ring = ring
        self.C = _LiftCoeffs(ring.base, K)
        self.deg = ring.degree
        self.mod = tuple(self.C.from_field(c) for c in ring.modulus)

    def zero(self):
        return (self.C.zero(),) * self.deg

    def lift(self, x: RingElement):
        C = self.C
        vec = [C.zero()] * self.deg
        for k, c in x.terms:
            vec[k] = C.from_field(c)
        return tuple(vec)

    def reduce(self, obj) -> RingElement:
        C = self.C
        d = {}
        for k, v in enumerate(obj):
            fv = C.to_field(v)
            if any(fv):
                d[k] = fv
        return br._mk(self.ring, d)

    def add(self, a, b):
        C = self.C
        return tuple(C.vadd(x, y) for x, y in zip(a, b))

    def sub(self, a, b):
        C = self.C
        return tuple(C.vsub(x, y) for x, y in zip(a, b))

    def neg(self, a):
        C = self.C
        return tuple(C.vneg(x) for x in a)

    def mul(self, a, b):
        C = self.C
        d = self.deg
        prod = [C.zero()] * (2 * d - 1) if d > 1 else [C.zero()]
        for i, x in enumerate(a):
            if any(x):
                for j, y in enumerate(b):
                    if any(y):
                        prod[i + j] = C.vadd(prod[i + j], C.vmul(x, y))
        for k in range(2 * d - 2, d - 1, -1):
            c = prod[k]
            if any(c):
                prod[k] = C.zero()
                for j in range(d):
                    if any(self.mod[j]):
                        prod[k - d + j] = C.vsub(prod[k - d + j],
                                                 C.vmul(c, self.mod[j]))
        return tuple(prod[:d])

    def scale_int(self, a, s):
        C = self.C
        return tuple(C.vscale(x, s) for x in a)

    def div_exact_p(self, a, i):
        pi = self.C.p ** i
        return tuple(self.C.vdiv_exact(x, pi) for x in a)

    def pow_p(self, a):
        acc = None
        r = a
        n = self.C.p
        while n:
            if n & 1:
                acc = r if acc is None else self.mul(acc, r)
            n >>= 1
            if n:
                r = self.mul(r, r)
        return acc


def _lift_ring(ring: Ring, K: int):
    if isinstance(ring, FiniteFieldSpec):
        return _LiftFF(ring, K)
    if isinstance(ring, FracLaurentRing):
        return _LiftFrac(ring, K)
    return _LiftUQ(ring, K)


def _lift_ghost(L, lifted: list) -> list:
    p = L.C.p
    comps = []
    pw: list = []
    for i in range(len(lifted)):
        for j in range(i):
            pw[j] = L.pow_p(pw[j])
        pw.append(lifted[i])
        acc = L.zero()
        for j in range(i + 1):
            acc = L.add(acc, L.scale_int(pw[j], p ** j))
        comps.append(acc)
    return comps


def _lift_solve(L, targets: list) -> list:
    p = L.C.p
    coords = []
    pw: list = []
    for i in range(len(targets)):
        for j in range(i):
            pw[j] = L.pow_p(pw[j])
        num = targets[i]
        for j in range(i):
            num = L.sub(num, L.scale_int(pw[j], p ** j))
        r = L.div_exact_p(num, i)
        coords.append(r)
        pw.append(r)
    return coords


# ---------------------------------------------------------------------------
# Witt vectors


@dataclass(frozen=True)
class WittVector:
    ring: Ring
    coords: tuple[RingElement, ...]

    @property
    def length(self) -> int:
        return len(self.coords)

    def __add__(self, other):
        return witt_arith("add", self, other)

    def __sub__(self, other):
        return witt_arith("add", self, witt_arith("neg", other))

    def __mul__(self, other):
        return witt_arith("mul", self, other)

    def __neg__(self):
        return witt_arith("neg", self)

    def __str__(self) -> str:
        return "W{" + ";".join(br.format_element(c) for c in self.coords) + "}"


def make_witt(ring: Ring, coords) -> WittVector:
    out = []
    for c in coords:
        if isinstance(c, RingElement):
            if c.ring != ring:
                raise MismatchError("coordinate from a different ring")
            out.append(c)
        elif isinstance(c, int):
            out.append(br.from_int(ring, c))
        else:
            raise MismatchError(f"bad coordinate {c!r}")
    if not out:
        raise MismatchError("length must be >= 1")
    return WittVector(ring, tuple(out))


def witt_zero(ring: Ring, n: int) -> WittVector:
    return WittVector(ring, (br.zero(ring),) * n)


def witt_one(ring: Ring, n: int) -> WittVector:
    return WittVector(ring, (br.one(ring),) + (br.zero(ring),) * (n - 1))


def witt_arith(op: str, x: WittVector, y: WittVector | None = None,
               route: str = "auto") -> WittVector:
    """Ring operation on Witt vectors; op in {add, mul, neg}."""
    if op not in ("add", "mul", "neg"):
        raise SpecParseError(f"unknown op {op!r}")
    if op == "neg":
        y = None
    elif y is None:
        raise SpecParseError(f"op {op!r} needs two operands")
    if y is not None:
        if x.ring != y.ring:
            raise MismatchError("Witt vectors over different rings")
        if x.length != y.length:
            raise MismatchError("Witt vectors of different lengths")
    p = br.ring_char(x.ring)
    if op == "neg" and p != 2:
        # iota_i = -X_i for odd p (route-checked in the test suite)
        return WittVector(x.ring, tuple(br.neg(c) for c in x.coords))
    if route == "auto":
        # the lift route works at every length the package supports; the
        # table route is opt-in since its term counts explode with level
        if op == "mul":
            fast = _mul_single_coord(x, y)
            if fast is not None:
                return fast
        route = "lift"
    if route == "table":
        return _witt_op_table(op, x, y)
    if route == "lift":
        return _witt_op_lift(op, x, y)
    raise SpecParseError(f"unknown route {route!r}")


def _witt_op_lift(op: str, x: WittVector, y: WittVector | None) -> WittVector:
    ring = x.ring
    n = x.length
    p = br.ring_char(ring)
    L = _lift_ring(ring, n + 1)
    gx = _lift_ghost(L, [L.lift(c) for c in x.coords])
    if op == "neg":
        targets = [L.neg(g) for g in gx]
    else:
        gy = _lift_ghost(L, [L.lift(c) for c in y.coords])
        if op == "add":
            targets = [L.add(a, b) for a, b in zip(gx, gy)]
        else:
            targets = [L.mul(a, b) for a, b in zip(gx, gy)]
    coords = _lift_solve(L, targets)
    return WittVector(ring, tuple(L.reduce(c) for c in coords))


def _witt_op_table(op: str, x: WittVector, y: WittVector | None) -> WittVector:
    ring = x.ring
    n = x.length
    p = br.ring_char(ring)
    kind = {"add": "sum", "mul": "product", "neg": "negation"}[op]
    table = structural_polys(p, n - 1, kind)
    ycoords = y.coords if y is not None else None
    out = []
    cache: dict = {}
    for i in range(n):
        out.append(_eval_poly_mod_p(table.polys[i], ring, x.coords, ycoords, cache))
    return WittVector(ring, tuple(out))


def _eval_poly_mod_p(poly: dict, ring: Ring, xs, ys, cache: dict) -> RingElement:
    p = br.ring_char(ring)
    acc = br.zero(ring)
    for key, c in poly.items():
        cm = c % p
        if cm == 0:
            continue
        term = br.from_int(ring, cm)
        for v, e in _mono_decode(key):
            pk = cache.get((v, e))
            if pk is None:
                base = xs[v // 2] if v % 2 == 0 else ys[v // 2]
                pk = br.pow_int(base, e)
                cache[(v, e)] = pk
            term = br.mul(term, pk)
        acc = br.add(acc, term)
    return acc


def witt_add(x, y, route="auto"):
    return witt_arith("add", x, y, route)


def _mul_single_coord(x: WittVector, y: WittVector) -> WittVector | None:
    """x * V^k([b]) = V^k(F^k(x) * [b]) when one operand has one nonzero
    coordinate.  Exact in char p, and termwise cheap since F is the
    coordinatewise p-th power there; returns None when neither operand is
    that sparse."""
    for a, b in ((x, y), (y, x)):
        nz = [i for i, c in enumerate(b.coords) if not c.is_zero()]
        if len(nz) > 1:
            continue
        n = x.length
        zero = br.zero(x.ring)
        if not nz:
            return witt_zero(x.ring, n)
        k = nz[0]
        out = [zero] * n
        pw = b.coords[k]
        for i in range(k, n):
            j = i - k
            if j > 0:
                pw = br.frobenius(pw, 1)
            out[i] = br.mul(pw, br.frobenius(a.coords[j], k))
        return WittVector(x.ring, tuple(out))
    return None


def witt_mul(x, y, route="auto"):
    return witt_arith("mul", x, y, route)


def witt_neg(x, route="auto"):
    return witt_arith("neg", x, route=route)


def witt_sub(x, y, route="auto"):
    return witt_arith("add", x, witt_arith("neg", y, route=route), route)


# ---------------------------------------------------------------------------
# the standard operator zoo


def teichmuller(a: RingElement, n: int) -> WittVector:
    """Multiplicative representative [a] = (a, 0, ..., 0)."""
    if n < 1:
        raise MismatchError("length must be >= 1")
    return WittVector(a.ring, (a,) + (br.zero(a.ring),) * (n - 1))


def frobenius_map(x: WittVector, k: int = 1) -> WittVector:
    """Witt Frobenius: coordinatewise p^k-th power (char-p coefficient ring).

    Negative k applies the coordinatewise inverse where the ring supports it.
    """
    return WittVector(x.ring, tuple(br.frobenius(c, k) for c in x.coords))


def verschiebung(x: WittVector) -> WittVector:
    """Shift (0, a_0, ..., a_{n-2}); the top coordinate falls off the end."""
    return WittVector(x.ring, (br.zero(x.ring),) + x.coords[:-1])


def project(x: WittVector) -> RingElement:
    return x.coords[0]


def witt_pmul(x: WittVector) -> WittVector:
    """p * x = V(F(x)), valid over char-p coefficient rings."""
    return verschiebung(frobenius_map(x))


def witt_ord(x: WittVector) -> int | None:
    """Index of the first nonzero coordinate (V-adic order); None for zero."""
    for i, c in enumerate(x.coords):
        if not c.is_zero():
            return i
    return None


def divide_by_p(x: WittVector) -> WittVector:
    """Exact division by p; shortens the vector by one coordinate."""
    if not x.coords[0].is_zero():
        raise NotDivisible("zeroth coordinate is nonzero")
    if x.length == 1:
        return WittVector(x.ring, ())
    out = []
    for c in x.coords[1:]:
        try:
            out.append(br.frobenius(c, -1))
        except NoRoot as exc:
            raise DepthExhausted(f"p-th root unavailable: {exc}") from exc
    return WittVector(x.ring, tuple(out))


def divide_by_p_fixed(x: WittVector) -> WittVector:
    """Division by p at fixed length; the new top coordinate is an untrusted 0.

    The caller owns the precision bookkeeping: only the bottom n-1 coordinates
    of the result carry information.
    """
    shortened = divide_by_p(x)
    return WittVector(x.ring, shortened.coords + (br.zero(x.ring),))


def int_to_witt(m: int, ring: Ring, n: int) -> WittVector:
    """The image of the integer m in W_n(A), via its exact Z-Witt coordinates."""
    coords = from_ghost(GhostVector(br.ring_char(ring), (m,) * n))
    return WittVector(ring, tuple(br.from_int(ring, c) for c in coords))


def witt_scalar(a: RingElement, x: WittVector) -> WittVector:
    """[a] * x by the closed form ([a]x)_i = a^(p^i) x_i."""
    if a.ring != x.ring:
        raise MismatchError("scalar from a different ring")
    out = []
    pw = a
    for i, c in enumerate(x.coords):
        if i > 0:
            pw = br.frobenius(pw, 1)
        out.append(br.mul(pw, c))
    return WittVector(x.ring, tuple(out))


def witt_inv_unit(x: WittVector) -> WittVector:
    """Inverse of a unit (zeroth coordinate invertible) by Newton iteration."""
    a0 = x.coords[0]
    y = teichmuller(br.invert(a0), x.length)
    one = witt_one(x.ring, x.length)
    for _ in range(x.length + 2):
        err = witt_sub(one, witt_mul(x, y))
        if all(c.is_zero() for c in err.coords):
            return y
        y = witt_mul(y, witt_add(one, err))
    raise NoConvergence("unit inversion failed to stabilize")


# ---------------------------------------------------------------------------
# functoriality


@dataclass(frozen=True)
class RingMap:
    src: Ring
    dst: Ring
    images: tuple  # tuple of (generator name, RingElement in dst)


def make_ring_map(src: Ring, dst: Ring, images: dict | None = None) -> RingMap:
    """Build a coefficient-ring homomorphism from generator assignments.

    Every relation of the source presentation is checked on the given images;
    a violation raises RelationViolated.  Field coefficients map along the
    canonical embedding when src and dst share (p, e, modulus), otherwise the
    field generator needs an explicit image satisfying the modulus.
    """
    images = dict(images or {})
    resolved: dict[str, RingElement] = {}
    for name, img in images.items():
        if isinstance(img, str):
            img = br.evaluate(dst, img)
        if img.ring != dst:
            raise MismatchError("image lives in the wrong ring")
        resolved[name] = img
    Fs = br.base_field(src)
    Fd = br.base_field(dst)
    if Fs.p != Fd.p:
        raise RelationViolated("characteristics differ")
    if Fs.e > 1:
        gname = Fs.gen_name
        if gname not in resolved:
            if (Fd.e, Fd.modulus) == (Fs.e, Fs.modulus):
                resolved[gname] = br.from_coeff(dst, Fs.gen())
            else:
                raise RelationViolated(
                    f"field generator {gname!r} needs an explicit image")
        img = resolved[gname]
        acc = br.zero(dst)
        for d, c in enumerate(Fs.modulus):
            acc = br.add(acc, br.mul(br.from_int(dst, c), br.pow_int(img, d)))
        if not acc.is_zero():
            raise RelationViolated("field generator image violates the modulus")
    if isinstance(src, FracLaurentRing):
        for v in src.variables:
            if v not in resolved:
                raise RelationViolated(f"variable {v!r} has no image")
        b = src.lattice_b
        for v in src.variables:
            if b > 1:
                try:
                    br.pow_fraction(resolved[v], Fraction(1, b))
                except Exception as exc:
                    raise RelationViolated(
                        f"image of {v!r} admits no 1/{b} power: {exc}") from exc
            if src.laurent:
                try:
                    br.invert(resolved[v])
                except Exception as exc:
                    raise RelationViolated(
                        f"image of Laurent variable {v!r} not invertible: {exc}"
                    ) from exc
        for gen in src.quotient:
            img = br.one(dst)
            for i, e in enumerate(gen):
                img = br.mul(img, br.pow_fraction(resolved[src.variables[i]], e))
            if not img.is_zero():
                raise RelationViolated("quotient monomial does not map to zero")
    elif isinstance(src, UnivariateQuotient):
        if src.var not in resolved:
            raise RelationViolated(f"variable {src.var!r} has no image")
        img = resolved[src.var]
        acc = br.zero(dst)
        cmap = _field_coeff_mapper(src, dst, resolved)
        for d, c in enumerate(src.modulus):
            acc = br.add(acc, br.mul(cmap(c), br.pow_int(img, d)))
        if not acc.is_zero():
            raise RelationViolated("quotient variable image violates the modulus")
    return RingMap(src, dst, tuple(sorted(resolved.items())))


def _field_coeff_mapper(src: Ring, dst: Ring, resolved: dict):
    Fs = br.base_field(src)

    def cmap(c) -> RingElement:
        if Fs.e == 1:
            return br.from_int(dst, c[0])
        gen_img = resolved[Fs.gen_name]
        acc = br.from_int(dst, c[0])
        pw = br.one(dst)
        for d in range(1, Fs.e):
            pw = br.mul(pw, gen_img)
            if c[d]:
                acc = br.add(acc, br.mul(br.from_int(dst, c[d]), pw))
        return acc

    return cmap


def apply_ring_map(phi: RingMap, x: RingElement) -> RingElement:
    if x.ring != phi.src:
        raise MismatchError("element not in the map's source ring")
    resolved = dict(phi.images)
    cmap = _field_coeff_mapper(phi.src, phi.dst, resolved)
    acc = br.zero(phi.dst)
    for key, c in x.terms:
        term = cmap(c)
        if isinstance(phi.src, FracLaurentRing):
            for i, e in enumerate(key):
                if e != 0:
                    term = br.mul(term, br.pow_fraction(
                        resolved[phi.src.variables[i]], e))
        elif isinstance(phi.src, UnivariateQuotient):
            if key:
                term = br.mul(term, br.pow_int(resolved[phi.src.var], key))
        acc = br.add(acc, term)
    return acc


def witt_functor(phi: RingMap, x: WittVector) -> WittVector:
    """W_n(phi): apply the coefficient map coordinatewise."""
    if x.ring != phi.src:
        raise MismatchError("Witt vector not over the map's source ring")
    return WittVector(phi.dst, tuple(apply_ring_map(phi, c) for c in x.coords))
