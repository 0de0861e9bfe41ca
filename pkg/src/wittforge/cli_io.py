"""Command-line surface: literal codecs, the named-example verification
suite, and the structural-polynomial benchmark.

Canonical results go to stdout and are byte-deterministic for a fixed
command line and cache state; timings go to stderr.  Exit codes: 0 success,
1 verification failure, 2 input error, 3 precision/depth exhaustion.
"""

from __future__ import annotations

import argparse
import math
import os
import random
import re
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from io import StringIO
from itertools import product as iproduct

from . import base_rings as br
from . import frobenius_lab as fl
from . import lifting as lf
from . import witt_core as wc
from . import witt_ramified as rw
from .errors import (
    BudgetExceeded,
    CacheCorrupt,
    DepthExhausted,
    LevelTooLarge,
    NoConvergence,
    NotDivisible,
    SpecParseError,
    WittforgeError,
)

DEFAULT_SEED = 1729


# ---------------------------------------------------------------------------
# literal codecs
#
# Element expressions are owned by base_rings (format_element / evaluate).
# The composite literals below wrap them: W{..}, RW[..]{..}, DIGITS[..]{..}
# and FONT{..}.  parse(print(v)) = v is a tested invariant for all of them.

_W_RE = re.compile(r"\s*W\s*(?:\[(?P<hdr>[^\]]*)\])?\s*\{(?P<body>.*)\}\s*$",
                   re.S)
_W_HDR_RE = re.compile(r"\s*p\s*=\s*(\d+)\s*,\s*n\s*=\s*(\d+)\s*$")
_RW_RE = re.compile(r"\s*RW\s*\[\s*base\s*=\s*(?P<id>[A-Za-z_]\w*)\s*,"
                    r"\s*N\s*=\s*(?P<n>\d+)\s*\]\s*\{(?P<body>.*)\}\s*$", re.S)
_DIGITS_RE = re.compile(r"\s*DIGITS\s*\[\s*(?P<n>\d+)\s*\]\s*"
                        r"\{(?P<body>.*)\}\s*$", re.S)
_FONT_RE = re.compile(r"\s*FONT\s*\{(?P<body>.*)\}\s*$", re.S)
_BASE_RE = re.compile(r"\s*rw\s+p\s*=\s*(?P<p>\d+)\s+e\s*=\s*(?P<e>\d+)\s+"
                      r"eis\s*=\s*\((?P<eis>[^)]*)\)\s+"
                      r"prec\s*=\s*(?P<prec>\d+)\s*$")


def parse_witt(ring, text: str, n: int | None = None) -> wc.WittVector:
    m = _W_RE.match(text)
    if not m:
        raise SpecParseError(f"not a Witt literal: {text!r}")
    if m.group("hdr") is not None:
        hm = _W_HDR_RE.match(m.group("hdr"))
        if not hm:
            raise SpecParseError(f"bad Witt header: {m.group('hdr')!r}")
        if int(hm.group(1)) != br.ring_char(ring):
            raise SpecParseError(
                f"literal p={hm.group(1)} but the ring has "
                f"characteristic {br.ring_char(ring)}")
        hn = int(hm.group(2))
        if n is not None and hn != n:
            raise SpecParseError(f"literal n={hn} but the command says n={n}")
        n = hn
    coords = [br.evaluate(ring, part) for part in m.group("body").split(";")]
    if n is not None and len(coords) != n:
        raise SpecParseError(f"expected {n} coordinates, got {len(coords)}")
    return wc.make_witt(ring, coords)


def format_witt(x: wc.WittVector) -> str:
    return str(x)


def parse_base(text: str) -> rw.RamifiedBase:
    """Base descriptor: rw p=<prime> e=<int> eis=(<monic X-poly>) prec=<int>."""
    m = _BASE_RE.match(text)
    if not m:
        raise SpecParseError(f"bad base descriptor: {text!r}")
    p, e, prec = int(m.group("p")), int(m.group("e")), int(m.group("prec"))
    if prec < 1:
        raise SpecParseError("prec must be >= 1")
    f, coeffs = rw.parse_eisenstein(m.group("eis"))
    level = math.ceil(prec / f) + 1
    return rw.make_ramified_base(p, e, f, coeffs, level)


def parse_rw(base: rw.RamifiedBase, ring, text: str,
             base_id: str = "b0") -> rw.RamifiedWitt:
    m = _RW_RE.match(text)
    if not m:
        raise SpecParseError(f"not a ramified literal: {text!r}")
    if m.group("id") != base_id:
        raise SpecParseError(
            f"unknown base id {m.group('id')!r}; this command binds "
            f"{base_id!r} via --base")
    n = int(m.group("n"))
    if not 1 <= n <= base.default_precision:
        raise SpecParseError(
            f"N={n} outside 1..{base.default_precision} for this base")
    parts = m.group("body").split("|")
    if len(parts) != base.f:
        raise SpecParseError(f"expected {base.f} slots, got {len(parts)}")
    coords = tuple(parse_witt(ring, part, base.level) for part in parts)
    return rw.RamifiedWitt(base, ring, coords, n)


def format_rw(x: rw.RamifiedWitt, base_id: str = "b0") -> str:
    inner = " | ".join(str(w) for w in x.coords)
    return f"RW[base={base_id}, N={x.precision}]{{ {inner} }}"


def parse_digits(base: rw.RamifiedBase, ring, text: str) -> rw.DigitExpansion:
    m = _DIGITS_RE.match(text)
    if not m:
        raise SpecParseError(f"not a digit literal: {text!r}")
    parts = m.group("body").split(";")
    if len(parts) != int(m.group("n")):
        raise SpecParseError(
            f"header says {m.group('n')} digits, body has {len(parts)}")
    digits = tuple(br.evaluate(ring, part) for part in parts)
    return rw.DigitExpansion(base, ring, digits)


def parse_fontaine(ring, text: str) -> fl.FontaineElement:
    m = _FONT_RE.match(text)
    if not m:
        raise SpecParseError(f"not a compatible-sequence literal: {text!r}")
    seeds = [br.evaluate(ring, part) for part in m.group("body").split(";")]
    return fl.fontaine_make(ring, seeds)


# ---------------------------------------------------------------------------
# polynomials in one unknown X over a ramified base, for the lift command

class _PolyParser:
    """Recursive descent for expressions like "X^2-(p+x)".

    The unknown is the capital identifier X; p stands for the base prime;
    pi for the uniformizer; other identifiers are coefficient-ring variables
    (fractional powers allowed on those only).  Values are coefficient lists,
    low degree first.
    """

    def __init__(self, base, ring, text: str):
        self.base, self.ring = base, ring
        self.toks = br._tokenize(text)
        self.pos = 0

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self):
        t = self.peek()
        if t is None:
            raise SpecParseError("unexpected end of polynomial")
        self.pos += 1
        return t

    def expect(self, sym: str):
        t = self.take()
        if t != ("sym", sym):
            raise SpecParseError(f"expected {sym!r} at token {t!r}")

    def parse(self):
        v = self.expr()
        if self.peek() is not None:
            raise SpecParseError(f"trailing input at {self.peek()!r}")
        return tuple(v)

    # poly values: non-empty lists of RamifiedWitt, low degree first
    def const(self, x):
        return [x]

    def padd(self, a, b):
        n = max(len(a), len(b))
        z = rw.rw_zero(self.base, self.ring)
        a = a + [z] * (n - len(a))
        b = b + [z] * (n - len(b))
        return [rw.rw_add(u, v) for u, v in zip(a, b)]

    def pneg(self, a):
        return [rw.rw_neg(u) for u in a]

    def pmul(self, a, b):
        z = rw.rw_zero(self.base, self.ring)
        out = [z] * (len(a) + len(b) - 1)
        for i, u in enumerate(a):
            if rw.rw_is_zero(u):
                continue
            for j, v in enumerate(b):
                out[i + j] = rw.rw_add(out[i + j], rw.rw_mul(u, v))
        return out

    def expr(self):
        if self.peek() == ("sym", "-"):
            self.take()
            acc = self.pneg(self.term())
        else:
            acc = self.term()
        while self.peek() in (("sym", "+"), ("sym", "-")):
            op = self.take()[1]
            t = self.term()
            acc = self.padd(acc, self.pneg(t) if op == "-" else t)
        return acc

    def term(self):
        acc = self.factor()
        while True:
            nxt = self.peek()
            if nxt == ("sym", "*"):
                self.take()
                acc = self.pmul(acc, self.factor())
            elif nxt and (nxt[0] in ("int", "ident") or nxt == ("sym", "(")):
                acc = self.pmul(acc, self.factor())  # juxtaposition
            else:
                return acc

    def _int_exponent(self) -> int:
        t = self.take()
        if t == ("sym", "("):
            inner = self._int_exponent()
            self.expect(")")
            return inner
        if t == ("sym", "-"):
            return -self._int_exponent()
        if t[0] != "int":
            raise SpecParseError(f"expected integer exponent, got {t!r}")
        return int(t[1])

    def factor(self):
        t = self.take()
        if t == ("sym", "("):
            v = self.expr()
            self.expect(")")
        elif t[0] == "int":
            v = self.const(rw.rw_from_int(int(t[1]), self.base, self.ring))
        elif t == ("ident", "X"):
            z = rw.rw_zero(self.base, self.ring)
            v = [z, rw.rw_one(self.base, self.ring)]
        elif t == ("ident", "p"):
            v = self.const(rw.rw_from_int(self.base.p, self.base, self.ring))
        elif t == ("ident", "pi"):
            v = self.const(rw.rw_pi(self.base, self.ring))
        elif t[0] == "ident":
            # coefficient variable; may carry a fractional power
            if self.peek() == ("sym", "^"):
                self.take()
                frac = self._frac_exponent()
                elt = br.pow_fraction(br.variable(self.ring, t[1]), frac)
            else:
                elt = br.variable(self.ring, t[1])
            return self.const(rw.teich_embed(elt, self.base))
        else:
            raise SpecParseError(f"unexpected token {t!r}")
        if self.peek() == ("sym", "^"):
            self.take()
            k = self._int_exponent()
            if k < 0:
                raise SpecParseError("negative powers of X are not allowed")
            acc = self.const(rw.rw_one(self.base, self.ring))
            for _ in range(k):
                acc = self.pmul(acc, v)
            return acc
        return v

    def _frac_exponent(self):
        sign = 1
        parened = False
        if self.peek() == ("sym", "("):
            self.take()
            parened = True
        if self.peek() == ("sym", "-"):
            self.take()
            sign = -1
        t = self.take()
        if t[0] != "int":
            raise SpecParseError(f"expected exponent numerator, got {t!r}")
        num, den = int(t[1]), 1
        if self.peek() == ("sym", "/"):
            self.take()
            d = self.take()
            if d[0] != "int":
                raise SpecParseError(f"expected exponent denominator, got {d!r}")
            den = int(d[1])
        if parened:
            self.expect(")")
        return Fraction(sign * num, den)


def parse_poly_x(base, ring, text: str):
    coeffs = _PolyParser(base, ring, text).parse()
    while len(coeffs) > 1 and rw.rw_is_zero(coeffs[-1]):
        coeffs = coeffs[:-1]
    return coeffs


# ---------------------------------------------------------------------------
# the named-example verification suite

@dataclass(frozen=True)
class CheckResult:
    name: str
    anchor: str
    ok: bool
    elapsed: float
    witnesses: tuple


@dataclass(frozen=True)
class _SuiteConfig:
    seed: int
    cache_dir: str | None

    def rng(self, tag: str):
        return random.Random(f"{self.seed}:{tag}")


def _ghost_route(op: str, xs, ys, p: int):
    gx = wc.ghost(xs, p).components
    gy = wc.ghost(ys, p).components
    gz = tuple(a + b if op == "add" else a * b for a, b in zip(gx, gy))
    return wc.from_ghost(gz, p)


def _check_structural_tables(cfg):
    wit = []
    scope = [(2, 4), (3, 4), (5, 3)]
    for p, lv in scope:
        for kind in ("sum", "product", "negation"):
            table = wc.structural_polys(p, lv, kind, cache_dir=cfg.cache_dir)
            wc.verify_table(table)  # raises on any broken ghost identity
    wc.verify_table(wc.structural_polys(5, 4, "negation",
                                        cache_dir=cfg.cache_dir))
    # the level-4 sum/product tables at p=5 are over the term budget; the
    # refusal must name the exact bound
    for kind, bound in (("sum", "130941098"), ("product", "13741849")):
        try:
            wc.structural_polys(5, 4, kind, cache_dir=cfg.cache_dir)
            wit.append(f"(5, {kind}, 4) generated but should exceed budget")
        except LevelTooLarge as exc:
            if bound not in str(exc):
                wit.append(f"(5, {kind}, 4) bound message lacks {bound}: {exc}")
    s = wc.structural_polys(2, 1, "sum", cache_dir=cfg.cache_dir)
    if wc.table_lines(s) != ["S_0 = X0+Y0", "S_1 = -X0*Y0+X1+Y1"]:
        wit.append(f"p=2 sum table differs: {wc.table_lines(s)}")
    pr = wc.structural_polys(2, 1, "product", cache_dir=cfg.cache_dir)
    if wc.table_lines(pr) != ["P_0 = X0*Y0", "P_1 = X0^2*Y1+X1*Y0^2+2*X1*Y1"]:
        wit.append(f"p=2 product table differs: {wc.table_lines(pr)}")
    return not wit, wit


def _check_ghost_oracle(cfg):
    wit = []
    for p in (2, 3, 5):
        for n in (1, 2, 3, 4):
            rng = cfg.rng(f"ghost:{p}:{n}")
            cs = wc.compile_table(
                wc.structural_polys(p, n - 1, "sum", cache_dir=cfg.cache_dir))
            cp = wc.compile_table(
                wc.structural_polys(p, n - 1, "product",
                                    cache_dir=cfg.cache_dir))
            for _ in range(1000):
                xs = tuple(rng.randrange(-9, 10) for _ in range(n))
                ys = tuple(rng.randrange(-9, 10) for _ in range(n))
                za = tuple(f(xs, ys) for f in cs)
                zm = tuple(f(xs, ys) for f in cp)
                if za != _ghost_route("add", xs, ys, p):
                    wit.append(f"add mismatch p={p} n={n} x={xs} y={ys}")
                if zm != _ghost_route("mul", xs, ys, p):
                    wit.append(f"mul mismatch p={p} n={n} x={xs} y={ys}")
                if wit:
                    return False, wit
    return True, wit


def _check_small_witt_rings(cfg):
    wit = []
    for p in (2, 3, 5):
        ring = br.make_field(p, 1)
        for n in (1, 2, 3):
            order = p ** n
            elts = {c for c in iproduct(range(p), repeat=n)}
            if len(elts) != order:
                wit.append(f"W_{n}(F_{p}) enumeration size {len(elts)}")
            one = wc.witt_one(ring, n)
            chain = [wc.witt_zero(ring, n)]
            for _ in range(order - 1):
                chain.append(wc.witt_add(chain[-1], one))
            seen = {c.coords for c in chain}
            if len(seen) != order:
                wit.append(f"unit order below {order} at (p={p}, n={n})")
                continue
            if wc.witt_add(chain[-1], one) != chain[0]:
                wit.append(f"unit order exceeds {order} at (p={p}, n={n})")
                continue
            if seen != {wc.make_witt(ring, c).coords for c in elts}:
                wit.append(f"additive span of 1 misses elements (p={p}, n={n})")
                continue
            # arithmetic transports to Z/p^n along k -> k*1, which carries
            # the ring axioms over exhaustively
            index = {c.coords: k for k, c in enumerate(chain)}
            for j in range(order):
                for k in range(order):
                    s = wc.witt_add(chain[j], chain[k])
                    m = wc.witt_mul(chain[j], chain[k])
                    if index[s.coords] != (j + k) % order:
                        wit.append(f"add transport fails at {(p, n, j, k)}")
                    if index[m.coords] != (j * k) % order:
                        wit.append(f"mul transport fails at {(p, n, j, k)}")
                    if wit:
                        return False, wit
    return True, wit


def _check_operator_identities(cfg):
    wit = []
    configs = [
        ("ff p=2 e=2", 3),
        ("ff p=3 e=1", 3),
        ("ff p=5 e=1", 2),
        ("frac base=(ff p=3 e=1) vars=x depth_p=3 depth_2=0 laurent=true", 2),
    ]
    for spec_text, n in configs:
        ring = br.make_ring(spec_text)
        p = br.ring_char(ring)
        rng = cfg.rng(f"ops:{spec_text}:{n}")
        for i in range(1000):
            coords = [br.random_element(ring, rng, max_terms=2, exp_bound=2)
                      for _ in range(n)]
            x = wc.make_witt(ring, coords)
            if wc.frobenius_map(wc.verschiebung(x)) != wc.witt_pmul(x):
                wit.append(f"FV != p at {spec_text} sample {i}")
            fx = wc.frobenius_map(x)
            if fx.coords != tuple(br.pow_int(c, p) for c in x.coords):
                wit.append(f"F is not the p-th power at {spec_text} sample {i}")
            a = br.random_element(ring, rng, max_terms=2, exp_bound=2)
            if wc.project(wc.teichmuller(a, n)) != a:
                wit.append(f"project(teich) != id at {spec_text} sample {i}")
            divisible = x.coords[0].is_zero()
            try:
                y = wc.divide_by_p(x)
                if not divisible:
                    wit.append(f"divide_by_p accepted a_0 != 0 at sample {i}")
                elif n > 1 and wc.witt_pmul(y) != wc.WittVector(
                        ring, x.coords[:n - 1]):
                    wit.append(f"p*divide_by_p != truncation at sample {i}")
            except NotDivisible:
                if divisible:
                    wit.append(f"divide_by_p rejected a_0 = 0 at sample {i}")
            if wit:
                return False, wit
    return True, wit


def _rand_rw(base, ring, rng):
    F = br.base_field(ring)
    coords = tuple(
        wc.WittVector(ring, tuple(br.from_coeff(ring, br.random_coeff(F, rng))
                                  for _ in range(base.level)))
        for _ in range(base.f))
    return rw.RamifiedWitt(base, ring, coords, base.default_precision)


def _check_ramified_digits(cfg):
    wit = []
    cases = [
        (rw.make_ramified_base(3, 1, 2, [-3, 0], 7), br.make_field(3, 1)),
        (rw.make_ramified_base(2, 1, 3, [-2, 0, 0], 5), br.make_field(2, 1)),
        (rw.make_ramified_base(2, 2, 2, [-2, 0], 7), br.make_field(2, 2)),
    ]
    for base, ring in cases:
        tag = f"(p={base.p}, e={base.e}, f={base.f})"
        # pi^f = unit * p: p has order f and dividing it down leaves a unit
        pint = rw.rw_from_int(base.p, base, ring)
        if rw.rw_ord(pint) != base.f:
            wit.append(f"ord(p) != f at {tag}")
        u = pint
        for _ in range(base.f):
            u = rw.divide_by_pi(u)
        pi = rw.rw_pi(base, ring)
        pif = rw.rw_one(base, ring)
        for _ in range(base.f):
            pif = rw.rw_mul(pif, pi)
        if not rw.rw_equal(rw.rw_mul(pif, u), pint, u.precision):
            wit.append(f"pi^f * unit != p at {tag}")
        try:
            rw.rw_inv(u)
        except WittforgeError:
            wit.append(f"p / pi^f is not a unit at {tag}")
        rng = cfg.rng(f"digits:{tag}")
        cap = min(12, base.default_precision)
        for i in range(34):
            x = _rand_rw(base, ring, rng)
            for n in (1, max(1, cap // 2), cap):
                d = rw.digit_expand(x, n)
                if not rw.rw_equal(rw.digits_assemble(d), x, n):
                    wit.append(f"digit round-trip fails at {tag} N={n} run {i}")
        for i in range(100):
            x = _rand_rw(base, ring, rng)
            lhs = rw.reduce_mod_pi(rw.frobenius_pi(x, 1))
            rhs = br.pow_int(rw.reduce_mod_pi(x), base.q)
            if lhs != rhs:
                wit.append(f"residue Frobenius is not the q-power at {tag} "
                           f"run {i}")
        if wit:
            return False, wit
    return True, wit


def _check_twisted_frobenius(cfg):
    wit = []
    base = rw.make_ramified_base(3, 1, 2, [-3, 0], 4)  # N = 6
    ring = br.make_ring(
        "frac base=(ff p=3 e=1) vars=x depth_p=6 depth_2=0 laurent=true")
    N = base.default_precision
    q = base.q
    for expr in ("x", "x^(1/3)", "x^(13/3)"):
        lhs = rw.frobenius_pi(rw.embed_expr(base, ring, expr), 1)
        rhs = rw.teich_embed(br.pow_int(br.evaluate(ring, expr), q), base)
        if not rw.rw_equal(lhs, rhs, N):
            wit.append(f"F(embed({expr})) != embed({expr}^q)")
    pi = rw.rw_pi(base, ring)
    if not rw.rw_equal(rw.frobenius_pi(pi, 1), pi, N):
        wit.append("F_pi does not fix pi")
    one = rw.rw_one(base, ring)
    if not rw.rw_equal(rw.frobenius_pi(one, 1), one, N):
        wit.append("F_pi does not fix 1")
    # twisted-product recurrence: F(a_n) * F^(-n)(a) * F^(-(n+1))(a) = a_(n+1)
    text = "x^(13/3)"
    ahat = rw.embed_expr(base, ring, text)
    for n in range(4):
        an = rw.twisted_product(base, ring, text, n)
        an1 = rw.twisted_product(base, ring, text, n + 1)
        lhs = rw.rw_mul(rw.frobenius_pi(an, 1),
                        rw.rw_mul(rw.frobenius_pi(ahat, -n),
                                  rw.frobenius_pi(ahat, -(n + 1))))
        if not rw.rw_equal(lhs, an1, N):
            wit.append(f"twisted recurrence fails at n={n}")
    abar = br.evaluate(ring, text)
    for k in range(-2, 3):
        lhs = rw.reduce_mod_pi(rw.frobenius_pi(ahat, k))
        if lhs != br.frobenius(abar, k):
            wit.append(f"residue of F^{k} differs from the q^{k} power")
    return not wit, wit


def _check_square_root_lift(cfg):
    wit = []
    t0 = time.perf_counter()
    base = rw.make_ramified_base(3, 1, 2, [-3, 0], 5)  # N = 8
    ring = br.make_ring(
        "frac base=(ff p=3 e=1) vars=x depth_p=10 depth_2=1 laurent=true")
    N = 8

    def prob(expr, seed_expr):
        c = rw.rw_add(rw.rw_from_int(3, base, ring),
                      rw.embed_expr(base, ring, expr))
        return lf.quadratic_problem(base, ring, c,
                                    rw.embed_expr(base, ring, seed_expr), N)

    s, steps = lf.hensel_lift_verbose(prob("x", "x^(1/2)"))
    c = rw.rw_add(rw.rw_from_int(3, base, ring),
                  rw.embed_expr(base, ring, "x"))
    if not rw.rw_equal(rw.rw_mul(s, s), c, N):
        wit.append("lifted root fails its own equation")
    bounds = [st.window if st.ord_value is None else st.ord_value
              for st in steps]
    for prev, cur in zip(bounds, bounds[1:]):
        if cur < min(2 * prev, N):
            wit.append(f"certified orders failed to double: {bounds}")
            break
    s3 = lf.hensel_lift(prob("x^3", "x^(3/2)"))
    fs = rw.frobenius_pi(s, 1)
    if not (rw.rw_equal(fs, s3, N) or rw.rw_equal(fs, rw.rw_neg(s3), N)):
        wit.append("F(sqrt(p+x)) is neither square root of p+x^p")
    elapsed = time.perf_counter() - t0
    if elapsed >= 10.0:
        wit.append(f"runtime {elapsed:.1f}s exceeds the 10s budget")
    return not wit, wit


def _check_semiperfect_tower(cfg):
    wit = []
    for p in (2, 3, 5):
        for depth in (1, 2, 3):
            rep = fl.semiperfect_tower_check(p, depth, samples=6,
                                             seed=cfg.seed)
            if not rep.verdict:
                bad = [k for k, ok, _ in rep.items if not ok]
                wit.append(f"tower items {bad} fail at (p={p}, M={depth})")
        # root acquisition across two levels and the square congruence:
        # a = c^(1/p^2) exists for dilated c, and (a^p)^p lands back on c
        model = fl.make_tower_model(p, 3)
        rng = cfg.rng(f"tower:{p}")
        for i in range(8):
            d = br.random_element(model.ring, rng, max_terms=2, exp_bound=3)
            cval = br.pow_int(d, p * p)
            a = fl.uq_pth_root(model.ring, cval, steps=2)
            if a is None:
                wit.append(f"no p^2-root for a dilated target (p={p}, run {i})")
                continue
            if br.pow_int(br.pow_int(a, p), p) != cval:
                wit.append(f"(a^p)^p != c at (p={p}, run {i})")
        gen = br.variable(model.ring, "u")
        if fl.uq_pth_root(model.ring, gen) is not None:
            wit.append(f"u acquired a p-th root it cannot have (p={p})")
        # the direct Newton route on X^(p^2) - pX - [c] is out of reach:
        # the derivative is divisible by p everywhere
        fring = br.make_field(p, 1)
        ubase = rw.make_ramified_base(p, 1, 1, [-p], 4)
        one = rw.rw_one(ubase, fring)
        zero = rw.rw_zero(ubase, fring)
        coeffs = ([rw.rw_neg(one), rw.rw_from_int(-p, ubase, fring)]
                  + [zero] * (p * p - 2) + [one])
        try:
            lf.make_hensel_problem(tuple(coeffs), one, 3)
            wit.append(f"inseparable problem accepted at p={p}")
        except lf.DerivativeNotUnit:
            pass
    return not wit, wit


def _check_reduced_quotient(cfg):
    wit = []
    sbar = br.make_ring(
        "frac base=(ff p=3 e=1) vars=x,t depth_p=0 depth_2=0 laurent=false "
        "mod=t^2")
    t = br.variable(sbar, "t")
    if t.is_zero() or not br.mul(t, t).is_zero():
        wit.append("t is not a nilpotent witness in the t-presentation")
    norm = br.make_ring(
        "frac base=(ff p=3 e=1) vars=u,s depth_p=0 depth_2=0 laurent=false "
        "mod=s^2")
    u, s = br.variable(norm, "u"), br.variable(norm, "s")
    su = br.mul(s, u)
    # the relation t^2 - p*x maps to (su)^2 - s^2 u^2; p also lifts to s^2,
    # so both readings of the image must vanish
    img1 = br.sub(br.mul(su, su), br.mul(br.mul(s, s), br.mul(u, u)))
    img2 = br.sub(br.mul(su, su), br.mul(br.from_int(norm, 3),
                                         br.mul(u, u)))
    if not img1.is_zero():
        wit.append("relation image (su)^2 - s^2 u^2 is nonzero")
    if not img2.is_zero():
        wit.append("relation image (su)^2 - p u^2 is nonzero")
    # the u-presentation is a polynomial ring: no nilpotents up to degree 4
    for fp, ee in ((3, 1), (3, 2)):
        ru = br.make_ring(
            f"frac base=(ff p={fp} e={ee}) vars=u depth_p=0 depth_2=0 "
            "laurent=false")
        uvar = br.variable(ru, "u")
        powers = [br.one(ru)]
        for _ in range(4):
            powers.append(br.mul(powers[-1], uvar))
        if ee == 1:
            coeff_space = list(iproduct(range(fp), repeat=5))
        else:
            rng = cfg.rng(f"reduced:{fp}:{ee}")
            coeff_space = [tuple(rng.randrange(fp ** ee) for _ in range(5))
                           for _ in range(200)]
        for vec in coeff_space:
            h = br.zero(ru)
            for k, cv in enumerate(vec):
                if cv:
                    coeff = (tuple(int(d) for d in _base_digits(cv, fp, ee))
                             if ee > 1 else (cv,))
                    h = br.add(h, br.scalar_mul(powers[k], coeff))
            if h.is_zero():
                continue
            sq = br.mul(h, h)
            if sq.is_zero() or br.mul(sq, h).is_zero():
                wit.append(f"nilpotent {h} found in F_{fp}^{ee}[u]")
                return False, wit
    return not wit, wit


def _base_digits(n: int, p: int, e: int):
    out = []
    for _ in range(e):
        out.append(n % p)
        n //= p
    return out


def _check_monomial_certificates(cfg):
    wit = []
    ring = br.make_ring(
        "frac base=(ff p=3 e=1) vars=v,w depth_p=0 depth_2=0 laurent=false")
    v, w = br.variable(ring, "v"), br.variable(ring, "w")
    rng = cfg.rng("monomial")
    for i in range(100):
        f = br.pow_int(v, rng.randint(1, 3))
        g = br.pow_int(w, rng.randint(1, 3))
        m, n = rng.randint(1, 2), rng.randint(1, 2)
        h = br.random_element(ring, rng, max_terms=3, exp_bound=2)
        a = br.mul(h, br.pow_int(f, m))
        b = br.mul(h, br.pow_int(g, n))
        res = br.intersection_witness(f, g, a, b, m, n)
        if res.status != "member":
            wit.append(f"membership refused on instance {i}: {res.note}")
            continue
        bad = br.add(a, br.one(ring))
        res2 = br.intersection_witness(f, g, bad, b, m, n)
        if res2.status == "member":
            wit.append(f"perturbed instance {i} wrongly certified")
    # radical certificates versus exhaustive nilpotent search
    for fp, ee in ((2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)):
        qq = fp ** ee
        rng2 = cfg.rng(f"radical:{qq}")
        for deg in (2, 3, 4):
            body = [rng2.randrange(fp) for _ in range(deg)]
            mod_text = "+".join([f"T^{deg}"]
                                + [f"{c}*T^{k}" if k else f"{c}"
                                   for k, c in enumerate(body) if c])
            uq = br.make_ring(
                f"uq base=(ff p={fp} e={ee}) var=T modulus={mod_text}")
            rep = br.is_reduced_univariate(uq)
            tvar = br.variable(uq, "T")
            powers = [br.one(uq)]
            for _ in range(deg - 1):
                powers.append(br.mul(powers[-1], tvar))
            found = None
            for vec in iproduct(range(qq), repeat=deg):
                h = br.zero(uq)
                for k, cv in enumerate(vec):
                    if cv:
                        h = br.add(h, br.scalar_mul(
                            powers[k],
                            tuple(_base_digits(cv, fp, ee))))
                if h.is_zero():
                    continue
                if br.pow_int(h, deg).is_zero():
                    found = h
                    break
            if rep.reduced and found is not None:
                wit.append(f"reduced verdict but nilpotent {found} "
                           f"in q={qq} deg={deg}")
            if not rep.reduced:
                if found is None:
                    wit.append(f"non-reduced verdict without any nilpotent "
                               f"at q={qq} deg={deg}")
                wv = rep.witness
                if wv is None or wv.is_zero() or not br.pow_int(
                        wv, rep.nilpotency).is_zero():
                    wit.append(f"witness fails at q={qq} deg={deg}")
    return not wit, wit


def _check_compatible_sequences(cfg):
    wit = []
    for fp, depth in ((2, 3), (3, 2), (5, 2)):
        ring = br.make_ring(
            f"uq base=(ff p={fp} e=1) var=u modulus=u^{fp ** depth}")
        rng = cfg.rng(f"fontaine:{fp}:{depth}")
        length = 3

        def sample():
            top = br.random_element(ring, rng, max_terms=2, exp_bound=3)
            seq = [br.frobenius(top, k) for k in range(length - 1, -1, -1)]
            return fl.fontaine_make(ring, seq)

        arith = fl.fontaine_arith
        for i in range(60):
            x, y, z = sample(), sample(), sample()
            if arith("add", arith("add", x, y), z).seq != \
                    arith("add", x, arith("add", y, z)).seq:
                wit.append(f"associativity fails at (p={fp}, run {i})")
            if arith("mul", x, y).seq != arith("mul", y, x).seq:
                wit.append(f"commutativity fails at (p={fp}, run {i})")
            lhs = arith("mul", x, arith("add", y, z)).seq
            rhs = arith("add", arith("mul", x, y), arith("mul", x, z)).seq
            if lhs != rhs:
                wit.append(f"distributivity fails at (p={fp}, run {i})")
            # each composition of the two shifts is the identity on the part
            # that survives; the deepest term is the price of a round trip
            got = fl.fontaine_shift(fl.fontaine_shift(x, "bwd"), "fwd")
            if got.seq != x.seq[:-1]:
                wit.append(f"fwd(bwd) drifts at (p={fp}, run {i})")
            back = fl.fontaine_shift(fl.fontaine_shift(x, "fwd"), "bwd")
            if back.seq != x.seq[:-1]:
                wit.append(f"bwd(fwd) drifts at (p={fp}, run {i})")
            if wit:
                return False, wit
    return True, wit


def _check_codec_roundtrip(cfg):
    wit = []
    ff = br.make_field(3, 2)
    frac = br.make_ring(
        "frac base=(ff p=3 e=1) vars=x,y depth_p=2 depth_2=1 laurent=true")
    uq = br.make_ring("uq base=(ff p=3 e=1) var=T modulus=T^9")
    base = rw.make_ramified_base(3, 1, 2, [-3, 0], 4)
    fring = br.make_field(3, 1)
    font_ring = br.make_ring("uq base=(ff p=2 e=1) var=u modulus=u^8")
    rng = cfg.rng("codec")
    for i in range(200):
        for ring in (ff, frac, uq):
            v = br.random_element(ring, rng, max_terms=3, exp_bound=2,
                                  denom_depth=1)
            if br.evaluate(ring, br.format_element(v)) != v:
                wit.append(f"element round trip fails: {br.format_element(v)}")
        n = rng.randint(1, 4)
        x = wc.make_witt(uq, [br.random_element(uq, rng, max_terms=2)
                              for _ in range(n)])
        if parse_witt(uq, format_witt(x)) != x:
            wit.append(f"witt round trip fails: {format_witt(x)}")
        r = _rand_rw(base, fring, rng)
        back = parse_rw(base, fring, format_rw(r))
        if back.coords != r.coords or back.precision != r.precision:
            wit.append(f"ramified round trip fails: {format_rw(r)}")
        d = rw.digit_expand(r, rng.randint(1, base.default_precision))
        d2 = parse_digits(base, fring, str(d))
        if d2.digits != d.digits:
            wit.append(f"digit round trip fails: {d}")
        top = br.random_element(font_ring, rng, max_terms=2)
        seq = [br.frobenius(top, k) for k in (2, 1, 0)]
        fv = fl.fontaine_make(font_ring, seq)
        if parse_fontaine(font_ring, str(fv)).seq != fv.seq:
            wit.append(f"sequence round trip fails: {fv}")
        if wit:
            return False, wit
    # byte determinism: canonical output of a fixed command set is stable
    commands = [
        ["witt", "add", "--ring", "ff p=2 e=1", "--n", "2",
         "--x", "W{1;0}", "--y", "W{1;0}"],
        ["eval", "--ring", "frac base=(ff p=3 e=1) vars=x depth_p=2 "
         "depth_2=0 laurent=true", "--expr", "(x+1)*(x-1)"],
        ["poly", "dump", "--p", "2", "--kind", "product", "--level", "2"],
        ["frob", "report", "--ring",
         "uq base=(ff p=3 e=1) var=T modulus=T^9"],
        ["rw", "expand", "--base", "rw p=3 e=1 eis=(X^2-3) prec=6",
         "--ring", "ff p=3 e=1", "--x",
         "RW[base=b0, N=6]{ W{1;0;0;0} | W{1;0;0;0} }"],
    ]
    outputs = []
    for _ in range(2):
        chunks = []
        for cmd in commands:
            out = StringIO()
            code = main(cmd, stdout=out, stderr=StringIO())
            if code != 0:
                wit.append(f"command {cmd[:2]} exited {code}")
            chunks.append(out.getvalue())
        outputs.append(chunks)
    if outputs[0] != outputs[1]:
        wit.append("re-running the fixed command set changed its output")
    if outputs[0][0] != "W{0;1}\n":
        wit.append(f"witt add canonical output drifted: {outputs[0][0]!r}")
    if "KERNEL_GENERATORS: T^3" not in outputs[0][3]:
        wit.append("perfection report lost its kernel generator")
    return not wit, wit


CHECKS = (
    ("structural-tables", "2", _check_structural_tables),
    ("ghost-oracle", "2", _check_ghost_oracle),
    ("small-witt-rings", "2", _check_small_witt_rings),
    ("operator-identities", "2", _check_operator_identities),
    ("ramified-digits", "4.5ii", _check_ramified_digits),
    ("twisted-frobenius", "6.2", _check_twisted_frobenius),
    ("square-root-lift", "6.4", _check_square_root_lift),
    ("semiperfect-tower", "8.1+8.2", _check_semiperfect_tower),
    ("reduced-quotient", "4.8", _check_reduced_quotient),
    ("monomial-certificates", "3.6+3.8", _check_monomial_certificates),
    ("compatible-sequences", "8.3", _check_compatible_sequences),
    ("codec-roundtrip", "io", _check_codec_roundtrip),
)


def run_verify_suite(filter_text: str | None = None, seed: int = DEFAULT_SEED,
                     cache_dir: str | None = None) -> list[CheckResult]:
    cfg = _SuiteConfig(seed, cache_dir)
    results = []
    for name, anchor, fn in CHECKS:
        if filter_text and filter_text not in name and \
                filter_text not in anchor:
            continue
        t0 = time.perf_counter()
        try:
            ok, witnesses = fn(cfg)
        except Exception as exc:  # a crashed check is a failed check
            ok, witnesses = False, [f"raised {type(exc).__name__}: {exc}"]
        results.append(CheckResult(name, anchor, ok,
                                   time.perf_counter() - t0, tuple(witnesses)))
    return results


def render_verify(results, filter_text, seed, out, err) -> int:
    out.write(f"SEED: {seed}\n")
    for res in results:
        status = "PASS" if res.ok else "FAIL"
        out.write(f"CHECK {res.name} [{res.anchor}]: {status}\n")
        err.write(f"{res.name}: {res.elapsed:.2f}s\n")
        if not res.ok:
            for witness in res.witnesses:
                out.write(f"  WITNESS: {witness}\n")
            out.write(f"  REPRO: wittforge verify paper-examples "
                      f"--filter {res.name} --seed {seed}\n")
    if not results:
        out.write(f"NOTE: no checks match filter {filter_text!r}\n")
    verdict = all(res.ok for res in results)
    out.write(f"VERDICT: {'PASS' if verdict else 'FAIL'}\n")
    return 0 if verdict else 1


# ---------------------------------------------------------------------------
# command handlers

def _cmd_ring(ns, out, err) -> int:
    ring = br.make_ring(ns.ring)
    kind = {br.FiniteFieldSpec: "ff", br.FracLaurentRing: "frac",
            br.UnivariateQuotient: "uq"}[type(ring)]
    out.write(f"KIND: {kind}\n")
    out.write(f"DESCRIPTOR: {br.canonical_descriptor(ring)}\n")
    out.write(f"CHAR: {br.ring_char(ring)}\n")
    out.write("VERDICT: PASS\n")
    return 0


def _cmd_eval(ns, out, err) -> int:
    ring = br.make_ring(ns.ring)
    out.write(br.format_element(br.evaluate(ring, ns.expr)) + "\n")
    return 0


def _cmd_witt(ns, out, err) -> int:
    ring = br.make_ring(ns.ring)
    op = ns.witt_op
    if op == "teich":
        a = br.evaluate(ring, ns.a)
        out.write(format_witt(wc.teichmuller(a, ns.n)) + "\n")
        return 0
    x = parse_witt(ring, ns.x, ns.n)
    if op in ("add", "mul"):
        y = parse_witt(ring, ns.y, ns.n)
        res = wc.witt_add(x, y) if op == "add" else wc.witt_mul(x, y)
    elif op == "neg":
        res = wc.witt_neg(x)
    elif op == "frob":
        res = wc.frobenius_map(x, ns.k)
    elif op == "versch":
        res = wc.verschiebung(x)
    elif op == "project":
        out.write(br.format_element(wc.project(x)) + "\n")
        return 0
    else:  # divp
        res = wc.divide_by_p(x)
    out.write(format_witt(res) + "\n")
    return 0


def _cmd_poly(ns, out, err) -> int:
    cache = ns.out if ns.poly_op == "gen" else ns.cache_dir
    t0 = time.perf_counter()
    table = wc.structural_polys(ns.p, ns.level, ns.kind, cache_dir=cache)
    err.write(f"table ready in {time.perf_counter() - t0:.2f}s\n")
    if ns.poly_op == "dump":
        for line in wc.table_lines(table):
            out.write(line + "\n")
        return 0
    payload = wc._table_payload(ns.p, ns.kind, ns.level, table.polys)
    if ns.out:
        # write explicitly: a warm in-process table would otherwise skip disk
        path = os.path.join(ns.out, "tables",
                            f"p{ns.p}_{ns.kind}_l{ns.level}.json")
        wc._write_cache(path, payload)
    out.write(f"TABLE: p={ns.p} kind={ns.kind} level={ns.level}\n")
    out.write("TERMS: " + " ".join(str(len(poly)) for poly in table.polys)
              + "\n")
    out.write(f"DIGEST: {wc._payload_digest(payload)}\n")
    if ns.out:
        out.write(f"DIR: {ns.out}\n")
    return 0


def _cmd_rw(ns, out, err) -> int:
    base = parse_base(ns.base)
    ring = br.make_ring(ns.ring)
    op = ns.rw_op
    if op in ("add", "mul"):
        x = parse_rw(base, ring, ns.x)
        y = parse_rw(base, ring, ns.y)
        res = rw.rw_arith(op, x, y)
    elif op == "inv":
        res = rw.rw_inv(parse_rw(base, ring, ns.x))
    elif op == "frobpi":
        res = rw.frobenius_pi(parse_rw(base, ring, ns.x), ns.k)
    elif op == "reduce":
        out.write(br.format_element(
            rw.reduce_mod_pi(parse_rw(base, ring, ns.x))) + "\n")
        return 0
    elif op == "divpi":
        res = rw.divide_by_pi(parse_rw(base, ring, ns.x))
    elif op == "expand":
        x = parse_rw(base, ring, ns.x)
        out.write(str(rw.digit_expand(x, ns.digits)) + "\n")
        return 0
    elif op == "assemble":
        res = rw.digits_assemble(parse_digits(base, ring, ns.digits))
    elif op == "embed":
        res = rw.embed_expr(base, ring, ns.expr, ns.prec)
    else:  # twist
        res = rw.twisted_product(base, ring, ns.expr, ns.n)
    out.write(format_rw(res) + "\n")
    return 0


def _cmd_frob(ns, out, err) -> int:
    if ns.frob_op == "report":
        ring = br.make_ring(ns.ring)
        t0 = time.perf_counter()
        rep = fl.perfection_report(ring, budget=ns.budget,
                                   samples=ns.samples, seed=ns.seed)
        err.write(f"report in {time.perf_counter() - t0:.2f}s\n")
        out.write(fl.render_perfection_report(rep) + "\n")
        return 0 if rep.verdict else 1
    rep = fl.semiperfect_tower_check(ns.p, ns.depth, samples=ns.samples,
                                     seed=ns.seed)
    out.write(fl.render_tower_report(rep) + "\n")
    return 0 if rep.verdict else 1


def _cmd_fontaine(ns, out, err) -> int:
    ring = br.make_ring(ns.ring)
    op = ns.fontaine_op
    if op == "make":
        out.write(str(parse_fontaine(ring, ns.seq)) + "\n")
        return 0
    if op in ("add", "mul"):
        x = parse_fontaine(ring, ns.x)
        y = parse_fontaine(ring, ns.y)
        out.write(str(fl.fontaine_arith(op, x, y)) + "\n")
        return 0
    out.write(str(fl.fontaine_shift(parse_fontaine(ring, ns.x), ns.dir))
              + "\n")
    return 0


def _cmd_hensel(ns, out, err) -> int:
    base = parse_base(ns.base)
    ring = br.make_ring(ns.ring)
    coeffs = parse_poly_x(base, ring, ns.poly)
    seed = rw.embed_expr(base, ring, ns.seed_digit)
    prob = lf.make_hensel_problem(coeffs, seed, ns.prec)
    t0 = time.perf_counter()
    root, steps = lf.hensel_lift_verbose(prob)
    err.write(f"lift in {time.perf_counter() - t0:.2f}s\n")
    out.write(str(rw.digit_expand(root, ns.prec)) + "\n")
    for st in steps:
        ordtxt = f"ord>={st.window}" if st.ord_value is None \
            else f"ord={st.ord_value}"
        out.write(f"STEP {st.index}: window={st.window} {ordtxt} "
                  f"dord={st.ord_derivative}\n")
    return 0


def _cmd_verify(ns, out, err) -> int:
    cache_dir = "" if ns.no_cache else ns.cache_dir
    results = run_verify_suite(ns.filter, ns.seed, cache_dir)
    return render_verify(results, ns.filter, ns.seed, out, err)


def _cmd_bench(ns, out, err) -> int:
    for level in range(ns.level + 1):
        t0 = time.perf_counter()
        table = wc.structural_polys(ns.p, level, ns.kind, cache_dir="")
        wall = time.perf_counter() - t0
        poly = table.polys[level]
        bits = max((abs(c).bit_length() for c in poly.values()), default=0)
        out.write(f"LEVEL {level}: kind={ns.kind} terms={len(poly)} "
                  f"peak_bits={bits} wall={wall:.3f}s\n")
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _add_ring(p):
    p.add_argument("--ring", required=True, help="ring descriptor")


def _add_base(p):
    p.add_argument("--base", required=True,
                   help="ramified base, e.g. \"rw p=3 e=1 eis=(X^2-3) prec=8\"")
    _add_ring(p)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="wittforge",
        description="truncated and ramified Witt vector arithmetic")
    sub = top.add_subparsers(dest="cmd", required=True)

    ring = sub.add_parser("ring", help="ring descriptor utilities")
    ringsub = ring.add_subparsers(dest="ring_op", required=True)
    rc = ringsub.add_parser("check", help="validate a ring descriptor")
    _add_ring(rc)
    rc.set_defaults(handler=_cmd_ring)

    ev = sub.add_parser("eval", help="evaluate an element expression")
    _add_ring(ev)
    ev.add_argument("--expr", required=True)
    ev.set_defaults(handler=_cmd_eval)

    witt = sub.add_parser("witt", help="truncated Witt vector operations")
    wsub = witt.add_subparsers(dest="witt_op", required=True)
    for opname in ("add", "mul", "neg", "frob", "versch", "teich",
                   "project", "divp"):
        wp = wsub.add_parser(opname)
        _add_ring(wp)
        wp.add_argument("--n", type=int, required=True, help="length")
        if opname in ("add", "mul"):
            wp.add_argument("--x", required=True)
            wp.add_argument("--y", required=True)
        elif opname == "teich":
            wp.add_argument("--a", required=True, help="element expression")
        else:
            wp.add_argument("--x", required=True)
        if opname == "frob":
            wp.add_argument("--k", type=int, default=1)
        wp.set_defaults(handler=_cmd_witt)

    poly = sub.add_parser("poly", help="structural polynomial tables")
    psub = poly.add_subparsers(dest="poly_op", required=True)
    for opname in ("gen", "dump"):
        pp = psub.add_parser(opname)
        pp.add_argument("--p", type=int, required=True)
        pp.add_argument("--kind", required=True,
                        choices=("sum", "product", "negation"))
        pp.add_argument("--level", type=int, required=True)
        if opname == "gen":
            pp.add_argument("--out", default=None, help="table directory")
        else:
            pp.add_argument("--cache-dir", default=None)
        pp.set_defaults(handler=_cmd_poly)

    rwp = sub.add_parser("rw", help="ramified Witt vector operations")
    rsub = rwp.add_subparsers(dest="rw_op", required=True)
    for opname in ("add", "mul", "inv", "frobpi", "reduce", "divpi",
                   "expand", "assemble", "embed", "twist"):
        rp = rsub.add_parser(opname)
        _add_base(rp)
        if opname in ("add", "mul"):
            rp.add_argument("--x", required=True)
            rp.add_argument("--y", required=True)
        elif opname in ("inv", "frobpi", "reduce", "divpi", "expand"):
            rp.add_argument("--x", required=True)
        if opname == "frobpi":
            rp.add_argument("--k", type=int, default=1)
        if opname == "expand":
            rp.add_argument("--digits", type=int, default=None)
        if opname == "assemble":
            rp.add_argument("--digits", required=True,
                            help="DIGITS[..]{..} literal")
        if opname in ("embed", "twist"):
            rp.add_argument("--expr", required=True)
        if opname == "embed":
            rp.add_argument("--prec", type=int, default=None)
        if opname == "twist":
            rp.add_argument("--n", type=int, required=True)
        rp.set_defaults(handler=_cmd_rw)

    frob = sub.add_parser("frob", help="perfection reports")
    fsub = frob.add_subparsers(dest="frob_op", required=True)
    fr = fsub.add_parser("report")
    _add_ring(fr)
    fr.add_argument("--budget", type=int, default=4)
    fr.add_argument("--samples", type=int, default=10)
    fr.add_argument("--seed", type=int, default=0)
    fr.set_defaults(handler=_cmd_frob)
    ft = fsub.add_parser("tower")
    ft.add_argument("--p", type=int, required=True)
    ft.add_argument("--depth", type=int, required=True)
    ft.add_argument("--samples", type=int, default=8)
    ft.add_argument("--seed", type=int, default=0)
    ft.set_defaults(handler=_cmd_frob)

    font = sub.add_parser("fontaine", help="compatible p-power sequences")
    fosub = font.add_subparsers(dest="fontaine_op", required=True)
    for opname in ("make", "add", "mul", "shift"):
        fo = fosub.add_parser(opname)
        _add_ring(fo)
        if opname == "make":
            fo.add_argument("--seq", required=True, help="FONT{..} literal")
        elif opname == "shift":
            fo.add_argument("--x", required=True)
            fo.add_argument("--dir", required=True, choices=("fwd", "bwd"))
        else:
            fo.add_argument("--x", required=True)
            fo.add_argument("--y", required=True)
        fo.set_defaults(handler=_cmd_fontaine)

    hen = sub.add_parser("hensel", help="certified Newton lifting")
    hsub = hen.add_subparsers(dest="hensel_op", required=True)
    hl = hsub.add_parser("lift")
    _add_base(hl)
    hl.add_argument("--poly", required=True, help="polynomial in X")
    hl.add_argument("--seed-digit", required=True, dest="seed_digit")
    hl.add_argument("--prec", type=int, required=True)
    hl.set_defaults(handler=_cmd_hensel)

    ver = sub.add_parser("verify", help="run the named-example suite")
    ver.add_argument("suite", choices=("paper-examples",))
    ver.add_argument("--filter", default=None)
    ver.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ver.add_argument("--cache-dir", default=None)
    ver.add_argument("--no-cache", action="store_true")
    ver.set_defaults(handler=_cmd_verify)

    ben = sub.add_parser("bench", help="generation benchmarks")
    bsub = ben.add_subparsers(dest="bench_op", required=True)
    bp = bsub.add_parser("poly")
    bp.add_argument("--p", type=int, required=True)
    bp.add_argument("--level", type=int, required=True)
    bp.add_argument("--kind", default="product",
                    choices=("sum", "product", "negation"))
    bp.set_defaults(handler=_cmd_bench)
    return top


def _exit_code(exc: WittforgeError) -> int:
    if isinstance(exc, (DepthExhausted, BudgetExceeded, LevelTooLarge)):
        return 3
    if isinstance(exc, (NoConvergence, CacheCorrupt)):
        return 1
    return 2


def main(argv=None, stdout=None, stderr=None) -> int:
    out = sys.stdout if stdout is None else stdout
    err = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return ns.handler(ns, out, err)
    except WittforgeError as exc:
        err.write(f"error: {exc}\n")
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
