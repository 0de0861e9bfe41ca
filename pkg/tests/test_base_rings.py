import random
from fractions import Fraction

import pytest

from wittforge import base_rings as br
from wittforge.errors import (
    DepthExhausted,
    LatticeError,
    NoRoot,
    NotAUnit,
    SpecParseError,
)


def F(p, e=1, modulus=None):
    return br.make_field(p, e, modulus)


class TestFiniteField:
    def test_f4_table(self):
        # F_4 = F_2[u]/(u^2+u+1): u * u = u + 1
        f4 = F(2, 2)
        assert f4.modulus == (1, 1, 1)
        u = f4.gen()
        assert f4.cmul(u, u) == f4.cadd(u, f4.one())

    def test_f9_inverse_roundtrip(self):
        f9 = F(3, 2)
        for a in f9.iter_elements():
            if a == f9.zero():
                continue
            assert f9.cmul(a, f9.cinv(a)) == f9.one()

    def test_frobenius_order(self):
        f8 = F(2, 3)
        for a in f8.iter_elements():
            assert f8.cfrob(a, 3) == a
            assert f8.cfrob(f8.cfrob(a, 1), -1) == a

    def test_frob_f4_generator(self):
        f4 = F(2, 2)
        u = f4.gen()
        # u^2 = u + 1
        assert f4.cfrob(u, 1) == f4.cadd(u, f4.one())

    def test_default_modulus_deterministic(self):
        assert F(2, 2).modulus == F(2, 2).modulus
        assert F(3, 2).modulus == (1, 0, 1)  # u^2 + 1 irreducible over F_3

    def test_bad_p_rejected(self):
        with pytest.raises(SpecParseError):
            F(4)
        with pytest.raises(SpecParseError):
            F(1)

    def test_reducible_modulus_rejected(self):
        with pytest.raises(SpecParseError):
            F(2, 2, (1, 0, 1))  # u^2+1 = (u+1)^2 over F_2

    def test_nth_root(self):
        f3 = F(3)
        # cubes in F_3 are identity: x^3 = x
        assert f3.nth_root((2,), 3) == (2,)
        f4 = F(2, 2)
        u = f4.gen()
        # every element is a square in F_4
        sq = f4.cmul(u, u)
        assert f4.cpow(f4.nth_root(sq, 2), 2) == sq
        with pytest.raises(NoRoot):
            F(3).nth_root((2,), 2)  # 2 is not a square mod 3


class TestDescriptorRoundtrip:
    CASES = [
        "ff p=5 e=1",
        "ff p=2 e=2 modulus=u^2+u+1",
        "ff p=3 e=2 modulus=u^2+1",
        "frac base=(ff p=3 e=1) vars=x depth_p=2 depth_2=1 laurent=true",
        "frac base=(ff p=2 e=2 modulus=u^2+u+1) vars=x,y depth_p=1 depth_2=0 laurent=false",
        "frac base=(ff p=3 e=1) vars=x,y depth_p=0 depth_2=0 laurent=false mod=x^2,y^3",
        "uq base=(ff p=3 e=1) var=T modulus=T^2+1",
        "uq base=(ff p=2 e=1) var=T modulus=T^3+T+1",
    ]

    @pytest.mark.parametrize("desc", CASES)
    def test_parse_print_fixpoint(self, desc):
        ring = br.make_ring(desc)
        canon = br.canonical_descriptor(ring)
        assert br.make_ring(canon) == ring
        assert br.canonical_descriptor(br.make_ring(canon)) == canon

    def test_default_modulus_in_canonical_form(self):
        ring = br.make_ring("ff p=2 e=2")
        assert br.canonical_descriptor(ring) == "ff p=2 e=2 modulus=u^2+u+1"

    def test_lattice_b(self):
        ring = br.make_ring("frac base=(ff p=3 e=1) vars=x depth_p=2 depth_2=1 laurent=true")
        assert ring.lattice_b == 18

    def test_quotient_needs_polynomial_ring(self):
        with pytest.raises(SpecParseError):
            br.make_ring("frac base=(ff p=3 e=1) vars=x depth_p=0 depth_2=0 laurent=true mod=x^2")

    def test_rejects_trailing_junk(self):
        with pytest.raises(SpecParseError):
            br.make_ring("ff p=5 e=1 bogus=7")


class TestElements:
    def test_field_constant_arith(self):
        ring = br.make_ring("ff p=7 e=1")
        a = br.from_int(ring, 3)
        b = br.from_int(ring, 5)
        assert a + b == br.from_int(ring, 1)
        assert a * b == br.from_int(ring, 1)
        assert -a == br.from_int(ring, 4)

    def test_fractional_exponent_product(self):
        ring = br.make_ring("frac base=(ff p=3 e=1) vars=x depth_p=2 depth_2=0 laurent=false")
        a = br.evaluate(ring, "x^(1/3)")
        b = br.evaluate(ring, "x^(1/9)")
        assert a * b == br.evaluate(ring, "x^(4/9)")
        assert br.format_element(a * b) == "x^(4/9)"

    def test_lattice_violation(self):
        ring = br.make_ring("frac base=(ff p=3 e=1) vars=x depth_p=1 depth_2=0 laurent=false")
        with pytest.raises(LatticeError):
            br.evaluate(ring, "x^(1/9)")
        with pytest.raises(LatticeError):
            br.evaluate(ring, "x^(-1)")

    def test_monomial_quotient_kills_products(self):
        ring = br.make_ring("frac base=(ff p=3 e=1) vars=x,y depth_p=0 depth_2=0 laurent=false mod=x^2,y^3")
        x = br.evaluate(ring, "x")
        assert (x * x).is_zero()
        y3 = br.evaluate(ring, "y^2") * br.evaluate(ring, "y")
        assert y3.is_zero()
        assert not br.evaluate(ring, "x*y^2").is_zero()

    def test_uq_reduction(self):
        ring = br.make_ring("uq base=(ff p=3 e=1) var=T modulus=T^2+1")
        t = br.evaluate(ring, "T")
        assert t * t == br.from_int(ring, -1)
        assert br.format_element(t * t) == "2"

    def test_canonical_term_order(self):
        ring = br.make_ring("frac base=(ff p=5 e=1) vars=x depth_p=0 depth_2=0 laurent=false")
        s = br.format_element(br.evaluate(ring, "1+x+3*x^2"))
        assert s == "3*x^2+x+1"
        assert br.evaluate(ring, s) == br.evaluate(ring, "1+x+3*x^2")

    def test_multiterm_field_coeff_parenthesized(self):
        ring = br.make_ring("frac base=(ff p=2 e=2 modulus=u^2+u+1) vars=x depth_p=0 depth_2=0 laurent=false")
        s = br.format_element(br.evaluate(ring, "(u+1)*x"))
        assert s == "(u+1)*x"
        assert br.evaluate(ring, s) == br.evaluate(ring, "(u+1)*x")

    def test_parse_print_identity_random(self):
        rng = random.Random(7)
        rings = [
            br.make_ring("ff p=5 e=1"),
            br.make_ring("ff p=2 e=2"),
            br.make_ring("frac base=(ff p=3 e=1) vars=x,y depth_p=1 depth_2=1 laurent=true"),
            br.make_ring("uq base=(ff p=3 e=2) var=T modulus=T^3+2*T+1"),
        ]
        for ring in rings:
            for _ in range(40):
                x = br.random_element(ring, rng, max_terms=4, denom_depth=1)
                assert br.evaluate(ring, br.format_element(x)) == x

    def test_inverse_of_laurent_monomial(self):
        ring = br.make_ring("frac base=(ff p=3 e=1) vars=x depth_p=1 depth_2=0 laurent=true")
        a = br.evaluate(ring, "2*x^(1/3)")
        inv = br.invert(a)
        assert a * inv == br.one(ring)
        assert br.format_element(inv) == "2*x^(-1/3)"
        with pytest.raises(NotAUnit):
            br.invert(br.evaluate(ring, "1+x"))

    def test_uq_inverse(self):
        ring = br.make_ring("uq base=(ff p=2 e=1) var=T modulus=T^3+T+1")
        t = br.evaluate(ring, "T")
        assert t * br.invert(t) == br.one(ring)
        ring2 = br.make_ring("uq base=(ff p=3 e=1) var=T modulus=T^2")
        with pytest.raises(NotAUnit):
            br.invert(br.evaluate(ring2, "T"))


class TestFrobenius:
    def test_positive_on_sums(self):
        ring = br.make_ring("frac base=(ff p=3 e=1) vars=x depth_p=1 depth_2=0 laurent=false")
        a = br.evaluate(ring, "1+x")
        assert br.frobenius(a, 1) == br.evaluate(ring, "1+x^3")

    def test_inverse_on_perfect_part(self):
        ring = br.make_ring("frac base=(ff p=3 e=1) vars=x depth_p=2 depth_2=0 laurent=false")
        a = br.evaluate(ring, "x")
        assert br.frobenius(a, -2) == br.evaluate(ring, "x^(1/9)")
        with pytest.raises(DepthExhausted):
            br.frobenius(a, -3)

    def test_depth_exhaustion_message_names_denominator(self):
        ring = br.make_ring("frac base=(ff p=2 e=1) vars=x depth_p=1 depth_2=0 laurent=false")
        with pytest.raises(DepthExhausted):
            br.frobenius(br.evaluate(ring, "x^(1/2)"), -1)

    def test_field_coefficients_get_rooted(self):
        ring = br.make_ring("frac base=(ff p=2 e=2) vars=x depth_p=1 depth_2=0 laurent=false")
        u_x = br.evaluate(ring, "u*x^2")
        back = br.frobenius(u_x, -1)
        assert br.frobenius(back, 1) == u_x

    def test_uq_representative_rule(self):
        ring = br.make_ring("uq base=(ff p=2 e=1) var=T modulus=T^4+T^2")
        sq = br.evaluate(ring, "T^2")
        assert br.frobenius(sq, -1) == br.evaluate(ring, "T")
        with pytest.raises(NoRoot):
            br.frobenius(br.evaluate(ring, "T"), -1)

    def test_roundtrip_random(self):
        rng = random.Random(11)
        ring = br.make_ring("frac base=(ff p=3 e=2) vars=x,y depth_p=2 depth_2=0 laurent=true")
        for _ in range(25):
            a = br.random_element(ring, rng, denom_depth=1)
            assert br.frobenius(br.frobenius(a, -1), 1) == a
            assert br.frobenius(br.frobenius(a, 2), -2) == a

    def test_additive_and_multiplicative(self):
        rng = random.Random(13)
        ring = br.make_ring("frac base=(ff p=5 e=1) vars=x depth_p=1 depth_2=0 laurent=false")
        for _ in range(20):
            a = br.random_element(ring, rng)
            b = br.random_element(ring, rng)
            assert br.frobenius(a + b, 1) == br.frobenius(a, 1) + br.frobenius(b, 1)
            assert br.frobenius(a * b, 1) == br.frobenius(a, 1) * br.frobenius(b, 1)


class TestRadicalMachinery:
    def test_radical_strips_multiplicity(self):
        f3 = F(3)
        # g = T^2 (T+1)^3 ; radical = T(T+1)
        t2 = [(0,), (0,), (1,)]
        tp1 = [(1,), (1,)]
        g = br._fq_mul(f3, t2, br._fq_pow(f3, tp1, 3))
        rad = br.fq_radical(f3, g)
        assert rad == br._fq_monic(f3, br._fq_mul(f3, [(0,), (1,)], tp1))

    def test_radical_of_pth_power(self):
        f2 = F(2)
        # g = T^8 over F_2: derivative vanishes identically
        g = [(0,)] * 8 + [(1,)]
        assert br.fq_radical(f2, g) == [(0,), (1,)]

    def test_multiplicity_layers(self):
        f3 = F(3)
        t = [(0,), (1,)]
        tp1 = [(1,), (1,)]
        tp2 = [(2,), (1,)]
        g = br._fq_mul(f3, br._fq_mul(f3, t, br._fq_pow(f3, tp1, 3)),
                       br._fq_pow(f3, tp2, 3))
        layers = dict(br.fq_multiplicity_layers(f3, g))
        assert layers[1] == t
        assert layers[3] == br._fq_monic(f3, br._fq_mul(f3, tp1, tp2))
        assert set(layers) == {1, 3}

    def test_reduced_report_squarefree(self):
        ring = br.make_ring("uq base=(ff p=3 e=1) var=T modulus=T^2+1")
        rep = br.is_reduced_univariate(ring)
        assert rep.reduced and rep.witness is None

    def test_reduced_report_t_squared(self):
        ring = br.make_ring("uq base=(ff p=3 e=1) var=T modulus=T^2")
        rep = br.is_reduced_univariate(ring)
        assert not rep.reduced
        assert rep.witness == br.evaluate(ring, "T")
        assert br.pow_int(rep.witness, rep.nilpotency).is_zero()
        assert not br.pow_int(rep.witness, rep.nilpotency - 1).is_zero()

    def test_reduced_report_frobenius_kernel_shape(self):
        ring = br.make_ring("uq base=(ff p=2 e=1) var=T modulus=T^2+1")
        # T^2+1 = (T+1)^2 over F_2, so T+1 is nilpotent
        rep = br.is_reduced_univariate(ring)
        assert not rep.reduced
        assert rep.witness == br.evaluate(ring, "T+1")
        assert rep.nilpotency == 2


class TestIntersectionWitness:
    def setup_method(self):
        self.ring = br.make_ring(
            "frac base=(ff p=3 e=1) vars=x,y depth_p=0 depth_2=0 laurent=false")

    def ev(self, s):
        return br.evaluate(self.ring, s)

    def test_member_case(self):
        # a = x^2 y, b = x y^3: a*g^n = b*f^m with f=x, g=y, m=1, n=2 -> h = x*y
        f, g = self.ev("x"), self.ev("y")
        a, b = self.ev("x^2*y"), self.ev("x*y^3")
        res = br.intersection_witness(f, g, a, b, 1, 2)
        assert res.status == "member"
        assert res.element == self.ev("x*y")

    def test_refuted_case(self):
        f, g = self.ev("x"), self.ev("y")
        a, b = self.ev("x^2*y"), self.ev("y^3")
        res = br.intersection_witness(f, g, a, b, 1, 2)
        assert res.status == "refuted"

    def test_not_applicable_shared_support(self):
        f, g = self.ev("x"), self.ev("x*y")
        res = br.intersection_witness(f, g, self.ev("x"), self.ev("x"), 1, 1)
        assert res.status == "not_applicable"

    def test_not_applicable_laurent(self):
        ring = br.make_ring(
            "frac base=(ff p=3 e=1) vars=x,y depth_p=0 depth_2=0 laurent=true")
        f, g = br.evaluate(ring, "x"), br.evaluate(ring, "y")
        res = br.intersection_witness(f, g, f, g, 1, 1)
        assert res.status == "not_applicable"

    def test_member_with_coefficients(self):
        f, g = self.ev("2*x"), self.ev("y")
        a, b = self.ev("2*x*y^2"), self.ev("y^3")
        res = br.intersection_witness(f, g, a, b, 1, 1)
        assert res.status == "member"
        assert res.element == self.ev("y^2")

    def test_random_members_verify(self):
        rng = random.Random(5)
        f, g = self.ev("x"), self.ev("y")
        for _ in range(20):
            h = br.random_element(self.ring, rng, max_terms=3, allow_zero=False)
            m = rng.randint(1, 3)
            n = rng.randint(1, 3)
            a = h * br.pow_int(f, m)
            b = h * br.pow_int(g, n)
            res = br.intersection_witness(f, g, a, b, m, n)
            assert res.status == "member"
            assert res.element == h
