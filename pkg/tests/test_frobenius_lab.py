import random

import pytest

from wittforge import base_rings as br
from wittforge import frobenius_lab as fl
from wittforge.errors import (
    BudgetExceeded,
    DepthExhausted,
    IncompatibleSequence,
    MismatchError,
)


class TestPerfectionReports:
    def test_perfect_fields(self):
        for p, e in [(2, 1), (3, 2), (5, 1)]:
            rep = fl.perfection_report(br.make_field(p, e))
            assert rep.injective_up_to is None
            assert rep.surjective_up_to is None
            assert rep.verdict

    def test_polynomial_ring_witness(self):
        R = br.make_ring("frac base=(ff p=3 e=1) vars=x depth_p=0 depth_2=0 laurent=false")
        rep = fl.perfection_report(R)
        assert rep.injective_up_to is None
        assert rep.surjective_up_to == 0
        aspects = {w[0]: w[1] for w in rep.witnesses}
        assert aspects.get("surjectivity") == "x"
        assert rep.verdict

    @pytest.mark.parametrize("m", [0, 1, 2])
    def test_depth_monotonicity(self, m):
        R = br.make_ring(
            f"frac base=(ff p=3 e=1) vars=x depth_p={m} depth_2=0 "
            f"laurent={'true' if m else 'false'}")
        rep = fl.perfection_report(R, budget=m + 2)
        assert rep.surjective_up_to == m

    def test_nilpotent_quotient_kernel_generator(self):
        U = br.make_ring("uq base=(ff p=3 e=1) var=T modulus=T^9")
        rep = fl.perfection_report(U)
        assert rep.injective_up_to == 0
        assert rep.surjective_up_to == 0
        assert [br.format_element(g) for g in rep.kernel_generators] == ["T^3"]
        assert rep.verdict

    @pytest.mark.parametrize("p,M", [(2, 3), (3, 2), (5, 1)])
    def test_kernel_generator_exponent(self, p, M):
        U = br.make_ring(f"uq base=(ff p={p} e=1) var=T modulus=T^{p ** M}")
        gen = fl.frobenius_kernel_generator(U)
        assert gen == br.pow_int(br.variable(U, "T"), p ** (M - 1))

    def test_irreducible_modulus_is_perfect(self):
        U = br.make_ring("uq base=(ff p=3 e=1) var=T modulus=T^2+1")
        rep = fl.perfection_report(U)
        assert rep.injective_up_to is None
        assert rep.surjective_up_to is None
        assert fl.frobenius_kernel_generator(U) is None

    def test_monomial_quotient_kernel(self):
        R = br.make_ring("frac base=(ff p=2 e=1) vars=x depth_p=0 depth_2=0 "
                         "laurent=false mod=x^4")
        rep = fl.perfection_report(R)
        assert rep.injective_up_to == 0
        assert [br.format_element(g) for g in rep.kernel_generators] == ["x^2"]
        assert rep.verdict

    def test_render_is_deterministic(self):
        U = br.make_ring("uq base=(ff p=3 e=1) var=T modulus=T^9")
        a = fl.render_perfection_report(fl.perfection_report(U))
        b = fl.render_perfection_report(fl.perfection_report(U))
        assert a == b
        assert a.endswith("VERDICT: PASS")


class TestPthRootSolver:
    def test_dilation_ring_roots(self):
        U = br.make_ring("uq base=(ff p=3 e=1) var=u modulus=u^27")
        u = br.variable(U, "u")
        r = fl.uq_pth_root(U, br.pow_int(u, 6))
        assert r == br.pow_int(u, 2)
        assert fl.uq_pth_root(U, u) is None
        assert fl.uq_pth_root(U, br.pow_int(u, 18), steps=2) == br.pow_int(u, 2)

    def test_gaussian_route_matches_brute_force(self):
        # F_4[T]/(T^2): 16 elements, brute-force the image of Frobenius
        U = br.make_ring("uq base=(ff p=2 e=2) var=T modulus=T^2")
        elements = []
        F = U.base
        for c0 in F.iter_elements():
            for c1 in F.iter_elements():
                d = {}
                if c0 != F.zero():
                    d[0] = c0
                if c1 != F.zero():
                    d[1] = c1
                elements.append(br._mk(U, d))
        squares = {tuple(br.pow_int(x, 2).terms) for x in elements}
        for x in elements:
            root = fl.uq_pth_root(U, x)
            if tuple(x.terms) in squares:
                assert root is not None and br.pow_int(root, 2) == x
            else:
                assert root is None

    def test_every_field_element_has_root(self):
        U = br.make_ring("uq base=(ff p=3 e=1) var=T modulus=T^2+1")
        rng = random.Random(3)
        for _ in range(10):
            x = br.random_element(U, rng, max_terms=2)
            r = fl.uq_pth_root(U, x)
            assert r is not None and br.pow_int(r, 3) == x


class TestSemiperfectTower:
    @pytest.mark.parametrize("p", [2, 3, 5])
    @pytest.mark.parametrize("M", [1, 2, 3])
    def test_all_items_pass(self, p, M):
        rep = fl.semiperfect_tower_check(p, M)
        assert rep.verdict, fl.render_tower_report(rep)
        assert {k for k, _, _ in rep.items} == {
            "pi-power-vanishes", "kernel-principal", "residue-iso",
            "cross-level-roots"}

    def test_model_shape(self):
        m = fl.make_tower_model(2, 2)
        assert m.ring.degree == 4
        assert m.pi_element == br.pow_int(br.variable(m.ring, "u"), 2)
        assert br.pow_int(m.pi_element, 2).is_zero()

    def test_pi_represents_p(self):
        # image of p vanishes mod p while pi^p does too: the p = pi^p shadow
        m = fl.make_tower_model(3, 1)
        assert br.from_int(m.ring, 3).is_zero()
        assert br.pow_int(m.pi_element, 3).is_zero()

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            fl.semiperfect_tower_check(5, 5)

    def test_render_has_banner_and_verdict(self):
        txt = fl.render_tower_report(fl.semiperfect_tower_check(3, 1))
        assert "finite stage of a colimit" in txt
        assert txt.endswith("VERDICT: PASS")


def compatible_sequence(ring, top, length):
    p = br.ring_char(ring)
    seq = [top]
    for _ in range(length - 1):
        seq.append(br.pow_int(seq[-1], p))
    return list(reversed(seq))


class TestFontaine:
    RING = br.make_ring("uq base=(ff p=2 e=1) var=u modulus=u^8")

    def test_tower_sequence_is_valid(self):
        u = br.variable(self.RING, "u")
        x = fl.fontaine_make(self.RING, [br.pow_int(u, 4), br.pow_int(u, 2), u])
        assert str(x) == "FONT{u^4;u^2;u}"

    def test_identities(self):
        zero = fl.fontaine_make(self.RING, [0, 0, 0])
        one = fl.fontaine_make(self.RING, [1, 1, 1])
        u = br.variable(self.RING, "u")
        x = fl.fontaine_make(self.RING, compatible_sequence(self.RING, u, 3))
        assert fl.fontaine_arith("add", x, zero).seq == x.seq
        assert fl.fontaine_arith("mul", x, one).seq == x.seq

    def test_incompatible_rejected(self):
        u = br.variable(self.RING, "u")
        with pytest.raises(IncompatibleSequence):
            fl.fontaine_make(self.RING, [u, u])

    def test_mismatch_rejected(self):
        other = br.make_ring("uq base=(ff p=2 e=1) var=u modulus=u^4")
        x = fl.fontaine_make(self.RING, [1, 1])
        y = fl.fontaine_make(other, [1, 1])
        with pytest.raises(MismatchError):
            fl.fontaine_arith("add", x, y)
        with pytest.raises(MismatchError):
            fl.fontaine_arith("mul", x, fl.fontaine_make(self.RING, [1, 1, 1]))

    def test_ring_axioms_componentwise(self):
        rng = random.Random(7)
        ring = self.RING
        for _ in range(6):
            xs = [fl.fontaine_make(ring, compatible_sequence(
                ring, br.random_element(ring, rng, max_terms=2), 3))
                for _ in range(3)]
            x, y, z = xs
            add, mul = (lambda a, b: fl.fontaine_arith("add", a, b),
                        lambda a, b: fl.fontaine_arith("mul", a, b))
            assert add(x, y).seq == add(y, x).seq
            assert mul(x, y).seq == mul(y, x).seq
            assert mul(x, add(y, z)).seq == add(mul(x, y), mul(x, z)).seq
            assert mul(mul(x, y), z).seq == mul(x, mul(y, z)).seq

    def test_shift_round_trip_loses_one_term(self):
        u = br.variable(self.RING, "u")
        x = fl.fontaine_make(self.RING, compatible_sequence(self.RING, u, 4))
        back = fl.fontaine_shift(fl.fontaine_shift(x, "fwd"), "bwd")
        assert back.seq == x.seq[:-1]

    def test_bwd_then_fwd(self):
        u = br.variable(self.RING, "u")
        x = fl.fontaine_make(self.RING, compatible_sequence(self.RING, u, 4))
        again = fl.fontaine_shift(fl.fontaine_shift(x, "bwd"), "fwd")
        assert again.seq == x.seq[:-1]

    def test_fwd_needs_depth(self):
        x = fl.fontaine_make(self.RING, [1])
        with pytest.raises(DepthExhausted):
            fl.fontaine_shift(x, "fwd")
