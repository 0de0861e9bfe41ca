import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wittforge import base_rings as br
from wittforge import witt_core as wc
from wittforge.errors import (
    CacheCorrupt,
    DepthExhausted,
    LevelTooLarge,
    MismatchError,
    NotAUnit,
    NotDivisible,
    NotInGhostImage,
)

F2 = br.make_ring("ff p=2 e=1")
F3 = br.make_ring("ff p=3 e=1")
F5 = br.make_ring("ff p=5 e=1")
F4 = br.make_ring("ff p=2 e=2")
UQ9 = br.make_ring("uq base=(ff p=3 e=2) var=T modulus=T^2+2*T+2")
PX2 = br.make_ring("frac base=(ff p=2 e=1) vars=x depth_p=0 depth_2=0 laurent=false")
PERF3 = br.make_ring("frac base=(ff p=3 e=1) vars=x depth_p=2 depth_2=0 laurent=false")


def rand_witt(ring, rng, n):
    return wc.WittVector(ring, tuple(br.random_element(ring, rng) for _ in range(n)))


class TestStructuralTables:
    def test_frozen_level_one_p2(self):
        s = wc.structural_polys(2, 1, "sum", cache_dir=None)
        assert wc.table_lines(s) == ["S_0 = X0+Y0", "S_1 = -X0*Y0+X1+Y1"]
        p = wc.structural_polys(2, 1, "product", cache_dir=None)
        assert wc.table_lines(p) == ["P_0 = X0*Y0", "P_1 = X0^2*Y1+X1*Y0^2+2*X1*Y1"]

    def test_negation_level_zero(self):
        for p in (2, 3, 5):
            t = wc.structural_polys(p, 0, "negation")
            assert wc.table_lines(t) == ["I_0 = -X0"]

    def test_negation_odd_p_is_coordinatewise(self):
        for p in (3, 5):
            t = wc.structural_polys(p, 3, "negation")
            assert wc.table_lines(t) == [f"I_{i} = -X{i}" for i in range(4)]

    def test_negation_p2_level_one(self):
        t = wc.structural_polys(2, 1, "negation")
        assert wc.table_lines(t) == ["I_0 = -X0", "I_1 = -X0^2-X1"]

    def test_sum_p3_level_one(self):
        t = wc.structural_polys(3, 1, "sum")
        # S_1 = X1 + Y1 - X0^2 Y0 - X0 Y0^2, from (X0+Y0)^3 expansion by hand
        assert wc.table_lines(t)[1] == "S_1 = -X0^2*Y0-X0*Y0^2+X1+Y1"

    @pytest.mark.parametrize("p,level", [(2, 4), (3, 3), (5, 2)])
    @pytest.mark.parametrize("kind", wc.KINDS)
    def test_ghost_identity_symbolic(self, p, level, kind):
        wc.verify_table(wc.structural_polys(p, level, kind))

    def test_level_cap(self):
        with pytest.raises(LevelTooLarge):
            wc.structural_polys(2, 7, "sum")

    def test_term_budget_guard_names_the_estimate(self):
        with pytest.raises(LevelTooLarge) as exc:
            wc.structural_polys(5, 4, "sum")
        assert "130941098" in str(exc.value)

    def test_term_count_bounds_frozen(self):
        # weighted-composition counts, frozen as the feasibility oracle
        assert wc.term_count_bound(3, 4, "sum") == 115602
        assert wc.term_count_bound(2, 5, "sum") == 23400
        assert wc.term_count_bound(5, 3, "product") == 6724
        assert wc.term_count_bound(5, 4, "sum") == 130941098

    def test_bounds_dominate_actual_counts(self):
        for p, level in ((2, 4), (3, 3)):
            t = wc.structural_polys(p, level, "sum")
            assert len(t.polys[level]) <= wc.term_count_bound(p, level, "sum")


class TestTableCache:
    def test_roundtrip(self, tmp_path):
        wc._TABLE_MEMO.clear()
        t1 = wc.structural_polys(3, 2, "sum", cache_dir=str(tmp_path))
        wc._TABLE_MEMO.clear()
        t2 = wc.structural_polys(3, 2, "sum", cache_dir=str(tmp_path))
        assert t1 == t2
        assert (tmp_path / "tables" / "p3_sum_l2.json").exists()

    def test_corrupt_payload_detected(self, tmp_path):
        wc._TABLE_MEMO.clear()
        wc.structural_polys(2, 2, "sum", cache_dir=str(tmp_path))
        path = tmp_path / "tables" / "p2_sum_l2.json"
        doc = json.loads(path.read_text())
        doc["polys"][1][0][1] += 1  # flip one coefficient, keep the checksum
        path.write_text(json.dumps(doc))
        with pytest.raises(CacheCorrupt):
            wc._load_cache(str(path), 2, "sum", 2)

    def test_corrupt_cache_self_heals(self, tmp_path):
        wc._TABLE_MEMO.clear()
        t1 = wc.structural_polys(2, 2, "sum", cache_dir=str(tmp_path))
        path = tmp_path / "tables" / "p2_sum_l2.json"
        path.write_text("not json at all")
        wc._TABLE_MEMO.clear()
        t2 = wc.structural_polys(2, 2, "sum", cache_dir=str(tmp_path))
        assert t1 == t2
        # and the file is good again
        wc._TABLE_MEMO.clear()
        assert wc._load_cache(str(path), 2, "sum", 2) == t1

    def test_truncated_file_detected(self, tmp_path):
        wc._TABLE_MEMO.clear()
        wc.structural_polys(2, 1, "product", cache_dir=str(tmp_path))
        path = tmp_path / "tables" / "p2_product_l1.json"
        path.write_text(path.read_text()[:-10])
        with pytest.raises(CacheCorrupt):
            wc._load_cache(str(path), 2, "product", 1)


class TestCompiledEvaluators:
    def naive_eval(self, poly, xs, ys):
        total = 0
        for key, c in poly.items():
            v = c
            for var, e in wc._mono_decode(key):
                base = xs[var // 2] if var % 2 == 0 else ys[var // 2]
                v *= base ** e
            total += v
        return total

    @pytest.mark.parametrize("p,level,kind", [(2, 3, "sum"), (3, 2, "product"),
                                              (5, 2, "sum"), (2, 2, "negation")])
    def test_matches_naive_evaluation(self, p, level, kind):
        rng = random.Random(17)
        table = wc.structural_polys(p, level, kind)
        fns = wc.compile_table(table)
        for _ in range(10):
            xs = tuple(rng.randint(-9, 9) for _ in range(level + 1))
            ys = tuple(rng.randint(-9, 9) for _ in range(level + 1))
            for i, poly in enumerate(table.polys):
                assert fns[i](xs, ys) == self.naive_eval(poly, xs, ys)


class TestGhostOracle:
    def test_frozen_examples(self):
        assert wc.ghost((1, 1), 2).components == (1, 3)
        assert wc.from_ghost((1, 3), 2) == (1, 1)
        with pytest.raises(NotInGhostImage):
            wc.from_ghost((0, 1), 2)

    def test_teichmuller_ghost(self):
        for p in (2, 3, 5):
            a = 7
            g = wc.ghost((a, 0, 0), p)
            assert g.components == (a, a ** p, a ** (p * p))

    @given(st.integers(2, 5).filter(lambda p: p in (2, 3, 5)),
           st.lists(st.integers(-40, 40), min_size=1, max_size=5))
    @settings(max_examples=60, deadline=None)
    def test_roundtrip(self, p, coords):
        assert wc.from_ghost(wc.ghost(coords, p)) == tuple(coords)

    def test_ghost_linearizes(self):
        rng = random.Random(23)
        for p in (2, 3, 5):
            table_s = wc.compile_table(wc.structural_polys(p, 2, "sum"))
            table_m = wc.compile_table(wc.structural_polys(p, 2, "product"))
            for _ in range(20):
                xs = tuple(rng.randint(-9, 9) for _ in range(3))
                ys = tuple(rng.randint(-9, 9) for _ in range(3))
                s = tuple(f(xs, ys) for f in table_s)
                m = tuple(f(xs, ys) for f in table_m)
                gx = wc.ghost(xs, p).components
                gy = wc.ghost(ys, p).components
                assert wc.ghost(s, p).components == tuple(a + b for a, b in zip(gx, gy))
                assert wc.ghost(m, p).components == tuple(a * b for a, b in zip(gx, gy))


class TestWittArithmetic:
    def test_frozen_w2_examples(self):
        x = wc.make_witt(F2, [1, 0])
        assert wc.witt_add(x, x).coords == wc.make_witt(F2, [0, 1]).coords
        a = wc.make_witt(F3, [1, 0])
        b = wc.make_witt(F3, [2, 0])
        assert wc.witt_add(a, b) == wc.witt_zero(F3, 2)

    def test_unit_laws(self):
        rng = random.Random(5)
        for ring in (F3, F4, UQ9):
            for _ in range(5):
                x = rand_witt(ring, rng, 3)
                assert wc.witt_add(x, wc.witt_zero(ring, 3)) == x
                assert wc.witt_mul(x, wc.witt_one(ring, 3)) == x
                assert wc.witt_add(x, wc.witt_neg(x)) == wc.witt_zero(ring, 3)

    def test_length_one_degenerates_to_base_ring(self):
        rng = random.Random(6)
        for _ in range(10):
            a = br.random_element(UQ9, rng)
            b = br.random_element(UQ9, rng)
            x, y = wc.make_witt(UQ9, [a]), wc.make_witt(UQ9, [b])
            assert wc.witt_add(x, y).coords == (a + b,)
            assert wc.witt_mul(x, y).coords == (a * b,)

    @pytest.mark.parametrize("ring", [F2, F3, F4, UQ9, PERF3])
    def test_route_equality(self, ring):
        rng = random.Random(7)
        for _ in range(8):
            n = rng.randint(1, 4)
            x, y = rand_witt(ring, rng, n), rand_witt(ring, rng, n)
            for op in ("add", "mul", "neg"):
                assert (wc.witt_arith(op, x, y, route="lift")
                        == wc.witt_arith(op, x, y, route="table"))

    def test_ring_axioms_random(self):
        rng = random.Random(8)
        for ring in (F3, F4):
            for _ in range(15):
                n = rng.randint(2, 4)
                x, y, z = (rand_witt(ring, rng, n) for _ in range(3))
                assert wc.witt_add(x, y) == wc.witt_add(y, x)
                assert wc.witt_mul(x, y) == wc.witt_mul(y, x)
                assert (wc.witt_add(wc.witt_add(x, y), z)
                        == wc.witt_add(x, wc.witt_add(y, z)))
                assert (wc.witt_mul(wc.witt_mul(x, y), z)
                        == wc.witt_mul(x, wc.witt_mul(y, z)))
                assert (wc.witt_mul(x, wc.witt_add(y, z))
                        == wc.witt_add(wc.witt_mul(x, y), wc.witt_mul(x, z)))

    def test_mismatch_errors(self):
        x = wc.witt_one(F2, 2)
        y = wc.witt_one(F2, 3)
        with pytest.raises(MismatchError):
            wc.witt_add(x, y)
        with pytest.raises(MismatchError):
            wc.witt_add(x, wc.witt_one(F3, 2))


class TestOperators:
    def test_teichmuller_multiplicative(self):
        t2 = wc.teichmuller(br.from_int(F3, 2), 2)
        assert wc.witt_mul(t2, t2) == wc.make_witt(F3, [1, 0])
        rng = random.Random(9)
        for _ in range(10):
            a = br.random_element(F4, rng)
            b = br.random_element(F4, rng)
            assert (wc.witt_mul(wc.teichmuller(a, 3), wc.teichmuller(b, 3))
                    == wc.teichmuller(a * b, 3))

    def test_teich_plus_teich_in_w2_polynomial_ring(self):
        tx = wc.teichmuller(br.evaluate(PX2, "x"), 2)
        assert wc.witt_add(tx, tx) == wc.make_witt(
            PX2, [br.zero(PX2), br.evaluate(PX2, "x^2")])
        assert wc.witt_add(tx, tx) == wc.witt_pmul(tx)

    def test_frobenius_is_coordinatewise_and_a_hom(self):
        rng = random.Random(10)
        for _ in range(10):
            x = rand_witt(F4, rng, 3)
            y = rand_witt(F4, rng, 3)
            fx = wc.frobenius_map(x)
            assert fx.coords == tuple(br.frobenius(c, 1) for c in x.coords)
            assert wc.frobenius_map(wc.witt_add(x, y)) == wc.witt_add(fx, wc.frobenius_map(y))
            assert wc.frobenius_map(wc.witt_mul(x, y)) == wc.witt_mul(fx, wc.frobenius_map(y))
            a = br.random_element(F4, rng)
            assert (wc.frobenius_map(wc.teichmuller(a, 3))
                    == wc.teichmuller(br.frobenius(a, 1), 3))

    def test_frobenius_inverse_on_perfect_ring(self):
        x = wc.make_witt(PERF3, [br.evaluate(PERF3, "x^(1/3)"), br.zero(PERF3)])
        assert wc.frobenius_map(x).coords[0] == br.evaluate(PERF3, "x")
        assert wc.frobenius_map(wc.frobenius_map(x), -1) == x

    def test_fv_is_p(self):
        rng = random.Random(11)
        for ring, p in ((F2, 2), (F3, 3), (F5, 5)):
            for _ in range(8):
                n = rng.randint(2, 4)
                x = rand_witt(ring, rng, n)
                assert wc.frobenius_map(wc.verschiebung(x)) == wc.witt_pmul(x)
                assert wc.witt_pmul(x) == wc.witt_mul(wc.int_to_witt(p, ring, n), x)

    def test_v_additive_and_projection_formula(self):
        rng = random.Random(12)
        for _ in range(10):
            x = rand_witt(F3, rng, 4)
            y = rand_witt(F3, rng, 4)
            assert (wc.verschiebung(wc.witt_add(x, y))
                    == wc.witt_add(wc.verschiebung(x), wc.verschiebung(y)))
            assert (wc.witt_mul(wc.verschiebung(x), y)
                    == wc.verschiebung(wc.witt_mul(x, wc.frobenius_map(y))))

    def test_project_is_a_hom_and_sections_teich(self):
        rng = random.Random(13)
        for _ in range(10):
            x = rand_witt(UQ9, rng, 3)
            y = rand_witt(UQ9, rng, 3)
            assert wc.project(wc.witt_add(x, y)) == wc.project(x) + wc.project(y)
            assert wc.project(wc.witt_mul(x, y)) == wc.project(x) * wc.project(y)
            a = br.random_element(UQ9, rng)
            assert wc.project(wc.teichmuller(a, 3)) == a

    def test_p_divisibility_iff_zeroth_digit_zero(self):
        rng = random.Random(14)
        for _ in range(20):
            x = rand_witt(F3, rng, 3)
            if wc.project(x).is_zero():
                y = wc.divide_by_p(x)
                assert wc.witt_pmul(wc.WittVector(F3, y.coords + (br.zero(F3),))
                                    ).coords[:2] == x.coords[:2]
            else:
                with pytest.raises(NotDivisible):
                    wc.divide_by_p(x)

    def test_divide_by_p_shortens_and_roots(self):
        a = br.from_int(F3, 2)
        x = wc.witt_pmul(wc.teichmuller(a, 3))
        d = wc.divide_by_p(x)
        assert d == wc.teichmuller(a, 2)

    def test_divide_depth_exhaustion(self):
        x = wc.make_witt(PX2, [br.zero(PX2), br.evaluate(PX2, "x")])
        with pytest.raises(DepthExhausted):
            wc.divide_by_p(x)

    def test_divide_fixed_keeps_length(self):
        a = br.from_int(F3, 2)
        x = wc.witt_pmul(wc.teichmuller(a, 3))
        d = wc.divide_by_p_fixed(x)
        assert d.length == 3
        assert d.coords[:2] == wc.teichmuller(a, 2).coords
        assert d.coords[2].is_zero()

    def test_int_to_witt_matches_repeated_addition(self):
        for ring, p in ((F2, 2), (F3, 3)):
            one = wc.witt_one(ring, 3)
            acc = wc.witt_zero(ring, 3)
            for m in range(p ** 3):
                assert wc.int_to_witt(m, ring, 3) == acc
                acc = wc.witt_add(acc, one)
            assert wc.int_to_witt(p ** 3, ring, 3) == wc.witt_zero(ring, 3)

    def test_witt_scalar_matches_teich_product(self):
        rng = random.Random(15)
        for _ in range(10):
            a = br.random_element(F4, rng)
            x = rand_witt(F4, rng, 4)
            assert wc.witt_scalar(a, x) == wc.witt_mul(wc.teichmuller(a, 4), x)

    def test_inv_unit(self):
        rng = random.Random(16)
        for ring in (F3, UQ9):
            for _ in range(8):
                n = rng.randint(1, 5)
                coords = [br.random_element(ring, rng) for _ in range(n)]
                coords[0] = br.one(ring)
                x = wc.WittVector(ring, tuple(coords))
                assert wc.witt_mul(x, wc.witt_inv_unit(x)) == wc.witt_one(ring, n)
        with pytest.raises(NotAUnit):
            wc.witt_inv_unit(wc.witt_zero(F3, 2))

    def test_witt_ord(self):
        x = wc.make_witt(F3, [0, 0, 2])
        assert wc.witt_ord(x) == 2
        assert wc.witt_ord(wc.witt_zero(F3, 3)) is None
        assert wc.witt_ord(wc.witt_one(F3, 3)) == 0


class TestFunctor:
    def test_kill_variable(self):
        ring = br.make_ring("frac base=(ff p=3 e=1) vars=x depth_p=0 depth_2=0 laurent=false")
        phi = wc.make_ring_map(ring, ring, {"x": "0"})
        assert (wc.witt_functor(phi, wc.teichmuller(br.evaluate(ring, "x"), 3))
                == wc.witt_zero(ring, 3))

    def test_identity_and_frobenius_coincidence(self):
        rng = random.Random(18)
        phi_id = wc.make_ring_map(PERF3, PERF3, {"x": "x"})
        phi_f = wc.make_ring_map(PERF3, PERF3, {"x": "x^3"})
        for _ in range(8):
            x = wc.WittVector(PERF3, tuple(
                br.random_element(PERF3, rng, denom_depth=1) for _ in range(3)))
            assert wc.witt_functor(phi_id, x) == x
            assert wc.witt_functor(phi_f, x) == wc.frobenius_map(x)

    def test_is_ring_hom_and_commutes_with_project(self):
        rng = random.Random(19)
        src = br.make_ring("frac base=(ff p=2 e=1) vars=x depth_p=0 depth_2=0 laurent=false")
        dst = br.make_ring("frac base=(ff p=2 e=1) vars=y depth_p=0 depth_2=0 laurent=false")
        phi = wc.make_ring_map(src, dst, {"x": "y^2+y"})
        for _ in range(8):
            a = wc.WittVector(src, tuple(br.random_element(src, rng) for _ in range(3)))
            b = wc.WittVector(src, tuple(br.random_element(src, rng) for _ in range(3)))
            assert (wc.witt_functor(phi, wc.witt_add(a, b))
                    == wc.witt_add(wc.witt_functor(phi, a), wc.witt_functor(phi, b)))
            assert (wc.witt_functor(phi, wc.witt_mul(a, b))
                    == wc.witt_mul(wc.witt_functor(phi, a), wc.witt_functor(phi, b)))
            assert wc.project(wc.witt_functor(phi, a)) == wc.apply_ring_map(phi, wc.project(a))

    def test_relation_violations(self):
        from wittforge.errors import RelationViolated
        uq = br.make_ring("uq base=(ff p=2 e=1) var=T modulus=T^2+T+1")
        dst = br.make_ring("frac base=(ff p=2 e=1) vars=x depth_p=0 depth_2=0 laurent=false")
        with pytest.raises(RelationViolated):
            wc.make_ring_map(uq, dst, {"T": "x"})  # x^2+x+1 != 0
        quo = br.make_ring("frac base=(ff p=2 e=1) vars=x depth_p=0 depth_2=0 laurent=false mod=x^2")
        with pytest.raises(RelationViolated):
            wc.make_ring_map(quo, dst, {"x": "x"})  # x^2 not killed in dst
        f4_to_f2 = pytest.raises(RelationViolated)
        with f4_to_f2:
            wc.make_ring_map(F4, F2, {})  # no place for the field generator

    def test_field_generator_maps_through_uq(self):
        # F_4 -> F_2[T]/(T^2+T+1) sending u to T respects the modulus
        uq = br.make_ring("uq base=(ff p=2 e=1) var=T modulus=T^2+T+1")
        phi = wc.make_ring_map(F4, uq, {"u": "T"})
        u = br.from_coeff(F4, F4.gen())
        img = wc.apply_ring_map(phi, u * u)
        assert img == br.evaluate(uq, "T^2")
