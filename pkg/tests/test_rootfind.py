import random

import mpmath as mp
import pytest

from bethetq import (
    IllConditionedInterpolation,
    InhomogeneousSolution,
    MultiplicityCollision,
    PrecisionConfig,
    QGridValues,
    even_coefficients,
    find_roots,
    inhomo_bethe_residual,
    q_eval_inhomo,
    root_equation_residual,
)
from bethetq.qsolver import grid_nodes


def certification_threshold(bits):
    return mp.ldexp(1, -(bits // 8))


class TestEvenCoefficients:
    def test_n4_linear_case(self, rec4):
        # P(w) = w + (9/4 + v1); the solved seed is -5/2, so P(w) = w - 1/4
        coeffs = even_coefficients(rec4.grid)
        assert len(coeffs) == 2
        with mp.workprec(rec4.bits):
            assert coeffs[1] == 1
            expect = mp.mpf(9) / 4 + rec4.grid.values[0]
            assert abs(coeffs[0] - expect) < mp.ldexp(1, -rec4.bits + 32)
            assert abs(coeffs[0] + mp.mpf(1) / 4) < mp.ldexp(1, -rec4.bits + 32)

    def test_reproduces_grid_values(self, rec12):
        coeffs = even_coefficients(rec12.grid)
        with mp.workprec(rec12.bits):
            for sk, vk in zip(rec12.grid.nodes, rec12.grid.values):
                acc = mp.mpf(0)
                for c in reversed(coeffs):
                    acc = acc * sk + c
                assert abs(acc - vk) <= abs(vk) * mp.ldexp(1, -(rec12.bits // 2))

    def test_coefficients_all_real(self, rec12):
        assert all(isinstance(c, mp.mpf) for c in even_coefficients(rec12.grid))

    def test_round_trip_through_roots(self, rec12):
        # expanding prod(w - u^2) over the found root pairs reproduces the
        # interpolated coefficients
        coeffs = even_coefficients(rec12.grid)
        with mp.workprec(rec12.bits):
            ws = []
            half = mp.mpf(1) / 2
            for u in rec12.inhomo.roots:
                if u in (mp.mpc(0, half), mp.mpc(0, -half)):
                    continue
                if u.real > 0 or (u.real == 0 and u.imag > 0):
                    ws.append(u * u)
            rebuilt = [mp.mpc(1)]
            for w in ws:
                nxt = [mp.mpc(0)] * (len(rebuilt) + 1)
                for i, c in enumerate(rebuilt):
                    nxt[i + 1] += c
                    nxt[i] -= w * c
                rebuilt = nxt
            tol = mp.ldexp(1, -(rec12.bits // 8))
            scale = max(abs(c) for c in coeffs)
            for a, b in zip(rebuilt, coeffs):
                assert abs(a - b) <= tol * max(abs(b), scale * mp.ldexp(1, -rec12.bits // 2))

    def test_ill_conditioned_on_corrupted_weights(self, rec12):
        # the leading-coefficient recovery detects an inconsistency between
        # the barycentric data and the node system (here: corrupted weights)
        with mp.workprec(rec12.bits):
            corrupted = QGridValues(
                n=12,
                values=rec12.grid.values,
                precision_bits=rec12.bits,
                solve_method="shooting",
                closure_residual=rec12.grid.closure_residual,
                nodes=rec12.grid.nodes,
                weights=tuple(2 * w for w in rec12.grid.weights),
            )
        with pytest.raises(IllConditionedInterpolation):
            even_coefficients(corrupted)


class TestFindRoots:
    def test_n4_exact_roots(self, rec4):
        # Q(z) = z^4 - 1/16: roots are +/- 1/2 and +/- i/2
        roots = rec4.inhomo.roots
        assert len(roots) == 4
        with mp.workprec(rec4.bits):
            eps = mp.ldexp(1, -(rec4.bits // 2))
            assert any(abs(u - mp.mpf(1) / 2) < eps for u in roots)
            assert any(abs(u + mp.mpf(1) / 2) < eps for u in roots)
        assert mp.mpc(0, 0.5) in roots
        assert mp.mpc(0, -0.5) in roots

    def test_certification_threshold(self, rec12):
        assert rec12.inhomo.max_residual < certification_threshold(rec12.bits)

    def test_multiset_closed_under_negation_and_conjugation(self, rec12):
        roots = rec12.inhomo.roots
        tol = certification_threshold(rec12.bits)
        with mp.workprec(rec12.bits):
            for u in roots:
                assert min(abs(v + u) for v in roots) < tol
                assert min(abs(v - mp.conj(u)) for v in roots) < tol

    def test_n12_has_arc_roots_in_every_quadrant(self, rec12):
        quadrants = set()
        tol = certification_threshold(rec12.bits)
        for u in rec12.inhomo.roots:
            if abs(u.real) > tol and abs(u.imag) > tol:
                quadrants.add((u.real > 0, u.imag > 0))
        assert quadrants == {(True, True), (True, False), (False, True),
                             (False, False)}

    def test_all_roots_distinct(self, rec16):
        roots = rec16.inhomo.roots
        tol = certification_threshold(rec16.bits)
        with mp.workprec(rec16.bits):
            for i in range(len(roots)):
                for j in range(i + 1, len(roots)):
                    assert abs(roots[i] - roots[j]) > tol

    def test_root_count_matches_chain(self, rec16):
        assert len(rec16.inhomo.roots) == 16

    def test_determinism(self, rec12):
        cfg = PrecisionConfig.for_bits(rec12.bits)
        again = find_roots(rec12.grid, cfg)
        assert again.roots == rec12.inhomo.roots

    def test_warm_start_agrees_with_cold(self, rec12, rec16):
        cfg = PrecisionConfig.for_bits(rec16.bits)
        warm = find_roots(rec16.grid, cfg, warm_start=rec12.inhomo)
        with mp.workprec(rec16.bits):
            worst = max(abs(a - b) for a, b in
                        zip(warm.roots, rec16.inhomo.roots))
            assert worst < mp.ldexp(1, -(rec16.bits // 2))

    def test_round_trip_against_barycentric(self, rec16):
        # the monic product over found roots must reproduce the
        # barycentric Q everywhere
        rng = random.Random("round-trip")
        with mp.workprec(rec16.bits):
            tol = mp.ldexp(1, -(rec16.bits // 8))
            for _ in range(20):
                z = mp.mpc(rng.uniform(-2, 2), rng.uniform(-2, 2))
                monic = mp.mpc(1)
                for u in rec16.inhomo.roots:
                    monic *= z - u
                bary = q_eval_inhomo(rec16.grid, z)
                assert abs(monic - bary) <= tol * max(abs(monic), abs(bary))

    def test_multiplicity_collision_detected(self):
        # synthetic grid values sampled from a P with a nearly-double root
        n = 12
        bits = 512
        with mp.workprec(bits):
            nodes = grid_nodes(n)
            wroots = [mp.mpf(1), mp.mpf(1) + mp.ldexp(1, -400),
                      mp.mpf(-2), mp.mpf(-3), mp.mpf(-5)]
            values = tuple(mp.fprod([s - w for w in wroots]) for s in nodes)
            fake = QGridValues(
                n=n, values=values, precision_bits=bits,
                solve_method="shooting", closure_residual=mp.mpf(0),
            )
        with pytest.raises(MultiplicityCollision):
            find_roots(fake, PrecisionConfig.for_bits(bits))


class TestResiduals:
    def test_certified_small(self, rec8):
        for k in range(1, 9):
            assert inhomo_bethe_residual(rec8.inhomo, k) < \
                certification_threshold(rec8.bits)

    def test_fixed_root_residual_exactly_zero(self, rec8):
        for k, u in enumerate(rec8.inhomo.roots, start=1):
            if u in (mp.mpc(0, 0.5), mp.mpc(0, -0.5)):
                assert inhomo_bethe_residual(rec8.inhomo, k) == 0

    def test_perturbation_sensitivity(self, rec8):
        # moving a single root by 1e-6 must be clearly visible in the
        # residual of at least one root/direction pair
        with mp.workprec(rec8.bits):
            roots = list(rec8.inhomo.roots)
            worst = mp.mpf(0)
            for idx in range(len(roots)):
                for shift in (mp.mpf("1e-6"), mp.mpc(0, "1e-6")):
                    moved = list(roots)
                    moved[idx] = roots[idx] + shift
                    worst = max(worst, root_equation_residual(moved, 8, idx))
            assert worst > mp.mpf("1e-4")

    def test_index_bounds(self, rec8):
        with pytest.raises(ValueError):
            inhomo_bethe_residual(rec8.inhomo, 0)
        with pytest.raises(ValueError):
            inhomo_bethe_residual(rec8.inhomo, 9)

    def test_solution_shape_validated(self):
        with pytest.raises(ValueError):
            InhomogeneousSolution(n=4, roots=(mp.mpc(0, 0.5),),
                                  residuals=(mp.mpf(0),), precision_bits=256)
