import mpmath as mp
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from bethetq import (
    AmbiguousClassification,
    BoundViolation,
    CountMismatch,
    InhomogeneousSolution,
    PrecisionConfig,
    RootFamilyReport,
    StructuralAnomaly,
    arc_and_limit_probes,
    check_ni_bounds,
    classify,
    compare_real_to_homogeneous,
    family_tags,
    string_ratio,
    string_ratio_direct,
    string_structure,
)
from bethetq.analysis import StringStats


def synthetic_solution(roots, n=None, bits=256):
    with mp.workprec(bits):  # conversions round to the ambient precision
        roots = tuple(mp.mpc(u) for u in roots)
    return InhomogeneousSolution(
        n=n or len(roots),
        roots=roots,
        residuals=tuple(mp.mpf(0) for _ in roots),
        precision_bits=bits,
    )


class TestClassify:
    def test_n4_families(self, rec4):
        report = classify(rec4.inhomo)
        assert (report.n_real, report.n_imag, report.n_arc) == (2, 2, 0)

    def test_n8_families(self, rec8):
        # with 4 real roots fixed, quadrant symmetry forces all four
        # remaining roots onto the imaginary axis
        report = classify(rec8.inhomo)
        assert (report.n_real, report.n_imag, report.n_arc) == (4, 4, 0)

    def test_n12_families(self, rec12):
        report = classify(rec12.inhomo)
        assert (report.n_real, report.n_imag, report.n_arc) == (6, 2, 4)

    def test_counts_partition_n(self, rec16):
        report = classify(rec16.inhomo)
        assert report.n_real + report.n_imag + report.n_arc == 16
        assert report.n_real == 8
        assert report.n_arc % 4 == 0

    def test_family_tags_align(self, rec12):
        tags = family_tags(rec12.inhomo)
        assert len(tags) == 12
        assert sorted(tags).count("real") == 6
        assert tags[rec12.inhomo.roots.index(mp.mpc(0, 0.5))] == "imaginary"

    def test_ambiguous_root_rejected(self):
        cfg = PrecisionConfig.for_bits(256)
        wobble = 3 * cfg.classify_tol
        sol = synthetic_solution(
            [mp.mpc(0, 0.5), mp.mpc(0, -0.5),
             mp.mpc(wobble, 2), mp.mpc(-wobble, -2)],
            n=4,
        )
        with pytest.raises(AmbiguousClassification):
            classify(sol, cfg)

    def test_wrong_real_count_is_structural_anomaly(self):
        sol = synthetic_solution(
            [mp.mpc(0, 0.5), mp.mpc(0, -0.5), mp.mpc(0, 1.5), mp.mpc(0, -1.5)],
            n=4,
        )
        with pytest.raises(StructuralAnomaly):
            classify(sol)

    def test_ratio_probe_recorded(self, rec8):
        report = classify(rec8.inhomo)
        assert report.ratio_probe is not None
        assert report.min_arc_modulus is None  # no arcs at n=8


class TestStringStructure:
    def test_exact_synthetic_string(self):
        roots = [mp.mpc(0, y) for y in (-2.5, -1.5, -0.5, 0.5, 1.5, 2.5)]
        stats = string_structure(roots)
        assert all(g == 1 for g in stats.gaps)
        assert stats.interior_max_dev == 0
        assert stats.end_max_dev == 0

    def test_degenerate_pair_has_empty_stats(self):
        stats = string_structure([mp.mpc(0, 0.5), mp.mpc(0, -0.5)])
        assert stats == StringStats(gaps=(), interior_max_dev=None,
                                    end_max_dev=None)

    def test_pipeline_string_gaps(self, sweep128):
        rec = sweep128.by_n[128]
        interior = rec.report.string_deviation_interior
        ends = rec.report.string_deviation_ends
        assert interior is not None and interior < 0.05
        assert ends > interior  # deviations live at the string ends

    def test_gap_count(self, rec8):
        report = classify(rec8.inhomo)
        assert len(report.string_gaps) == report.n_imag - 1


class TestCompareRealToHomogeneous:
    def test_identity_gives_zero(self, rec8):
        fake = synthetic_solution(
            list(rec8.hom.roots) + [mp.mpc(0, 0.5), mp.mpc(0, -0.5),
                                    mp.mpc(0, 1.5), mp.mpc(0, -1.5)],
            n=8, bits=rec8.bits,
        )
        assert compare_real_to_homogeneous(fake, rec8.hom) == 0

    def test_n4_deviation_finite_nonzero(self, rec4):
        dev = compare_real_to_homogeneous(rec4.inhomo, rec4.hom)
        assert mp.mpf("0.1") < dev < mp.mpf("0.5")

    def test_count_mismatch(self, rec4, rec8):
        with pytest.raises(CountMismatch):
            compare_real_to_homogeneous(rec4.inhomo, rec8.hom)


class TestStringRatio:
    def test_two_site_string_closed_form(self):
        # direct product over the sites {-i, 0} gives (1-i)/(1+i) = -i
        with mp.workprec(256):
            value = string_ratio(2, mp.mpf(1))
            assert abs(value + mp.mpc(0, 1)) < mp.ldexp(1, -240)
            direct = string_ratio_direct(2, mp.mpf(1))
            assert abs(direct - value) < mp.ldexp(1, -240)

    def test_exactly_minus_one_at_origin(self):
        for n_i in (1, 2, 7, 40):
            assert string_ratio(n_i, mp.mpf(0)) == -1

    def test_long_string_limit(self):
        with mp.workprec(128):
            value = string_ratio(10**6, mp.mpf(1) / 10)
            assert abs(value + 1) < mp.mpf("1e-5")

    @given(st.integers(min_value=1, max_value=50),
           st.floats(min_value=-3, max_value=3, allow_nan=False),
           st.floats(min_value=0.05, max_value=3))
    @settings(max_examples=40, deadline=None)
    def test_telescoped_equals_direct_product(self, n_i, re, im):
        assume(re != 0)  # every string site sits on the imaginary axis
        with mp.workprec(256):
            lam = mp.mpc(mp.mpf(re), mp.mpf(im))
            tele = string_ratio(n_i, lam)
            direct = string_ratio_direct(n_i, lam)
            assert abs(tele - direct) <= abs(direct) * mp.ldexp(1, -216)

    def test_site_collision_rejected(self):
        with pytest.raises(ValueError):
            string_ratio(4, mp.mpc(0, -2))
        with pytest.raises(ValueError):
            string_ratio_direct(4, mp.mpc(0, -2))


class TestLimitProbes:
    def test_n12_probe_fields(self, rec12):
        probes = arc_and_limit_probes(rec12.inhomo)
        assert probes.min_arc_modulus is not None
        assert probes.arc_ratio is not None
        assert probes.string_ratio is not None
        assert abs(probes.inhomogeneous_term) < 1

    def test_no_arcs_probes_absent(self, rec8):
        probes = arc_and_limit_probes(rec8.inhomo)
        assert probes.min_arc_modulus is None
        assert probes.arc_ratio is None
        assert probes.string_ratio is not None


def _report(n, n_imag):
    return RootFamilyReport(
        n=n, n_real=n // 2, n_imag=n_imag, n_arc=n // 2 - n_imag,
        string_gaps=(), string_deviation_interior=None,
        string_deviation_ends=None, max_real_deviation=None,
        min_arc_modulus=None, ratio_probe=None,
    )


class TestNiBounds:
    def test_passing_set(self):
        rows = check_ni_bounds([_report(16, 4), _report(20, 6), _report(24, 4)])
        assert len(rows) == 3

    def test_out_of_band_count(self):
        with pytest.raises(BoundViolation) as info:
            check_ni_bounds([_report(32, 2)])  # below 32/8 = 4
        assert info.value.n == 32

    def test_decrease_under_plus_eight(self):
        with pytest.raises(BoundViolation) as info:
            check_ni_bounds([_report(16, 6), _report(24, 4)])
        assert info.value.n == 24

    def test_plus_four_dip_allowed(self):
        # a dip of 2 from n to n+4 is fine as long as n+8 recovers
        rows = check_ni_bounds([_report(16, 6), _report(20, 4), _report(24, 6)])
        assert len(rows) == 3
