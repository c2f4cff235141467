import json

import mpmath as mp
import pytest

import bethetq.pipeline as pipeline_mod
from bethetq import (
    MissingRange,
    SweepConfig,
    load_record,
    run_single,
    run_sweep,
    save_record,
)
from bethetq.figures import emit_figures
from bethetq.pipeline import tq_probe_points
from bethetq.storage import SUMMARY_COLUMNS, record_path


class TestRunSingle:
    def test_certified_record(self, rec16):
        assert rec16.certified()
        assert rec16.escalations == 0
        assert rec16.bits == 512

    def test_random_point_functional_residuals(self, rec16):
        assert rec16.tq_random_max < mp.ldexp(1, -(rec16.bits // 4))

    def test_escalation_from_starved_bits(self):
        # 64 bits cannot even solve the n=64 linear system; the pipeline
        # must climb the precision ladder and still certify
        rec = run_single(64, bits=64)
        assert rec.escalations >= 1
        assert rec.timings["escalations"] == rec.escalations
        assert rec.certified()

    def test_auto_bits_scale(self):
        rec = run_single(48)
        assert rec.bits == 16 * 48

    def test_probe_points_deterministic(self, rec16):
        a = tq_probe_points(16, rec16.hom.roots)
        b = tq_probe_points(16, rec16.hom.roots)
        assert a == b
        assert len(a) == 50
        for z in a:
            assert abs(z) <= 16 / 4
            assert min(abs(z - r) for r in rec16.hom.roots) >= 0.25


@pytest.fixture(scope="module")
def small_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep32")
    cfg = SweepConfig(n_from=4, n_to=32, output_dir=out)
    return cfg, run_sweep(cfg)


@pytest.fixture(scope="module")
def fig_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("figs")
    cfg = SweepConfig(n_from=4, n_to=16, output_dir=out,
                      figures=("fig1", "fig2", "fig3", "fig4", "fig5", "fig6"))
    return cfg, run_sweep(cfg)


class TestSweep:
    def test_all_sizes_present_and_certified(self, small_sweep):
        cfg, result = small_sweep
        assert not result.failures
        assert [rec.n for rec in result.records] == list(range(4, 33, 4))
        assert result.all_certified()
        for n in range(4, 33, 4):
            assert record_path(cfg.output_dir, n).exists()

    def test_summary_csv(self, small_sweep):
        cfg, result = small_sweep
        lines = (cfg.output_dir / "summary.csv").read_text().splitlines()
        assert lines[0] == ",".join(SUMMARY_COLUMNS)
        assert len(lines) == 1 + len(result.records)
        first = lines[1].split(",")
        assert first[0] == "4"
        assert first[1:4] == ["2", "2", "0"]

    def test_resume_skips_recompute(self, small_sweep, monkeypatch):
        cfg, result = small_sweep
        def explode(*args, **kwargs):
            raise AssertionError("resume must not recompute")
        monkeypatch.setattr(pipeline_mod, "run_single", explode)
        resumed_cfg = SweepConfig(n_from=4, n_to=32, output_dir=cfg.output_dir,
                                  resume=True)
        resumed = run_sweep(resumed_cfg)
        assert not resumed.failures
        assert [rec.n for rec in resumed.records] == [rec.n for rec in result.records]
        with mp.workprec(resumed.records[-1].bits):
            for a, b in zip(resumed.records, result.records):
                assert a.inhomo.roots == b.inhomo.roots
                assert a.grid.values == b.grid.values

    def test_resume_recomputes_corrupt_file(self, small_sweep, tmp_path):
        cfg, _ = small_sweep
        out = tmp_path / "copy"
        out.mkdir()
        for n in range(4, 33, 4):
            (out / record_path(cfg.output_dir, n).name).write_bytes(
                record_path(cfg.output_dir, n).read_bytes())
        bad = record_path(out, 8)
        doc = json.loads(bad.read_text())
        doc["grid"]["values"][0] = "1.0"
        bad.write_text(json.dumps(doc))  # checksum now stale
        resumed = run_sweep(SweepConfig(n_from=4, n_to=32, output_dir=out,
                                        resume=True))
        assert not resumed.failures
        fixed = load_record(record_path(out, 8))
        assert fixed.certified()

    def test_deterministic_output_files(self, small_sweep, tmp_path):
        cfg, _ = small_sweep
        out2 = tmp_path / "again"
        run_sweep(SweepConfig(n_from=4, n_to=32, output_dir=out2))
        for n in range(4, 33, 4):
            doc1 = json.loads(record_path(cfg.output_dir, n).read_text())
            doc2 = json.loads(record_path(out2, n).read_text())
            doc1.pop("timings")
            doc2.pop("timings")
            assert doc1 == doc2

    def test_config_validation(self, tmp_path):
        with pytest.raises(ValueError):
            SweepConfig(n_from=6, n_to=16, output_dir=tmp_path)
        with pytest.raises(ValueError):
            SweepConfig(n_from=16, n_to=4, output_dir=tmp_path)
        with pytest.raises(ValueError):
            SweepConfig(n_from=4, n_to=16, output_dir=tmp_path,
                        figures=("fig9",))
        with pytest.raises(ValueError):
            SweepConfig(n_from=4, n_to=16, output_dir=tmp_path, bits=32)


class TestStorageRoundTrip:
    def test_full_precision_round_trip(self, rec16, tmp_path):
        save_record(rec16, tmp_path)
        back = load_record(record_path(tmp_path, 16))
        assert back.n == rec16.n and back.bits == rec16.bits
        with mp.workprec(rec16.bits):
            assert back.hom.roots == rec16.hom.roots
            assert back.grid.values == rec16.grid.values
            assert back.inhomo.roots == rec16.inhomo.roots
            assert back.inhomo.residuals == rec16.inhomo.residuals
            assert back.report.string_gaps == rec16.report.string_gaps
            assert back.report.max_real_deviation == rec16.report.max_real_deviation
            assert back.probes.string_ratio == rec16.probes.string_ratio
            assert back.tq_random_max == rec16.tq_random_max
        assert back.family == rec16.family

    def test_resaved_file_is_byte_identical(self, rec16, tmp_path):
        first = save_record(rec16, tmp_path / "a")
        back = load_record(first)
        second = save_record(back, tmp_path / "b")
        doc1 = json.loads(first.read_text())
        doc2 = json.loads(second.read_text())
        doc1.pop("timings")
        doc2.pop("timings")
        assert doc1 == doc2

    def test_checksum_guard(self, rec16, tmp_path):
        path = save_record(rec16, tmp_path)
        doc = json.loads(path.read_text())
        doc["grid"]["values"][0] = "2.0"
        path.write_text(json.dumps(doc))
        with pytest.raises(ValueError):
            load_record(path)


class TestFigures:
    def test_all_figures_rendered_as_svg(self, fig_sweep):
        cfg, _ = fig_sweep
        for name in cfg.figures:
            path = cfg.output_dir / f"{name}.svg"
            assert path.exists()
            assert b"<svg" in path.read_bytes()[:1024]

    def test_empty_request_writes_nothing(self, fig_sweep, tmp_path):
        cfg, result = fig_sweep
        quiet = SweepConfig(n_from=4, n_to=16, output_dir=tmp_path)
        assert emit_figures(result, quiet) == []
        assert list(tmp_path.glob("*.svg")) == []

    def test_missing_range_rejected(self, fig_sweep):
        cfg, result = fig_sweep
        wider = SweepConfig(n_from=4, n_to=32, output_dir=cfg.output_dir,
                            figures=("fig1",))
        with pytest.raises(MissingRange):
            emit_figures(result, wider)
