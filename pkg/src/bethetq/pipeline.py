"""End-to-end orchestration: solve -> transfer grid -> linear solve ->
root recovery -> certification -> classification, with adaptive precision
escalation, warm starting across a sweep, and resumable per-chain result
files.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from pathlib import Path

import mpmath as mp

from .analysis import (
    arc_and_limit_probes,
    classify,
    compare_real_to_homogeneous,
    family_tags,
)
from .errors import BetheTQError, EscalationNeeded
from .homogeneous import solve_ground_state
from .precision import PrecisionConfig, require_chain_length
from .qsolver import (
    build_system,
    cross_check_rel_diff,
    q_eval_inhomo,
    qtilde_eval,
    solve_grid,
    tq_residual,
)
from .rootfind import find_roots
from .storage import RunRecord, load_record, record_path, save_record, write_summary_csv
from .transfer import TransferEvaluator, t_eval, t_grid

__all__ = ["SweepConfig", "SweepResult", "run_single", "run_sweep",
           "tq_probe_points", "MAX_ESCALATIONS", "DENSE_CROSS_CHECK_MAX_N"]

MAX_ESCALATIONS = 3
DENSE_CROSS_CHECK_MAX_N = 64
TQ_PROBE_COUNT = 50
_FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")


@dataclass(frozen=True)
class SweepConfig:
    """A sweep over chain lengths, all multiples of 4."""

    n_from: int
    n_to: int
    output_dir: Path
    step: int = 4
    bits: int | str = "auto"
    figures: tuple = ()
    resume: bool = False

    def __post_init__(self):
        require_chain_length(self.n_from)
        require_chain_length(self.n_to)
        require_chain_length(self.step)
        if self.n_from > self.n_to:
            raise ValueError("n_from must not exceed n_to")
        if self.bits != "auto" and (not isinstance(self.bits, int) or self.bits < 64):
            raise ValueError("bits must be 'auto' or an integer >= 64")
        bad = set(self.figures) - set(_FIGURES)
        if bad:
            raise ValueError(f"unknown figures: {sorted(bad)}")

    def sizes(self) -> list:
        return list(range(self.n_from, self.n_to + 1, self.step))


@dataclass
class SweepResult:
    """Per-chain records (sorted by n) and any per-chain failures."""

    records: list = field(default_factory=list)
    failures: dict = field(default_factory=dict)
    seconds: float = 0.0

    def by_n(self) -> dict:
        return {rec.n: rec for rec in self.records}

    def all_certified(self) -> bool:
        return not self.failures and all(rec.certified() for rec in self.records)


def tq_probe_points(n: int, hom_roots, count: int = TQ_PROBE_COUNT) -> list:
    """Deterministic pseudo-random probe points in the disk |z| <= n/4,
    each at least 1/4 away from every homogeneous rapidity."""
    rng = random.Random(f"bethetq-tq-{n}")
    radius = max(n / 4, 1.0)
    points = []
    floats = [float(r) for r in hom_roots]
    while len(points) < count:
        re = rng.uniform(-radius, radius)
        im = rng.uniform(-radius, radius)
        if re * re + im * im > radius * radius:
            continue
        if any((re - r) ** 2 + im * im < 0.0625 for r in floats):
            continue
        points.append(mp.mpc(mp.mpf(re), mp.mpf(im)))
    return points


def _run_at_bits(n: int, cfg: PrecisionConfig, warm_hom, warm_inhomo,
                 escalations: int) -> RunRecord:
    bits = cfg.bits
    timings = {}
    t_total = time.perf_counter()

    t0 = time.perf_counter()
    hom = solve_ground_state(n, cfg, warm_start=warm_hom)
    timings["homogeneous_s"] = time.perf_counter() - t0

    ev = TransferEvaluator.from_solution(hom, bits)
    t0 = time.perf_counter()
    tg = t_grid(ev, n)
    timings["t_grid_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    system = build_system(tg, n)
    grid = solve_grid(system, cfg)
    cross = None
    if n <= DENSE_CROSS_CHECK_MAX_N:
        cross = cross_check_rel_diff(system, cfg)
    timings["linear_solve_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    inhomo = find_roots(grid, cfg, warm_start=warm_inhomo)
    timings["root_find_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    report = classify(inhomo, cfg)
    report = report.with_real_deviation(compare_real_to_homogeneous(inhomo, hom, cfg))
    probes = arc_and_limit_probes(inhomo, cfg)
    tags = family_tags(inhomo, cfg)

    with mp.workprec(bits):
        half_i = mp.mpc(0, 0.5)
        t_half_defect = abs(t_eval(ev, half_i) - 1)
        q_half = abs(q_eval_inhomo(grid, half_i))
        q_half_defect = q_half / max(mp.mpf(1), abs(qtilde_eval(grid, half_i)))
        fixed_dist = max(
            min(abs(u - half_i) for u in inhomo.roots),
            min(abs(u + half_i) for u in inhomo.roots),
        )
        tq_max = mp.mpf(0)
        for z in tq_probe_points(n, hom.roots):
            tq_max = max(tq_max, tq_residual(grid, ev, z))
    timings["certify_s"] = time.perf_counter() - t0
    timings["total_s"] = time.perf_counter() - t_total
    timings["escalations"] = escalations

    return RunRecord(
        n=n,
        bits=bits,
        escalations=escalations,
        hom=hom,
        grid=grid,
        inhomo=inhomo,
        report=report,
        probes=probes,
        family=tags,
        cross_check_rel=cross,
        t_half_defect=t_half_defect,
        q_half_defect=q_half_defect,
        fixed_pair_distance=fixed_dist,
        tq_random_max=tq_max,
        timings=timings,
    )


def run_single(
    n: int,
    bits: int | str = "auto",
    warm_hom=None,
    warm_inhomo=None,
    max_escalations: int = MAX_ESCALATIONS,
) -> RunRecord:
    """One chain length end to end, escalating precision on recoverable
    numerical failures (at most ``max_escalations`` doublings)."""
    require_chain_length(n)
    current = PrecisionConfig.auto(n).bits if bits == "auto" else int(bits)
    escalations = 0
    while True:
        cfg = PrecisionConfig.for_bits(current)
        try:
            return _run_at_bits(n, cfg, warm_hom, warm_inhomo, escalations)
        except EscalationNeeded:
            if escalations >= max_escalations:
                raise
            escalations += 1
            current *= cfg.escalation_factor


def run_sweep(cfg: SweepConfig) -> SweepResult:
    """Run every chain length in the configured range, warm-starting each
    stage from the previous length, persisting one result file per n, and
    resuming from existing files when asked.

    Per-chain failures are recorded and skipped; the sweep continues.
    """
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = SweepResult()
    warm_hom = None
    warm_inhomo = None
    started = time.perf_counter()
    for n in cfg.sizes():
        path = record_path(out, n)
        rec = None
        if cfg.resume and path.exists():
            try:
                rec = load_record(path)
            except (ValueError, KeyError):
                rec = None  # corrupt or stale file: recompute
        if rec is None:
            try:
                rec = run_single(n, bits=cfg.bits, warm_hom=warm_hom,
                                 warm_inhomo=warm_inhomo)
            except BetheTQError as exc:
                result.failures[n] = exc
                continue
            save_record(rec, out)
        result.records.append(rec)
        warm_hom = rec.hom
        warm_inhomo = rec.inhomo
    result.seconds = time.perf_counter() - started
    write_summary_csv(result.records, out / "summary.csv")
    if cfg.figures:
        from .figures import emit_figures

        emit_figures(result, cfg)
    return result
