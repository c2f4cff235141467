"""Command-line interface.

Subcommands:
  solve   one chain length end to end, writing its result file
  sweep   a range of chain lengths with optional resume and figures
  report  summarize stored results (CSV + optional figures + bound checks)
  verify  recompute every residual of one stored result from its roots

Exit codes: 0 all certified, 2 bound or structure anomaly, 1 error.
The default output directory is ``$BETHETQ_OUT`` or ``./bethetq-out``.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import mpmath as mp

from .analysis import check_ni_bounds
from .errors import AnomalyFound, BetheTQError
from .figures import FIGURE_NAMES, emit_figures
from .homogeneous import max_bethe_residual
from .pipeline import SweepConfig, SweepResult, run_single, run_sweep, tq_probe_points
from .qsolver import tq_residual
from .rootfind import root_equation_residual
from .storage import load_record, record_path, save_record, write_summary_csv
from .transfer import TransferEvaluator, t_eval

ENV_OUT = "BETHETQ_OUT"


def _default_out() -> str:
    return os.environ.get(ENV_OUT, "bethetq-out")


def _parse_bits(text: str):
    if text == "auto":
        return "auto"
    return int(text)


def _parse_figures(text: str):
    if not text:
        return ()
    names = tuple(part.strip() for part in text.split(",") if part.strip())
    unknown = set(names) - set(FIGURE_NAMES)
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown figures: {sorted(unknown)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bethetq",
        description="High-precision ground-state Bethe roots of the periodic "
                    "XXX spin-1/2 chain, homogeneous and inhomogeneous.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one chain length")
    p_solve.add_argument("--n", type=int, required=True)
    p_solve.add_argument("--precision-bits", type=_parse_bits, default="auto")
    p_solve.add_argument("--out", default=_default_out())

    p_sweep = sub.add_parser("sweep", help="solve a range of chain lengths")
    p_sweep.add_argument("--from", dest="n_from", type=int, required=True)
    p_sweep.add_argument("--to", dest="n_to", type=int, required=True)
    p_sweep.add_argument("--step", type=int, default=4)
    p_sweep.add_argument("--precision-bits", type=_parse_bits, default="auto")
    p_sweep.add_argument("--resume", action="store_true")
    p_sweep.add_argument("--figures", type=_parse_figures, default=())
    p_sweep.add_argument("--out", default=_default_out())

    p_report = sub.add_parser("report", help="summarize stored results")
    p_report.add_argument("--in", dest="in_dir", default=_default_out())
    p_report.add_argument("--check-bounds", action="store_true")
    p_report.add_argument("--figures", type=_parse_figures, default=())
    p_report.add_argument("--out", default=None,
                          help="directory for summary/figures (default: --in)")

    p_verify = sub.add_parser("verify", help="recompute residuals for one result")
    p_verify.add_argument("--in", dest="in_dir", default=_default_out())
    p_verify.add_argument("--n", type=int, required=True)
    return parser


def _cmd_solve(args) -> int:
    rec = run_single(args.n, bits=args.precision_bits)
    path = save_record(rec, Path(args.out))
    print(f"n={rec.n}: certified at {rec.bits} bits "
          f"(worst root residual {mp.nstr(rec.inhomo.max_residual, 3)}), "
          f"families {rec.report.n_real}/{rec.report.n_imag}/{rec.report.n_arc} "
          f"-> {path}")
    return 0 if rec.certified() else 2


def _cmd_sweep(args) -> int:
    cfg = SweepConfig(
        n_from=args.n_from,
        n_to=args.n_to,
        step=args.step,
        bits=args.precision_bits,
        output_dir=Path(args.out),
        figures=args.figures,
        resume=args.resume,
    )
    result = run_sweep(cfg)
    for rec in result.records:
        print(f"n={rec.n}: bits={rec.bits} escalations={rec.escalations} "
              f"families={rec.report.n_real}/{rec.report.n_imag}/{rec.report.n_arc} "
              f"max_residual={mp.nstr(rec.inhomo.max_residual, 3)}")
    for n, exc in sorted(result.failures.items()):
        print(f"n={n}: FAILED ({exc})", file=sys.stderr)
    print(f"sweep finished in {result.seconds:.1f}s; "
          f"{len(result.records)} results in {cfg.output_dir}")
    if result.failures:
        anomalies = any(isinstance(e, AnomalyFound) for e in result.failures.values())
        return 2 if anomalies else 1
    return 0


class _ReportRequest:
    """Duck-typed figure request covering exactly the loaded records."""

    def __init__(self, records, figures, output_dir):
        self._sizes = sorted(rec.n for rec in records)
        self.figures = figures
        self.output_dir = output_dir

    def sizes(self):
        return self._sizes


def _load_dir(in_dir: Path):
    paths = sorted(Path(in_dir).glob("result_n*.json"))
    if not paths:
        raise BetheTQError(f"no result files found in {in_dir}")
    return [load_record(p) for p in paths]


def _cmd_report(args) -> int:
    records = _load_dir(Path(args.in_dir))
    out = Path(args.out) if args.out else Path(args.in_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = write_summary_csv(records, out / "summary.csv")
    print(f"wrote {csv_path}")
    status = 0
    for rec in records:
        if not rec.certified():
            print(f"n={rec.n}: stored residuals exceed certification thresholds",
                  file=sys.stderr)
            status = 2
    if args.figures:
        request = _ReportRequest(records, args.figures, out)
        for path in emit_figures(SweepResult(records=records), request):
            print(f"wrote {path}")
    if args.check_bounds:
        rows = check_ni_bounds([rec.report for rec in records])
        print(f"string-count bounds hold for all {len(rows)} chain lengths")
    return status


def _cmd_verify(args) -> int:
    path = record_path(Path(args.in_dir), args.n)
    rec = load_record(path)
    n, bits = rec.n, rec.bits
    failures = []

    def check(name, value, threshold):
        ok = value < threshold
        print(f"{name}: {mp.nstr(value, 5)} "
              f"({'PASS' if ok else 'FAIL'} < {mp.nstr(threshold, 5)})")
        if not ok:
            failures.append(name)

    with mp.workprec(bits):
        check("homogeneous max residual",
              max_bethe_residual(rec.hom.roots, n),
              mp.ldexp(1, -(bits - 32)))
        ev = TransferEvaluator.from_solution(rec.hom, bits)
        check("t(i/2) defect",
              abs(t_eval(ev, mp.mpc(0, 0.5)) - 1),
              mp.ldexp(1, -(bits // 4)))
        worst_root = max(
            root_equation_residual(rec.inhomo.roots, n, k)
            for k in range(n)
        )
        check("worst Bethe-equation residual", worst_root,
              mp.ldexp(1, -(bits // 8)))
        tq_max = mp.mpf(0)
        for z in tq_probe_points(n, rec.hom.roots):
            tq_max = max(tq_max, tq_residual(rec.grid, ev, z))
        check("worst functional-relation residual", tq_max,
              mp.ldexp(1, -(bits // 4)))
    if failures:
        print(f"n={n}: verification FAILED ({', '.join(failures)})",
              file=sys.stderr)
        return 2
    print(f"n={n}: all residuals recomputed from stored roots, all certified")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "solve": _cmd_solve,
        "sweep": _cmd_sweep,
        "report": _cmd_report,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except AnomalyFound as exc:
        print(f"anomaly: {exc}", file=sys.stderr)
        return 2
    except (BetheTQError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
