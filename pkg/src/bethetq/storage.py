"""Result records and their on-disk form.

One JSON document per chain length, every number a decimal string carrying
``ceil(bits*log10(2)) + 5`` significant digits so that reloading at the
recorded precision reproduces the original binary values exactly.  Files
are written atomically (temp file, then rename) and are deterministic for
a fixed configuration except for the ``timings`` block.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import mpmath as mp

from .analysis import LimitProbes, RootFamilyReport
from .homogeneous import HomogeneousSolution
from .qsolver import QGridValues
from .rootfind import InhomogeneousSolution

SCHEMA = "bethetq-result/1"

__all__ = [
    "RunRecord",
    "save_record",
    "load_record",
    "record_path",
    "write_summary_csv",
    "SUMMARY_COLUMNS",
]

SUMMARY_COLUMNS = ("n", "n_real", "n_imag", "n_arc", "max_residual",
                   "bits", "seconds")


@dataclass
class RunRecord:
    """Everything the pipeline learned about one chain length."""

    n: int
    bits: int
    escalations: int
    hom: HomogeneousSolution
    grid: QGridValues
    inhomo: InhomogeneousSolution
    report: RootFamilyReport
    probes: LimitProbes
    family: tuple
    cross_check_rel: Optional[mp.mpf]
    t_half_defect: mp.mpf
    q_half_defect: mp.mpf
    fixed_pair_distance: mp.mpf
    tq_random_max: mp.mpf
    timings: dict = field(default_factory=dict)

    def certified(self) -> bool:
        threshold = mp.ldexp(1, -(self.bits // 8))
        return (self.inhomo.max_residual < threshold
                and self.hom.max_residual < threshold
                and self.tq_random_max < threshold)


def digits_for_bits(bits: int) -> int:
    return math.ceil(bits * math.log10(2)) + 5


def _fmt(x, digits: int) -> str:
    return mp.nstr(mp.mpf(x), digits)


def _fmt_opt(x, digits: int):
    return None if x is None else _fmt(x, digits)


def _fmt_cplx(z, digits: int):
    if z is None:
        return None
    z = mp.mpc(z)
    return {"re": _fmt(z.real, digits), "im": _fmt(z.imag, digits)}


def _parse(s: str) -> mp.mpf:
    return mp.mpf(s)


def _parse_opt(s):
    return None if s is None else mp.mpf(s)


def _parse_cplx(d):
    return None if d is None else mp.mpc(mp.mpf(d["re"]), mp.mpf(d["im"]))


def grid_checksum(values_as_strings) -> str:
    digest = hashlib.sha256("\n".join(values_as_strings).encode()).hexdigest()
    return f"sha256:{digest}"


def record_to_dict(rec: RunRecord) -> dict:
    with mp.workprec(rec.bits + 16):  # keep incidental conversions exact
        return _record_to_dict_inner(rec)


def _record_to_dict_inner(rec: RunRecord) -> dict:
    d = digits_for_bits(rec.bits)
    grid_strings = [_fmt(v, d) for v in rec.grid.values]
    return {
        "schema": SCHEMA,
        "n": rec.n,
        "bits": rec.bits,
        "escalations": rec.escalations,
        "homogeneous": {
            "m": rec.hom.m,
            "roots": [_fmt(r, d) for r in rec.hom.roots],
            "quantum_numbers": list(rec.hom.quantum_numbers),
            "max_residual": _fmt(rec.hom.max_residual, d),
            "precision_bits": rec.hom.precision_bits,
        },
        "grid": {
            "values": grid_strings,
            "solve_method": rec.grid.solve_method,
            "closure_residual": _fmt(rec.grid.closure_residual, d),
            "checksum": grid_checksum(grid_strings),
        },
        "inhomogeneous": {
            "roots": [
                {
                    "re": _fmt(u.real, d),
                    "im": _fmt(u.imag, d),
                    "family": fam,
                    "residual": _fmt(res, d),
                }
                for u, fam, res in zip(rec.inhomo.roots, rec.family,
                                       rec.inhomo.residuals)
            ],
            "precision_bits": rec.inhomo.precision_bits,
        },
        "report": {
            "n_real": rec.report.n_real,
            "n_imag": rec.report.n_imag,
            "n_arc": rec.report.n_arc,
            "string_gaps": [_fmt(g, d) for g in rec.report.string_gaps],
            "string_deviation_interior":
                _fmt_opt(rec.report.string_deviation_interior, d),
            "string_deviation_ends":
                _fmt_opt(rec.report.string_deviation_ends, d),
            "max_real_deviation": _fmt_opt(rec.report.max_real_deviation, d),
            "min_arc_modulus": _fmt_opt(rec.report.min_arc_modulus, d),
            "ratio_probe": _fmt_cplx(rec.report.ratio_probe, d),
        },
        "probes": {
            "min_arc_modulus": _fmt_opt(rec.probes.min_arc_modulus, d),
            "arc_ratio": _fmt_cplx(rec.probes.arc_ratio, d),
            "string_ratio": _fmt_cplx(rec.probes.string_ratio, d),
            "inhomogeneous_term": _fmt_cplx(rec.probes.inhomogeneous_term, d),
        },
        "residual_maxima": {
            "homogeneous": _fmt(rec.hom.max_residual, d),
            "inhomogeneous": _fmt(rec.inhomo.max_residual, d),
            "closure": _fmt(rec.grid.closure_residual, d),
            "t_half_defect": _fmt(rec.t_half_defect, d),
            "q_half_defect": _fmt(rec.q_half_defect, d),
            "fixed_pair_distance": _fmt(rec.fixed_pair_distance, d),
            "tq_random_max": _fmt(rec.tq_random_max, d),
            "cross_check_rel": _fmt_opt(rec.cross_check_rel, d),
        },
        "timings": dict(rec.timings),
    }


def record_from_dict(doc: dict) -> RunRecord:
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"unknown result schema {doc.get('schema')!r}")
    bits = doc["bits"]
    n = doc["n"]
    with mp.workprec(bits):
        hom_doc = doc["homogeneous"]
        hom = HomogeneousSolution(
            n=n,
            m=hom_doc["m"],
            roots=tuple(_parse(s) for s in hom_doc["roots"]),
            quantum_numbers=tuple(hom_doc["quantum_numbers"]),
            max_residual=_parse(hom_doc["max_residual"]),
            precision_bits=hom_doc["precision_bits"],
        )
        grid_doc = doc["grid"]
        grid = QGridValues(
            n=n,
            values=tuple(_parse(s) for s in grid_doc["values"]),
            precision_bits=bits,
            solve_method=grid_doc["solve_method"],
            closure_residual=_parse(grid_doc["closure_residual"]),
        )
        roots, fams, residuals = [], [], []
        for entry in doc["inhomogeneous"]["roots"]:
            roots.append(mp.mpc(_parse(entry["re"]), _parse(entry["im"])))
            fams.append(entry["family"])
            residuals.append(_parse(entry["residual"]))
        inhomo = InhomogeneousSolution(
            n=n,
            roots=tuple(roots),
            residuals=tuple(residuals),
            precision_bits=doc["inhomogeneous"]["precision_bits"],
        )
        rep = doc["report"]
        report = RootFamilyReport(
            n=n,
            n_real=rep["n_real"],
            n_imag=rep["n_imag"],
            n_arc=rep["n_arc"],
            string_gaps=tuple(_parse(s) for s in rep["string_gaps"]),
            string_deviation_interior=_parse_opt(rep["string_deviation_interior"]),
            string_deviation_ends=_parse_opt(rep["string_deviation_ends"]),
            max_real_deviation=_parse_opt(rep["max_real_deviation"]),
            min_arc_modulus=_parse_opt(rep["min_arc_modulus"]),
            ratio_probe=_parse_cplx(rep["ratio_probe"]),
        )
        probes_doc = doc["probes"]
        probes = LimitProbes(
            min_arc_modulus=_parse_opt(probes_doc["min_arc_modulus"]),
            arc_ratio=_parse_cplx(probes_doc["arc_ratio"]),
            string_ratio=_parse_cplx(probes_doc["string_ratio"]),
            inhomogeneous_term=_parse_cplx(probes_doc["inhomogeneous_term"]),
        )
        resid = doc["residual_maxima"]
        return RunRecord(
            n=n,
            bits=bits,
            escalations=doc["escalations"],
            hom=hom,
            grid=grid,
            inhomo=inhomo,
            report=report,
            probes=probes,
            family=tuple(fams),
            cross_check_rel=_parse_opt(resid["cross_check_rel"]),
            t_half_defect=_parse(resid["t_half_defect"]),
            q_half_defect=_parse(resid["q_half_defect"]),
            fixed_pair_distance=_parse(resid["fixed_pair_distance"]),
            tq_random_max=_parse(resid["tq_random_max"]),
            timings=dict(doc.get("timings", {})),
        )


def record_path(out_dir: Path, n: int) -> Path:
    return Path(out_dir) / f"result_n{n:05d}.json"


def save_record(rec: RunRecord, out_dir: Path) -> Path:
    """Serialize one record atomically; returns the final path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = record_path(out_dir, rec.n)
    payload = json.dumps(record_to_dict(rec), indent=2) + "\n"
    fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=f".n{rec.n}-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(payload)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return target


def load_record(path: Path) -> RunRecord:
    with open(path) as handle:
        doc = json.load(handle)
    rec = record_from_dict(doc)
    stored = doc["grid"]["checksum"]
    recomputed = grid_checksum(doc["grid"]["values"])
    if stored != recomputed:
        raise ValueError(f"{path}: grid checksum mismatch")
    return rec


def write_summary_csv(records, path: Path) -> Path:
    """Flat per-chain summary: n, n_real, n_imag, n_arc, max_residual, bits,
    seconds."""
    path = Path(path)
    lines = [",".join(SUMMARY_COLUMNS)]
    for rec in sorted(records, key=lambda r: r.n):
        lines.append(",".join([
            str(rec.n),
            str(rec.report.n_real),
            str(rec.report.n_imag),
            str(rec.report.n_arc),
            mp.nstr(rec.inhomo.max_residual, 8),
            str(rec.bits),
            f"{rec.timings.get('total_s', float('nan')):.3f}",
        ]))
    path.write_text("\n".join(lines) + "\n")
    return path
