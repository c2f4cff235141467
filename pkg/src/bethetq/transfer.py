"""Transfer-matrix eigenvalue evaluation from a converged rapidity set.

The eigenvalue polynomial is never expanded into coefficients; it is
always evaluated through the functional relation

    t(z) = [ (z + i/2)^n * q(z - i) + (z - i/2)^n * q(z + i) ] / q(z)

at the points the downstream linear system needs.  Those points live on
the imaginary axis, where all q-polynomial zeros (which are real) stay a
safe distance away and every t value is mathematically real.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .errors import NearRootDivision, SymmetryViolation
from .homogeneous import HomogeneousSolution

__all__ = ["TransferEvaluator", "TGrid", "q_eval", "t_eval", "t_grid"]

# slack (in bits) granted to roundoff before a vanishing imaginary part
# is treated as a symmetry violation
_IMAG_SLACK_BITS = 20


@dataclass(frozen=True)
class TransferEvaluator:
    """Read-only evaluator bound to one homogeneous solution."""

    source: HomogeneousSolution
    precision_bits: int

    @classmethod
    def from_solution(cls, sol: HomogeneousSolution, bits: int | None = None):
        return cls(source=sol, precision_bits=bits or sol.precision_bits)


@dataclass(frozen=True)
class TGrid:
    """Real t values at the points consumed by the linear system.

    ``band[k-1]`` holds t((2k+1)i/2) for k = 1..n/2-2 and ``t_zero`` holds
    t(0).  ``t_three_halves`` equals ``band[0]`` whenever the band is
    non-empty; for n = 4 (empty band) it is evaluated separately because
    the degenerate one-unknown system still references it.
    """

    n: int
    band: tuple
    t_zero: mp.mpf
    t_three_halves: mp.mpf
    precision_bits: int

    def flat_values(self) -> list:
        """The grid as a flat list: band values then t(0)."""
        return list(self.band) + [self.t_zero]


def q_eval(ev: TransferEvaluator, z) -> mp.mpc:
    """Value of the ground-state q polynomial, the monic product over all
    stored rapidities."""
    with mp.workprec(ev.precision_bits):
        z = mp.mpmathify(z)
        acc = mp.mpc(1)
        for lam in ev.source.roots:
            acc *= z - lam
        return acc


def t_eval(ev: TransferEvaluator, z) -> mp.mpc:
    """Transfer-matrix eigenvalue at ``z`` via the three-point functional
    relation.

    Raises ``NearRootDivision`` when ``z`` sits so close to a rapidity that
    dividing by q(z) would wash out the working precision; the imaginary
    grid used by the pipeline never does.
    """
    bits = ev.precision_bits
    with mp.workprec(bits):
        z = mp.mpmathify(z)
        guard = mp.ldexp(1, -(bits // 2)) * (1 + abs(z))
        qz = mp.mpc(1)
        for lam in ev.source.roots:
            factor = z - lam
            if abs(factor) < guard:
                raise NearRootDivision(
                    f"t({z}) requested within {mp.nstr(guard, 3)} of rapidity {lam}"
                )
            qz *= factor
        n = ev.source.n
        half_i = mp.mpc(0, 0.5)
        eye = mp.mpc(0, 1)
        up = (z + half_i) ** n * q_eval(ev, z - eye)
        down = (z - half_i) ** n * q_eval(ev, z + eye)
        return (up + down) / qz


def _real_part_checked(value: mp.mpc, bits: int, label: str) -> mp.mpf:
    scale = abs(value)
    if scale != 0 and abs(value.imag) > mp.ldexp(1, -(bits - _IMAG_SLACK_BITS)) * scale:
        raise SymmetryViolation(
            f"{label} has relative imaginary part {mp.nstr(abs(value.imag) / scale, 3)}; "
            f"upstream roots are not mirror-symmetric or precision is exhausted"
        )
    return value.real


def t_grid(ev: TransferEvaluator, n: int) -> TGrid:
    """All t values the linear system needs: t((2k+1)i/2) for k=1..n/2-2
    plus t(0), asserted real and returned as reals.

    Raises ``SymmetryViolation`` if any imaginary part survives above the
    roundoff allowance.
    """
    if n != ev.source.n:
        raise ValueError(f"grid length {n} does not match solution n={ev.source.n}")
    bits = ev.precision_bits
    with mp.workprec(bits):
        band = []
        for k in range(1, n // 2 - 1):
            zk = mp.mpc(0, mp.mpf(2 * k + 1) / 2)
            band.append(_real_part_checked(t_eval(ev, zk), bits, f"t((2*{k}+1)i/2)"))
        t0 = _real_part_checked(t_eval(ev, mp.mpf(0)), bits, "t(0)")
        if band:
            t32 = band[0]
        else:
            t32 = _real_part_checked(t_eval(ev, mp.mpc(0, 1.5)), bits, "t(3i/2)")
    return TGrid(n=n, band=tuple(band), t_zero=t0, t_three_halves=t32,
                 precision_bits=bits)
