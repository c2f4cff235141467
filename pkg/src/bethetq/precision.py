"""Working-precision configuration shared by every stage of the pipeline.

All arithmetic runs under ``mpmath.workprec`` at a single bit count chosen
up front.  The linear-system entries span roughly ``n*log2(n)`` binary
orders of magnitude, so the default scales linearly with the chain length;
when a downstream certification fails, the pipeline multiplies the bit
count by ``escalation_factor`` and re-solves from scratch.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp


@dataclass(frozen=True)
class PrecisionConfig:
    """Knobs for one end-to-end solve at a fixed mantissa size.

    bits
        Mantissa bits used by every stage (Newton solve, transfer-matrix
        evaluation, linear solve, root finding, certification).
    newton_tol
        Convergence threshold on the largest Newton update step.
    max_iterations
        Iteration budget for Newton-Raphson and simultaneous root iteration.
    classify_tol
        Threshold below which a real or imaginary part counts as exactly
        zero when sorting roots into families.
    escalation_factor
        Multiplier applied to ``bits`` when an adaptive re-solve triggers.
    """

    bits: int
    newton_tol: mp.mpf
    max_iterations: int
    classify_tol: mp.mpf
    escalation_factor: int = 2

    def __post_init__(self):
        if self.bits < 64:
            raise ValueError(f"bits must be >= 64, got {self.bits}")
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if not self.classify_tol > 0:
            raise ValueError("classify_tol must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.escalation_factor <= 1:
            raise ValueError("escalation_factor must exceed 1")

    @classmethod
    def for_bits(cls, bits: int, max_iterations: int = 200) -> "PrecisionConfig":
        """Config at an explicit bit count with the standard derived tolerances."""
        return cls(
            bits=bits,
            newton_tol=mp.ldexp(1, -(bits - 32)),
            max_iterations=max_iterations,
            classify_tol=mp.ldexp(1, -(bits // 8)),
        )

    @classmethod
    def auto(cls, n: int, floor_bits: int = 512) -> "PrecisionConfig":
        """Default precision for chain length ``n``: max(floor_bits, 16*n)."""
        return cls.for_bits(max(floor_bits, 16 * n))


def require_chain_length(n: int) -> None:
    """Reject chain lengths outside the solver's domain (positive multiples of 4)."""
    if not isinstance(n, int) or n <= 0 or n % 4 != 0:
        raise ValueError(
            f"chain length must be a positive multiple of 4, got {n!r}"
        )
