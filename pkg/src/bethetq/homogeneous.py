"""Ground-state solver for the logarithmic Bethe equations of the periodic
XXX spin-1/2 chain.

For a chain of even length ``n`` with ``n/2`` even (i.e. ``n`` a multiple
of 4) the antiferromagnetic ground state is described by ``n/2`` real
rapidities that come in exact ``+/-`` pairs.  On the real axis the
logarithmic equations reduce, via ``ln((1-2ix)/(1+2ix)) = -2i*atan(2x)``,
to a coupled real system for the ``n/4`` positive rapidities::

    2n*atan(2*mu_a) = (2a - 1)*pi + 2*sum_{b != a} atan(mu_a - mu_b)
                                  + 2*sum_b       atan(mu_a + mu_b)

with ``a = 1..n/4`` and the mirror roots substituted as ``-mu_b``.  The
half-odd branch offsets ``(2a-1)/2`` are the symmetric ground-state
assignment, equivalent to the integer branch labels ``2(j-1-n)`` of the
full unreduced system.  Newton-Raphson with step-halving converges from a
simple spread of initial points; no branch tracking is needed because all
ground-state roots are real.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import mpmath as mp

from .errors import DegenerateRoots, NonConvergence
from .precision import PrecisionConfig, require_chain_length

__all__ = [
    "HomogeneousSolution",
    "ground_state_quantum_numbers",
    "solve_ground_state",
    "bethe_residual",
    "max_bethe_residual",
]


@dataclass(frozen=True)
class HomogeneousSolution:
    """Converged ground-state rapidities for one chain length.

    ``roots`` is ascending and mirror-symmetric: ``roots[j] == -roots[m-1-j]``
    bitwise, because the negative half is constructed by exact negation of
    the solved positive half.
    """

    n: int
    m: int
    roots: tuple
    quantum_numbers: tuple
    max_residual: mp.mpf
    precision_bits: int

    def __post_init__(self):
        require_chain_length(self.n)
        if self.m != self.n // 2 or len(self.roots) != self.m:
            raise ValueError("need exactly n/2 roots")
        if any(b >= a for a, b in zip(self.roots[1:], self.roots)):
            raise ValueError("roots must be strictly ascending")

    @property
    def positive_roots(self) -> tuple:
        return self.roots[self.m // 2:]


def ground_state_quantum_numbers(n: int) -> list:
    """Branch integers selecting the ground state, ``2(j-1-n)`` for j=1..n/2."""
    require_chain_length(n)
    return [2 * (j - 1 - n) for j in range(1, n // 2 + 1)]


def _initial_positive_roots(n: int) -> list:
    # spread of points inside the root band; almost any spread converges
    quarter = n // 4
    return [mp.tan(mp.pi * (2 * a - 1 + quarter) / (2 * (n + 1))) / 2
            for a in range(1, quarter + 1)]


def _warm_positive_roots(n: int, warm: HomogeneousSolution) -> list:
    # reuse the previous chain's positive roots and extrapolate the new top ones
    prev = list(warm.positive_roots)
    want = n // 4
    while len(prev) < want:
        gap = prev[-1] - prev[-2] if len(prev) >= 2 else prev[-1]
        prev.append(prev[-1] + gap)
    return prev[:want]


def _newton_system(n: int, mu: Sequence[mp.mpf]):
    """Residual vector and Jacobian of the reduced positive-root system."""
    p = len(mu)
    F = []
    for a in range(p):
        acc = 2 * n * mp.atan(2 * mu[a]) - (2 * (a + 1) - 1) * mp.pi
        for b in range(p):
            if b != a:
                acc -= 2 * mp.atan(mu[a] - mu[b])
            acc -= 2 * mp.atan(mu[a] + mu[b])
        F.append(acc)
    J = mp.zeros(p)
    for a in range(p):
        diag = (4 * n - 4) / (1 + 4 * mu[a] ** 2)
        for b in range(p):
            if b == a:
                continue
            dm = 1 + (mu[a] - mu[b]) ** 2
            dp = 1 + (mu[a] + mu[b]) ** 2
            diag -= 2 / dm + 2 / dp
            J[a, b] = 2 / dm - 2 / dp
        J[a, a] = diag
    return F, J


def solve_ground_state(
    n: int,
    cfg: Optional[PrecisionConfig] = None,
    warm_start: Optional[HomogeneousSolution] = None,
) -> HomogeneousSolution:
    """Solve the ground-state Bethe equations for chain length ``n``.

    Only the ``n/4`` positive roots are iterated; the negative half is
    mirrored exactly.  With ``warm_start`` (a solution for a smaller chain)
    the previous roots seed the iteration, otherwise a tangent-spread
    initial guess is used.

    Raises ``NonConvergence`` if Newton-Raphson exhausts its iteration
    budget and ``DegenerateRoots`` if two roots collide.
    """
    require_chain_length(n)
    if cfg is None:
        cfg = PrecisionConfig.auto(n, floor_bits=256)
    if warm_start is not None and warm_start.n >= n:
        raise ValueError("warm_start must come from a smaller chain")

    with mp.workprec(cfg.bits):
        mu = (_warm_positive_roots(n, warm_start) if warm_start is not None
              else _initial_positive_roots(n))
        mu = [mp.mpf(x) for x in mu]
        F, J = _newton_system(n, mu)
        fnorm = max(abs(f) for f in F)
        converged = False
        for _ in range(cfg.max_iterations):
            try:
                step = mp.lu_solve(J, mp.matrix([-f for f in F]))
            except ZeroDivisionError as exc:  # Jacobian singular at this precision
                raise NonConvergence(
                    f"n={n}: Newton system numerically singular at {cfg.bits} bits"
                ) from exc
            scale = mp.mpf(1)
            for _halve in range(10):
                trial = [m_ + scale * s_ for m_, s_ in zip(mu, step)]
                Ft, Jt = _newton_system(n, trial)
                tnorm = max(abs(f) for f in Ft)
                if tnorm <= fnorm or fnorm < cfg.newton_tol:
                    break
                scale /= 2
            mu, F, J, fnorm = trial, Ft, Jt, tnorm
            if max(abs(scale * s_) for s_ in step) < cfg.newton_tol:
                converged = True
                break
        if not converged:
            raise NonConvergence(
                f"n={n}: no convergence within {cfg.max_iterations} iterations "
                f"at {cfg.bits} bits"
            )

        roots = tuple(-x for x in reversed(mu)) + tuple(mu)
        for a, b in zip(roots, roots[1:]):
            if abs(b - a) < cfg.newton_tol:
                raise DegenerateRoots(f"n={n}: roots {a} and {b} collided")

        worst = max_bethe_residual(roots, n)
        if worst >= cfg.newton_tol:
            raise NonConvergence(
                f"n={n}: converged step but residual {mp.nstr(worst, 5)} "
                f"exceeds newton_tol"
            )

    return HomogeneousSolution(
        n=n,
        m=n // 2,
        roots=roots,
        quantum_numbers=tuple(ground_state_quantum_numbers(n)),
        max_residual=worst,
        precision_bits=cfg.bits,
    )


def _equation_defect(roots: Sequence, n: int, k: int) -> mp.mpc:
    """Relative defect of the product-form Bethe equation at root ``k`` (0-based)."""
    lam = roots[k]
    half_i = mp.mpc(0, 0.5)
    eye = mp.mpc(0, 1)
    lhs = (lam + half_i) ** n
    rhs = (lam - half_i) ** n
    for j, other in enumerate(roots):
        if j == k:
            continue
        lhs *= lam - other - eye
        rhs *= lam - other + eye
    scale = abs(lhs) + abs(rhs)
    if scale == 0:
        return mp.mpc(0)
    return (lhs - rhs) / scale


def bethe_residual(sol: HomogeneousSolution, k: int) -> mp.mpc:
    """Defect of the product-form Bethe equation at root ``k`` (1-based),
    normalized by |LHS| + |RHS|; an exact solution gives 0."""
    if not 1 <= k <= sol.m:
        raise ValueError(f"k must be in 1..{sol.m}")
    with mp.workprec(sol.precision_bits):
        return _equation_defect(sol.roots, sol.n, k - 1)


def max_bethe_residual(roots: Sequence, n: int) -> mp.mpf:
    """Largest Bethe-equation defect over an arbitrary root list.

    The empty list is the trivial zero-magnon state: there are no equations,
    so the maximum defect is identically 0.
    """
    if not roots:
        return mp.mpf(0)
    return max(abs(_equation_defect(roots, n, k)) for k in range(len(roots)))
