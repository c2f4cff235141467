"""Recovery of all n zeros of the inhomogeneous Q polynomial from its grid
values, plus per-root certification against the Bethe equations.

The reduced polynomial is even, so the search runs in the squared variable
``w = z^2`` where the degree halves, every coefficient is real, and the
near-symmetric pairs that slow simultaneous iteration disappear.  The
pipeline is: recover monic coefficients of ``P(w)`` by Newton interpolation,
run Aberth-Ehrlich on ``P``, map each ``w`` root back to the pair
``z = +/-sqrt(w)``, polish every representative by Newton iteration on the
barycentric (not monomial) evaluation of Q, append the fixed pair
``+/- i/2``, and certify each root's Bethe-equation residual.

Certification uses the identity obtained by evaluating the inhomogeneous
functional relation at a zero ``u`` of Q, where ``Q(u -/+ i)`` contributes
a factor ``-/+ i`` alongside the deleted products:

    (u - i/2)^n * prod_{j != k} (u - u_j + i)
      - (u + i/2)^n * prod_{j != k} (u - u_j - i)  =  -4i * (u^2 + 1/4)^n

Note the right side carries the factor ``-4i``; the ``+4`` variant
sometimes quoted drops the ``i`` picked up from the deleted linear factor
and is not satisfied by the actual ground-state roots.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import mpmath as mp

from .errors import (
    IllConditionedInterpolation,
    MultiplicityCollision,
    RootCertificationFailure,
)
from .precision import PrecisionConfig
from .qsolver import QGridValues

__all__ = [
    "InhomogeneousSolution",
    "even_coefficients",
    "find_roots",
    "inhomo_bethe_residual",
    "root_equation_residual",
]

_POLISH_SLACK_BITS = 16
_ABERTH_SLACK_BITS = 24


@dataclass(frozen=True)
class InhomogeneousSolution:
    """All n certified zeros of the inhomogeneous Q polynomial.

    The multiset is closed under negation exactly (mirrored pairs are built
    by negation) and under conjugation to within the working accuracy;
    ``+/- i/2`` are always members, stored exactly.
    """

    n: int
    roots: tuple
    residuals: tuple
    precision_bits: int

    def __post_init__(self):
        if len(self.roots) != self.n or len(self.residuals) != self.n:
            raise ValueError("need exactly n roots with matching residuals")

    @property
    def max_residual(self) -> mp.mpf:
        return max(self.residuals)


def even_coefficients(g: QGridValues, cfg: Optional[PrecisionConfig] = None) -> list:
    """Monic real coefficients c_0..c_D of P(w) with Qt(z) = P(z^2).

    The degree-D interpolant is built through D+1 points: the stored grid
    nodes plus w = -1/4 (valued through the barycentric form, which builds
    the monic normalization in).  The recovered leading coefficient must
    therefore come out as 1; a deviation beyond 2^(-bits/4) means the
    divided differences cancelled catastrophically and the interpolation
    cannot be trusted (``IllConditionedInterpolation``).
    """
    bits = cfg.bits if cfg is not None else g.precision_bits
    with mp.workprec(bits):
        pts = [-mp.mpf(1) / 4] + list(g.nodes)
        vals = [_bary_p(g, pts[0])] + list(g.values)

        # divided-difference table, in place
        dd = list(vals)
        count = len(pts)
        for order in range(1, count):
            for i in range(count - 1, order - 1, -1):
                dd[i] = (dd[i] - dd[i - 1]) / (pts[i] - pts[i - order])

        lead = dd[-1]
        if abs(lead - 1) > mp.ldexp(1, -(bits // 4)):
            raise IllConditionedInterpolation(
                f"n={g.n}: recovered leading coefficient {mp.nstr(lead, 8)} "
                f"deviates from 1 beyond 2^-{bits // 4}"
            )

        # Newton form -> monomial coefficients (ascending)
        coeffs = [dd[-1]]
        for j in range(count - 2, -1, -1):
            nxt = [mp.mpf(0)] * (len(coeffs) + 1)
            for i, ci in enumerate(coeffs):
                nxt[i + 1] += ci
                nxt[i] -= pts[j] * ci
            nxt[0] += dd[j]
            coeffs = nxt
        return [c / lead for c in coeffs]


def _bary_p(g: QGridValues, s):
    """P(s) through the monic barycentric form (real or complex ``s``)."""
    h = mp.mpf(1) if not isinstance(s, mp.mpc) else mp.mpc(1)
    acc = mp.mpf(1)
    for sk, wk, vk in zip(g.nodes, g.weights, g.values):
        h *= s - sk
        acc += vk * wk / (s - sk)
    return h * acc


def _bary_p_and_dp(g: QGridValues, s):
    """P(s) and P'(s) together, each O(grid size)."""
    h = mp.mpf(1) if not isinstance(s, mp.mpc) else mp.mpc(1)
    gsum = mp.mpf(1)
    gprime = mp.mpf(0)
    hlog = mp.mpf(0)
    for sk, wk, vk in zip(g.nodes, g.weights, g.values):
        diff = s - sk
        h *= diff
        term = vk * wk / diff
        gsum += term
        gprime -= term / diff
        hlog += 1 / diff
    return h * gsum, h * (hlog * gsum + gprime)


def _fujiwara_radius(coeffs) -> mp.mpf:
    """Coefficient-based bound on the largest root modulus (monic input)."""
    deg = len(coeffs) - 1
    best = mp.mpf(0)
    for j in range(1, deg + 1):
        c = abs(coeffs[deg - j])
        if c > 0:
            best = max(best, mp.exp(mp.log(c) / j))
    return 2 * best + 1


def _horner_pair(coeffs, dcoeffs, w):
    p = mp.mpc(0)
    for c in reversed(coeffs):
        p = p * w + c
    dp = mp.mpc(0)
    for c in reversed(dcoeffs):
        dp = dp * w + c
    return p, dp


def _aberth(coeffs, guesses, bits, max_sweeps):
    """Simultaneous Aberth-Ehrlich iteration on a monic real polynomial.

    A root counts as settled when its correction is negligible or when the
    polynomial value drops below the roundoff noise of its own Horner
    evaluation (eps * sum |c_j| |w|^j); past that floor no amount of
    iteration at this precision can improve the estimate, and the
    barycentric Newton polish afterwards restores full accuracy anyway.
    """
    deg = len(coeffs) - 1
    dcoeffs = [j * coeffs[j] for j in range(1, deg + 1)]
    abs_coeffs = [abs(c) for c in coeffs]
    w = [mp.mpc(x) for x in guesses]
    tol = mp.ldexp(1, -(bits - _ABERTH_SLACK_BITS))
    noise_unit = mp.ldexp(4 * (deg + 1), -bits)
    settled = [False] * deg
    for _ in range(max_sweeps):
        moved = False
        for i in range(deg):
            if settled[i]:
                continue
            p, dp = _horner_pair(coeffs, dcoeffs, w[i])
            if p == 0:
                settled[i] = True
                continue
            mag = abs(w[i])
            floor = mp.mpf(0)
            for c in reversed(abs_coeffs):
                floor = floor * mag + c
            if abs(p) <= noise_unit * floor:
                settled[i] = True
                continue
            if dp == 0:
                w[i] += mp.ldexp(1, -(bits // 3)) * (1 + mag)
                moved = True
                continue
            ratio = p / dp
            repulsion = mp.mpc(0)
            for j in range(deg):
                if j != i:
                    diff = w[i] - w[j]
                    if diff == 0:
                        diff = mp.mpc(mp.ldexp(1, -(bits // 2)))
                    repulsion += 1 / diff
            denom = 1 - ratio * repulsion
            if denom == 0:
                w[i] += mp.ldexp(1, -(bits // 3)) * (1 + mag)
                moved = True
                continue
            delta = ratio / denom
            w[i] -= delta
            if abs(delta) <= tol * (1 + abs(w[i])):
                settled[i] = True
            else:
                moved = True
        if not moved and all(settled):
            return w
    raise RootCertificationFailure(
        f"simultaneous iteration on degree {deg} did not settle within "
        f"{max_sweeps} sweeps at {bits} bits"
    )


def _polish_even_parameter(g: QGridValues, x0, sign, bits, max_iter):
    """Newton on the real section q(x) = (sign*x^2 + 1/4) * P(sign*x^2).

    ``sign=+1`` polishes a real root x, ``sign=-1`` polishes the imaginary
    part y of a root iy; both keep the iteration in real arithmetic.  Stops
    on a negligible step or when |q| stagnates at its roundoff floor,
    keeping the best iterate seen.
    """
    x = mp.mpf(x0)
    tol = mp.ldexp(1, -(bits - _POLISH_SLACK_BITS))
    best_x, best_f = x, mp.inf
    for _ in range(max_iter):
        s = sign * x * x
        p, dp = _bary_p_and_dp(g, s)
        f = (s + mp.mpf(1) / 4) * p
        if abs(f) < best_f:
            best_x, best_f = x, abs(f)
        elif abs(f) >= best_f:
            break  # stagnated at the noise floor
        df = 2 * sign * x * (p + (s + mp.mpf(1) / 4) * dp)
        if df == 0:
            break
        step = f / df
        x -= step
        if abs(step) <= tol * (1 + abs(x)):
            if abs(step) > 0:
                best_x = x
            break
    return best_x


def _polish_complex(g: QGridValues, z0, bits, max_iter):
    z = mp.mpc(z0)
    tol = mp.ldexp(1, -(bits - _POLISH_SLACK_BITS))
    best_z, best_f = z, mp.inf
    for _ in range(max_iter):
        s = z * z
        p, dp = _bary_p_and_dp(g, s)
        f = (s + mp.mpf(1) / 4) * p
        if abs(f) < best_f:
            best_z, best_f = z, abs(f)
        elif abs(f) >= best_f:
            break
        df = 2 * z * (p + (s + mp.mpf(1) / 4) * dp)
        if df == 0:
            break
        step = f / df
        z -= step
        if abs(step) <= tol * (1 + abs(z)):
            if abs(step) > 0:
                best_z = z
            break
    return best_z


def _warm_guesses(warm: InhomogeneousSolution, degree: int):
    """Squared images of the previous chain's canonical root representatives,
    padded with outer-circle points for the newly appearing roots."""
    reps = []
    for u in warm.roots:
        if u == mp.mpc(0, 0.5) or u == mp.mpc(0, -0.5):
            continue
        if u.real > 0 or (u.real == 0 and u.imag > 0):
            reps.append(u * u)
    reps = reps[:degree]
    radius = 2 * (1 + max((abs(w) for w in reps), default=mp.mpf(1)))
    k = 0
    while len(reps) < degree:
        angle = mp.mpf(2) * mp.pi * k / max(degree, 1) + mp.mpf("0.9")
        reps.append(radius * mp.mpc(mp.cos(angle), mp.sin(angle)))
        k += 1
    return reps


def _cold_guesses(coeffs, degree):
    radius = _fujiwara_radius(coeffs)
    out = []
    for k in range(degree):
        angle = mp.mpf(2) * mp.pi * k / degree + mp.mpf("0.4")
        out.append(radius * mp.mpc(mp.cos(angle), mp.sin(angle)))
    return out


def find_roots(
    g: QGridValues,
    cfg: Optional[PrecisionConfig] = None,
    warm_start: Optional[InhomogeneousSolution] = None,
) -> InhomogeneousSolution:
    """All n zeros of the inhomogeneous Q polynomial, polished and certified.

    Raises ``RootCertificationFailure`` when any polished root misses its
    Bethe-equation residual threshold 2^(-bits/8) (the caller escalates
    precision and re-solves) and ``MultiplicityCollision`` when two squared
    roots coincide within the classification tolerance.
    """
    if cfg is None:
        cfg = PrecisionConfig.for_bits(g.precision_bits)
    bits = cfg.bits
    n = g.n
    degree = (n - 2) // 2
    with mp.workprec(bits):
        coeffs = even_coefficients(g, cfg)
        if warm_start is not None and warm_start.n < n:
            guesses = _warm_guesses(warm_start, degree)
        else:
            guesses = _cold_guesses(coeffs, degree)
        wroots = _aberth(coeffs, guesses, bits, max_sweeps=max(cfg.max_iterations, 400))

        for i in range(len(wroots)):
            for j in range(i + 1, len(wroots)):
                if abs(wroots[i] - wroots[j]) < cfg.classify_tol:
                    raise MultiplicityCollision(
                        f"n={n}: squared roots {wroots[i]} and {wroots[j]} coincide"
                    )

        # snap numerically-real squared roots, conjugate-pair the rest
        real_w, complex_w = [], []
        snap = mp.ldexp(1, -(bits // 2))
        for w in wroots:
            if abs(w.imag) <= snap * (1 + abs(w)):
                real_w.append(w.real)
            else:
                complex_w.append(w)
        complex_w.sort(key=lambda w: (w.real, w.imag))
        uppers = [w for w in complex_w if w.imag > 0]
        lowers = [w for w in complex_w if w.imag < 0]
        paired = []
        for w in uppers:
            partner = min(lowers, key=lambda v: abs(mp.conj(v) - w), default=None)
            if partner is not None:
                lowers.remove(partner)
                paired.append((w + mp.conj(partner)) / 2)
            else:
                paired.append(w)
        unpaired = lowers  # conjugation closure failed; certification decides

        half = mp.mpf(1) / 2
        roots = [mp.mpc(0, half), mp.mpc(0, -half)]
        for w in real_w:
            if abs(w) < cfg.classify_tol:
                raise MultiplicityCollision(
                    f"n={n}: squared root at origin implies a double zero"
                )
            if w > 0:
                x = _polish_even_parameter(g, mp.sqrt(w), +1, bits,
                                           cfg.max_iterations)
                roots += [mp.mpc(x), mp.mpc(-x)]
            else:
                y = _polish_even_parameter(g, mp.sqrt(-w), -1, bits,
                                           cfg.max_iterations)
                roots += [mp.mpc(0, y), mp.mpc(0, -y)]
        for w in paired:
            z = _polish_complex(g, mp.sqrt(w), bits, cfg.max_iterations)
            roots += [z, -z, mp.conj(z), -mp.conj(z)]
        for w in unpaired:
            z = _polish_complex(g, mp.sqrt(w), bits, cfg.max_iterations)
            roots += [z, -z]

        roots.sort(key=lambda u: (u.real, u.imag))
        residuals = tuple(
            root_equation_residual(roots, n, k) for k in range(len(roots))
        )
        threshold = mp.ldexp(1, -(bits // 8))
        worst = max(residuals)
        if worst >= threshold:
            raise RootCertificationFailure(
                f"n={n}: worst root residual {mp.nstr(worst, 5)} exceeds "
                f"2^-{bits // 8} at {bits} bits"
            )
        for i in range(len(roots)):
            for j in range(i + 1, len(roots)):
                if abs(roots[i] - roots[j]) < cfg.classify_tol:
                    raise MultiplicityCollision(
                        f"n={n}: roots {roots[i]} and {roots[j]} coincide"
                    )
        _check_symmetry_closure(roots, cfg.classify_tol, n)

    return InhomogeneousSolution(
        n=n,
        roots=tuple(roots),
        residuals=residuals,
        precision_bits=bits,
    )


def _check_symmetry_closure(roots, tol, n):
    for u in roots:
        if min(abs(v + u) for v in roots) > tol:
            raise RootCertificationFailure(
                f"n={n}: root multiset not closed under negation near {u}"
            )
        if min(abs(v - mp.conj(u)) for v in roots) > tol:
            raise RootCertificationFailure(
                f"n={n}: root multiset not closed under conjugation near {u}"
            )
    if min(abs(u - mp.mpc(0, 0.5)) for u in roots) > tol:
        raise RootCertificationFailure(f"n={n}: +i/2 missing from root multiset")


def root_equation_residual(roots: Sequence, n: int, k0: int) -> mp.mpf:
    """Relative Bethe-equation defect of ``roots[k0]`` (0-based) within the
    full multiset; see the module docstring for the identity used."""
    u = roots[k0]
    half_i = mp.mpc(0, 0.5)
    eye = mp.mpc(0, 1)
    term1 = (u - half_i) ** n
    term2 = (u + half_i) ** n
    for j, v in enumerate(roots):
        if j == k0:
            continue
        term1 *= u - v + eye
        term2 *= u - v - eye
    rhs = -4 * eye * (u * u + mp.mpf(1) / 4) ** n
    scale = max(abs(term1), abs(term2), abs(rhs))
    defect = abs(term1 - term2 - rhs)
    if scale == 0:
        return defect
    return defect / scale


def inhomo_bethe_residual(sol: InhomogeneousSolution, k: int) -> mp.mpf:
    """Relative Bethe-equation defect of root ``k`` (1-based).

    At ``u = +/- i/2`` the right side vanishes identically and both left
    products carry an exact zero factor, so the defect is exactly 0.
    """
    if not 1 <= k <= sol.n:
        raise ValueError(f"k must be in 1..{sol.n}")
    with mp.workprec(sol.precision_bits):
        return root_equation_residual(sol.roots, sol.n, k - 1)
