"""Assembly and solution of the linear system fixing the reduced Q polynomial.

With the pair of fixed zeros at +/- i/2 factored out, the remaining even
monic polynomial (written ``Qt`` below, degree n-2) is determined by its
values on the imaginary half-grid ``(2k+1)i/2, k = 1..n/2-1``.  Those
values solve a linear system that is tridiagonal except for one dense
closing row:

  row 1:            t(3i/2)*v_1 + 3*v_2                    = -2^(n+1)
  rows k=2..n/2-2:  (k+1)^(n-1)*(k-1)*v_{k-1}
                      + t((2k+1)i/2)*v_k
                      + (k+2)*k^(n-1)*v_{k+1}              = -4*(k(k+1))^(n-1)
  closing row:      t(0)*2^n*Qt(0) - 6*Qt(i) - 2^(4-n)     = 0

where ``Qt(0)`` and ``Qt(i)`` are expanded through the barycentric form,
making the last row dense in every unknown.  The default solver propagates
each unknown as an affine function of the seed v_1 through the sparse rows
(a shooting pass), then fixes the seed from the closing row; a dense LU
factorization of the full matrix serves as a small-size cross-check.

Because ``Qt`` is even with real values on the symmetric imaginary grid,
everything here is real arithmetic: in the variable ``w = z^2`` the grid
becomes the negative real nodes ``s_k = -(2k+1)^2/4`` and ``Qt(z) = P(z^2)``
for a monic real polynomial P interpolated barycentrically at those nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath as mp

from .errors import NearRootDivision, PrecisionExhausted, SingularClosure
from .precision import PrecisionConfig, require_chain_length
from .transfer import TGrid, TransferEvaluator, t_eval

__all__ = [
    "TQLinearSystem",
    "QGridValues",
    "build_system",
    "solve_grid",
    "cross_check_rel_diff",
    "qtilde_eval",
    "q_eval_inhomo",
    "tq_residual",
]

# a closing-row seed coefficient this far (in bits) below its own term
# magnitudes has no significant bits left
_SEED_LOSS_BITS = 64


def grid_nodes(n: int) -> list:
    """Interpolation nodes in the squared variable: s_k = -(2k+1)^2/4."""
    return [-mp.mpf((2 * k + 1) ** 2) / 4 for k in range(1, n // 2)]


def barycentric_weights(nodes) -> list:
    """Monic-form barycentric weights 1 / prod_{m != k} (s_k - s_m)."""
    weights = []
    for k, sk in enumerate(nodes):
        acc = mp.mpf(1)
        for m, sm in enumerate(nodes):
            if m != k:
                acc *= sk - sm
        weights.append(1 / acc)
    return weights


def _monic_eval(nodes, weights, values, s):
    """Monic barycentric interpolant P(s) = h(s) * (1 + sum v*w/(s - s_k))."""
    h = mp.mpf(1) if not isinstance(s, mp.mpc) else mp.mpc(1)
    acc = mp.mpf(1)
    for sk, wk, vk in zip(nodes, weights, values):
        h *= s - sk
        acc += vk * wk / (s - sk)
    return h * acc


def _affine_eval_coeffs(nodes, weights, s):
    """Coefficients (const, per-value) of the affine map values -> P(s)."""
    h = mp.fprod([s - sk for sk in nodes])
    coeffs = [h * wk / (s - sk) for sk, wk in zip(nodes, weights)]
    return h, coeffs


@dataclass(frozen=True)
class TQLinearSystem:
    """One assembled linear system at chain length ``n``.

    ``band_*`` tuples are aligned on k = 2..n/2-2.  ``closing_coefs`` and
    ``closing_rhs`` describe the dense row ``sum_m closing_coefs[m]*v_m =
    closing_rhs``.  For n = 4 the sparse rows are empty and ``extra_row``
    holds the (redundant, consistency-checked) one-unknown row obtained
    from the 3i/2 equation with its off-grid value expanded barycentrically.
    """

    n: int
    precision_bits: int
    first_diag: mp.mpf | None
    first_sup: mp.mpf | None
    first_rhs: mp.mpf | None
    band_sub: tuple
    band_diag: tuple
    band_sup: tuple
    band_rhs: tuple
    closing_coefs: tuple
    closing_rhs: mp.mpf
    extra_row: tuple | None
    nodes: tuple = field(repr=False, default=())
    weights: tuple = field(repr=False, default=())

    @property
    def size(self) -> int:
        return self.n // 2 - 1


def build_system(tg: TGrid, n: int) -> TQLinearSystem:
    """Assemble the sparse rows plus the dense closing row from a t grid."""
    require_chain_length(n)
    if tg.n != n:
        raise ValueError(f"t grid is for n={tg.n}, not n={n}")
    bits = tg.precision_bits
    with mp.workprec(bits):
        nodes = grid_nodes(n)
        weights = barycentric_weights(nodes)

        band_sub, band_diag, band_sup, band_rhs = [], [], [], []
        for k in range(2, n // 2 - 1):
            band_sub.append(mp.mpf(k + 1) ** (n - 1) * (k - 1))
            band_diag.append(tg.band[k - 1])
            band_sup.append((k + 2) * mp.mpf(k) ** (n - 1))
            band_rhs.append(-4 * (mp.mpf(k) * (k + 1)) ** (n - 1))

        if n >= 8:
            first_diag = tg.band[0]
            first_sup = mp.mpf(3)
            first_rhs = -mp.mpf(2) ** (n + 1)
            extra_row = None
        else:
            first_diag = first_sup = first_rhs = None
            # one-unknown chain: the 3i/2 equation with Qt(5i/2) expanded
            # through the barycentric form, kept as a consistency row
            h5, c5 = _affine_eval_coeffs(nodes, weights, mp.mpf(-25) / 4)
            coef = tg.t_three_halves + 3 * c5[0]
            rhs = -mp.mpf(2) ** (n + 1) - 3 * h5
            extra_row = (coef, rhs)

        h0, c0 = _affine_eval_coeffs(nodes, weights, mp.mpf(0))
        h1, c1 = _affine_eval_coeffs(nodes, weights, mp.mpf(-1))
        two_n = mp.mpf(2) ** n
        closing_coefs = tuple(tg.t_zero * two_n * a - 6 * b for a, b in zip(c0, c1))
        closing_rhs = -(tg.t_zero * two_n * h0 - 6 * h1 - mp.mpf(2) ** (4 - n))

    return TQLinearSystem(
        n=n,
        precision_bits=bits,
        first_diag=first_diag,
        first_sup=first_sup,
        first_rhs=first_rhs,
        band_sub=tuple(band_sub),
        band_diag=tuple(band_diag),
        band_sup=tuple(band_sup),
        band_rhs=tuple(band_rhs),
        closing_coefs=closing_coefs,
        closing_rhs=closing_rhs,
        extra_row=extra_row,
        nodes=tuple(nodes),
        weights=tuple(weights),
    )


@dataclass(frozen=True)
class QGridValues:
    """Solved values of the reduced polynomial on the imaginary half-grid.

    ``values[k-1] = Qt((2k+1)i/2)`` for k = 1..n/2-1; all real.
    ``closure_residual`` is the normalized defect of the closing equation
    (for n = 4, the worse of the closing pair).
    """

    n: int
    values: tuple
    precision_bits: int
    solve_method: str
    closure_residual: mp.mpf
    nodes: tuple = field(repr=False, default=())
    weights: tuple = field(repr=False, default=())

    def __post_init__(self):
        if len(self.values) != self.n // 2 - 1:
            raise ValueError("need n/2 - 1 grid values")
        if self.solve_method not in ("shooting", "dense_lu"):
            raise ValueError(f"unknown solve_method {self.solve_method!r}")
        if not self.nodes:
            object.__setattr__(self, "nodes", tuple(grid_nodes(self.n)))
        if not self.weights:
            with mp.workprec(self.precision_bits):
                object.__setattr__(
                    self, "weights", tuple(barycentric_weights(list(self.nodes)))
                )


def _shooting_values(sys: TQLinearSystem) -> list:
    """Propagate every unknown as an affine function of the seed v_1, then
    fix the seed from the closing row."""
    size = sys.size
    a = [mp.mpf(0)] * size
    b = [mp.mpf(0)] * size
    b[0] = mp.mpf(1)
    if size >= 2:
        a[1] = sys.first_rhs / sys.first_sup
        b[1] = -sys.first_diag / sys.first_sup
    for i, k in enumerate(range(2, size)):
        a[k] = (sys.band_rhs[i] - sys.band_diag[i] * a[k - 1]
                - sys.band_sub[i] * a[k - 2]) / sys.band_sup[i]
        b[k] = (-sys.band_diag[i] * b[k - 1]
                - sys.band_sub[i] * b[k - 2]) / sys.band_sup[i]

    const_acc = mp.mpf(0)
    seed_acc = mp.mpf(0)
    seed_scale = mp.mpf(0)
    for c, ai, bi in zip(sys.closing_coefs, a, b):
        const_acc += c * ai
        term = c * bi
        seed_acc += term
        seed_scale = max(seed_scale, abs(term))
    if seed_acc == 0:
        raise SingularClosure("closing row has exactly zero seed coefficient")
    if abs(seed_acc) < mp.ldexp(1, -(sys.precision_bits - _SEED_LOSS_BITS)) * seed_scale:
        raise PrecisionExhausted(
            f"n={sys.n}: closing-row seed coefficient retains no significant "
            f"bits at {sys.precision_bits} bits"
        )
    seed = (sys.closing_rhs - const_acc) / seed_acc
    return [ai + bi * seed for ai, bi in zip(a, b)]


def _dense_matrix(sys: TQLinearSystem):
    size = sys.size
    A = mp.zeros(size)
    rhs = mp.matrix(size, 1)
    row = 0
    if size >= 2:
        A[0, 0] = sys.first_diag
        A[0, 1] = sys.first_sup
        rhs[0] = sys.first_rhs
        row = 1
    for i, k in enumerate(range(2, size)):
        A[row, k - 2] = sys.band_sub[i]
        A[row, k - 1] = sys.band_diag[i]
        A[row, k] = sys.band_sup[i]
        rhs[row] = sys.band_rhs[i]
        row += 1
    for m, c in enumerate(sys.closing_coefs):
        A[row, m] = c
    rhs[row] = sys.closing_rhs
    return A, rhs


def _dense_values(sys: TQLinearSystem) -> list:
    A, rhs = _dense_matrix(sys)
    try:
        return list(mp.lu_solve(A, rhs))
    except ZeroDivisionError as exc:
        raise PrecisionExhausted(
            f"n={sys.n}: dense factorization numerically singular at "
            f"{sys.precision_bits} bits"
        ) from exc


def _closing_defect(sys: TQLinearSystem, values) -> mp.mpf:
    acc = mp.mpf(0)
    scale = abs(sys.closing_rhs)
    for c, v in zip(sys.closing_coefs, values):
        term = c * v
        acc += term
        scale = max(scale, abs(term))
    defect = abs(acc - sys.closing_rhs) / scale
    if sys.extra_row is not None:
        coef, rhs = sys.extra_row
        sc = max(abs(coef * values[0]), abs(rhs))
        defect = max(defect, abs(coef * values[0] - rhs) / sc)
    return defect


def solve_grid(sys: TQLinearSystem, cfg: PrecisionConfig,
               method: str = "shooting") -> QGridValues:
    """Solve the assembled system for the grid values.

    ``method="shooting"`` is the O(n) default.  ``method="dense_lu"`` is
    the cross-check mode: it solves the full matrix by LU factorization
    and additionally requires agreement with the shooting pass to relative
    2^(-bits/4) per component.
    """
    if cfg.bits != sys.precision_bits:
        raise ValueError("system was built at a different precision")
    with mp.workprec(cfg.bits):
        if method == "shooting":
            values = _shooting_values(sys)
        elif method == "dense_lu":
            values = _dense_values(sys)
            agree_tol = mp.ldexp(1, -(cfg.bits // 4))
            if cross_check_rel_diff(sys, cfg) > agree_tol:
                raise PrecisionExhausted(
                    f"n={sys.n}: dense LU and shooting disagree beyond "
                    f"relative 2^-{cfg.bits // 4}"
                )
        else:
            raise ValueError(f"unknown method {method!r}")

        closure = _closing_defect(sys, values)
        if closure >= mp.ldexp(1, -(cfg.bits // 2)):
            raise PrecisionExhausted(
                f"n={sys.n}: closing residual {mp.nstr(closure, 5)} exceeds "
                f"2^-{cfg.bits // 2}"
            )
    return QGridValues(
        n=sys.n,
        values=tuple(values),
        precision_bits=cfg.bits,
        solve_method=method,
        closure_residual=closure,
        nodes=sys.nodes,
        weights=sys.weights,
    )


def cross_check_rel_diff(sys: TQLinearSystem, cfg: PrecisionConfig) -> mp.mpf:
    """Largest per-component relative difference between the shooting and
    dense-LU solutions of the same system."""
    with mp.workprec(cfg.bits):
        shot = _shooting_values(sys)
        dense = _dense_values(sys)
        worst = mp.mpf(0)
        for x, y in zip(shot, dense):
            denom = max(abs(x), abs(y))
            if denom > 0:
                worst = max(worst, abs(x - y) / denom)
        return worst


def qtilde_eval(g: QGridValues, z):
    """Value of the reduced even polynomial anywhere, via the monic
    barycentric form in the squared variable.

    Exact grid hits short-circuit to the stored values, and evenness holds
    identically because only ``z**2`` enters.
    """
    with mp.workprec(g.precision_bits):
        z = mp.mpmathify(z)
        s = z * z
        for k, sk in enumerate(g.nodes):
            if s == sk:
                return g.values[k]
        return _monic_eval(g.nodes, g.weights, g.values, s)


def q_eval_inhomo(g: QGridValues, z):
    """Value of the full inhomogeneous Q polynomial, (z^2 + 1/4) * Qt(z)."""
    with mp.workprec(g.precision_bits):
        z = mp.mpmathify(z)
        return (z * z + mp.mpf(1) / 4) * qtilde_eval(g, z)


def tq_residual(g: QGridValues, ev: TransferEvaluator, lam) -> mp.mpf:
    """Relative defect of the inhomogeneous functional relation at ``lam``:

        | t*Q(lam) + (lam+i/2)^n Q(lam-i) + (lam-i/2)^n Q(lam+i)
          - 4(lam^2+1/4)^n |  /  max term magnitude

    ``lam`` must keep enough distance from the rapidities for the transfer
    eigenvalue itself to be computable (``NearRootDivision`` otherwise).
    """
    if ev.source.n != g.n:
        raise ValueError("evaluator and grid belong to different chain lengths")
    n = g.n
    with mp.workprec(g.precision_bits):
        lam = mp.mpmathify(lam)
        half_i = mp.mpc(0, 0.5)
        eye = mp.mpc(0, 1)
        a = t_eval(ev, lam) * q_eval_inhomo(g, lam)
        b = (lam + half_i) ** n * q_eval_inhomo(g, lam - eye)
        c = (lam - half_i) ** n * q_eval_inhomo(g, lam + eye)
        d = 4 * (lam * lam + mp.mpf(1) / 4) ** n
        scale = max(abs(a), abs(b), abs(c), abs(d))
        if scale == 0:
            return mp.mpf(0)
        return abs(a + b + c - d) / scale
