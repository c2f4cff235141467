"""Figure reproductions rendered to scalable vector graphics.

Six standard views of a sweep: homogeneous rapidities by chain length,
the full complex-plane root cloud, real roots against the homogeneous
solution, the imaginary string, the string-count bounds, and the
upper-right arc family.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import MissingRange

__all__ = ["emit_figures", "FIGURE_NAMES"]

FIGURE_NAMES = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")


def _require_range(result, cfg):
    have = {rec.n for rec in result.records}
    want = set(cfg.sizes())
    missing = sorted(want - have)
    if missing:
        raise MissingRange(
            f"figures requested for chain lengths with no results: {missing}"
        )


def _new_axes(xlabel, ylabel, title):
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    return fig, ax


def _fig1(result, path):
    fig, ax = _new_axes("rapidity", "chain length n",
                        "Homogeneous ground-state rapidities")
    for rec in result.records:
        xs = [float(r) for r in rec.hom.roots]
        ax.plot(xs, [rec.n] * len(xs), ".", color="black", markersize=2)
    fig.savefig(path)
    plt.close(fig)


def _fig2(result, path):
    fig, ax = _new_axes("Re u", "Im u", "Inhomogeneous Bethe roots")
    ns, xs, ys = [], [], []
    for rec in result.records:
        for u in rec.inhomo.roots:
            ns.append(rec.n)
            xs.append(float(u.real))
            ys.append(float(u.imag))
    scatter = ax.scatter(xs, ys, c=ns, s=4, cmap="viridis")
    fig.colorbar(scatter, ax=ax, label="chain length n")
    fig.savefig(path)
    plt.close(fig)


def _fig3(result, path):
    fig, ax = _new_axes("root value", "chain length n",
                        "Positive real roots: inhomogeneous vs homogeneous")
    for rec in result.records:
        hom = [float(r) for r in rec.hom.roots if r > 0]
        ax.plot(hom, [rec.n] * len(hom), "o", markerfacecolor="none",
                markeredgecolor="gray", markersize=5)
        real = [float(u.real) for u, fam in zip(rec.inhomo.roots, rec.family)
                if fam == "real" and u.real > 0]
        ax.plot(real, [rec.n] * len(real), ".", color="black", markersize=3)
    fig.savefig(path)
    plt.close(fig)


def _fig4(result, path):
    fig, ax = _new_axes("chain length n", "Im u", "Imaginary Bethe roots")
    for rec in result.records:
        ys = [float(u.imag) for u, fam in zip(rec.inhomo.roots, rec.family)
              if fam == "imaginary"]
        ax.plot([rec.n] * len(ys), ys, ".", color="black", markersize=3)
    fig.savefig(path)
    plt.close(fig)


def _fig5(result, path):
    fig, ax = _new_axes("chain length n", "imaginary-root count",
                        "Imaginary string length and its bounds")
    ns = [rec.n for rec in result.records]
    counts = [rec.report.n_imag for rec in result.records]
    ax.step(ns, counts, where="mid", color="black", label="count")
    ax.plot(ns, [n / 8 for n in ns], "--", color="gray", label="n/8")
    ax.plot(ns, [n / 8 + 4.5 for n in ns], ":", color="gray", label="n/8 + 9/2")
    ax.legend()
    fig.savefig(path)
    plt.close(fig)


def _fig6(result, path):
    fig, ax = _new_axes("Re u", "Im u", "Arc roots, upper right quadrant")
    cmap = plt.get_cmap("viridis")
    lengths = [rec.n for rec in result.records] or [1]
    top = max(lengths)
    for rec in result.records:
        pts = [(float(u.real), float(u.imag))
               for u, fam in zip(rec.inhomo.roots, rec.family)
               if fam == "arc" and u.real > 0 and u.imag > 0]
        if not pts:
            continue
        pts.sort(key=lambda p: p[1])
        xs, ys = zip(*pts)
        color = cmap(rec.n / top)
        ax.plot(xs, ys, "--", color=color, linewidth=0.8)
        ax.plot(xs, ys, ".", color=color, markersize=4)
    fig.savefig(path)
    plt.close(fig)


_BUILDERS = {
    "fig1": _fig1,
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
}


def emit_figures(result, cfg) -> list:
    """Render each requested figure of the sweep to ``<out>/<name>.svg``.

    An empty request produces no files.  Raises ``MissingRange`` when the
    sweep lacks results for part of the configured range.
    """
    wanted = [name for name in FIGURE_NAMES if name in set(cfg.figures)]
    if not wanted:
        return []
    _require_range(result, cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in wanted:
        path = out / f"{name}.svg"
        _BUILDERS[name](result, path)
        written.append(path)
    return written
