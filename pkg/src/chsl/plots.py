"""Figure rendering for the experiment CLI.

Each report writes a PNG next to its CSV output.  The Agg backend is forced
so the CLI works headless.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .field import Field2D, synthesize

__all__ = [
    "render_trace",
    "render_convergence",
    "render_sweep",
    "render_field",
]


def render_trace(result, path) -> None:
    """Energy decay curves: E and E_cn against time for every tau."""
    fig, (ax, ax2) = plt.subplots(1, 2, figsize=(9.6, 3.6))
    for tau, records, blew_up in result.runs:
        if not records:
            continue
        t = [r.t for r in records]
        ax.plot(t, [r.E_cn for r in records], label=f"tau={tau:g}" + (" (blow-up)" if blew_up else ""))
        ax.plot(t, [r.E for r in records], ls="--", lw=0.8, color=ax.lines[-1].get_color())
        gap = [abs(r.E_cn - r.E) for r in records]
        ax2.plot(t, gap, label=f"tau={tau:g}")
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    ax.set_title("discrete (solid) and free (dashed) energy")
    ax.legend(fontsize=8)
    ax2.set_xlabel("t")
    ax2.set_ylabel("|E_cn - E|")
    ax2.set_yscale("log")
    ax2.set_title("energy gap")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_convergence(result, path) -> None:
    """Log-log errors against tau with a slope-2 guide line."""
    rows = result.rows
    if not rows:
        return
    taus = [r.tau for r in rows]
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    for name, label in (("h_minus1", "H^-1"), ("l2", "L^2"), ("h1", "H^1")):
        ax.loglog(taus, [getattr(r.errors, name) for r in rows], "o-", label=label)
    anchor = rows[0].errors.l2
    guide = [anchor * (t / taus[0]) ** 2 for t in taus]
    ax.loglog(taus, guide, "k:", lw=1, label="slope 2")
    ax.set_xlabel("tau")
    ax.set_ylabel("error at T")
    ax.legend()
    ax.set_title("time-step convergence")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep(result, path) -> None:
    """Minimal stabilizer per (column, tau) cell as an annotated grid."""
    cells = result.cells
    if not cells:
        return
    taus = sorted({c.tau for c in cells}, reverse=True)
    columns = sorted(
        {(c.search, c.gamma, c.fixed_name, c.fixed_value) for c in cells},
        key=lambda k: (k[0], k[1], k[3]),
    )
    grid = np.full((len(taus), len(columns)), np.nan)
    lookup = {(c.search, c.gamma, c.fixed_name, c.fixed_value, c.tau): c.min_value for c in cells}
    for i, tau in enumerate(taus):
        for j, col in enumerate(columns):
            v = lookup.get((*col, tau), math.nan)
            grid[i, j] = math.nan if v is None else v
    display = np.where(np.isinf(grid), np.nan, grid)
    fig, ax = plt.subplots(figsize=(1.6 + 1.1 * len(columns), 1.2 + 0.45 * len(taus)))
    im = ax.imshow(np.log10(display + 1e-6), aspect="auto", cmap="viridis")
    for i in range(len(taus)):
        for j in range(len(columns)):
            v = grid[i, j]
            txt = "inf" if math.isinf(v) else ("nan" if math.isnan(v) else f"{v:g}")
            ax.text(j, i, txt, ha="center", va="center", fontsize=7, color="w")
    ax.set_xticks(range(len(columns)))
    ax.set_xticklabels(
        [f"min {s}\ng={g:g}, {fn}={fv:g}" for s, g, fn, fv in columns], fontsize=7
    )
    ax.set_yticks(range(len(taus)))
    ax.set_yticklabels([f"{t:g}" for t in taus], fontsize=8)
    ax.set_ylabel("tau")
    ax.set_title("minimal stabilizer for a stable run")
    fig.colorbar(im, ax=ax, label="log10(value)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_field(phi: Field2D, path, title: str = "phase field") -> None:
    """Nodal heatmap of a coefficient field."""
    values = synthesize(phi)
    x = phi.basis.quad.nodes
    fig, ax = plt.subplots(figsize=(4.6, 4.0))
    im = ax.pcolormesh(x, x, values.T, shading="gouraud", cmap="RdBu_r", vmin=-1.2, vmax=1.2)
    ax.set_aspect("equal")
    ax.set_title(title)
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
