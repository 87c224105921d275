"""Static heatmaps of Wigner grids and sweep maps (files only, Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import TwoSlopeNorm  # noqa: E402


def plot_wigner(grid, path, title: str | None = None):
    """Diverging colormap centred on W = 0 so negative regions stand out."""
    w = grid.values
    lim = float(np.max(np.abs(w))) or 1.0
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    im = ax.pcolormesh(grid.x, grid.p, w.T, cmap="RdBu_r", norm=TwoSlopeNorm(0.0, -lim, lim), shading="auto")
    ax.set_xlabel("x")
    ax.set_ylabel("p")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title, fontsize=9)
    fig.colorbar(im, ax=ax, label="W(x, p)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_sweep(result, observable: str, path):
    data = result.grid(observable)
    spec = result.spec
    fig, ax = plt.subplots(figsize=(4.6, 3.6))
    im = ax.pcolormesh(result.axis1, result.axis2, data.T, shading="auto", cmap="viridis")
    if observable == "min_variance":
        # squeezing boundary
        ax.contour(result.axis1, result.axis2, data.T, levels=[0.5], colors="w", linewidths=0.8)
    if spec.axis1.scale == "log":
        ax.set_xscale("log")
    if spec.axis2.scale == "log":
        ax.set_yscale("log")
    ax.set_xlabel(spec.axis1.name)
    ax.set_ylabel(spec.axis2.name)
    fig.colorbar(im, ax=ax, label=observable)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
