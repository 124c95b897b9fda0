"""Render sweep and contour results to figure files.

Uses the Agg backend so rendering works headless.  Figures are written
next to the CSV output; the CSV remains the primary artifact and the
plots are a convenience view of the same rows.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_METRIC_STYLE = {
    "qf": dict(color="tab:red", linestyle="-", label="quantum Fisher"),
    "wy": dict(color="tab:blue", linestyle="--", label="Wigner-Yanase"),
    "min": dict(color="tab:purple", linestyle=":", label="minimal"),
}


def _column(rows, name):
    return np.array([np.nan if row.get(name) in (None, "") else float(row[name]) for row in rows])


def plot_sweep(rows, metrics, path, title=None):
    """Two-panel figure: path lengths over time, tightness over time."""
    t = _column(rows, "t")
    fig, (ax_len, ax_delta) = plt.subplots(2, 1, figsize=(6.0, 6.5), sharex=True)
    for kind in metrics:
        style = _METRIC_STYLE.get(kind, dict(label=kind))
        ell = _column(rows, f"ell_{kind}")
        ax_len.plot(t, ell, **style)
        delta = _column(rows, f"delta_{kind}")
        if np.any(np.isfinite(delta)):
            ax_delta.plot(t, delta, **style)
    ax_len.set_ylabel(r"path length $\ell$")
    ax_len.legend(frameon=False, fontsize=9)
    ax_delta.set_ylabel(r"tightness $\delta$")
    ax_delta.set_xlabel("t")
    if title:
        ax_len.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_contour(rows, axis_names, path, title=None):
    """Heat map of the tightness difference delta_qf - delta_wy."""
    x = np.unique(_column(rows, axis_names[0]))
    y = np.unique(_column(rows, axis_names[1]))
    grid = _column(rows, "ddelta").reshape(x.size, y.size)
    fig, ax = plt.subplots(figsize=(5.6, 4.4))
    with np.errstate(all="ignore"):
        lim = float(np.nanmax(np.abs(grid)))
    if not np.isfinite(lim) or lim == 0.0:
        lim = 1.0
    mesh = ax.pcolormesh(x, y, grid.T, cmap="RdBu_r", vmin=-lim, vmax=lim, shading="nearest")
    fig.colorbar(mesh, ax=ax, label=r"$\delta_{QF} - \delta_{WY}$")
    ax.set_xlabel(axis_names[0])
    ax.set_ylabel(axis_names[1])
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
