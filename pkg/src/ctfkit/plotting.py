"""Matplotlib rendering of map tables, profiles, and micrographs to files.

These figures accompany the delimited outputs for quick inspection; the CSV
and PGM artifacts remain the regression surface. Rendering is file-only
(Agg), never interactive.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .imaging import Micrograph
from .maps import MapTable


def save_map_figure(path: str | Path, table: MapTable, label: str, cmap: str = "viridis") -> Path:
    """Heatmap of a 2D sweep with physical axes and a colorbar."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    extent = [
        table.col_values[0], table.col_values[-1],
        table.row_values[0], table.row_values[-1],
    ]
    im = ax.imshow(
        table.values, origin="lower", aspect="auto", extent=extent,
        cmap=cmap, interpolation="nearest",
    )
    ax.set_xlabel(table.col_name)
    ax.set_ylabel(table.row_name)
    fig.colorbar(im, ax=ax, label=label)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_profile_figure(path: str | Path, profile: np.ndarray) -> Path:
    """Line plot of |T|(q) against its envelope."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(profile[:, 0], profile[:, 1], label="|T|", lw=1.2)
    ax.plot(profile[:, 0], profile[:, 2], label="envelope", lw=1.0, ls="--", color="gray")
    ax.set_xlabel("q (1/A)")
    ax.set_ylabel("transfer magnitude")
    ax.set_ylim(bottom=0.0)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_micrograph_figure(path: str | Path, m: Micrograph) -> Path:
    """Grayscale view of a micrograph with a physical scale."""
    path = Path(path)
    lx, ly = m.grid.extent
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    im = ax.imshow(
        m.intensity, origin="lower", cmap="gray", extent=[0.0, lx, 0.0, ly],
        interpolation="nearest",
    )
    ax.set_xlabel("x (A)")
    ax.set_ylabel("y (A)")
    fig.colorbar(im, ax=ax, label="intensity")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
