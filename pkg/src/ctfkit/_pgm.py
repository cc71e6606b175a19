"""16-bit PGM writing shared by micrograph export and map rendering."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def write_pgm16_array(path: str | Path, arr: np.ndarray) -> tuple[float, float]:
    """Write a 2D array as binary 16-bit PGM, linear min-max scaled.

    Returns the (min, max) used for scaling so callers can record it in a
    sidecar. A constant array maps to level 0.
    """
    path = Path(path)
    lo = float(np.nanmin(arr))
    hi = float(np.nanmax(arr))
    span = hi - lo if hi > lo else 1.0
    data = np.where(np.isfinite(arr), arr, lo)
    levels = np.round((data - lo) / span * 65535.0).astype(">u2")
    h, w = arr.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        f.write(levels.tobytes())
    return lo, hi
