"""Kernel density estimate evaluation on a grid."""

from __future__ import annotations

import numpy as np

from .data import Sample
from .errors import DomainError
from .kernel import SQRT_2PI


def kde_eval(data: Sample, h: float, grid: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Gaussian-kernel density estimate at the grid points."""
    if h <= 0.0:
        raise DomainError("h must be positive")
    x = data.values
    grid = np.asarray(grid, dtype=float)
    out = np.zeros_like(grid)
    for a in range(0, x.size, chunk):
        z = (grid[:, None] - x[a : a + chunk]) / h
        out += np.exp(-0.5 * z * z).sum(axis=1)
    return out / (x.size * h * SQRT_2PI)
