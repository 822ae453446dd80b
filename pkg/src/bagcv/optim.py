"""One-dimensional minimization helpers (coarse grid + golden section)."""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericalError

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


def golden_section(f, a, b, rel_tol=1e-4):
    """Minimize ``f`` on [a, b] by golden-section search.

    Returns (x, f(x), evaluations).  ``rel_tol`` is relative to the
    midpoint of the final bracket.
    """
    if not b > a:
        raise ValueError("need b > a")
    evals = 0
    dist = b - a
    c = a + _INV_PHI_SQ * dist
    d = a + _INV_PHI * dist
    yc = f(c)
    yd = f(d)
    evals += 2
    while (b - a) > rel_tol * max(abs(a) + abs(b), 1e-300) / 2.0:
        if yc < yd:
            b, d, yd = d, c, yc
            dist *= _INV_PHI
            c = a + _INV_PHI_SQ * dist
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            dist *= _INV_PHI
            d = a + _INV_PHI * dist
            yd = f(d)
        evals += 1
    if yc < yd:
        x, fx = c, yc
    else:
        x, fx = d, yd
    return x, fx, evals


def grid_then_golden(f, lo, hi, n_grid=25, rel_tol=1e-4, log_grid=True):
    """Coarse (log-spaced) grid scan followed by golden-section refinement.

    Guards against multimodal criteria: the grid locates the basin, golden
    section refines inside it.  Returns (x, f(x), boundary_hit, evaluations).
    Raises NumericalError when every grid value is non-finite.
    """
    if not hi > lo:
        raise ValueError("need hi > lo")
    if log_grid:
        grid = np.exp(np.linspace(math.log(lo), math.log(hi), n_grid))
    else:
        grid = np.linspace(lo, hi, n_grid)
    vals = np.array([f(g) for g in grid])
    evals = n_grid
    finite = np.isfinite(vals)
    if not finite.any():
        raise NumericalError("criterion non-finite over the whole search grid")
    vals = np.where(finite, vals, np.inf)
    k = int(np.argmin(vals))
    boundary_hit = k == 0 or k == n_grid - 1
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, n_grid - 1)]
    x, fx, ge = golden_section(f, a, b, rel_tol=rel_tol)
    evals += ge
    if vals[k] < fx:
        x, fx = grid[k], vals[k]
    return float(x), float(fx), boundary_hit, evals
