"""Gaussian smoothing kernel, its self-convolution and kernel-only constants.

Every bias/variance formula in the package is driven by a handful of scalars
that depend only on the kernel: R(K), mu2(K), mu4(K), the cross integral
int V*W and R(V).  The first three have closed forms for the Gaussian
kernel; int V*W is a published constant; R(V) is calibrated once by Monte
Carlo (see ``bagcv.amse.calibrate_rv``) and recorded in ``rv_constants.txt``
next to this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SQRT_2PI = math.sqrt(2.0 * math.pi)

# R(K) = 1/(2 sqrt(pi)) for the standard normal kernel
R_K_GAUSS = 1.0 / (2.0 * math.sqrt(math.pi))

# int V(u) W(u) du for the standard normal kernel (published value)
INT_VW_GAUSS = 0.1431285

_RV_FILE = Path(__file__).with_name("rv_constants.txt")


def kernel_eval(u):
    """Standard normal kernel K(u)."""
    u = np.asarray(u, dtype=float)
    return np.exp(-0.5 * u * u) / SQRT_2PI


def kernel_deriv(u):
    """First derivative K'(u)."""
    u = np.asarray(u, dtype=float)
    return -u * np.exp(-0.5 * u * u) / SQRT_2PI


def kernel_selfconv(u):
    """Self-convolution (K*K)(u); the N(0, 2) density for the Gaussian kernel."""
    u = np.asarray(u, dtype=float)
    return np.exp(-0.25 * u * u) / math.sqrt(4.0 * math.pi)


@dataclass(frozen=True)
class KernelConstants:
    """Kernel-only scalars entering the bias/variance formulas."""

    r_k: float
    mu2: float
    mu4: float
    int_vw: float
    r_v: float

    def __post_init__(self):
        for name in ("r_k", "mu2", "mu4", "int_vw", "r_v"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"kernel constant {name} must be positive")


def load_rv_constants(path: Path | str | None = None) -> dict:
    """Parse the plain key=value calibration record for R(V)."""
    path = Path(path) if path is not None else _RV_FILE
    out: dict = {}
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    if "r_v" not in out:
        raise ValueError(f"no r_v entry in {path}")
    out["r_v"] = float(out["r_v"])
    return out


_CACHE: dict = {}


def gaussian_constants(rv_path: Path | str | None = None) -> KernelConstants:
    """Constants for the standard Gaussian kernel.

    R(V) is read from the calibration record written by
    ``bagcv.amse.calibrate_rv`` (shipped with the package).
    """
    key = str(rv_path) if rv_path is not None else None
    if key not in _CACHE:
        r_v = load_rv_constants(rv_path)["r_v"]
        _CACHE[key] = KernelConstants(
            r_k=R_K_GAUSS, mu2=1.0, mu4=3.0, int_vw=INT_VW_GAUSS, r_v=r_v
        )
    return _CACHE[key]
