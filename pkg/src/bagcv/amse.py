"""Bias/variance constants, the asymptotic MSE curve of the bagged
bandwidth, the data-driven optimal subsample size, and the Monte Carlo
calibration oracle for R(V).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cv import cv_minimize
from .data import Sample
from .errors import DomainError, NumericalError
from .kernel import KernelConstants
from .mixtures import (
    DensityFunctionals,
    fit_mixture_bic,
    functionals_mixture,
    h_mise,
    mixture_sample,
    preset,
)
from .bagging import subsample_indices
from .optim import grid_then_golden

__all__ = [
    "BiasConstants",
    "AmseModel",
    "RvCalibration",
    "bias_constants",
    "c_constant",
    "a_constant",
    "m_crit",
    "amse_curve",
    "minimize_amse",
    "estimate_m0",
    "calibrate_rv",
]


@dataclass(frozen=True)
class BiasConstants:
    """Leading bias constants of rescaling and of CV itself."""

    mu_rescale: float
    mu_cv: float

    def __post_init__(self):
        if not self.mu_rescale > 0.0:
            raise DomainError("mu_rescale must be positive")


def bias_constants(fn: DensityFunctionals, kc: KernelConstants) -> BiasConstants:
    """mu_rescale = R(K)^{3/5} R(f''') mu4 / (20 R(f'')^{8/5});
    mu_cv = -8 R(f) int(VW) / (25 R(K)^{8/5} R(f'')^{2/5})."""
    mu_rescale = kc.r_k**0.6 * fn.r_f3 * kc.mu4 / (20.0 * fn.r_f2**1.6)
    mu_cv = -8.0 * fn.r_f * kc.int_vw / (25.0 * kc.r_k**1.6 * fn.r_f2**0.4)
    return BiasConstants(mu_rescale=mu_rescale, mu_cv=mu_cv)


def c_constant(fn: DensityFunctionals, kc: KernelConstants) -> float:
    """Asymptotic bandwidth scale: C = {R(K)/(mu2^2 R(f''))}^{1/5}."""
    return (kc.r_k / (kc.mu2**2 * fn.r_f2)) ** 0.2


def a_constant(fn: DensityFunctionals, kc: KernelConstants) -> float:
    """Relative-variance constant: A = 8 R(V) R(f) mu2^{4/5} /
    (25 R(K)^{9/5} R(f''))."""
    return 8.0 * kc.r_v * fn.r_f * kc.mu2**0.8 / (25.0 * kc.r_k**1.8 * fn.r_f2)


def m_crit(bias: BiasConstants) -> int:
    """Smallest m at which the leading bagged-bandwidth bias is
    nonpositive: ceil((mu_rescale/|mu_cv|)^5)."""
    if not (bias.mu_cv < 0.0 < bias.mu_rescale):
        raise DomainError("m_crit requires mu_cv < 0 < mu_rescale")
    return math.ceil((bias.mu_rescale / abs(bias.mu_cv)) ** 5)


def amse_curve(A: float, C: float, bias: BiasConstants, n: int, n_resamples: int):
    """Asymptotic MSE of the bagged bandwidth as a function of real m."""
    if n < 2 or n_resamples < 1:
        raise DomainError("need n >= 2 and N >= 1")

    def curve(m):
        m = np.asarray(m, dtype=float)
        var = A * C * C * m ** (-0.2) * n ** (-0.4) * (1.0 / n_resamples + (m / n) ** 2)
        b = bias.mu_cv + bias.mu_rescale * m ** (-0.2)
        return var + m ** (-0.4) * n ** (-0.4) * b * b

    return curve


def minimize_amse(
    A: float, C: float, bias: BiasConstants, n: int, n_resamples: int
) -> int:
    """Integer minimizer of the AMSE curve over [2, n].

    Golden-section over log m after a coarse scan (the bias term vanishes
    at m_crit, so the curve can be bimodal); ties between floor and ceil
    break toward the smaller m.  A boundary minimizer at m = n raises a
    warning (bagging degenerates).
    """
    curve = amse_curve(A, C, bias, n, n_resamples)
    x, _, boundary, _ = grid_then_golden(
        lambda lm: float(curve(math.exp(lm))),
        math.log(2.0),
        math.log(n),
        n_grid=200,
        rel_tol=1e-7,
        log_grid=False,
    )
    m_real = math.exp(x)
    lo_m = max(2, math.floor(m_real))
    hi_m = min(n, math.ceil(m_real))
    m_hat = lo_m if curve(lo_m) <= curve(hi_m) else hi_m
    if boundary and m_hat >= n - 1:
        warnings.warn("AMSE minimizer at m = n; bagging degenerates", RuntimeWarning)
    return int(m_hat)


@dataclass(frozen=True)
class AmseModel:
    """Estimated constants, AMSE curve and optimal subsample size."""

    A: float
    C: float
    bias: BiasConstants
    n: int
    n_resamples: int
    m_hat: int
    curve: object = field(repr=False, compare=False)

    def to_json(self) -> dict:
        ms = np.unique(
            np.round(np.exp(np.linspace(math.log(2.0), math.log(self.n), 50)))
        ).astype(int)
        return {
            "A": self.A,
            "C": self.C,
            "mu_cv": self.bias.mu_cv,
            "mu_rescale": self.bias.mu_rescale,
            "n": self.n,
            "N": self.n_resamples,
            "m_hat": self.m_hat,
            "curve_m": ms.tolist(),
            "curve_amse": [float(self.curve(m)) for m in ms],
        }


def estimate_m0(
    data: Sample,
    kc: KernelConstants,
    n_resamples: int,
    s: int = 50,
    r: int | None = None,
    seed: int = 0,
    n: int | None = None,
    max_components: int = 9,
    threads: int = 1,
) -> AmseModel:
    """Data-driven optimal subsample size.

    Draws s pilot subsamples of size r, fits a normal mixture to each
    (EM + BIC), computes per-subsample constants (A, C, mu_cv, mu_rescale)
    from the closed-form mixture functionals, averages the constants, and
    minimizes the plugged-in AMSE curve.  Defaults: s = 50,
    r = max(500, n/100).
    """
    if n is None:
        n = data.n
    if r is None:
        r = max(500, n // 100)
    if not r < data.n:
        raise DomainError("need pilot size r < n")
    if s < 1:
        raise DomainError("need s >= 1")

    def one_pilot(i: int):
        idx = np.sort(subsample_indices(data.n, r, seed, i))
        sub = Sample(data.values[idx])
        try:
            fit = fit_mixture_bic(sub, max_components=max_components, seed=seed + i)
            fn = functionals_mixture(fit)
        except Exception:
            return None
        bias = bias_constants(fn, kc)
        return (
            a_constant(fn, kc),
            c_constant(fn, kc),
            bias.mu_cv,
            bias.mu_rescale,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one_pilot, range(s)))
    else:
        rows = [one_pilot(i) for i in range(s)]
    good = [row for row in rows if row is not None]
    if len(good) < 0.8 * s:
        raise NumericalError(f"only {len(good)}/{s} pilot fits succeeded")
    arr = np.asarray(good)
    A_hat, C_hat, mu_cv_hat, mu_rescale_hat = arr.mean(axis=0)
    bias = BiasConstants(mu_rescale=float(mu_rescale_hat), mu_cv=float(mu_cv_hat))
    m_hat = minimize_amse(float(A_hat), float(C_hat), bias, n, n_resamples)
    return AmseModel(
        A=float(A_hat),
        C=float(C_hat),
        bias=bias,
        n=n,
        n_resamples=n_resamples,
        m_hat=m_hat,
        curve=amse_curve(float(A_hat), float(C_hat), bias, n, n_resamples),
    )


@dataclass(frozen=True)
class RvCalibration:
    """Monte Carlo calibration record for the kernel-only scalar R(V)."""

    r_v: float
    a_hats: dict
    seed: int
    replicates: int
    d1_m_hat: int
    d1_target: int = 13081
    density: str = "std_normal"

    @property
    def d1_within_10pct(self) -> bool:
        return abs(self.d1_m_hat - self.d1_target) <= 0.1 * self.d1_target


def _a_hat_at(m: int, seed: int, replicates: int) -> float:
    """var(h_m)/h_{m0}^2 * m^{1/5} over CV bandwidths of std-normal samples."""
    f = preset("std_normal")
    h_opt = np.empty(replicates)
    for rep in range(replicates):
        sample = mixture_sample(f, m, seed=(seed * 1_000_003 + 7919 * m + rep))
        h_opt[rep] = cv_minimize(sample).h_opt
    h_m0 = h_mise(f, m)
    return float(np.var(h_opt, ddof=1) / h_m0**2 * m**0.2)


def calibrate_rv(
    seed: int, replicates: int, m_values=(1000, 2000), n_anchor=100_000, n_res_anchor=500
) -> RvCalibration:
    """Calibrate R(V) by Monte Carlo.

    For each m, the relative variance of the full-sample CV bandwidth on
    std-normal samples of size m estimates A m^{-1/5}; inverting the
    A-constant formula gives R(V).  The two m-level estimates must agree
    within 25%.  The record includes a downstream consistency check: the
    AMSE-optimal subsample size for the D1 mixture at (n=1e5, N=500)
    against the anchor value 13,081.
    """
    if replicates < 500:
        raise DomainError("need replicates >= 500")
    fn_norm = functionals_mixture(preset("std_normal"))
    a_hats = {m: _a_hat_at(m, seed, replicates) for m in m_values}
    vals = list(a_hats.values())
    if max(vals) > 1.25 * min(vals):
        raise NumericalError(
            f"A-hat estimates disagree by more than 25%: {a_hats}"
        )
    A_hat = float(np.mean(vals))
    # invert A = 8 R(V) R(f) mu2^{4/5} / (25 R(K)^{9/5} R(f'')) for Gaussian
    from .kernel import R_K_GAUSS

    r_v = A_hat * 25.0 * R_K_GAUSS**1.8 * fn_norm.r_f2 / (8.0 * fn_norm.r_f)
    kc = KernelConstants(
        r_k=R_K_GAUSS, mu2=1.0, mu4=3.0, int_vw=0.1431285, r_v=r_v
    )
    fn_d1 = functionals_mixture(preset("D1"))
    d1_m_hat = minimize_amse(
        a_constant(fn_d1, kc),
        c_constant(fn_d1, kc),
        bias_constants(fn_d1, kc),
        n_anchor,
        n_res_anchor,
    )
    return RvCalibration(
        r_v=float(r_v),
        a_hats=a_hats,
        seed=seed,
        replicates=replicates,
        d1_m_hat=d1_m_hat,
    )
