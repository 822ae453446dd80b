"""Gaussian-mixture densities: presets, sampling, derivative functionals,
MISE oracles and EM/BIC pilot fitting.

Mixtures serve two roles: analytic test beds for the simulation studies and
pilot fits from which the density functionals R(f), R(f''), R(f''') are read
off in closed form.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite_e
from scipy.integrate import quad
from scipy.special import logsumexp

from .data import Sample
from .errors import ConfigError, FitError, NumericalError
from .kernel import R_K_GAUSS, SQRT_2PI, KernelConstants
from .optim import grid_then_golden

__all__ = [
    "GaussianMixture",
    "DensityFunctionals",
    "preset",
    "mixture_pdf",
    "mixture_sample",
    "functionals_mixture",
    "functionals_quadrature",
    "mise_exact",
    "mise_asymptotic",
    "h_mise",
    "fit_mixture_bic",
]


@dataclass(frozen=True)
class GaussianMixture:
    """Normal mixture sum_i w_i N(mu_i, sd_i^2)."""

    weights: np.ndarray = field(repr=False)
    means: np.ndarray = field(repr=False)
    sds: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        mu = np.asarray(self.means, dtype=float)
        sd = np.asarray(self.sds, dtype=float)
        if not (w.shape == mu.shape == sd.shape) or w.ndim != 1 or w.size < 1:
            raise ConfigError("weights/means/sds must be 1-d vectors of equal length")
        if abs(w.sum() - 1.0) > 1e-10:
            raise ConfigError("mixture weights must sum to 1")
        if np.any(w <= 0.0) or np.any(sd <= 0.0):
            raise ConfigError("weights and sds must be strictly positive")
        for arr, name in ((w, "weights"), (mu, "means"), (sd, "sds")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def k(self) -> int:
        return self.weights.size

    def to_json(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "sds": self.sds.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GaussianMixture":
        return cls(
            np.asarray(obj["weights"], dtype=float),
            np.asarray(obj["means"], dtype=float),
            np.asarray(obj["sds"], dtype=float),
        )


@dataclass(frozen=True)
class DensityFunctionals:
    """Squared-integral functionals R(f), R(f'') and R(f''')."""

    r_f: float
    r_f2: float
    r_f3: float

    def __post_init__(self):
        if not (self.r_f > 0.0 and self.r_f2 > 0.0 and self.r_f3 > 0.0):
            raise ValueError("density functionals must be strictly positive")


_PRESETS = {
    "D1": ((0.75, 0.25), (0.0, 1.5), (1.0, 1.0 / 3.0)),
    "D2_claw": (
        (0.5, 0.1, 0.1, 0.1, 0.1, 0.1),
        (0.0, -1.0, -0.5, 0.0, 0.5, 1.0),
        (1.0, 0.1, 0.1, 0.1, 0.1, 0.1),
    ),
    "bimodal_T1": ((0.5, 0.5), (-1.5, 1.5), (0.5, 0.5)),
    "std_normal": ((1.0,), (0.0,), (1.0,)),
}


def preset(name: str) -> GaussianMixture:
    """Named test-bed mixtures: D1, D2_claw, bimodal_T1, std_normal."""
    try:
        w, mu, sd = _PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; choose from {sorted(_PRESETS)}"
        ) from None
    return GaussianMixture(np.array(w), np.array(mu), np.array(sd))


def mixture_pdf(f: GaussianMixture, x):
    """Density of the mixture at x (vectorized)."""
    x = np.asarray(x, dtype=float)
    z = (x[..., None] - f.means) / f.sds
    comp = np.exp(-0.5 * z * z) / (f.sds * SQRT_2PI)
    return comp @ f.weights


def mixture_sample(f: GaussianMixture, n: int, seed: int) -> Sample:
    """Draw n observations; component by inverse-CDF on the weights."""
    if n < 1:
        raise ConfigError("n must be >= 1")
    rng = np.random.default_rng(seed)
    cum = np.cumsum(f.weights)
    idx = np.searchsorted(cum, rng.random(n), side="right")
    idx = np.minimum(idx, f.k - 1)
    x = f.means[idx] + f.sds[idx] * rng.standard_normal(n)
    return Sample.from_values(x)


def _phi(d, var):
    """N(0, var) density at d (scalar or array)."""
    return np.exp(-0.5 * d * d / var) / np.sqrt(2.0 * math.pi * var)


def _pairwise_phi_sum(f: GaussianMixture, extra_var: float) -> float:
    """sum_ij w_i w_j phi(mu_i - mu_j; sd_i^2 + sd_j^2 + extra_var)."""
    d = f.means[:, None] - f.means[None, :]
    var = f.sds[:, None] ** 2 + f.sds[None, :] ** 2 + extra_var
    return float(np.sum(f.weights[:, None] * f.weights[None, :] * _phi(d, var)))


def _r_derivative(f: GaussianMixture, r: int) -> float:
    """R(f^(r)) in closed form via the 2r-th normal density derivative."""
    d = f.means[:, None] - f.means[None, :]
    s2 = f.sds[:, None] ** 2 + f.sds[None, :] ** 2
    s = np.sqrt(s2)
    coeffs = np.zeros(2 * r + 1)
    coeffs[2 * r] = 1.0
    herm = hermite_e.hermeval(d / s, coeffs)
    phi = np.exp(-0.5 * d * d / s2) / (s * SQRT_2PI)
    total = np.sum(f.weights[:, None] * f.weights[None, :] * phi * herm / s ** (2 * r))
    return float((-1.0) ** r * total)


def functionals_mixture(f: GaussianMixture) -> DensityFunctionals:
    """R(f), R(f'') and R(f''') of a normal mixture, in closed form."""
    return DensityFunctionals(
        r_f=_r_derivative(f, 0),
        r_f2=_r_derivative(f, 2),
        r_f3=_r_derivative(f, 3),
    )


_FD_STEP = np.finfo(float).eps ** (1.0 / 6.0)


def _fd2(pdf, x, h):
    return (pdf(x - h) - 2.0 * pdf(x) + pdf(x + h)) / (h * h)


def _fd3(pdf, x, h):
    return (pdf(x + 2 * h) - 2 * pdf(x + h) + 2 * pdf(x - h) - pdf(x - 2 * h)) / (
        2.0 * h**3
    )


def _richardson(stencil, pdf, x, h):
    # both stencils have O(h^2) truncation error
    return (4.0 * stencil(pdf, x, h / 2.0) - stencil(pdf, x, h)) / 3.0


def functionals_quadrature(pdf, support, rel_tol=1e-6, scale=None) -> DensityFunctionals:
    """R(f), R(f'') and R(f''') by adaptive quadrature with Richardson-
    extrapolated central differences on ``pdf``.

    ``support`` is an (lo, hi) interval; either end may be infinite.  The
    density is treated as 0 outside the support.
    """
    lo, hi = float(support[0]), float(support[1])
    if not hi > lo:
        raise ConfigError("support must be a nonempty interval")

    def f0(x):
        return pdf(x) if lo <= x <= hi else 0.0

    if scale is None:
        if math.isfinite(lo) and math.isfinite(hi):
            scale = (hi - lo) / 4.0
        else:
            scale = 1.0
    h = _FD_STEP * scale

    qlo = lo if math.isfinite(lo) else -np.inf
    qhi = hi if math.isfinite(hi) else np.inf

    def integrate(g):
        val, err = quad(g, qlo, qhi, epsrel=rel_tol, epsabs=0.0, limit=400)
        if not np.isfinite(val) or (val != 0.0 and err > 100 * rel_tol * abs(val)):
            raise NumericalError(
                f"quadrature did not converge (value={val}, err={err})"
            )
        return val

    r_f = integrate(lambda x: f0(x) ** 2)
    r_f2 = integrate(lambda x: _richardson(_fd2, f0, x, h) ** 2)
    r_f3 = integrate(lambda x: _richardson(_fd3, f0, x, h) ** 2)
    return DensityFunctionals(r_f=r_f, r_f2=r_f2, r_f3=r_f3)


def mise_exact(f: GaussianMixture, n: int, h: float) -> float:
    """Exact MISE of the Gaussian-kernel estimator for a normal mixture.

    All three terms reduce to double sums of normal densities at the
    pairwise mean differences with inflated variances.
    """
    if h <= 0.0:
        raise ConfigError("h must be positive")
    if n < 2:
        raise ConfigError("n must be >= 2")
    h2 = h * h
    return (
        R_K_GAUSS / (n * h)
        + (1.0 - 1.0 / n) * _pairwise_phi_sum(f, 2.0 * h2)
        - 2.0 * _pairwise_phi_sum(f, h2)
        + _pairwise_phi_sum(f, 0.0)
    )


def mise_asymptotic(
    fn: DensityFunctionals, kc: KernelConstants, n: int, h: float
) -> float:
    """Leading-order MISE: R(K)/(nh) + h^4 R(f'')/4 (unit-variance kernel)."""
    if h <= 0.0:
        raise ConfigError("h must be positive")
    return kc.r_k / (n * h) + 0.25 * h**4 * fn.r_f2


def h_mise(f: GaussianMixture, n: int) -> float:
    """Minimizer of the exact MISE over [1e-3 n^{-1/5}, 10 n^{-1/5}]."""
    lo = 1e-3 * n ** (-0.2)
    hi = 10.0 * n ** (-0.2)
    x, _, boundary, _ = grid_then_golden(
        lambda h: mise_exact(f, n, h), lo, hi, n_grid=50, rel_tol=1e-6
    )
    if boundary:
        raise NumericalError("MISE minimizer at the bracket edge")
    return x


# ---------------------------------------------------------------------------
# EM fitting with BIC model selection


def _kmeanspp_centers(x: np.ndarray, k: int, rng) -> np.ndarray:
    centers = np.empty(k)
    centers[0] = x[rng.integers(x.size)]
    d2 = (x - centers[0]) ** 2
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            centers[j:] = x[rng.integers(x.size, size=k - j)]
            break
        probs = d2 / total
        centers[j] = x[np.searchsorted(np.cumsum(probs), rng.random())]
        d2 = np.minimum(d2, (x - centers[j]) ** 2)
    return centers


def _hard_init(x: np.ndarray, centers: np.ndarray, sd_floor: float):
    assign = np.argmin(np.abs(x[:, None] - centers[None, :]), axis=1)
    k = centers.size
    w = np.empty(k)
    mu = np.empty(k)
    sd = np.empty(k)
    overall_sd = max(float(np.std(x)), sd_floor)
    for j in range(k):
        mask = assign == j
        cnt = int(mask.sum())
        w[j] = max(cnt, 1) / x.size
        mu[j] = x[mask].mean() if cnt else centers[j]
        sd[j] = max(float(np.std(x[mask])), sd_floor) if cnt > 1 else overall_sd
    w /= w.sum()
    return w, mu, sd


def _em(x: np.ndarray, k: int, rng, sd_floor: float, max_iter=500, rel_tol=1e-8):
    """Run EM to convergence.  Returns (w, mu, sd, loglik, trace, clamped)."""
    w, mu, sd = _hard_init(x, _kmeanspp_centers(x, k, rng), sd_floor)
    n = x.size
    trace = []
    prev = -np.inf
    clamped = False
    for _ in range(max_iter):
        z = (x[:, None] - mu) / sd
        log_comp = np.log(w) - np.log(sd) - 0.5 * z * z - math.log(SQRT_2PI)
        log_mix = logsumexp(log_comp, axis=1)
        ll = float(log_mix.sum())
        trace.append(ll)
        resp = np.exp(log_comp - log_mix[:, None])
        nk = resp.sum(axis=0)
        nk = np.maximum(nk, 1e-300)
        w = nk / n
        mu = (resp * x[:, None]).sum(axis=0) / nk
        var = (resp * (x[:, None] - mu) ** 2).sum(axis=0) / nk
        sd = np.sqrt(var)
        low = sd < sd_floor
        if low.any():
            clamped = True
            sd = np.maximum(sd, sd_floor)
        if np.isfinite(prev) and abs(ll - prev) <= rel_tol * max(abs(ll), 1.0):
            break
        prev = ll
    return w, mu, sd, trace[-1], trace, clamped


def fit_mixture_bic(
    data: Sample, max_components: int = 9, seed: int = 0, n_restarts: int = 5
) -> GaussianMixture:
    """Fit normal mixtures for k = 1..max_components by EM and keep the one
    maximizing BIC = 2 loglik - (3k - 1) log n.

    Initialization: k-means++ centers followed by one hard-assignment
    M-step; ``n_restarts`` restarts per k with derived seeds.  Candidates
    whose EM run collapses onto the sd floor are skipped with a warning;
    k values with fewer than 10k observations are not attempted (k=1 is
    always attempted).
    """
    if max_components < 1:
        raise ConfigError("max_components must be >= 1")
    x = data.values
    n = data.n
    sd_floor = 1e-4 * max(float(np.std(x, ddof=1)), 1e-300)
    ss = np.random.SeedSequence(seed)
    children = ss.spawn(max_components * n_restarts)

    best_bic = -np.inf
    best = None
    for k in range(1, max_components + 1):
        if k > 1 and n < 10 * k:
            break
        if k == 1:
            mu = float(np.mean(x))
            sd = max(float(np.std(x)), sd_floor)
            ll = float(
                np.sum(-0.5 * ((x - mu) / sd) ** 2 - math.log(sd * SQRT_2PI))
            )
            cand = (np.array([1.0]), np.array([mu]), np.array([sd]), ll)
        else:
            cand = None
            best_ll = -np.inf
            for r in range(n_restarts):
                rng = np.random.default_rng(children[(k - 1) * n_restarts + r])
                w, mu, sd, ll, _, clamped = _em(x, k, rng, sd_floor)
                if clamped or not np.isfinite(ll):
                    continue
                if ll > best_ll:
                    best_ll = ll
                    cand = (w, mu, sd, ll)
            if cand is None:
                warnings.warn(
                    f"EM degenerate for k={k}; candidate skipped", RuntimeWarning
                )
                continue
        w, mu, sd, ll = cand
        bic = 2.0 * ll - (3 * k - 1) * math.log(n)
        if bic > best_bic:
            best_bic = bic
            best = GaussianMixture(w, mu, sd)
    if best is None:
        raise FitError("all mixture candidates degenerated")
    return best
