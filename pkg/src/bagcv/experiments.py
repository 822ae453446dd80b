"""Reproducible desk-scale studies: bias-constant table, sampling-distribution
and ISE comparisons of bagged vs leave-one-out CV, timing benchmarks, and the
power-law extrapolation fitter.

All studies are driven by (spec, seed) and emit plain row dictionaries with
fixed column sets, so reruns are byte-identical once written as CSV.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .amse import bias_constants, estimate_m0, m_crit
from .bagging import BagConfig, bagged_bandwidth
from .cv import bin_sample, cv_minimize_binned
from .data import Sample
from .errors import DomainError
from .kde import kde_eval
from .kernel import KernelConstants, gaussian_constants
from .mixtures import (
    GaussianMixture,
    functionals_mixture,
    functionals_quadrature,
    h_mise,
    mixture_pdf,
    mixture_sample,
    preset,
)

__all__ = [
    "StudySpec",
    "PowerLawFit",
    "run_table1",
    "run_sampling_study",
    "run_ise_study",
    "run_timing_bench",
    "fit_power_law",
    "extrapolate",
    "write_csv",
]

TABLE1_HEADER = ["density", "mu_rescale", "mu_cv", "m_crit"]
SAMPLING_HEADER = ["rep", "method", "m", "value"]
ISE_HEADER = ["rep", "m", "ratio"]
BENCH_HEADER = ["n", "mode", "m", "N", "seconds"]


@dataclass(frozen=True)
class StudySpec:
    """Configuration of a sampling-distribution or ISE study."""

    density: str
    n: int
    reps: int
    n_resamples: int
    m_list: tuple
    seed: int
    s: int | None = None
    r: int | None = None
    nb_full: int | None = None  # bins for the full-sample LOO CV; default n

    def __post_init__(self):
        if self.reps < 1:
            raise DomainError("need reps >= 1")
        if any(m > self.n for m in self.m_list):
            raise DomainError("every m must be <= n")

    @property
    def mixture(self) -> GaussianMixture:
        return preset(self.density)

    @classmethod
    def from_json(cls, obj: dict) -> "StudySpec":
        return cls(
            density=obj["density"],
            n=int(obj["n"]),
            reps=int(obj["reps"]),
            n_resamples=int(obj["N"]),
            m_list=tuple(int(m) for m in obj["m_list"]),
            seed=int(obj["seed"]),
            s=obj.get("s"),
            r=obj.get("r"),
            nb_full=obj.get("nb_full"),
        )


@dataclass(frozen=True)
class PowerLawFit:
    beta0: float
    beta1: float
    residual_ss: float


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([row[k] for k in header])


# ---------------------------------------------------------------------------
# Table of bias constants and critical subsample sizes


_TABLE1_QUAD = {
    "beta_5_5": (lambda x: stats.beta.pdf(x, 5, 5), (0.0, 1.0)),
    "std_logistic": (stats.logistic.pdf, (-math.inf, math.inf)),
    "std_cauchy": (stats.cauchy.pdf, (-math.inf, math.inf)),
}

_TABLE1_ORDER = [
    "beta_5_5",
    "std_normal",
    "std_logistic",
    "bimodal_T1",
    "std_cauchy",
    "D2_claw",
]


def run_table1(kc: KernelConstants | None = None) -> list[dict]:
    """Bias constants and critical m for the six reference densities.

    Mixture rows use closed-form functionals; Beta/logistic/Cauchy go
    through quadrature.  m_crit above 1e7 is reported as ">1e7".
    """
    if kc is None:
        kc = gaussian_constants()
    rows = []
    for name in _TABLE1_ORDER:
        if name in _TABLE1_QUAD:
            pdf, support = _TABLE1_QUAD[name]
            fn = functionals_quadrature(pdf, support)
        else:
            fn = functionals_mixture(preset(name))
        bias = bias_constants(fn, kc)
        mc = m_crit(bias)
        rows.append(
            {
                "density": name,
                "mu_rescale": bias.mu_rescale,
                "mu_cv": bias.mu_cv,
                "m_crit": ">1e7" if mc > 10**7 else mc,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# Sampling-distribution study


def _loo_binned(sample: Sample, nb: int):
    return cv_minimize_binned(bin_sample(sample, nb))


def run_sampling_study(spec: StudySpec, threads: int = 1) -> list[dict]:
    """Per-replicate log(h_hat / h_n0) for binned LOO CV and each bagged m.

    When (s, r) are set, the AMSE-estimated subsample size is computed per
    replicate, recorded as method 'm0_hat', and a bagged bandwidth at that
    m is recorded as method 'bag_m0_hat'.
    """
    f = spec.mixture
    h0 = h_mise(f, spec.n)
    nb = spec.nb_full or spec.n
    kc = gaussian_constants()
    rows = []
    for rep in range(spec.reps):
        try:
            sample = mixture_sample(f, spec.n, seed=spec.seed + 1_000_003 * rep)
            loo = _loo_binned(sample, nb)
            rows.append(
                {
                    "rep": rep,
                    "method": "loo",
                    "m": spec.n,
                    "value": math.log(loo.h_opt / h0),
                }
            )
            m_values = [(f"bag_m{m}", m) for m in spec.m_list]
            if spec.s is not None and spec.r is not None:
                model = estimate_m0(
                    sample,
                    kc,
                    spec.n_resamples,
                    s=spec.s,
                    r=spec.r,
                    seed=spec.seed + 7 * rep,
                    threads=threads,
                )
                rows.append(
                    {"rep": rep, "method": "m0_hat", "m": model.m_hat, "value": model.m_hat}
                )
                m_values.append(("bag_m0_hat", model.m_hat))
            for method, m in m_values:
                cfg = BagConfig(
                    m=m,
                    n_resamples=spec.n_resamples,
                    seed=spec.seed + 13 * rep + 1,
                )
                bag = bagged_bandwidth(sample, cfg, threads=threads)
                rows.append(
                    {
                        "rep": rep,
                        "method": method,
                        "m": m,
                        "value": math.log(bag.h_bag / h0),
                    }
                )
        except Exception as exc:  # study continues; failure recorded
            rows.append({"rep": rep, "method": f"error:{type(exc).__name__}", "m": 0, "value": math.nan})
    return rows


# ---------------------------------------------------------------------------
# ISE ratio study


def _ise_grid(f: GaussianMixture, n_points: int = 2048):
    mean = float(f.weights @ f.means)
    var = float(f.weights @ (f.sds**2 + f.means**2) - mean**2)
    sd = math.sqrt(var)
    return np.linspace(mean - 8.0 * sd, mean + 8.0 * sd, n_points)


def integrated_squared_error(
    sample: Sample, h: float, f: GaussianMixture, grid=None
) -> float:
    """ISE of the kernel estimate vs the true mixture by trapezoid
    quadrature on a 2,048-point grid over mean +/- 8 sd."""
    if grid is None:
        grid = _ise_grid(f)
    err = kde_eval(sample, h, grid) - mixture_pdf(f, grid)
    return float(np.trapezoid(err * err, grid))


def run_ise_study(spec: StudySpec, threads: int = 1) -> tuple[list[dict], dict]:
    """Per-replicate ISE(bagged)/ISE(LOO) ratios plus the (mean ratio,
    proportion < 1) summary per m."""
    f = spec.mixture
    grid = _ise_grid(f)
    nb = spec.nb_full or spec.n
    rows = []
    for rep in range(spec.reps):
        try:
            sample = mixture_sample(f, spec.n, seed=spec.seed + 1_000_003 * rep)
            loo = _loo_binned(sample, nb)
            ise_loo = integrated_squared_error(sample, loo.h_opt, f, grid)
            for m in spec.m_list:
                cfg = BagConfig(m=m, n_resamples=spec.n_resamples, seed=spec.seed + 13 * rep + 1)
                bag = bagged_bandwidth(sample, cfg, threads=threads)
                ise_bag = integrated_squared_error(sample, bag.h_bag, f, grid)
                rows.append({"rep": rep, "m": m, "ratio": ise_bag / ise_loo})
        except Exception:
            continue
    summary = {}
    for m in spec.m_list:
        ratios = np.array([r["ratio"] for r in rows if r["m"] == m])
        if ratios.size:
            summary[m] = {
                "mean_ratio": float(ratios.mean()),
                "proportion_below_1": float(np.mean(ratios < 1.0)),
            }
    return rows, summary


# ---------------------------------------------------------------------------
# Timing benchmark


def run_timing_bench(
    n_list, m: int, n_resamples: int, seed: int = 0, density: str = "std_normal",
    runs: int = 3, threads: int = 1,
) -> list[dict]:
    """Wall-clock comparison: binned full-sample CV (nb=n) vs bagged
    selection (nb_sub=m).  Median of ``runs`` warm-started repetitions."""
    f = preset(density)
    rows = []
    for n in n_list:
        sample = mixture_sample(f, n, seed=seed)
        binned_times = []
        bag_times = []
        for _ in range(runs):
            t0 = time.perf_counter()
            _loo_binned(sample, n)
            binned_times.append(time.perf_counter() - t0)
            cfg = BagConfig(m=m, n_resamples=n_resamples, seed=seed + 1)
            t0 = time.perf_counter()
            bagged_bandwidth(sample, cfg, threads=threads)
            bag_times.append(time.perf_counter() - t0)
        rows.append(
            {"n": n, "mode": "binned_full", "m": m, "N": n_resamples,
             "seconds": float(np.median(binned_times))}
        )
        rows.append(
            {"n": n, "mode": "bagged", "m": m, "N": n_resamples,
             "seconds": float(np.median(bag_times))}
        )
    return rows


# ---------------------------------------------------------------------------
# Power-law extrapolation


def fit_power_law(ns, ys) -> PowerLawFit:
    """Least squares for Y = b0 * n^b1, linearized as log Y on log n."""
    ns = np.asarray(ns, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if ns.size != ys.size or ns.size < 2:
        raise DomainError("need at least two (n, Y) points")
    if np.any(ns <= 0) or np.any(ys <= 0):
        raise DomainError("power-law fit needs positive inputs")
    ln = np.log(ns)
    ly = np.log(ys)
    X = np.column_stack([np.ones_like(ln), ln])
    coef, *_ = np.linalg.lstsq(X, ly, rcond=None)
    resid = ly - X @ coef
    return PowerLawFit(
        beta0=float(math.exp(coef[0])),
        beta1=float(coef[1]),
        residual_ss=float(resid @ resid),
    )


def extrapolate(fit: PowerLawFit, n) -> float:
    return fit.beta0 * float(n) ** fit.beta1
