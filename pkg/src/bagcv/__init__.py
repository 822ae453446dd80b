"""Bagged cross-validated bandwidth selection for kernel density estimation.

Leave-one-out cross-validation on N subsamples of size m, each bandwidth
rescaled by (m/n)^{1/5} and averaged, with an AMSE-driven choice of m.
"""

__version__ = "0.1.0"

from .amse import (
    AmseModel,
    BiasConstants,
    RvCalibration,
    a_constant,
    amse_curve,
    bias_constants,
    c_constant,
    calibrate_rv,
    estimate_m0,
    m_crit,
    minimize_amse,
)
from .bagging import (
    BagConfig,
    BagResult,
    bagged_bandwidth,
    covariance_formula,
    subsample_indices,
    variance_formula,
)
from .cv import (
    BinnedSample,
    CvResult,
    bin_sample,
    cv_minimize,
    cv_minimize_binned,
    cv_score,
    cv_score_binned,
    default_interval,
    rule_of_thumb_bandwidth,
)
from .data import Sample
from .errors import (
    BagcvError,
    ConfigError,
    DataError,
    DomainError,
    FitError,
    NumericalError,
)
from .kde import kde_eval
from .kernel import KernelConstants, gaussian_constants, load_rv_constants
from .mixtures import (
    DensityFunctionals,
    GaussianMixture,
    fit_mixture_bic,
    functionals_mixture,
    functionals_quadrature,
    h_mise,
    mise_asymptotic,
    mise_exact,
    mixture_pdf,
    mixture_sample,
    preset,
)

__all__ = [name for name in dir() if not name.startswith("_")]
