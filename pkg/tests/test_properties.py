"""Property-based checks with hypothesis."""

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bagcv.bagging import subsample_indices
from bagcv.cv import bin_sample, cv_minimize, cv_score
from bagcv.data import Sample
from bagcv.kernel import kernel_eval, kernel_selfconv
from bagcv.mixtures import GaussianMixture, functionals_mixture, mise_exact

finite_floats = st.floats(-50.0, 50.0, allow_nan=False, allow_infinity=False)


def samples(min_size=5, max_size=40):
    return arrays(
        float,
        st.integers(min_size, max_size),
        elements=finite_floats,
        unique=True,
    ).map(Sample.from_values)


@given(st.floats(-10, 10))
def test_kernel_symmetric_nonnegative(u):
    assert kernel_eval(u) >= 0
    assert kernel_eval(u) == kernel_eval(-u)
    assert kernel_selfconv(u) == kernel_selfconv(-u)


@given(samples(), st.floats(0.05, 5.0), st.floats(-20, 20))
@settings(max_examples=40, suppress_health_check=[HealthCheck.too_slow])
def test_cv_score_translation_invariant(data, h, shift):
    a = cv_score(data, h)
    b = cv_score(Sample(data.values + shift), h)
    assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


@given(samples(min_size=10), st.floats(0.5, 4.0))
@settings(max_examples=15, deadline=None)
def test_cv_argmin_scale_equivariant(data, c):
    base = cv_minimize(data)
    scaled = cv_minimize(Sample(data.values * c))
    assert scaled.h_opt == pytest.approx(c * base.h_opt, rel=5e-3)


@given(samples(min_size=8, max_size=60), st.integers(2, 40))
@settings(max_examples=40)
def test_binned_weight_conservation(data, nb):
    b = bin_sample(data, nb)
    c = b.counts.astype(float)
    total = float(np.sum(c * (c - 1.0)))
    total += sum(2.0 * float(c[:-d] @ c[d:]) for d in range(1, nb))
    assert total == data.n * (data.n - 1)


@given(
    st.integers(2, 200),
    st.integers(1, 200),
    st.integers(0, 2**40),
    st.integers(0, 50),
)
@settings(max_examples=60)
def test_subsample_indices_valid_and_deterministic(n, m, seed, i):
    if m > n:
        m = n
    a = subsample_indices(n, m, seed, i)
    b = subsample_indices(n, m, seed, i)
    assert np.array_equal(a, b)
    assert len(set(a.tolist())) == m
    assert a.min() >= 0 and a.max() < n


@given(
    st.lists(st.floats(0.1, 1.0), min_size=1, max_size=4),
    st.floats(0.05, 2.0),
    st.integers(5, 500),
)
@settings(max_examples=40)
def test_mise_positive_for_any_mixture(raw_w, h, n):
    w = np.array(raw_w)
    w = w / w.sum()
    k = w.size
    f = GaussianMixture(w, np.linspace(-2, 2, k), np.full(k, 0.7))
    assert mise_exact(f, n, h) > 0


@given(st.lists(st.floats(0.1, 1.0), min_size=1, max_size=4))
@settings(max_examples=30)
def test_functionals_positive(raw_w):
    w = np.array(raw_w)
    w = w / w.sum()
    k = w.size
    f = GaussianMixture(w, np.linspace(-1, 1, k), np.full(k, 0.5))
    fn = functionals_mixture(f)
    assert fn.r_f > 0 and fn.r_f2 > 0 and fn.r_f3 > 0


@given(samples(min_size=5, max_size=25), st.floats(0.1, 2.0))
@settings(max_examples=30)
def test_cv_score_finite(data, h):
    assert np.isfinite(cv_score(data, h))
