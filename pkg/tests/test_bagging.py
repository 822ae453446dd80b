import math

import numpy as np
import pytest

from bagcv.bagging import (
    BagConfig,
    bagged_bandwidth,
    covariance_formula,
    subsample_indices,
    variance_formula,
)
from bagcv.cv import cv_minimize
from bagcv.data import Sample
from bagcv.errors import DomainError


class TestSubsampleIndices:
    def test_full_draw_is_permutation(self):
        idx = subsample_indices(5, 5, seed=1, i=0)
        assert sorted(idx) == [0, 1, 2, 3, 4]

    def test_deterministic(self):
        a = subsample_indices(10_000, 100, seed=9, i=3)
        b = subsample_indices(10_000, 100, seed=9, i=3)
        assert np.array_equal(a, b)

    def test_distinct_indices(self):
        idx = subsample_indices(500, 200, seed=2, i=7)
        assert len(set(idx.tolist())) == 200
        assert idx.min() >= 0 and idx.max() < 500

    def test_streams_differ_across_i(self):
        a = subsample_indices(1000, 50, seed=5, i=0)
        b = subsample_indices(1000, 50, seed=5, i=1)
        assert not np.array_equal(a, b)

    def test_uniform_inclusion_frequency(self):
        counts = np.zeros(10)
        draws = 100_000
        for i in range(draws):
            counts[subsample_indices(10, 3, seed=123, i=i)] += 1
        freq = counts / draws
        assert np.all(np.abs(freq - 0.3) < 0.005)

    def test_m_greater_than_n(self):
        with pytest.raises(DomainError):
            subsample_indices(5, 6, seed=0, i=0)


class TestBaggedBandwidth:
    def test_degenerate_equals_full_cv(self, normal_sample_500):
        cfg = BagConfig(m=500, n_resamples=1, seed=0, binned_sub=False)
        res = bagged_bandwidth(normal_sample_500, cfg)
        assert res.h_bag == cv_minimize(normal_sample_500).h_opt
        assert res.per_resample.size == 1

    def test_single_resample_rescaling(self, normal_sample_500):
        cfg = BagConfig(m=200, n_resamples=1, seed=4, binned_sub=False)
        res = bagged_bandwidth(normal_sample_500, cfg)
        idx = np.sort(subsample_indices(500, 200, seed=4, i=0))
        sub = Sample(normal_sample_500.values[idx])
        expected = cv_minimize(sub).h_opt * (200 / 500) ** 0.2
        assert res.h_bag == pytest.approx(expected, rel=1e-12)

    def test_mean_consistency(self, normal_sample_500):
        cfg = BagConfig(m=100, n_resamples=20, seed=1)
        res = bagged_bandwidth(normal_sample_500, cfg)
        assert res.h_bag == pytest.approx(float(np.mean(res.per_resample)), rel=1e-15)
        assert np.all(res.per_resample > 0)

    def test_thread_count_invariance(self, normal_sample_500):
        cfg = BagConfig(m=100, n_resamples=16, seed=3)
        a = bagged_bandwidth(normal_sample_500, cfg, threads=1)
        b = bagged_bandwidth(normal_sample_500, cfg, threads=4)
        assert a.h_bag == b.h_bag
        assert np.array_equal(a.per_resample, b.per_resample)

    def test_scale_equivariance(self, normal_sample_500):
        c = 3.0
        cfg = BagConfig(m=150, n_resamples=10, seed=6, binned_sub=False)
        base = bagged_bandwidth(normal_sample_500, cfg)
        scaled = bagged_bandwidth(Sample(normal_sample_500.values * c), cfg)
        assert scaled.h_bag == pytest.approx(c * base.h_bag, rel=1e-3)

    def test_m_exceeds_n(self, normal_sample_200):
        cfg = BagConfig(m=500, n_resamples=2, seed=0)
        with pytest.raises(DomainError):
            bagged_bandwidth(normal_sample_200, cfg)

    def test_config_validation(self):
        with pytest.raises(DomainError):
            BagConfig(m=1, n_resamples=5, seed=0)
        with pytest.raises(DomainError):
            BagConfig(m=10, n_resamples=0, seed=0)

    @pytest.mark.slow
    def test_variance_shrinks_with_n_resamples(self):
        from bagcv.mixtures import mixture_sample, preset

        f = preset("std_normal")
        variances = []
        for n_res in (1, 5, 25):
            h = []
            for rep in range(120):
                data = mixture_sample(f, 5000, seed=900_000 * n_res + rep)
                cfg = BagConfig(m=500, n_resamples=n_res, seed=rep)
                h.append(bagged_bandwidth(data, cfg).h_bag)
            variances.append(float(np.var(h, ddof=1)))
        assert variances[0] > variances[1] > variances[2]


class TestVarianceFormulas:
    def test_infinite_n_resamples_limit(self):
        finite = variance_formula(500, 10_000, 10**9, A=0.3, C=1.1)
        inf = variance_formula(500, 10_000, math.inf, A=0.3, C=1.1)
        assert inf == pytest.approx(finite, rel=1e-6)
        assert inf == pytest.approx(0.3 * 1.1**2 * 500**1.8 * 10_000**-2.4, rel=1e-12)

    def test_main_term_minimizer(self):
        n, n_res = 10**5, 500
        ms = np.arange(1000, 2000)
        vals = ms ** (-0.2) * (1.0 / n_res + (ms / n) ** 2)
        m_star = ms[np.argmin(vals)]
        assert abs(m_star - n / (3 * math.sqrt(n_res))) < 1.0

    def test_covariance_at_m_equals_n(self):
        assert covariance_formula(100, 100, 0.5) == 0.5

    def test_correlation_at_ratio_point_one(self):
        var = 0.123
        assert covariance_formula(10, 100, var) / var == pytest.approx(0.01)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            variance_formula(11, 10, 5, A=1.0, C=1.0)
        with pytest.raises(DomainError):
            covariance_formula(5, 10, -1.0)
