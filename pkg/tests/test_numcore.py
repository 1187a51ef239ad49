import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from globalrv.numcore import (filter_constants, norm_cdf, norm_pdf, norm_quantile,
                              rank_and_order)


def quad_q(alpha):
    a = stats.norm.ppf(1 - alpha / 2)
    val, _ = integrate.quad(lambda z: z * z * stats.norm.pdf(z), -a, a,
                            epsabs=1e-14, epsrel=1e-14)
    return val


def quad_w(alpha):
    c = stats.norm.ppf(1 - alpha / 2) ** 2
    inner, _ = integrate.quad(lambda z: min(z * z, c) * stats.norm.pdf(z), -math.sqrt(c),
                              math.sqrt(c), epsabs=1e-14, epsrel=1e-14)
    tails = c * alpha
    return inner + tails


class TestNormQuantile:
    def test_median_is_zero(self):
        assert norm_quantile(0.5) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("p", [0.9, 0.975, 1e-6, 0.3, 1 - 1e-6, 0.0001])
    def test_against_scipy(self, p):
        assert norm_quantile(p) == pytest.approx(stats.norm.ppf(p), abs=1e-12)

    def test_reference_values(self):
        assert norm_quantile(0.9) == pytest.approx(1.2815516, abs=5e-8)
        assert norm_quantile(0.975) == pytest.approx(1.9599640, abs=5e-8)

    def test_bisection_oracle(self):
        # independent oracle: bisection on scipy's CDF
        for p in (0.9, 0.975):
            lo, hi = 0.0, 5.0
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                lo, hi = (mid, hi) if stats.norm.cdf(mid) < p else (lo, mid)
            assert norm_quantile(p) == pytest.approx(lo, abs=1e-12)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_domain(self, p):
        with pytest.raises(ValueError):
            norm_quantile(p)

    @given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
    def test_roundtrip(self, p):
        assert norm_cdf(norm_quantile(p)) == pytest.approx(p, abs=1e-10)

    def test_pdf_cdf(self):
        xs = np.linspace(-6, 6, 41)
        for x in xs:
            assert norm_pdf(x) == pytest.approx(stats.norm.pdf(x), rel=1e-14)
            assert norm_cdf(x) == pytest.approx(stats.norm.cdf(x), rel=1e-13, abs=1e-300)


class TestFilterConstants:
    def test_alpha_zero(self):
        k = filter_constants(0.0)
        assert math.isinf(k.c) and k.q == 1.0 and k.w == 1.0

    def test_alpha_02(self):
        k = filter_constants(0.2)
        assert k.c == pytest.approx(1.642374, abs=1e-6)
        assert k.q == pytest.approx(0.3501797, abs=1e-7)
        assert k.w == pytest.approx(0.6786546, abs=1e-7)

    def test_alpha_05(self):
        k = filter_constants(0.5)
        assert k.c == pytest.approx(0.454936, abs=1e-6)
        assert k.q == pytest.approx(quad_q(0.5), abs=1e-10)
        assert k.w == pytest.approx(quad_w(0.5), abs=1e-10)

    @pytest.mark.parametrize("alpha", np.round(np.arange(0.05, 0.96, 0.05), 2))
    def test_quadrature_oracle(self, alpha):
        k = filter_constants(alpha)
        assert abs(k.q - quad_q(alpha)) <= 1e-8
        assert abs(k.w - quad_w(alpha)) <= 1e-8

    def test_trapezoid_oracle(self):
        # a cruder oracle, independent of scipy's integrator
        a = math.sqrt(filter_constants(0.2).c)
        z = np.linspace(-a, a, 200001)
        f = z * z * np.exp(-z * z / 2) / math.sqrt(2 * math.pi)
        assert filter_constants(0.2).q == pytest.approx(np.trapezoid(f, z), abs=1e-8)

    def test_identity_random(self):
        rng = np.random.default_rng(1)
        for alpha in rng.uniform(0, 1, 1000):
            k = filter_constants(alpha)
            assert abs(k.w - k.q - alpha * k.c) <= 1e-12

    def test_invariants(self):
        alphas = np.linspace(0.001, 0.999, 500)
        qs = np.array([filter_constants(a).q for a in alphas])
        ws = np.array([filter_constants(a).w for a in alphas])
        assert np.all(qs > 0) and np.all(qs <= 1)
        assert np.all(qs <= ws) and np.all(ws <= 1)
        assert np.all(np.diff(qs) < 0)

    @pytest.mark.parametrize("alpha", [-0.1, 1.0, 2.0])
    def test_domain(self, alpha):
        with pytest.raises(ValueError):
            filter_constants(alpha)


class TestRankAndOrder:
    def test_simple(self):
        r = rank_and_order([0.3, 0.1, 0.5])
        assert list(r.ranks) == [2, 1, 3]
        assert r.order_stat(2) == 0.3

    def test_ties_by_index(self):
        assert list(rank_and_order([1, 1, 2]).ranks) == [1, 2, 3]

    def test_single(self):
        r = rank_and_order([7])
        assert list(r.ranks) == [1] and r.order_stat(1) == 7

    @pytest.mark.parametrize("bad", [[], [1.0, float("nan")], [float("inf")]])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            rank_and_order(bad)

    @settings(max_examples=200)
    @given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50, unique=True))
    def test_permutation_inverse(self, values):
        r = rank_and_order(values)
        assert sorted(r.ranks) == list(range(1, len(values) + 1))
        for i, v in enumerate(values):
            assert r.order_stats[r.ranks[i] - 1] == v
