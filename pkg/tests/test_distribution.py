import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from asnfit import distribution as dist
from asnfit.distribution import AsnParams
from asnfit.errors import DomainError
from asnfit.gof import ks_pvalue, ks_statistic
from asnfit.estimators import OrderedSample

from conftest import panel

PHI0 = 1.0 / math.sqrt(2.0 * math.pi)

params_st = st.builds(
    AsnParams,
    st.floats(-50, 50),
    st.floats(0.05, 20),
    st.floats(-15, 15),
)


def quad_cdf(p, t):
    """CDF by adaptive quadrature of the density from mu - 50 sigma."""
    lo = p.mu - 50 * p.sigma
    if t <= lo:
        return 0.0
    breaks = [x for x in (p.mu - 5 * p.sigma, p.mu, p.mu + 5 * p.sigma) if lo < x < t]
    val, _ = integrate.quad(lambda x: dist.pdf(p, x), lo, t, points=breaks or None,
                            limit=200, epsabs=1e-13, epsrel=1e-13)
    return val


class TestParams:
    def test_rejects_nonpositive_sigma(self):
        with pytest.raises(DomainError):
            AsnParams(0, 0, 1)
        with pytest.raises(DomainError):
            AsnParams(0, -1, 1)

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_rejects_nonfinite(self, bad):
        for args in ((bad, 1, 0), (0, bad, 0), (0, 1, bad)):
            with pytest.raises(DomainError):
                AsnParams(*args)


class TestStdNormal:
    def test_phi_relative_accuracy(self):
        # Beyond |x| ~ 37.5 the density is subnormal and relative accuracy is
        # bounded by the format itself.
        xs = np.linspace(-37.5, 37.5, 3001)
        got = dist.std_normal_pdf(xs)
        mpmath.mp.dps = 40
        ref = np.array([float(mpmath.npdf(mpmath.mpf(float(x)))) for x in xs])
        assert np.max(np.abs(got / ref - 1.0)) <= 1e-15

    def test_phi_formula_small(self):
        xs = np.linspace(-5, 5, 101)
        assert np.allclose(dist.std_normal_pdf(xs), np.exp(-xs**2 / 2) / math.sqrt(2 * math.pi),
                           rtol=1e-15, atol=0)

    def test_Phi_symmetry_and_monotone(self):
        xs = np.linspace(-40, 40, 4001)
        assert np.max(np.abs(dist.std_normal_cdf(xs) + dist.std_normal_cdf(-xs) - 1.0)) <= 1e-15
        assert np.all(np.diff(dist.std_normal_cdf(xs)) >= 0)


class TestStandardize:
    def test_examples(self):
        assert dist.standardize(AsnParams(0, 1, 3.3), 1.5) == 1.5
        assert dist.standardize(AsnParams(2, 4, 0), 2) == 0.0
        assert dist.standardize(AsnParams(-1.879, 1.05, -8.36), -1.879) == 0.0

    def test_nonfinite(self):
        with pytest.raises(DomainError):
            dist.standardize(AsnParams(0, 1, 0), math.inf)


class TestPdf:
    def test_examples(self):
        assert dist.pdf(AsnParams(0, 1, 0), 0) == pytest.approx(0.3989422804, abs=1e-10)
        assert dist.pdf(AsnParams(0, 1, 2), 0) == pytest.approx(2 / 6 * PHI0, rel=1e-14)
        assert dist.pdf(AsnParams(0, 1, 2), 0) == pytest.approx(0.1329807601, abs=1e-10)
        assert dist.pdf(AsnParams(0, 1, 1), 1) == pytest.approx(1 / 3 * PHI0 * math.exp(-0.5), rel=1e-14)
        assert dist.pdf(AsnParams(0, 1, 1), 1) == pytest.approx(0.0806569, abs=1e-7)

    def test_array_shape(self):
        out = dist.pdf(AsnParams(0, 1, 1), np.zeros((2, 3)))
        assert out.shape == (2, 3)

    @settings(max_examples=60, deadline=None)
    @given(params_st, st.floats(-1e3, 1e3))
    def test_nonnegative(self, p, t):
        assert dist.pdf(p, t) >= 0.0


class TestLogPdf:
    def test_examples(self):
        assert dist.log_pdf(AsnParams(0, 1, 0), 0) == pytest.approx(math.log(0.3989422804014327), rel=1e-15)
        assert dist.log_pdf(AsnParams(0, 1, 0), 40) == pytest.approx(-0.9189385332046728 - 800, rel=1e-15)
        expected = math.log(2 / 11) - math.log(0.5) + math.log(PHI0)
        assert dist.log_pdf(AsnParams(0.5, 0.5, 3), 0.5) == pytest.approx(expected, rel=1e-14)

    @settings(max_examples=60, deadline=None)
    @given(params_st, st.floats(-5, 5))
    def test_matches_log_of_pdf(self, p, z):
        t = p.mu + p.sigma * z
        assert dist.log_pdf(p, t) == pytest.approx(math.log(dist.pdf(p, t)), rel=1e-12, abs=1e-12)


class TestCdf:
    def test_examples(self):
        assert dist.cdf(AsnParams(0, 1, 0), 0) == 0.5
        p = AsnParams(0, 1, 1)
        assert dist.cdf(p, 0) == pytest.approx(quad_cdf(p, 0.0), abs=1e-12)
        assert dist.cdf(p, 0) == pytest.approx(0.5 + 2 / 3 * PHI0, abs=1e-14)
        assert dist.cdf(p, 0) == pytest.approx(0.7659615, abs=1e-7)
        assert dist.cdf(AsnParams(5, 2, -3), -1e6) <= 1e-300

    @settings(max_examples=80, deadline=None)
    @given(params_st, st.floats(-8, 8), st.floats(0, 3))
    def test_monotone_and_bounded(self, p, z, dz):
        a, b = p.mu + p.sigma * z, p.mu + p.sigma * (z + dz)
        fa, fb = dist.cdf(p, a), dist.cdf(p, b)
        assert 0.0 <= fa <= fb <= 1.0

    def test_limits(self):
        for p in panel():
            assert dist.cdf(p, p.mu - 60 * p.sigma) == pytest.approx(0.0, abs=1e-300)
            assert dist.cdf(p, p.mu + 60 * p.sigma) == 1.0


class TestSurvival:
    def test_examples(self):
        assert dist.survival(AsnParams(0, 1, 0), 0) == 0.5
        p = AsnParams(0, 1, 1)
        assert dist.survival(p, 0) == pytest.approx(1 - quad_cdf(p, 0.0), abs=1e-12)
        assert dist.survival(p, 0) == pytest.approx(0.2340385, abs=1e-7)
        for q in panel():
            assert dist.survival(q, q.mu + 1e6 * q.sigma) == 0.0

    @pytest.mark.parametrize("alpha", [-5.0, 0.0, 2.0])
    @pytest.mark.parametrize("z", [8.0, 12.0, 20.0])
    def test_upper_tail_relative_accuracy(self, alpha, z):
        mpmath.mp.dps = 50
        a, zz = mpmath.mpf(alpha), mpmath.mpf(z)
        ref = mpmath.ncdf(-zz) - a * (2 - a * zz) / (2 + a * a) * mpmath.npdf(zz)
        got = dist.survival(AsnParams(0, 1, alpha), z)
        assert got < 1e-12
        assert got == pytest.approx(float(ref), rel=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(params_st, st.floats(-6, 6))
    def test_complements_cdf(self, p, z):
        t = p.mu + p.sigma * z
        assert dist.cdf(p, t) + dist.survival(p, t) == pytest.approx(1.0, abs=2e-15)


class TestQuantile:
    def test_median_standard_normal(self):
        assert dist.quantile(AsnParams(0, 1, 0), 0.5) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, math.nan])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            dist.quantile(AsnParams(0, 1, 0), p)

    def test_tolerance_contract(self):
        ps = np.linspace(0.001, 0.999, 199)
        for params in panel():
            q = dist.quantile(params, ps)
            assert np.max(np.abs(dist.cdf(params, q) - ps)) <= 1e-12

    def test_array_shape_preserved(self):
        q = dist.quantile(AsnParams(0, 1, 2), np.full((2, 2), 0.3))
        assert q.shape == (2, 2)

    def test_extreme_skew(self):
        p = AsnParams(-1.949, 0.85, 4147.07)
        ps = np.array([1e-6, 0.01, 0.5, 0.99, 1 - 1e-6])
        assert np.max(np.abs(dist.cdf(p, dist.quantile(p, ps)) - ps)) <= 1e-12


class TestSample:
    def test_deterministic(self):
        p = AsnParams(0, 1, 0)
        assert np.array_equal(dist.sample(p, 3, 11), dist.sample(p, 3, 11))
        g1, g2 = np.random.default_rng(5), np.random.default_rng(5)
        assert np.array_equal(dist.sample(p, 50, g1), dist.sample(p, 50, g2))

    def test_rejects_empty(self):
        with pytest.raises(DomainError):
            dist.sample(AsnParams(0, 1, 0), 0, 1)

    def test_ks_not_rejected(self):
        p = AsnParams(0, 1, 5)
        s = OrderedSample.from_values(dist.sample(p, 10000, 77))
        assert ks_pvalue(ks_statistic(s, p), s.n) > 0.01

    def test_normal_mean(self):
        x = dist.sample(AsnParams(2, 3, 0), 10000, 3)
        assert abs(x.mean() - 2) <= 4 * 3 / math.sqrt(10000)

    def test_matches_scipy_normal_at_alpha_zero(self):
        x = dist.sample(AsnParams(2, 3, 0), 5000, 4)
        assert stats.kstest(x, stats.norm(2, 3).cdf).pvalue > 0.01


class TestDeltas:
    def test_examples(self):
        p0 = AsnParams(0, 1, 0)
        assert dist.delta1(p0, 0) == pytest.approx(-0.3989422804, abs=1e-10)
        assert dist.delta2(p0, 0) == 0.0
        assert dist.delta3(AsnParams(0, 1, 1), 0) == pytest.approx(PHI0 * 2 / 9, rel=1e-14)
        assert dist.delta3(AsnParams(0, 1, 1), 0) == pytest.approx(0.0886538, abs=1e-7)

    def test_delta3_finite_difference_arbitration(self):
        h = 1e-6
        fd = (dist.cdf(AsnParams(0, 1, 1 + h), 0) - dist.cdf(AsnParams(0, 1, 1 - h), 0)) / (2 * h)
        assert fd == pytest.approx(0.0886538, abs=1e-6)
        assert abs(fd) > 0.08  # a numerator of (2 - 2a^2 - 4az) would give 0 here

    def test_match_central_differences_on_panel(self):
        for p in panel():
            ts = p.mu + p.sigma * np.linspace(-5, 5, 21)
            for k, fn in enumerate((dist.delta1, dist.delta2, dist.delta3)):
                theta = list(p.as_tuple())
                h = 1e-6 * max(1.0, abs(theta[k]))
                up, dn = theta.copy(), theta.copy()
                up[k] += h
                dn[k] -= h
                fd = (dist.cdf(AsnParams(*up), ts) - dist.cdf(AsnParams(*dn), ts)) / (2 * h)
                assert np.max(np.abs(fn(p, ts) - fd)) <= 1e-6, (p, k)


class TestInvariants:
    def test_normalisation(self):
        for p in panel():
            lo, hi = p.mu - 50 * p.sigma, p.mu + 50 * p.sigma
            val, _ = integrate.quad(lambda x: dist.pdf(p, x), lo, hi,
                                    points=[p.mu - 5 * p.sigma, p.mu, p.mu + 5 * p.sigma],
                                    limit=200, epsabs=1e-13, epsrel=1e-13)
            assert val == pytest.approx(1.0, abs=1e-8)

    def test_cdf_matches_integral(self):
        for p in panel():
            for t in p.mu + p.sigma * np.linspace(-5, 5, 41):
                assert dist.cdf(p, t) == pytest.approx(quad_cdf(p, t), abs=1e-8)

    def test_round_trip(self):
        ps = np.array([1e-6, 0.01, 0.1, 0.5, 0.9, 0.99, 1 - 1e-6])
        for p in panel():
            assert np.max(np.abs(dist.cdf(p, dist.quantile(p, ps)) - ps)) <= 1e-10

    @pytest.mark.parametrize("sigma", [0.1, 1.0, 10.0])
    def test_normal_reduction(self, sigma):
        p = AsnParams(0.7, sigma, 0.0)
        ref = stats.norm(0.7, sigma)
        t = p.mu + sigma * np.linspace(-5, 5, 41)
        assert np.allclose(dist.pdf(p, t), ref.pdf(t), rtol=1e-13, atol=0)
        assert np.allclose(dist.cdf(p, t), ref.cdf(t), rtol=1e-13, atol=0)
        ps = np.linspace(0.01, 0.99, 41)
        q = dist.quantile(p, ps)
        assert np.all(np.abs(q - ref.ppf(ps)) <= 1e-13 * np.maximum(np.abs(ref.ppf(ps)), sigma))

    @pytest.mark.parametrize("alpha, modes", [(5.0, 2), (0.0, 1)])
    def test_mode_count(self, alpha, modes):
        f = dist.pdf(AsnParams(0, 1, alpha), np.linspace(-6, 6, 24001))
        peaks = np.sum((f[1:-1] > f[:-2]) & (f[1:-1] > f[2:]))
        assert peaks == modes
