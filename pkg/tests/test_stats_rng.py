"""Empirical CDF machinery and the random-stream facility."""
import numpy as np
import pytest

from tap_progress import EmpiricalCdf, ExpDist, RngStream, dkw_epsilon, exp_cdf, exp_sample, ks_distance
from tap_progress.stats import autocorrelation, thin

# sqrt(ln(2/0.01) / (2 * 10^5)) and sqrt(ln(4)/2), evaluated once and frozen
DKW_1E5_99 = 0.005146997846583986
DKW_1_50 = 0.8325546111576977


class TestEmpiricalCdf:
    def test_eval_points(self):
        cdf = EmpiricalCdf([1.0, 2.0, 3.0])
        assert cdf.eval(2.0) == pytest.approx(2 / 3)
        assert cdf.eval(0.0) == 0.0
        assert cdf.eval(3.0) == 1.0
        assert cdf.eval(100.0) == 1.0

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            EmpiricalCdf([])

    def test_monotone_right_continuous(self):
        rng = np.random.default_rng(4)
        cdf = EmpiricalCdf(rng.normal(size=200))
        grid = np.linspace(-4, 4, 400)
        vals = cdf.eval(grid)
        assert np.all(np.diff(vals) >= 0)
        assert np.all((vals >= 0) & (vals <= 1))
        # right continuity: value at a jump equals the value just after it
        x = cdf.sorted_samples[100]
        assert cdf.eval(x) == cdf.eval(np.nextafter(x, np.inf))


class TestDkwEpsilon:
    def test_frozen_values(self):
        assert dkw_epsilon(10**5, 0.99) == pytest.approx(DKW_1E5_99, abs=1e-15)
        assert dkw_epsilon(1, 0.5) == pytest.approx(DKW_1_50, abs=1e-15)

    def test_quadrupling_n_halves_epsilon(self):
        assert dkw_epsilon(4000, 0.95) == pytest.approx(dkw_epsilon(1000, 0.95) / 2)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            dkw_epsilon(0, 0.9)
        with pytest.raises(ValueError):
            dkw_epsilon(10, 1.0)
        with pytest.raises(ValueError):
            dkw_epsilon(10, 0.0)


class TestKsDistance:
    def test_self_distance_zero(self):
        cdf = EmpiricalCdf([1.0, 2.0, 5.0, 9.0])
        assert ks_distance(cdf, cdf) == 0.0

    def test_single_sample_at_origin(self):
        cdf = EmpiricalCdf([0.0])
        assert ks_distance(cdf, lambda t: exp_cdf(ExpDist(1.0), t)) == 1.0

    def test_samples_from_reference_inside_band(self):
        d = ExpDist(1.3)
        samples = exp_sample(d, RngStream(8), 10**5)
        ks = ks_distance(EmpiricalCdf(samples), lambda t: exp_cdf(d, t))
        assert ks <= dkw_epsilon(10**5, 0.99)


class TestRngStream:
    def test_reproducible(self):
        a = RngStream(99, 3).uniform(100)
        b = RngStream(99, 3).uniform(100)
        assert np.array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RngStream(99, 0).uniform(100)
        b = RngStream(99, 1).uniform(100)
        assert not np.array_equal(a, b)

    def test_split(self):
        s = RngStream(5).split(7)
        assert (s.seed, s.stream_id) == (5, 7)
        assert np.array_equal(s.uniform(10), RngStream(5, 7).uniform(10))

    def test_seed_bounds(self):
        with pytest.raises(ValueError):
            RngStream(-1)
        with pytest.raises(ValueError):
            RngStream(2**64)


class TestHelpers:
    def test_thin(self):
        assert np.array_equal(thin(np.arange(10), 3), [0, 3, 6, 9])
        with pytest.raises(ValueError):
            thin([1.0], 0)

    def test_autocorrelation_of_iid_near_zero(self):
        x = RngStream(12).uniform(20000)
        assert abs(autocorrelation(x)) < 0.03

    def test_autocorrelation_of_trend_positive(self):
        assert autocorrelation(np.arange(100, dtype=float)) > 0.9


class TestErlangSumProperty:
    def test_sum_of_exponentials_matches_erlang_cdf(self):
        # sums of k i.i.d. exponential draws follow the Erlang law
        from tap_progress import ErlangDist, erlang_cdf

        for k, lam, seed in [(3, 1.0, 21), (12, 2.0, 22)]:
            n = 10**5
            draws = exp_sample(ExpDist(lam), RngStream(seed), (n, k)).sum(axis=1)
            ks = ks_distance(
                EmpiricalCdf(draws), lambda t: erlang_cdf(ErlangDist(k, lam), t)
            )
            assert ks <= dkw_epsilon(n, 0.99)
