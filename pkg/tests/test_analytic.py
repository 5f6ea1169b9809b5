"""Closed-form distributions and formulas."""
import math

import numpy as np
import pytest

from tap_progress import (
    ErlangDist,
    ExpDist,
    InstabilityError,
    Mm1Config,
    MtrConfig,
    erlang_cdf,
    exp_cdf,
    exp_sample,
    message_count,
    mm1_mean_delay,
    mm1_mean_queue_len,
    mm1_sojourn_dist,
    mtr_delay_dist,
    mtr_delivery_cdf,
    progress_bound,
)
from tap_progress.rng import RngStream

# Frozen oracle values. 1 - e^-1 is the closed form for exp_cdf(rate=2, t=0.5),
# cross-checked by a 10^6-sample Monte Carlo fraction (0.632589); the Erlang
# values come from numerical integration (scipy.integrate.quad) of the Erlang
# PDF, run once and frozen here.
EXP_CDF_2_HALF = 0.6321205588285577
ERLANG_2_1_AT_1 = 0.2642411176571154  # == 1 - 2/e
PB_10_10_4_2_1 = 0.9896607787181039


class TestExpDist:
    def test_rejects_nonpositive_rate(self):
        with pytest.raises(ValueError):
            ExpDist(rate=0.0)
        with pytest.raises(ValueError):
            ExpDist(rate=-1.0)

    def test_cdf_at_origin(self):
        assert exp_cdf(ExpDist(1.0), 0.0) == 0.0

    def test_cdf_closed_form(self):
        assert exp_cdf(ExpDist(1.0), math.log(2)) == pytest.approx(0.5, abs=1e-15)
        assert exp_cdf(ExpDist(2.0), 0.5) == pytest.approx(EXP_CDF_2_HALF, abs=1e-15)

    def test_cdf_rejects_negative_time(self):
        with pytest.raises(ValueError):
            exp_cdf(ExpDist(1.0), -0.1)

    def test_cdf_monotone_and_limits(self):
        d = ExpDist(0.7)
        grid = np.linspace(0, 50, 500)
        vals = exp_cdf(d, grid)
        assert np.all(np.diff(vals) >= 0)
        assert vals[-1] == pytest.approx(1.0, abs=1e-10)


class TestExpSample:
    def test_deterministic_given_stream(self):
        a = exp_sample(ExpDist(1.0), RngStream(5), 10)
        b = exp_sample(ExpDist(1.0), RngStream(5), 10)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("rate,mean", [(1.0, 1.0), (4.0, 0.25)])
    def test_sample_mean(self, rate, mean):
        samples = exp_sample(ExpDist(rate), RngStream(42), 10**5)
        assert samples.mean() == pytest.approx(mean, rel=0.02)

    def test_samples_nonnegative(self):
        assert np.all(exp_sample(ExpDist(3.0), RngStream(1), 1000) >= 0)


class TestErlangCdf:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            ErlangDist(shape=0, rate=1.0)
        with pytest.raises(ValueError):
            ErlangDist(shape=2, rate=0.0)

    def test_shape_one_reduces_to_exponential(self):
        grid = np.linspace(0, 10, 101)
        for lam in (0.3, 1.0, 4.5):
            e = exp_cdf(ExpDist(lam), grid)
            er = erlang_cdf(ErlangDist(1, lam), grid)
            assert np.array_equal(e, er) or np.allclose(e, er, atol=1e-15)

    def test_quad_oracle(self):
        assert erlang_cdf(ErlangDist(2, 1.0), 1.0) == pytest.approx(ERLANG_2_1_AT_1, abs=1e-12)

    def test_origin(self):
        assert erlang_cdf(ErlangDist(12, 3.0), 0.0) == 0.0

    def test_monotone_in_t_and_rate_nonincreasing_in_shape(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            shape = int(rng.integers(1, 40))
            rate = float(rng.uniform(0.1, 5.0))
            ts = np.sort(rng.uniform(0, 30, 50))
            vals = erlang_cdf(ErlangDist(shape, rate), ts)
            # monotone up to float accumulation residue in the term sum
            assert np.all(np.diff(vals) >= -1e-13)
            t = float(rng.uniform(0.5, 20.0))
            v1 = erlang_cdf(ErlangDist(shape, rate), t)
            assert erlang_cdf(ErlangDist(shape, rate * 1.5), t) >= v1 - 1e-13
            assert erlang_cdf(ErlangDist(shape + 1, rate), t) <= v1 + 1e-13

    def test_large_shape_stable(self):
        # values stay valid probabilities well past the exp underflow point
        for shape, t in [(10000, 9000.0), (10000, 10000.0), (10000, 11000.0), (48, 1200.0)]:
            v = erlang_cdf(ErlangDist(shape, 1.0), t)
            assert 0.0 <= v <= 1.0
        assert erlang_cdf(ErlangDist(10000, 1.0), 10000.0) == pytest.approx(0.5, abs=0.02)


class TestMtr:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            MtrConfig(meeting_rate=0.0, node_count=3)
        with pytest.raises(ValueError):
            MtrConfig(meeting_rate=1.0, node_count=1)

    def test_delivery_cdf_degenerate_single_path(self):
        cfg = MtrConfig(0.5, 2)
        grid = np.linspace(0, 20, 200)
        assert np.allclose(mtr_delivery_cdf(cfg, grid), exp_cdf(ExpDist(0.5), grid), atol=1e-15)

    def test_delivery_cdf_at_origin(self):
        assert mtr_delivery_cdf(MtrConfig(0.1, 6), 0.0) == 0.0

    def test_delivery_cdf_monte_carlo(self):
        # frozen oracle: fraction of 10^6 trials where min of 5 i.i.d.
        # Exp(0.1) draws <= 2 came out 0.632038 (analytic 1 - e^-1)
        assert mtr_delivery_cdf(MtrConfig(0.1, 6), 2.0) == pytest.approx(0.632038, abs=2e-3)

    def test_exponential_identity(self):
        rng = np.random.default_rng(3)
        grid = np.linspace(0, 40, 1000)
        for _ in range(10):
            cfg = MtrConfig(float(rng.uniform(0.05, 2.0)), int(rng.integers(2, 12)))
            direct = mtr_delivery_cdf(cfg, grid)
            viaexp = exp_cdf(ExpDist(cfg.meeting_rate * cfg.relay_paths), grid)
            assert np.max(np.abs(direct - viaexp)) < 1e-12

    @pytest.mark.parametrize(
        "rate,nodes,expected", [(0.5, 2, 0.5), (0.5, 5, 2.0), (0.25, 9, 2.0)]
    )
    def test_delay_dist_rate(self, rate, nodes, expected):
        assert mtr_delay_dist(MtrConfig(rate, nodes)).rate == pytest.approx(expected)


class TestMm1Formulas:
    def test_instability_rejected(self):
        with pytest.raises(InstabilityError):
            Mm1Config(arrival_rate=2.0, service_rate=2.0)
        with pytest.raises(InstabilityError):
            Mm1Config(arrival_rate=5.0, service_rate=3.0)

    def test_heavy_traffic_warns_but_accepts(self):
        with pytest.warns(UserWarning):
            cfg = Mm1Config(arrival_rate=0.999, service_rate=1.0)
        assert mm1_sojourn_dist(cfg).rate == pytest.approx(0.001)

    @pytest.mark.parametrize(
        "lam,mu,expected", [(1.0, 2.0, 1.0), (8.0, 10.0, 4.0), (0.5, 1.0, 1.0)]
    )
    def test_mean_queue_len(self, lam, mu, expected):
        assert mm1_mean_queue_len(Mm1Config(lam, mu)) == pytest.approx(expected)

    @pytest.mark.parametrize("lam,mu,expected", [(1.0, 2.0, 1.0), (8.0, 10.0, 0.5), (2.0, 3.0, 1.0)])
    def test_mean_delay(self, lam, mu, expected):
        assert mm1_mean_delay(Mm1Config(lam, mu)) == pytest.approx(expected)

    @pytest.mark.parametrize("lam,mu,rate", [(1.0, 2.0, 1.0), (8.0, 10.0, 2.0)])
    def test_sojourn_rate(self, lam, mu, rate):
        assert mm1_sojourn_dist(Mm1Config(lam, mu)).rate == pytest.approx(rate)

    def test_little_closed_form_consistency(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            mu = float(rng.uniform(0.5, 10.0))
            lam = float(rng.uniform(0.05, 0.95)) * mu
            cfg = Mm1Config(lam, mu)
            assert abs(mm1_mean_queue_len(cfg) - lam * mm1_mean_delay(cfg)) < 1e-12


class TestMessageCount:
    @pytest.mark.parametrize("r,n", [(1, 4), (3, 12), (25, 100)])
    def test_four_per_replica(self, r, n):
        assert message_count(r) == n

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            message_count(0)


class TestProgressBound:
    def test_zero_budget_annihilates(self):
        assert progress_bound(0.0, 5.0, 4, 2.0, 1.0) == 0.0
        assert progress_bound(5.0, 0.0, 4, 2.0, 1.0) == 0.0

    def test_quad_oracle(self):
        assert progress_bound(10.0, 10.0, 4, 2.0, 1.0) == pytest.approx(
            PB_10_10_4_2_1, abs=1e-12
        )

    def test_limit_and_monotonicity(self):
        vals = [progress_bound(t, t, 8, 1.0, 0.5) for t in (5, 10, 20, 50, 100, 500)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert vals[-1] == pytest.approx(1.0, abs=1e-9)

    def test_monotone_in_each_budget(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            n = int(rng.integers(1, 30))
            tr, pr = float(rng.uniform(0.2, 3.0)), float(rng.uniform(0.2, 3.0))
            xs = np.sort(rng.uniform(0, 40, 20))
            y = float(rng.uniform(1, 40))
            along_x = [progress_bound(float(x), y, n, tr, pr) for x in xs]
            along_y = [progress_bound(y, float(x), n, tr, pr) for x in xs]
            assert all(b >= a - 1e-13 for a, b in zip(along_x, along_x[1:]))
            assert all(b >= a - 1e-13 for a, b in zip(along_y, along_y[1:]))
