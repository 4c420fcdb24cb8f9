import io
import math

import numpy as np
import pytest

from finmetrics.timeseries import (
    PriceSeries,
    ReturnSeries,
    align,
    describe,
    load_price_csv,
    log_returns,
    write_returns_csv,
)


def make_series(prices, asset="X", start="2020-01-01"):
    dates = np.datetime64(start) + np.arange(len(prices))
    return PriceSeries(asset_id=asset, dates=dates, prices=np.asarray(prices, dtype=float))


class TestLoadPriceCsv:
    def test_basic_parse(self):
        src = b"date,price\n2016-01-01,430.0\n2016-01-02,434.0\n"
        s = load_price_csv(src, "BPI")
        assert len(s) == 2
        assert s.prices[0] == 430.0
        assert str(s.dates[0]) == "2016-01-01"

    def test_crlf_and_trailing_newline(self):
        src = b"date,price\r\n2016-01-01,430.0\r\n2016-01-02,434.0\r\n"
        assert len(load_price_csv(src, "BPI")) == 2

    def test_non_positive_price_rejected(self):
        src = b"date,price\n2016-01-01,0.0\n"
        with pytest.raises(ValueError, match="non-positive"):
            load_price_csv(src, "BPI")

    def test_rows_out_of_order_are_sorted(self):
        src = b"date,price\n2016-01-02,434.0\n2016-01-01,430.0\n"
        s = load_price_csv(src, "BPI")
        assert len(s) == 2
        assert list(s.prices) == [430.0, 434.0]

    def test_duplicate_date_rejected(self):
        src = b"date,price\n2016-01-01,430.0\n2016-01-01,434.0\n"
        with pytest.raises(ValueError, match="duplicate"):
            load_price_csv(src, "BPI")

    def test_malformed_row_reports_line_number(self):
        src = b"date,price\n2016-01-01,430.0\nnot-a-date,1.0\n"
        with pytest.raises(ValueError, match="line 3"):
            load_price_csv(src, "BPI")

    def test_empty_price_dropped(self):
        src = b"date,price\n2016-01-01,430.0\n2016-01-02,\n2016-01-03,432.0\n"
        assert len(load_price_csv(src, "BPI")) == 2

    def test_bad_header(self):
        with pytest.raises(ValueError, match="header"):
            load_price_csv(b"day,close\n2016-01-01,1.0\n", "X")


class TestAlign:
    def test_intersection(self):
        a = make_series([1, 2, 3], start="2020-01-01")
        b = PriceSeries("B", np.datetime64("2020-01-02") + np.arange(3), [4.0, 5.0, 6.0])
        out = align([a, b])
        assert len(out[0]) == len(out[1]) == 2
        assert np.array_equal(out[0].dates, out[1].dates)
        assert list(out[0].prices) == [2.0, 3.0]

    def test_identical_dates_returned_unchanged(self):
        a = make_series([1, 2, 3])
        b = make_series([4, 5, 6], asset="B")
        out = align([a, b])
        assert out[0] is a and out[1] is b

    def test_disjoint_dates_error(self):
        a = make_series([1, 2], start="2020-01-01")
        b = make_series([3, 4], asset="B", start="2021-01-01")
        with pytest.raises(ValueError, match="empty"):
            align([a, b])

    def test_idempotent(self):
        a = make_series([1, 2, 3, 4], start="2020-01-01")
        b = PriceSeries("B", np.datetime64("2020-01-03") + np.arange(4), [1.0, 2, 3, 4])
        once = align([a, b])
        twice = align(once)
        for s1, s2 in zip(once, twice):
            assert np.array_equal(s1.dates, s2.dates)
            assert np.array_equal(s1.prices, s2.prices)

    def test_needs_two_series(self):
        with pytest.raises(ValueError):
            align([make_series([1, 2])])


class TestLogReturns:
    def test_ln_ratio_up(self):
        r = log_returns(make_series([100.0, 110.0]))
        assert r.values[0] == pytest.approx(0.0953102, abs=1e-6)

    def test_constant_series(self):
        r = log_returns(make_series([50.0, 50.0, 50.0]))
        assert np.all(r.values == 0.0)

    def test_ln_ratio_down(self):
        r = log_returns(make_series([100.0, 90.0]))
        assert r.values[0] == pytest.approx(-0.1053605, abs=1e-6)

    def test_dated_at_later_observation(self):
        p = make_series([1.0, 2.0, 3.0])
        r = log_returns(p)
        assert len(r) == len(p) - 1
        assert np.array_equal(r.dates, p.dates[1:])

    def test_too_short(self):
        with pytest.raises(ValueError):
            log_returns(make_series([1.0]))

    def test_scale_invariance_power_of_two_exact(self):
        rng = np.random.default_rng(7)
        p = np.exp(rng.normal(0, 0.02, 200).cumsum()) * 100
        base = log_returns(make_series(p)).values
        scaled = log_returns(make_series(p * 2.0**13)).values
        # ratio-first evaluation makes power-of-two rescaling bit-exact
        assert np.array_equal(base, scaled)

    def test_scale_invariance_general(self):
        rng = np.random.default_rng(8)
        p = np.exp(rng.normal(0, 0.02, 200).cumsum()) * 100
        base = log_returns(make_series(p)).values
        scaled = log_returns(make_series(p * 3.7)).values
        np.testing.assert_allclose(base, scaled, rtol=0, atol=1e-14)


class TestDescribe:
    def test_jarque_bera_identity(self):
        rng = np.random.default_rng(0)
        stats = describe(rng.standard_normal(500))
        jb = stats.n / 6.0 * (stats.skewness**2 + (stats.kurtosis - 3.0) ** 2 / 4.0)
        assert stats.jarque_bera == pytest.approx(jb, rel=1e-12)

    def test_standard_normal_sample(self):
        rng = np.random.default_rng(123)
        stats = describe(rng.standard_normal(10_000))
        assert -0.1 < stats.skewness < 0.1
        assert 2.8 < stats.kurtosis < 3.2

    def test_symmetric_set_with_normal_kurtosis_gives_zero_jb(self):
        # two points at +-a and four at +-1 with a = sqrt(6 + 5 sqrt(2))
        # solve 5(a^4+4) = 3(a^2+4)^2 exactly, so K = 3 and S = 0
        a = math.sqrt(6.0 + 5.0 * math.sqrt(2.0))
        x = np.array([-a, -1, -1, -1, -1, 1, 1, 1, 1, a])
        stats = describe(x)
        assert stats.skewness == pytest.approx(0.0, abs=1e-12)
        assert stats.kurtosis == pytest.approx(3.0, abs=1e-12)
        assert stats.jarque_bera == pytest.approx(0.0, abs=1e-24)

    def test_constant_series_rejected(self):
        with pytest.raises(ValueError, match="zero variance"):
            describe(np.ones(10))

    def test_needs_four_observations(self):
        with pytest.raises(ValueError):
            describe(np.array([1.0, 2.0, 3.0]))

    def test_population_moments(self):
        x = np.array([1.0, 2.0, 3.0, 4.0])
        stats = describe(x)
        assert stats.std_dev == pytest.approx(math.sqrt(np.mean((x - 2.5) ** 2)))

    def test_deterministic_round_trip(self):
        p = make_series(np.linspace(90, 110, 300) + np.sin(np.arange(300)))
        s1 = describe(log_returns(p))
        s2 = describe(log_returns(p))
        assert s1 == s2


def test_write_returns_csv_format():
    r = ReturnSeries("X", np.datetime64("2020-01-02") + np.arange(2), [0.1234567890123, -0.5])
    buf = io.StringIO()
    write_returns_csv(r, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "date,return"
    assert lines[1] == "2020-01-02,0.123456789"
    assert lines[2] == "2020-01-03,-0.5"
