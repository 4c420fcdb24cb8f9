import math

import numpy as np
import pytest
from scipy.stats import kendalltau, kstest

from finmetrics.copulas import (
    FAMILY_TAGS,
    TV_FAMILIES,
    CopulaFamily,
    CopulaParams,
    UniformPair,
    copula_cdf,
    copula_density,
    fit_static_copula,
    fit_tv_copula,
    implied_correlation,
    kendall_tau,
    logistic_transform,
    pit_transform,
    select_copula,
    simulate_copula,
    tail_dependence,
)

CASES = [
    ("gaussian", CopulaParams(rho=0.5)),
    ("student_t", CopulaParams(rho=0.5, nu=4.0)),
    ("plackett", CopulaParams(pi_plackett=3.0)),
    ("frank", CopulaParams(lambda_frank=2.0)),
    ("gumbel", CopulaParams(delta=2.0)),
    ("rotated_gumbel", CopulaParams(delta=2.0)),
    ("sjc", CopulaParams(lamU_sjc=0.4, lamL_sjc=0.25)),
]


class TestLogisticTransform:
    def test_zero(self):
        assert logistic_transform(0.0) == 0.0

    def test_odd(self):
        x = np.linspace(-5, 5, 41)
        np.testing.assert_allclose(logistic_transform(x) + logistic_transform(-x), 0.0, atol=1e-15)

    def test_saturation(self):
        assert logistic_transform(20.0) > 0.999999
        # open-interval bound holds wherever float tanh has not yet saturated
        assert np.all(np.abs(logistic_transform(np.linspace(-30, 30, 101))) < 1.0)


class TestPit:
    def test_rank_over_n_plus_one(self):
        with pytest.warns(UserWarning):
            u = pit_transform(np.array([3.0, 1.0, 2.0]))
        np.testing.assert_allclose(u, [0.75, 0.25, 0.5])

    def test_monotone(self):
        z = np.sort(np.random.default_rng(0).standard_normal(100))
        u = pit_transform(z)
        assert np.all(np.diff(u) > 0)

    def test_strictly_inside_unit_interval(self):
        u = pit_transform(np.random.default_rng(1).standard_normal(500))
        assert u.min() > 0.0 and u.max() < 1.0

    def test_excess_ties_rejected(self):
        z = np.concatenate([np.zeros(60), np.arange(40.0)])
        with pytest.raises(ValueError, match="tied"):
            pit_transform(z)


class TestCdf:
    def test_gaussian_independence(self):
        g = np.linspace(0.05, 0.95, 10)
        uu, vv = np.meshgrid(g, g)
        c = copula_cdf("gaussian", CopulaParams(rho=0.0), uu.ravel(), vv.ravel())
        np.testing.assert_allclose(c, (uu * vv).ravel(), atol=1e-10)

    def test_gumbel_delta_one_is_independence(self):
        g = np.linspace(0.05, 0.95, 10)
        uu, vv = np.meshgrid(g, g)
        c = copula_cdf("gumbel", CopulaParams(delta=1.0), uu.ravel(), vv.ravel())
        np.testing.assert_allclose(c, (uu * vv).ravel(), atol=1e-10)

    def test_frank_frozen_value(self):
        # cross-checked against Gauss-Legendre integration of the density
        val = copula_cdf("frank", CopulaParams(lambda_frank=2.0), 0.5, 0.5)
        assert val == pytest.approx(0.310057253479139, abs=1e-12)

    @pytest.mark.parametrize("family,params", CASES)
    def test_boundary_conditions(self, family, params):
        g = np.linspace(0.01, 0.99, 50)
        assert np.max(np.abs(copula_cdf(family, params, g, np.ones(50)) - g)) < 1e-9
        assert np.max(np.abs(copula_cdf(family, params, np.ones(50), g) - g)) < 1e-9
        assert np.max(np.abs(copula_cdf(family, params, g, np.zeros(50)))) < 1e-9
        assert np.max(np.abs(copula_cdf(family, params, np.zeros(50), g))) < 1e-9

    @pytest.mark.parametrize("family,params", CASES)
    def test_two_increasing(self, family, params):
        rng = np.random.default_rng(5)
        a = rng.uniform(0.01, 0.95, 300)
        b = a + rng.uniform(0.0, 1.0, 300) * (0.99 - a)
        c = rng.uniform(0.01, 0.95, 300)
        d = c + rng.uniform(0.0, 1.0, 300) * (0.99 - c)
        mass = (
            copula_cdf(family, params, b, d)
            - copula_cdf(family, params, a, d)
            - copula_cdf(family, params, b, c)
            + copula_cdf(family, params, a, c)
        )
        assert mass.min() >= -1e-12

    def test_rotation_identity_exact(self):
        rng = np.random.default_rng(6)
        u, v = rng.uniform(0.02, 0.98, (2, 100))
        p = CopulaParams(delta=2.5)
        lhs = copula_cdf("rotated_gumbel", p, u, v)
        rhs = u + v - 1.0 + copula_cdf("gumbel", p, 1.0 - u, 1.0 - v)
        np.testing.assert_allclose(lhs, rhs, atol=5e-16)

    def test_sjc_symmetric_when_tails_equal(self):
        rng = np.random.default_rng(7)
        u, v = rng.uniform(0.02, 0.98, (2, 200))
        p = CopulaParams(lamU_sjc=0.35, lamL_sjc=0.35)
        np.testing.assert_allclose(
            copula_cdf("sjc", p, u, v), copula_cdf("sjc", p, v, u), atol=1e-9
        )


class TestDensity:
    def test_gaussian_independence_density_is_one(self):
        rng = np.random.default_rng(8)
        u, v = rng.uniform(0.01, 0.99, (2, 200))
        np.testing.assert_allclose(
            copula_density("gaussian", CopulaParams(rho=0.0), u, v), 1.0, atol=1e-12
        )

    @pytest.mark.parametrize("family,params", CASES)
    def test_nonnegative_on_grid(self, family, params):
        g = np.linspace(0.02, 0.98, 50)
        uu, vv = np.meshgrid(g, g)
        d = copula_density(family, params, uu.ravel(), vv.ravel())
        assert np.all(d >= 0.0)

    @pytest.mark.parametrize("family,params", CASES)
    def test_closed_form_matches_finite_differences(self, family, params):
        rng = np.random.default_rng(9)
        u, v = rng.uniform(0.05, 0.95, (2, 100))
        closed = copula_density(family, params, u, v)
        fd = copula_density(family, params, u, v, method="fd")
        np.testing.assert_allclose(closed, fd, rtol=5e-5, atol=5e-5)

    def test_boundary_inputs_rejected(self):
        with pytest.raises(ValueError):
            copula_density("gaussian", CopulaParams(rho=0.2), 0.0, 0.5)


class TestTailDependence:
    def test_gumbel_frozen(self):
        lam = tail_dependence("gumbel", CopulaParams(delta=2.0))
        assert lam == (0.0, pytest.approx(2.0 - math.sqrt(2.0), abs=1e-15))

    def test_gumbel_limit(self):
        assert tail_dependence("gumbel", CopulaParams(delta=1.0)) == (0.0, pytest.approx(0.0))

    def test_student_t_frozen_oracle(self):
        # independent evaluation of 2 * T_{nu+1}(-sqrt(nu+1) sqrt(1-rho)/sqrt(1+rho))
        lam = tail_dependence("student_t", CopulaParams(rho=0.5, nu=4.0))
        assert lam[0] == pytest.approx(0.2531699951003226, abs=1e-6)
        assert lam[0] == lam[1]

    def test_rotation_swaps_components(self):
        p = CopulaParams(delta=3.0)
        g = tail_dependence("gumbel", p)
        r = tail_dependence("rotated_gumbel", p)
        assert (g[0], g[1]) == (r[1], r[0])

    def test_tail_independent_families(self):
        assert tail_dependence("gaussian", CopulaParams(rho=0.9)) == (0.0, 0.0)
        assert tail_dependence("frank", CopulaParams(lambda_frank=5.0)) == (0.0, 0.0)
        assert tail_dependence("plackett", CopulaParams(pi_plackett=10.0)) == (0.0, 0.0)

    def test_sjc_parameters_are_the_tail_dependence(self):
        p = CopulaParams(lamU_sjc=0.4, lamL_sjc=0.25)
        assert tail_dependence("sjc", p) == (0.25, 0.4)


class TestDependenceSummaries:
    def test_gumbel_tau(self):
        assert kendall_tau("gumbel", CopulaParams(delta=2.0)) == pytest.approx(0.5)

    def test_gaussian_tau_identity(self):
        assert kendall_tau("gaussian", CopulaParams(rho=0.5)) == pytest.approx(1.0 / 3.0)

    def test_implied_correlation_bridges(self):
        rho = implied_correlation("gumbel", 2.0)
        assert rho[0] == pytest.approx(math.sin(math.pi * 0.25), abs=1e-12)
        assert implied_correlation("gaussian", 0.37)[0] == 0.37

    def test_frank_tau_against_simulation(self):
        tau = kendall_tau("frank", CopulaParams(lambda_frank=5.0))
        pair = simulate_copula("frank", CopulaParams(lambda_frank=5.0), 20_000, seed=3)
        emp = kendalltau(pair.u, pair.v).statistic
        assert tau == pytest.approx(emp, abs=0.02)


class TestSimulate:
    def test_gaussian_tau_identity(self):
        pair = simulate_copula("gaussian", CopulaParams(rho=0.5), 20_000, seed=1)
        tau = kendalltau(pair.u, pair.v).statistic
        assert tau == pytest.approx(1.0 / 3.0, abs=0.02)

    def test_gumbel_independence_at_delta_one(self):
        pair = simulate_copula("gumbel", CopulaParams(delta=1.0), 20_000, seed=2)
        assert abs(np.corrcoef(pair.u, pair.v)[0, 1]) < 0.02

    @pytest.mark.parametrize("family,params", CASES)
    def test_uniform_marginals(self, family, params):
        pair = simulate_copula(family, params, 20_000, seed=4)
        assert kstest(pair.u, "uniform").statistic < 0.02
        assert kstest(pair.v, "uniform").statistic < 0.02

    def test_deterministic(self):
        p1 = simulate_copula("sjc", CopulaParams(lamU_sjc=0.3, lamL_sjc=0.2), 500, seed=9)
        p2 = simulate_copula("sjc", CopulaParams(lamU_sjc=0.3, lamL_sjc=0.2), 500, seed=9)
        assert np.array_equal(p1.u, p2.u) and np.array_equal(p1.v, p2.v)


class TestStaticFit:
    def test_gaussian_recovery(self):
        pair = simulate_copula("gaussian", CopulaParams(rho=0.5), 1000, seed=11)
        fit = fit_static_copula(pair, "gaussian")
        assert 0.45 < fit.params.rho < 0.55
        assert fit.aic == pytest.approx(-2.0 * fit.loglik + 2.0, rel=1e-12)

    def test_gumbel_recovery(self):
        pair = simulate_copula("gumbel", CopulaParams(delta=2.0), 1000, seed=22)
        fit = fit_static_copula(pair, "gumbel")
        assert 1.85 < fit.params.delta < 2.15

    def test_independent_uniforms_give_small_rho(self):
        rng = np.random.default_rng(23)
        pair = UniformPair(rng.uniform(size=1000), rng.uniform(size=1000))
        fit = fit_static_copula(pair, "gaussian")
        assert abs(fit.params.rho) < 0.1

    def test_small_sample_rejected(self):
        rng = np.random.default_rng(0)
        pair = UniformPair(rng.uniform(size=50), rng.uniform(size=50))
        with pytest.raises(ValueError):
            fit_static_copula(pair, "gaussian")

    def test_tv_family_rejected(self):
        rng = np.random.default_rng(0)
        pair = UniformPair(rng.uniform(size=200), rng.uniform(size=200))
        with pytest.raises(ValueError):
            fit_static_copula(pair, CopulaFamily("gaussian", time_varying=True))


def regime_pair(seed=5, n=1000):
    a = simulate_copula("gaussian", CopulaParams(rho=0.2), n // 2, seed=seed)
    b = simulate_copula("gaussian", CopulaParams(rho=0.8), n // 2, seed=seed + 1)
    return UniformPair(np.concatenate([a.u, b.u]), np.concatenate([a.v, b.v]))


class TestTvFit:
    def test_path_stays_in_open_interval(self):
        pair = regime_pair()
        fit = fit_tv_copula(pair, "gaussian")
        assert np.all(np.abs(fit.param_path) < 1.0)
        assert fit.param_path.shape == (1000,)

    def test_regime_switch_beats_static(self):
        wins = 0
        for seed in range(3):
            pair = regime_pair(seed=40 + 7 * seed)
            static = fit_static_copula(pair, "gaussian")
            tv = fit_tv_copula(pair, "gaussian")
            wins += tv.aic < static.aic
        assert wins >= 2

    def test_gumbel_path_above_one(self):
        pair = regime_pair(seed=50)
        fit = fit_tv_copula(pair, "gumbel")
        assert np.all(fit.param_path > 1.0)

    def test_sjc_paths_inside_unit_square(self):
        pair = regime_pair(seed=60)
        fit = fit_tv_copula(pair, "sjc")
        assert fit.param_path.shape == (1000, 2)
        assert np.all((fit.param_path > 0.0) & (fit.param_path < 1.0))

    def test_needs_long_sample(self):
        rng = np.random.default_rng(0)
        pair = UniformPair(rng.uniform(size=120), rng.uniform(size=120))
        with pytest.raises(ValueError):
            fit_tv_copula(pair, "gaussian")


class TestSelect:
    def test_single_family(self):
        pair = simulate_copula("gaussian", CopulaParams(rho=0.4), 400, seed=3)
        ranked = select_copula(pair, [CopulaFamily("gaussian")])
        assert len(ranked) == 1

    def test_rotation_discrimination(self):
        pair = simulate_copula("rotated_gumbel", CopulaParams(delta=2.0), 1000, seed=31)
        ranked = select_copula(pair, [CopulaFamily("gumbel"), CopulaFamily("rotated_gumbel")])
        assert ranked[0].family.tag == "rotated_gumbel"

    def test_ascending_aic(self):
        pair = simulate_copula("gaussian", CopulaParams(rho=0.5), 600, seed=32)
        fams = [CopulaFamily(t) for t in FAMILY_TAGS]
        ranked = select_copula(pair, fams)
        aics = [f.aic for f in ranked]
        assert aics == sorted(aics)

    def test_empty_family_list(self):
        pair = simulate_copula("gaussian", CopulaParams(rho=0.5), 200, seed=33)
        with pytest.raises(ValueError):
            select_copula(pair, [])


def test_family_validation():
    with pytest.raises(ValueError):
        CopulaFamily("frank", time_varying=True)
    with pytest.raises(ValueError):
        CopulaFamily("cauchy")
    assert CopulaFamily("gaussian", True).label == "tv_gaussian"
    assert set(TV_FAMILIES) <= set(FAMILY_TAGS)
