"""Two-asset risk management: minimum-variance weights, VaR, backtests.

A crypto/benchmark pair is summarised by its conditional covariance path:
marginal conditional variances come from each asset's volatility fit and the
conditional covariance is ``rho*_t sqrt(h_i h_j)`` where ``rho*_t`` is the
linear-correlation proxy implied by the fitted copula (the correlation
itself for elliptical families, a Kendall-tau bridge otherwise).

The variance-minimising weight on the crypto asset is

    w_t = (h_asset - h_cross) / (h_crypto - 2 h_cross + h_asset)

clamped to [0, 1].  Risk-reduction effectiveness compares mean portfolio
variances against the single-asset benchmark; a 99% one-step value-at-risk
path is simulated from the copula and backtested with the joint
likelihood-ratio test of correct coverage and independent exceedances.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import chi2

from finmetrics import copulas as cop
from finmetrics.garch import GarchFit, GarchVariant, filter_variance, select_model
from finmetrics.timeseries import ReturnSeries

__all__ = [
    "CovariancePath",
    "CoverageTest",
    "PortfolioReport",
    "PortfolioConfig",
    "conditional_covariance",
    "optimal_weight",
    "optimal_weight_path",
    "portfolio_variance_path",
    "risk_reduction",
    "var_forecast",
    "conditional_coverage_test",
    "evaluate_portfolios",
]


@dataclass
class CovariancePath:
    """Aligned conditional variances and covariance for one asset pair."""

    h_i: np.ndarray
    h_j: np.ndarray
    h_ij: np.ndarray

    def __post_init__(self):
        self.h_i = np.asarray(self.h_i, dtype=float)
        self.h_j = np.asarray(self.h_j, dtype=float)
        self.h_ij = np.asarray(self.h_ij, dtype=float)
        if not (self.h_i.shape == self.h_j.shape == self.h_ij.shape):
            raise ValueError("misaligned covariance path components")
        if np.any(self.h_i <= 0) or np.any(self.h_j <= 0):
            raise ValueError("conditional variances must be strictly positive")
        bound = np.sqrt(self.h_i * self.h_j)
        if np.any(np.abs(self.h_ij) > bound * (1.0 + 1e-12)):
            raise ValueError("covariance violates the Cauchy-Schwarz bound")

    def __len__(self) -> int:
        return len(self.h_i)


@dataclass(frozen=True)
class CoverageTest:
    """Joint LR test: correct exceedance rate plus independence."""

    lr_stat: float
    p_value: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {"lr_stat": self.lr_stat, "p_value": self.p_value, "degenerate": self.degenerate}


@dataclass
class PortfolioReport:
    """Risk evaluation of one crypto/benchmark mix against its benchmark."""

    label: str
    weight_path: np.ndarray
    variance_path: np.ndarray
    mean_variance: float
    risk_reduction: float
    var99_path: np.ndarray
    exceedance_flags: np.ndarray
    cc_test: CoverageTest
    level: float
    copula_label: str = ""
    garch_tags: tuple = ()

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "mean_variance": self.mean_variance,
            "risk_reduction": self.risk_reduction,
            "level": self.level,
            "copula": self.copula_label,
            "garch_tags": list(self.garch_tags),
            "cc_test": self.cc_test.to_dict(),
            "weight_path": list(map(float, self.weight_path)),
            "variance_path": list(map(float, self.variance_path)),
            "var_path": list(map(float, self.var99_path)),
            "exceedance_flags": list(map(int, self.exceedance_flags)),
        }


def _copula_param_path(fit: cop.CopulaFit, n: int) -> np.ndarray:
    """Per-period dependence parameter, broadcast for static fits."""
    tag = fit.family.tag
    if fit.param_path is not None:
        path = np.asarray(fit.param_path, dtype=float)
        if len(path) != n:
            raise ValueError("copula path length does not match variance paths")
        return path
    if tag in (cop.GAUSSIAN, cop.STUDENT_T):
        value = np.array([fit.params.rho])
    elif tag in (cop.GUMBEL, cop.ROTATED_GUMBEL):
        value = np.array([fit.params.delta])
    elif tag == cop.FRANK:
        value = np.array([fit.params.lambda_frank])
    elif tag == cop.PLACKETT:
        value = np.array([fit.params.pi_plackett])
    elif tag == cop.SJC:
        return np.tile([fit.params.lamU_sjc, fit.params.lamL_sjc], (n, 1))
    else:
        raise ValueError(tag)
    return np.repeat(value, n)


def conditional_covariance(fit_i: GarchFit, fit_j: GarchFit, copula_fit: cop.CopulaFit) -> CovariancePath:
    """Covariance path from two marginal fits and a fitted copula.

    Correlation proxy per period: elliptical families use rho_t itself;
    the negatively-oriented rotated Gumbel and all other families pass
    through the Kendall-tau bridge sin(pi tau / 2) (Spearman bridge for
    Plackett).
    """
    if fit_i.n_obs != fit_j.n_obs:
        raise ValueError("marginal fits cover different sample sizes")
    n = fit_i.n_obs
    path = _copula_param_path(copula_fit, n)
    rho = cop.implied_correlation(copula_fit.family.tag, path)
    if rho.shape[0] == 1 and n > 1:
        rho = np.repeat(rho, n)
    rho = np.clip(rho, -0.999999, 0.999999)
    h_i = fit_i.cond_variance
    h_j = fit_j.cond_variance
    return CovariancePath(h_i=h_i, h_j=h_j, h_ij=rho * np.sqrt(h_i * h_j))


def optimal_weight(h_crypto: float, h_asset: float, h_cross: float) -> float:
    """Variance-minimising weight on the crypto leg, clamped to [0, 1].

    A vanishing denominator (perfectly correlated equal-variance pair) has
    no interior optimum; the weight is defined as 0.5 and a warning issued.
    """
    if h_crypto <= 0 or h_asset <= 0:
        raise ValueError("variances must be strictly positive")
    if abs(h_cross) > math.sqrt(h_crypto * h_asset) * (1.0 + 1e-12):
        raise ValueError("covariance violates the Cauchy-Schwarz bound")
    denom = h_crypto - 2.0 * h_cross + h_asset
    if abs(denom) < 1e-300:
        warnings.warn("degenerate weight denominator; using 0.5", stacklevel=2)
        return 0.5
    w = (h_asset - h_cross) / denom
    return min(max(w, 0.0), 1.0)


def optimal_weight_path(cov: CovariancePath) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised weights plus a mask flagging degenerate denominators."""
    denom = cov.h_i - 2.0 * cov.h_ij + cov.h_j
    degenerate = np.abs(denom) < 1e-300
    w = np.where(degenerate, 0.5, (cov.h_j - cov.h_ij) / np.where(degenerate, 1.0, denom))
    return np.clip(w, 0.0, 1.0), degenerate


def portfolio_variance_path(weights: np.ndarray, cov: CovariancePath) -> np.ndarray:
    """Var_t = w^2 h_i + (1-w)^2 h_j + 2 w (1-w) h_ij."""
    w = np.asarray(weights, dtype=float)
    if w.shape != cov.h_i.shape:
        raise ValueError("weights misaligned with the covariance path")
    return w**2 * cov.h_i + (1.0 - w) ** 2 * cov.h_j + 2.0 * w * (1.0 - w) * cov.h_ij


def risk_reduction(var_benchmark: np.ndarray, var_mixed: np.ndarray) -> float:
    """RE = 1 - mean(mixed variance) / mean(benchmark variance).

    Reported unclamped: a mix riskier than its benchmark yields a negative
    value rather than a hidden truncation.
    """
    vb = np.asarray(var_benchmark, dtype=float)
    vm = np.asarray(var_mixed, dtype=float)
    if vb.shape != vm.shape:
        raise ValueError("variance paths must have equal length")
    mb = float(np.mean(vb))
    if mb <= 0:
        raise ValueError("benchmark variance must be positive")
    re = 1.0 - float(np.mean(vm)) / mb
    if re < 0:
        warnings.warn("mixed portfolio is riskier than its benchmark (RE < 0)", stacklevel=2)
    return re


def _draw_pair(tag: str, param_t, nu, n_draws: int, seed: int):
    if tag in (cop.GAUSSIAN, cop.STUDENT_T):
        params = cop.CopulaParams(rho=float(param_t), nu=nu)
    elif tag in (cop.GUMBEL, cop.ROTATED_GUMBEL):
        params = cop.CopulaParams(delta=float(param_t))
    elif tag == cop.FRANK:
        params = cop.CopulaParams(lambda_frank=float(param_t))
    elif tag == cop.PLACKETT:
        params = cop.CopulaParams(pi_plackett=float(param_t))
    elif tag == cop.SJC:
        params = cop.CopulaParams(lamU_sjc=float(param_t[0]), lamL_sjc=float(param_t[1]))
    else:
        raise ValueError(tag)
    return cop.simulate_copula(tag, params, n_draws, seed)


def var_forecast(
    cov: CovariancePath,
    weights: np.ndarray,
    copula_fit: cop.CopulaFit,
    fit_i: GarchFit,
    fit_j: GarchFit,
    level: float = 0.99,
    *,
    n_draws: int = 10_000,
    seed: int = 0,
) -> np.ndarray:
    """Per-period simulated VaR of the mixed portfolio innovation.

    For each period: draw dependent uniforms from the copula at its
    period-t parameter, push them through the inverse empirical CDF of each
    asset's standardised residuals, scale by sqrt(h_t), combine with the
    period weight and take the ``level`` quantile of the loss.  Period t
    uses ``default_rng(seed + t)``, so paths are deterministic and
    parallelisable.
    """
    if not 0.9 < level < 0.9999:
        raise ValueError("level must lie in (0.9, 0.9999)")
    n = len(cov)
    w = np.asarray(weights, dtype=float)
    if w.shape[0] != n:
        raise ValueError("weights misaligned with the covariance path")
    z_i = np.sort(fit_i.std_residuals)
    z_j = np.sort(fit_j.std_residuals)
    if z_i.size < 50 or z_j.size < 50:
        raise ValueError("insufficient residual history for the inverse transform")
    grid_i = np.arange(z_i.size)
    grid_j = np.arange(z_j.size)
    tag = copula_fit.family.tag
    path = _copula_param_path(copula_fit, n)
    out = np.empty(n)
    for t in range(n):
        pair = _draw_pair(tag, path[t], copula_fit.params.nu, n_draws, seed + t)
        # inverse empirical CDF, identical to the linear-interpolation quantile
        zi = np.interp(pair.u * (z_i.size - 1), grid_i, z_i)
        zj = np.interp(pair.v * (z_j.size - 1), grid_j, z_j)
        r_p = w[t] * zi * math.sqrt(cov.h_i[t]) + (1.0 - w[t]) * zj * math.sqrt(cov.h_j[t])
        out[t] = np.quantile(-r_p, level)
    return out


def conditional_coverage_test(exceedances: np.ndarray, level: float) -> CoverageTest:
    """Joint LR test: exceedance rate equals 1 - level and hits are independent.

    The statistic adds the unconditional-coverage LR and the first-order
    Markov independence LR and is referred to chi-square(2).  When no 1->1
    transition is observed the independence alternative is not identified
    (its second transition row rests on a handful of observations), so the
    test reduces to the coverage part on chi-square(1).  All-zero or all-one
    sequences only identify the coverage part as well; those are additionally
    flagged degenerate.
    """
    x = np.asarray(exceedances).astype(int)
    n = x.size
    if n < 100:
        raise ValueError("need at least 100 observations to backtest")
    if np.any((x != 0) & (x != 1)):
        raise ValueError("exceedances must be binary")
    p = 1.0 - level
    n1 = int(x.sum())
    n0 = n - n1

    def xlogy(a, b):
        return 0.0 if a == 0 else a * math.log(b)

    ll_null = xlogy(n1, p) + xlogy(n0, 1.0 - p)
    if n1 == 0 or n0 == 0:
        lr_uc = -2.0 * ll_null  # saturated likelihood is exactly 1
        return CoverageTest(lr_stat=lr_uc, p_value=float(chi2.sf(lr_uc, 1)), degenerate=True)
    pi_hat = n1 / n
    lr_uc = -2.0 * (ll_null - (xlogy(n1, pi_hat) + xlogy(n0, 1.0 - pi_hat)))

    prev, curr = x[:-1], x[1:]
    n00 = int(np.sum((prev == 0) & (curr == 0)))
    n01 = int(np.sum((prev == 0) & (curr == 1)))
    n10 = int(np.sum((prev == 1) & (curr == 0)))
    n11 = int(np.sum((prev == 1) & (curr == 1)))
    if n11 == 0:
        return CoverageTest(lr_stat=lr_uc, p_value=float(chi2.sf(lr_uc, 1)), degenerate=False)
    pi01 = n01 / (n00 + n01)
    pi11 = n11 / (n10 + n11)
    pi1 = (n01 + n11) / (n00 + n01 + n10 + n11)
    # zero transition counts contribute nothing (0 * log 0 := 0), and a
    # positive count guarantees its transition probability is positive
    ll_ind_null = xlogy(n01 + n11, pi1) + xlogy(n00 + n10, 1.0 - pi1)
    ll_ind_alt = (
        xlogy(n00, 1.0 - pi01) + xlogy(n01, pi01) + xlogy(n10, 1.0 - pi11) + xlogy(n11, pi11)
    )
    lr_ind = max(-2.0 * (ll_ind_null - ll_ind_alt), 0.0)
    lr_cc = lr_uc + lr_ind
    return CoverageTest(lr_stat=lr_cc, p_value=float(chi2.sf(lr_cc, 2)), degenerate=False)


# ---------------------------------------------------------------------------
# portfolio design evaluation
# ---------------------------------------------------------------------------

DEFAULT_PAIRS = (
    ("BPI", "STR"),
    ("ETH", "STR"),
    ("BPI", "BdR"),
    ("ETH", "BdR"),
    ("BPI", "Oil"),
    ("ETH", "Oil"),
)


@dataclass
class PortfolioConfig:
    """Inputs for the six crypto/benchmark comparisons.

    ``returns`` maps asset ids to aligned return series.  Fits are estimated
    on the first ``split`` fraction of the sample and coverage is evaluated
    on the remainder unless ``in_sample`` is set.
    """

    returns: dict
    seed: int
    pairs: Sequence = DEFAULT_PAIRS
    garch_variants: Sequence = tuple(GarchVariant(t) for t in ("GARCH", "T_GARCH", "E_GARCH"))
    copula_families: Sequence = (
        cop.CopulaFamily(cop.GAUSSIAN),
        cop.CopulaFamily(cop.GUMBEL),
        cop.CopulaFamily(cop.ROTATED_GUMBEL),
        cop.CopulaFamily(cop.GAUSSIAN, time_varying=True),
    )
    level: float = 0.99
    split: float = 0.75
    in_sample: bool = False
    n_draws: int = 10_000


def _marginal_fits(config: PortfolioConfig, assets: Sequence[str], n_train: int) -> dict:
    fits = {}
    for asset in assets:
        series = config.returns[asset]
        train = ReturnSeries(asset, series.dates[:n_train], series.values[:n_train])
        sel = select_model(train, list(config.garch_variants), seed=config.seed)
        best = sel.best
        # refilter the full sample with parameters frozen on the train window
        sigma2, eps = filter_variance(series, best.variant, best.params)
        fits[asset] = GarchFit(
            variant=best.variant,
            params=best.params,
            loglik=best.loglik,
            n_obs=len(series),
            cond_variance=sigma2,
            std_residuals=eps / np.sqrt(sigma2),
            aic=best.aic,
            bic=best.bic,
            hq=best.hq,
            persistence=best.persistence,
            converged=best.converged,
        )
    return fits


def evaluate_portfolios(config: PortfolioConfig) -> list[PortfolioReport]:
    """One report per crypto/benchmark comparison in the design.

    Marginals and copulas are selected on the training window; weights,
    variances, risk reduction and the VaR backtest are computed on the
    evaluation window (the full sample when ``in_sample``).
    """
    assets = sorted({a for pair in config.pairs for a in pair})
    missing = [a for a in assets if a not in config.returns]
    if missing:
        raise ValueError(f"missing return series for {missing}")
    lengths = {len(config.returns[a]) for a in assets}
    if len(lengths) != 1:
        raise ValueError("return series must be aligned to a common length")
    n = lengths.pop()
    n_train = n if config.in_sample else int(math.floor(config.split * n))
    if n_train < 100:
        raise ValueError("training window too short")
    eval_slice = slice(0, n) if config.in_sample else slice(n_train, n)

    fits = _marginal_fits(config, assets, n_train)
    reports = []
    for idx, (crypto, bench) in enumerate(config.pairs):
        fit_c, fit_b = fits[crypto], fits[bench]
        u = cop.pit_transform(fit_c.std_residuals[:n_train])
        v = cop.pit_transform(fit_b.std_residuals[:n_train])
        ranked = cop.select_copula(cop.UniformPair(u, v), list(config.copula_families), seed=config.seed)
        best_cop = ranked[0]
        cop_full = _extend_copula_path(best_cop, fit_c, fit_b, n)

        cov = conditional_covariance(fit_c, fit_b, cop_full)
        weights, _ = optimal_weight_path(cov)
        var_path = portfolio_variance_path(weights, cov)

        cov_eval = CovariancePath(
            cov.h_i[eval_slice], cov.h_j[eval_slice], cov.h_ij[eval_slice]
        )
        w_eval = weights[eval_slice]
        var_eval = var_path[eval_slice]
        bench_var_eval = cov.h_j[eval_slice]
        re = risk_reduction(bench_var_eval, var_eval)

        cop_eval = _slice_copula_path(cop_full, eval_slice, n)
        var99 = var_forecast(
            cov_eval, w_eval, cop_eval, fit_c, fit_b,
            level=config.level, n_draws=config.n_draws, seed=config.seed + 97 * idx,
        )
        eps_c = fit_c.std_residuals * np.sqrt(fit_c.cond_variance)
        eps_b = fit_b.std_residuals * np.sqrt(fit_b.cond_variance)
        r_p = w_eval * eps_c[eval_slice] + (1.0 - w_eval) * eps_b[eval_slice]
        flags = (-r_p > var99).astype(int)
        cc = conditional_coverage_test(flags, config.level)
        reports.append(
            PortfolioReport(
                label=f"{crypto}-{bench}",
                weight_path=w_eval,
                variance_path=var_eval,
                mean_variance=float(np.mean(var_eval)),
                risk_reduction=re,
                var99_path=var99,
                exceedance_flags=flags,
                cc_test=cc,
                level=config.level,
                copula_label=best_cop.family.label,
                garch_tags=(fit_c.variant.tag, fit_b.variant.tag),
            )
        )
    return reports


def _extend_copula_path(fit: cop.CopulaFit, fit_i: GarchFit, fit_j: GarchFit, n: int) -> cop.CopulaFit:
    """Evolve a time-varying copula over the full sample with trained psis."""
    if not fit.family.time_varying:
        return fit
    u = cop.pit_transform(fit_i.std_residuals)
    v = cop.pit_transform(fit_j.std_residuals)
    tag = fit.family.tag
    p = fit.params
    if tag == cop.SJC:
        psis = np.array([p.psi0, p.psi1, p.psi2, p.psi0_lower, p.psi1_lower, p.psi2_lower])
        static_vals = (float(np.mean(fit.param_path[:, 0])), float(np.mean(fit.param_path[:, 1])))
    elif tag in (cop.GUMBEL, cop.ROTATED_GUMBEL):
        psis = np.array([p.psi0, p.psi1, p.psi2])
        static_vals = (float(np.mean(fit.param_path)),)
    else:
        psis = np.array([p.psi0, p.psi1, p.psi2])
        static_vals = (float(np.mean(fit.param_path)),)
    forcing = cop._tv_forcing(tag, u, v, p.nu)
    path = cop._tv_paths(tag, psis, forcing, static_vals)
    if tag == cop.SJC:
        path = np.column_stack(path)
    return cop.CopulaFit(
        family=fit.family,
        params=fit.params,
        loglik=fit.loglik,
        aic=fit.aic,
        tail_dep=fit.tail_dep,
        n_obs=n,
        converged=fit.converged,
        param_path=path,
    )


def _slice_copula_path(fit: cop.CopulaFit, sl: slice, n: int) -> cop.CopulaFit:
    if fit.param_path is None:
        return fit
    return cop.CopulaFit(
        family=fit.family,
        params=fit.params,
        loglik=fit.loglik,
        aic=fit.aic,
        tail_dep=fit.tail_dep,
        n_obs=len(np.asarray(fit.param_path)[sl]),
        converged=fit.converged,
        param_path=np.asarray(fit.param_path)[sl],
    )
