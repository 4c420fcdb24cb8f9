"""Conditional-variance model zoo with Gaussian quasi maximum likelihood.

Nine recursions share one mean equation ``r_t = c + ar1 * r_{t-1} + e_t``
(the in-mean variant adds ``lambda_m * sigma2_t``):

==========  ================================================================
GARCH       sigma2_t = omega + sum_i alpha_i e2_{t-i} + sum_j beta_j s2_{t-j}
GARCH_M     GARCH variance, risk-premium term in the mean
I_GARCH     GARCH with sum(alpha) + sum(beta) = 1, beta_1 eliminated
C_GARCH     s2_t = lr + alpha (e2_{t-1} - lr) + beta (s2_{t-1} - lr); the
            long-run level lr is pinned at the residual sample variance
CMT_GARCH   s2_t = omega + alpha e2_{t-1}
            + beta (omega + (alpha + gamma 1[e_{t-2}<0]) e2_{t-2} + beta s2_{t-2})
T_GARCH     s2_t = omega + alpha e2_{t-1} + gamma e2_{t-1} 1[e_{t-1}<0]
            + beta s2_{t-1}   (squared-shock threshold form)
E_GARCH     ln s2_t = omega + alpha z_{t-1} + gamma (|z_{t-1}| - sqrt(2/pi))
            + beta ln s2_{t-1}
P_GARCH     s_t^phi = omega + alpha |e_{t-1}|^phi + beta s_{t-1}^phi
AP_GARCH    s_t^phi = omega + alpha (|e_{t-1}| - gamma e_{t-1})^phi
            + beta s_{t-1}^phi
==========  ================================================================

The innovation law is left unspecified; estimation maximises the Gaussian
quasi likelihood, which stays consistent for the variance parameters.  The
persistence summary ``sum(alpha) + sum(beta) + 0.5 * gamma`` is reported
uniformly for all variants as a reporting convention, not a stationarity
claim; values above one are flagged, never rejected.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from numba import njit

from finmetrics._optim import ParamSpec, multistart_minimize
from finmetrics.timeseries import ReturnSeries

__all__ = [
    "GarchVariant",
    "GarchParams",
    "GarchFit",
    "ModelSelection",
    "VARIANT_TAGS",
    "filter_variance",
    "neg_log_likelihood",
    "fit_garch",
    "information_criteria",
    "select_model",
    "persistence",
    "simulate_garch",
    "n_free_params",
]

VARIANT_TAGS = (
    "GARCH",
    "GARCH_M",
    "I_GARCH",
    "C_GARCH",
    "CMT_GARCH",
    "T_GARCH",
    "E_GARCH",
    "P_GARCH",
    "AP_GARCH",
)

_CODES = {
    "GARCH": 0,
    "GARCH_M": 0,  # same variance recursion; mean handled separately
    "I_GARCH": 0,  # beta_1 implied, then plain recursion
    "C_GARCH": 2,
    "CMT_GARCH": 3,
    "T_GARCH": 4,
    "E_GARCH": 5,
    "P_GARCH": 6,
    "AP_GARCH": 7,
}


@dataclass(frozen=True)
class GarchVariant:
    """Model tag plus (p, q) = (variance lags, shock lags)."""

    tag: str
    p: int = 1
    q: int = 1

    def __post_init__(self):
        if self.tag not in VARIANT_TAGS:
            raise ValueError(f"unknown variant {self.tag!r}")
        if self.p < 1 or self.q < 1:
            raise ValueError("orders p and q must be >= 1")
        if self.tag in ("C_GARCH", "CMT_GARCH") and (self.p, self.q) != (1, 1):
            raise ValueError(f"{self.tag} is defined for order (1, 1) only")


@dataclass
class GarchParams:
    """Parameter vector shared by all variants; unused fields stay at defaults.

    ``gamma`` is the asymmetry/leverage coefficient (0 for symmetric
    variants), ``lambda_m`` the in-mean risk premium and ``phi_power`` the
    power-recursion exponent (None unless P_GARCH / AP_GARCH).
    """

    mean_const: float = 0.0
    ar1: float = 0.0
    omega: float = 0.0
    alpha: np.ndarray = field(default_factory=lambda: np.zeros(1))
    beta: np.ndarray = field(default_factory=lambda: np.zeros(1))
    gamma: float = 0.0
    lambda_m: float = 0.0
    phi_power: float | None = None

    def __post_init__(self):
        self.alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        self.beta = np.atleast_1d(np.asarray(self.beta, dtype=float))

    def to_dict(self) -> dict:
        return {
            "mean_const": self.mean_const,
            "ar1": self.ar1,
            "omega": self.omega,
            "alpha": list(map(float, self.alpha)),
            "beta": list(map(float, self.beta)),
            "gamma": self.gamma,
            "lambda_m": self.lambda_m,
            "phi_power": self.phi_power,
        }


@dataclass
class GarchFit:
    """Estimation result: parameters, likelihood, paths and diagnostics."""

    variant: GarchVariant
    params: GarchParams
    loglik: float
    n_obs: int
    cond_variance: np.ndarray
    std_residuals: np.ndarray
    aic: float
    bic: float
    hq: float
    persistence: float
    converged: bool

    @property
    def explosive(self) -> bool:
        """Persistence above one: shocks do not decay."""
        return self.persistence > 1.0

    def to_dict(self) -> dict:
        return {
            "variant": {"tag": self.variant.tag, "p": self.variant.p, "q": self.variant.q},
            "params": self.params.to_dict(),
            "loglik": self.loglik,
            "n_obs": self.n_obs,
            "aic": self.aic,
            "bic": self.bic,
            "hq": self.hq,
            "persistence": self.persistence,
            "converged": self.converged,
            "cond_variance": list(map(float, self.cond_variance)),
            "std_residuals": list(map(float, self.std_residuals)),
        }


def _values(r: Union[ReturnSeries, np.ndarray]) -> np.ndarray:
    if isinstance(r, ReturnSeries):
        return r.values
    return np.asarray(r, dtype=float)


def validate_params(v: GarchVariant, p: GarchParams) -> None:
    """Raise ValueError when the parameter vector violates variant constraints."""
    if len(p.alpha) != v.q or len(p.beta) != v.p:
        raise ValueError(f"{v.tag}: alpha must have length q={v.q}, beta length p={v.p}")
    tag = v.tag
    if tag == "E_GARCH":
        return  # exponentiation needs no positivity constraints
    if tag in ("P_GARCH", "AP_GARCH"):
        if p.phi_power is None or p.phi_power <= 0:
            raise ValueError(f"{tag}: power parameter phi must be > 0")
    if tag == "AP_GARCH" and not -1.0 < p.gamma < 1.0:
        raise ValueError("AP_GARCH: gamma must lie in (-1, 1)")
    if tag == "C_GARCH":
        if np.any(p.alpha < 0) or np.any(p.beta < 0):
            raise ValueError("C_GARCH: alpha and beta must be non-negative")
        return  # omega is implied by the long-run level
    if tag == "I_GARCH":
        if abs(p.alpha.sum() + p.beta.sum() - 1.0) > 1e-8:
            raise ValueError("I_GARCH: alpha and beta must sum to one")
    if p.omega <= 0:
        raise ValueError(f"{tag}: omega must be > 0")
    if np.any(p.alpha < 0) or np.any(p.beta < 0):
        raise ValueError(f"{tag}: alpha and beta must be non-negative")
    if tag in ("T_GARCH", "CMT_GARCH") and p.alpha[0] + p.gamma < 0:
        raise ValueError(f"{tag}: alpha + gamma must be >= 0")


@njit(cache=True)
def _variance_core(code, eps, omega, alpha, beta, gamma, phi, longrun, s0):  # pragma: no cover
    n = eps.shape[0]
    q = alpha.shape[0]
    p = beta.shape[0]
    sigma2 = np.empty(n)
    sigma2[0] = s0
    if code == 2:  # component form, long-run level fixed
        for t in range(1, n):
            e2 = eps[t - 1] * eps[t - 1]
            sigma2[t] = longrun + alpha[0] * (e2 - longrun) + beta[0] * (sigma2[t - 1] - longrun)
            if not (sigma2[t] > 0.0 and np.isfinite(sigma2[t])):
                return sigma2, False
        return sigma2, True
    if code == 3:  # nested two-lag threshold composite
        a = alpha[0]
        b = beta[0]
        for t in range(1, n):
            e1 = eps[t - 1]
            if t >= 2:
                e2lag = eps[t - 2]
                coef = a + (gamma if e2lag < 0.0 else 0.0)
                inner = omega + coef * e2lag * e2lag + b * (sigma2[t - 2] if t >= 2 else s0)
            else:
                inner = s0
            sigma2[t] = omega + a * e1 * e1 + b * inner
            if not (sigma2[t] > 0.0 and np.isfinite(sigma2[t])):
                return sigma2, False
        return sigma2, True
    if code == 5:  # log-variance recursion
        ln0 = np.log(s0)
        lns = np.empty(n)
        lns[0] = ln0
        k = np.sqrt(2.0 / np.pi)
        for t in range(1, n):
            acc = omega
            for i in range(q):
                if t - 1 - i >= 0:
                    z = eps[t - 1 - i] / np.sqrt(sigma2[t - 1 - i])
                    g = gamma if i == 0 else 0.0
                    acc += alpha[i] * z + g * (np.abs(z) - k)
            for j in range(p):
                acc += beta[j] * (lns[t - 1 - j] if t - 1 - j >= 0 else ln0)
            if acc > 600.0 or acc < -600.0 or not np.isfinite(acc):
                return sigma2, False
            lns[t] = acc
            sigma2[t] = np.exp(acc)
        return sigma2, True
    if code == 6 or code == 7:  # power recursions on s = sigma^phi
        s_init = s0 ** (phi / 2.0)
        st = np.empty(n)
        st[0] = s_init
        for t in range(1, n):
            acc = omega
            for i in range(q):
                if t - 1 - i >= 0:
                    e = eps[t - 1 - i]
                    if code == 6:
                        shock = np.abs(e) ** phi
                    else:
                        g = gamma if i == 0 else 0.0
                        shock = (np.abs(e) - g * e) ** phi
                else:
                    shock = s_init
                acc += alpha[i] * shock
            for j in range(p):
                acc += beta[j] * (st[t - 1 - j] if t - 1 - j >= 0 else s_init)
            if not (acc > 0.0 and np.isfinite(acc)):
                return sigma2, False
            st[t] = acc
            sigma2[t] = acc ** (2.0 / phi)
            if not np.isfinite(sigma2[t]):
                return sigma2, False
        return sigma2, True
    # codes 0 and 4: squared-shock recursions, optional first-lag threshold
    for t in range(1, n):
        acc = omega
        for i in range(q):
            if t - 1 - i >= 0:
                e = eps[t - 1 - i]
                e2 = e * e
                coef = alpha[i]
                if code == 4 and i == 0 and e < 0.0:
                    coef += gamma
                acc += coef * e2
            else:
                acc += alpha[i] * s0
        for j in range(p):
            acc += beta[j] * (sigma2[t - 1 - j] if t - 1 - j >= 0 else s0)
        if not (acc > 0.0 and np.isfinite(acc)):
            return sigma2, False
        sigma2[t] = acc
    return sigma2, True


@njit(cache=True)
def _garch_m_core(x, xbar, c, ar1, lam, omega, alpha, beta, s0):  # pragma: no cover
    n = x.shape[0]
    q = alpha.shape[0]
    p = beta.shape[0]
    sigma2 = np.empty(n)
    eps = np.empty(n)
    sigma2[0] = s0
    eps[0] = x[0] - c - ar1 * xbar - lam * s0
    for t in range(1, n):
        acc = omega
        for i in range(q):
            if t - 1 - i >= 0:
                acc += alpha[i] * eps[t - 1 - i] * eps[t - 1 - i]
            else:
                acc += alpha[i] * s0
        for j in range(p):
            acc += beta[j] * (sigma2[t - 1 - j] if t - 1 - j >= 0 else s0)
        if not (acc > 0.0 and np.isfinite(acc)):
            return sigma2, eps, False
        sigma2[t] = acc
        eps[t] = x[t] - c - ar1 * x[t - 1] - lam * acc
    return sigma2, eps, True


def _mean_residuals(x: np.ndarray, c: float, ar1: float) -> np.ndarray:
    """AR(1) mean-equation residuals; the pre-sample lag is the sample mean."""
    lag = np.empty_like(x)
    lag[0] = x.mean()
    lag[1:] = x[:-1]
    return x - c - ar1 * lag


def _init_variance(eps: np.ndarray, v: GarchVariant, p: GarchParams) -> float:
    s0 = float(np.var(eps))
    if s0 > 0.0:
        return s0
    # degenerate residuals: fall back to the variance-equation level
    if v.tag != "E_GARCH" and p.omega > 0.0:
        return p.omega
    return 1.0


def _filter_impl(x: np.ndarray, v: GarchVariant, p: GarchParams):
    if v.tag == "GARCH_M":
        eps0 = _mean_residuals(x, p.mean_const, p.ar1)
        s0 = float(np.var(eps0)) if np.var(eps0) > 0 else _init_variance(eps0, v, p)
        sigma2, eps, ok = _garch_m_core(
            x, float(x.mean()), p.mean_const, p.ar1, p.lambda_m,
            p.omega, p.alpha, p.beta, s0,
        )
        return sigma2, eps, ok
    eps = _mean_residuals(x, p.mean_const, p.ar1)
    s0 = _init_variance(eps, v, p)
    beta = p.beta
    if v.tag == "I_GARCH":
        beta = p.beta.copy()
        beta[0] = 1.0 - p.alpha.sum() - p.beta[1:].sum()
    longrun = s0 if v.tag == "C_GARCH" else 0.0
    phi = p.phi_power if p.phi_power is not None else 2.0
    sigma2, ok = _variance_core(
        _CODES[v.tag], eps, p.omega, p.alpha, beta, p.gamma, phi, longrun, s0,
    )
    return sigma2, eps, ok


def filter_variance(
    r: Union[ReturnSeries, np.ndarray], v: GarchVariant, p: GarchParams
) -> tuple[np.ndarray, np.ndarray]:
    """Run the variant's variance recursion; returns (sigma2, residuals).

    The initial variance is the sample variance of the mean-equation
    residuals; pre-sample shock/variance terms are replaced by that value.
    """
    x = _values(r)
    if x.size == 0:
        raise ValueError("empty return series")
    validate_params(v, p)
    sigma2, eps, ok = _filter_impl(x, v, p)
    if not ok or not np.all(np.isfinite(sigma2)):
        raise FloatingPointError(f"{v.tag}: non-finite variance produced; parameter set rejected")
    return sigma2, eps


def neg_log_likelihood(
    r: Union[ReturnSeries, np.ndarray], v: GarchVariant, p: GarchParams
) -> float:
    """Gaussian quasi negative log likelihood of the filtered series."""
    sigma2, eps = filter_variance(r, v, p)
    return float(0.5 * np.sum(np.log(2.0 * np.pi) + np.log(sigma2) + eps**2 / sigma2))


_LN_2PI = math.log(2.0 * math.pi)


def _nll_arrays(sigma2: np.ndarray, eps: np.ndarray) -> float:
    return float(0.5 * np.sum(_LN_2PI + np.log(sigma2) + eps * eps / sigma2))


def information_criteria(loglik: float, k: int, n: int) -> tuple[float, float, float]:
    """AIC, BIC and Hannan-Quinn for a fit with k parameters on n observations."""
    if n <= 1:
        raise ValueError("need n >= 2 observations")
    if k < 1:
        raise ValueError("need at least one parameter")
    aic = -2.0 * loglik + 2.0 * k
    bic = -2.0 * loglik + math.log(n) * k
    hq = -2.0 * loglik + 2.0 * k * math.log(math.log(n))
    return aic, bic, hq


def persistence(p: GarchParams) -> float:
    """Shock-persistence summary: sum(alpha) + sum(beta) + 0.5 * gamma."""
    return float(p.alpha.sum() + p.beta.sum() + 0.5 * p.gamma)


def n_free_params(v: GarchVariant) -> int:
    """Free parameters including the mean equation (c, ar1)."""
    base = 2  # mean constant + AR(1)
    tag = v.tag
    if tag == "GARCH":
        return base + 1 + v.q + v.p
    if tag == "GARCH_M":
        return base + 1 + v.q + v.p + 1
    if tag == "I_GARCH":
        return base + 1 + v.q + (v.p - 1)  # beta_1 eliminated
    if tag == "C_GARCH":
        return base + 2  # alpha, beta; level pinned, omega implied
    if tag == "CMT_GARCH":
        return base + 4
    if tag == "T_GARCH":
        return base + 1 + v.q + v.p + 1
    if tag == "E_GARCH":
        return base + 1 + v.q + v.p + 1
    if tag == "P_GARCH":
        return base + 1 + v.q + v.p + 1
    if tag == "AP_GARCH":
        return base + 1 + v.q + v.p + 2
    raise ValueError(tag)


def _variant_search_space(v: GarchVariant):
    """ParamSpec list plus natural-vector -> GarchParams unpacker (unit-variance scale)."""
    tag = v.tag
    specs = [
        ParamSpec("c", "free", start_lo=-0.10, start_hi=0.10),
        ParamSpec("ar1", "box", lo=-0.99, hi=0.99, start_lo=-0.5, start_hi=0.5),
    ]

    def alpha_specs():
        return [
            ParamSpec(f"alpha{i}", "log", start_lo=-5.0, start_hi=-0.8) for i in range(v.q)
        ]

    def beta_specs(count):
        return [
            ParamSpec(f"beta{j}", "log", start_lo=-2.5, start_hi=-0.05) for j in range(count)
        ]

    if tag in ("GARCH", "GARCH_M"):
        specs += [ParamSpec("omega", "log", start_lo=-6.0, start_hi=-1.0)]
        specs += alpha_specs() + beta_specs(v.p)
        if tag == "GARCH_M":
            specs += [ParamSpec("lambda_m", "free", start_lo=-0.3, start_hi=0.3)]

        def unpack(nat):
            c, ar1 = nat[0], nat[1]
            omega = nat[2]
            alpha = np.array(nat[3 : 3 + v.q])
            beta = np.array(nat[3 + v.q : 3 + v.q + v.p])
            lam = nat[-1] if tag == "GARCH_M" else 0.0
            return GarchParams(c, ar1, omega, alpha, beta, 0.0, lam, None)

    elif tag == "I_GARCH":
        specs += [ParamSpec("omega", "log", start_lo=-8.0, start_hi=-2.0)]
        specs += [
            ParamSpec(f"alpha{i}", "box", lo=1e-6, hi=0.999, start_lo=-2.0, start_hi=0.0)
            for i in range(v.q)
        ]
        specs += beta_specs(v.p - 1)

        def unpack(nat):
            c, ar1, omega = nat[0], nat[1], nat[2]
            alpha = np.array(nat[3 : 3 + v.q])
            beta_rest = np.array(nat[3 + v.q :])
            b1 = 1.0 - alpha.sum() - beta_rest.sum()
            beta = np.concatenate([[b1], beta_rest])
            return GarchParams(c, ar1, omega, alpha, beta, 0.0, 0.0, None)

    elif tag == "C_GARCH":
        specs += alpha_specs() + beta_specs(1)

        def unpack(nat):
            c, ar1 = nat[0], nat[1]
            return GarchParams(c, ar1, 0.0, np.array([nat[2]]), np.array([nat[3]]), 0.0, 0.0, None)

    elif tag in ("T_GARCH", "CMT_GARCH"):
        # first-lag alpha = A and gamma = G - A keeps alpha_1 >= 0 and
        # alpha_1 + gamma >= 0; further shock lags are plain log-positive
        specs += [
            ParamSpec("omega", "log", start_lo=-6.0, start_hi=-1.0),
            ParamSpec("A", "log", start_lo=-5.0, start_hi=-0.8),
            ParamSpec("G", "log", start_lo=-4.0, start_hi=-0.5),
        ]
        specs += [
            ParamSpec(f"alpha{i}", "log", start_lo=-5.0, start_hi=-0.8)
            for i in range(1, v.q)
        ]
        specs += beta_specs(v.p)

        def unpack(nat):
            c, ar1, omega, A, G = nat[0], nat[1], nat[2], nat[3], nat[4]
            alpha = np.concatenate([[A], nat[5 : 5 + v.q - 1]])
            beta = np.array(nat[5 + v.q - 1 :])
            return GarchParams(c, ar1, omega, alpha, beta, G - A, 0.0, None)

    elif tag == "E_GARCH":
        specs += [
            ParamSpec("omega", "free", start_lo=-0.4, start_hi=0.1),
        ]
        specs += [
            ParamSpec(f"alpha{i}", "free", start_lo=-0.3, start_hi=0.3) for i in range(v.q)
        ]
        specs += [ParamSpec("gamma", "free", start_lo=-0.1, start_hi=0.5)]
        specs += [
            ParamSpec(f"beta{j}", "box", lo=-0.9999, hi=0.9999, start_lo=0.5, start_hi=2.5)
            for j in range(v.p)
        ]

        def unpack(nat):
            c, ar1, omega = nat[0], nat[1], nat[2]
            alpha = np.array(nat[3 : 3 + v.q])
            gamma = nat[3 + v.q]
            beta = np.array(nat[4 + v.q :])
            return GarchParams(c, ar1, omega, alpha, beta, gamma, 0.0, None)

    elif tag in ("P_GARCH", "AP_GARCH"):
        specs += [ParamSpec("omega", "log", start_lo=-6.0, start_hi=-1.0)]
        specs += alpha_specs() + beta_specs(v.p)
        if tag == "AP_GARCH":
            specs += [ParamSpec("gamma", "box", lo=-0.995, hi=0.995, start_lo=-0.6, start_hi=0.6)]
        specs += [ParamSpec("phi", "box", lo=0.25, hi=4.0, start_lo=-0.5, start_hi=0.5)]

        def unpack(nat):
            c, ar1, omega = nat[0], nat[1], nat[2]
            alpha = np.array(nat[3 : 3 + v.q])
            beta = np.array(nat[3 + v.q : 3 + v.q + v.p])
            if tag == "AP_GARCH":
                gamma, phi = nat[-2], nat[-1]
            else:
                gamma, phi = 0.0, nat[-1]
            return GarchParams(c, ar1, omega, alpha, beta, gamma, 0.0, phi)

    else:  # pragma: no cover
        raise ValueError(tag)

    return specs, unpack


def _informed_starts(x: np.ndarray, v: GarchVariant, specs) -> list[np.ndarray]:
    """Two anchors on the unit-variance scale: moment-matched and no-ARCH.

    The no-ARCH anchor (tiny alpha and beta, level near the sample variance)
    keeps a parsimonious candidate in play on data without volatility
    clustering, where beta is barely identified.
    """
    c = float(np.mean(x))
    if x.size > 2:
        xc = x - c
        ar1 = float(np.dot(xc[1:], xc[:-1]) / max(np.dot(xc, xc), 1e-12))
        ar1 = min(max(ar1, -0.9), 0.9)
    else:
        ar1 = 0.0
    start = {
        "c": c, "ar1": ar1, "omega": 0.05, "lambda_m": 0.0,
        "A": 0.08, "G": 0.15, "gamma": 0.1, "phi": 2.0,
    }
    for i in range(8):
        start[f"alpha{i}"] = 0.08
        start[f"beta{i}"] = 0.85
    flat = dict(start)
    flat["omega"] = 0.988
    flat["A"], flat["G"] = 0.001, 0.002
    for i in range(8):
        flat[f"alpha{i}"] = 0.001
        flat[f"beta{i}"] = 0.01
    if v.tag == "E_GARCH":
        start["omega"] = -0.1
        start["gamma"] = 0.2
        flat["omega"] = -0.001
        flat["gamma"] = 0.002
        for i in range(8):
            start[f"alpha{i}"] = -0.05
            flat[f"alpha{i}"] = -0.001
    if v.tag == "I_GARCH":
        start["omega"] = 0.01
        flat["omega"] = 0.01
    return [np.array([d[s.name] for s in specs]) for d in (start, flat)]


def _rescale_params(p: GarchParams, v: GarchVariant, s: float) -> GarchParams:
    """Map parameters fitted on r/s back to the original return scale."""
    c = p.mean_const * s
    lam = p.lambda_m / s if p.lambda_m else 0.0
    omega = p.omega
    tag = v.tag
    if tag in ("GARCH", "GARCH_M", "I_GARCH", "T_GARCH", "CMT_GARCH"):
        omega = p.omega * s * s
    elif tag == "E_GARCH":
        omega = p.omega + (1.0 - p.beta.sum()) * 2.0 * math.log(s)
    elif tag in ("P_GARCH", "AP_GARCH"):
        omega = p.omega * s ** p.phi_power
    # C_GARCH has no free omega; the long-run level tracks the data scale
    return GarchParams(c, p.ar1, omega, p.alpha.copy(), p.beta.copy(), p.gamma, lam, p.phi_power)


def fit_garch(
    r: Union[ReturnSeries, np.ndarray],
    v: GarchVariant,
    *,
    seed: int = 0,
    n_starts: int = 8,
    polish: int = 3,
) -> GarchFit:
    """Estimate a variant by Gaussian QMLE with a Sobol multi-start.

    Deterministic for a fixed seed.  Non-convergence is reported through the
    ``converged`` flag rather than raised.  Candidates whose likelihoods are
    statistically indistinguishable (within 0.5 of the best negative log
    likelihood, a likelihood ratio of one) are resolved toward the lowest
    persistence: on data without volatility clustering the GARCH coefficient
    is unidentified and any point on the flat ridge is an equally good
    optimum.
    """
    x_raw = _values(r)
    n = x_raw.size
    if n < 100:
        raise ValueError("need at least 100 observations to fit")
    if n < 250:
        warnings.warn("fewer than 250 observations: estimates may be unstable", stacklevel=2)
    scale = float(np.std(x_raw))
    if scale <= 0.0:
        raise ValueError("degenerate data: zero variance")
    x = x_raw / scale

    specs, unpack = _variant_search_space(v)

    def objective(nat: np.ndarray) -> float:
        p = unpack(nat)
        try:
            validate_params(v, p)
        except ValueError:
            return np.inf
        sigma2, eps, ok = _filter_impl(x, v, p)
        if not ok:
            return np.inf
        return _nll_arrays(sigma2, eps)

    extra = _informed_starts(x, v, specs)
    res = multistart_minimize(
        objective, specs, seed=seed, n_starts=n_starts, extra_starts=extra, polish=polish,
    )
    # candidates within half a log-likelihood unit (LR stat 1) of the best
    # are statistically equivalent; take the least persistent of them
    eligible = [c for c in res.candidates if c[0] <= res.fun + 0.5]
    _, _, nat_best = min(eligible, key=lambda c: (persistence(unpack(c[2])), c[1]))
    params_x = unpack(nat_best)
    params = _rescale_params(params_x, v, scale)
    sigma2, eps = filter_variance(x_raw, v, params)
    loglik = -_nll_arrays(sigma2, eps)
    k = n_free_params(v)
    aic, bic, hq = information_criteria(loglik, k, n)
    return GarchFit(
        variant=v,
        params=params,
        loglik=loglik,
        n_obs=n,
        cond_variance=sigma2,
        std_residuals=eps / np.sqrt(sigma2),
        aic=aic,
        bic=bic,
        hq=hq,
        persistence=persistence(params),
        converged=res.success,
    )


_ORDER = {tag: i for i, tag in enumerate(VARIANT_TAGS)}


@dataclass
class ModelSelection:
    """Fits ranked by AIC, with BIC and HQ orderings alongside."""

    fits: list[GarchFit]
    by_bic: list[str]
    by_hq: list[str]
    failures: dict[str, str]

    @property
    def best(self) -> GarchFit:
        return self.fits[0]

    def to_dict(self) -> dict:
        return {
            "ranking_aic": [f.variant.tag for f in self.fits],
            "ranking_bic": self.by_bic,
            "ranking_hq": self.by_hq,
            "failures": dict(self.failures),
            "fits": [f.to_dict() for f in self.fits],
        }


def select_model(
    r: Union[ReturnSeries, np.ndarray],
    variants: Sequence[GarchVariant],
    *,
    seed: int = 0,
) -> ModelSelection:
    """Fit every variant and rank ascending by AIC (ties by listing order)."""
    if not variants:
        raise ValueError("need at least one variant")
    fits: list[GarchFit] = []
    failures: dict[str, str] = {}
    for v in variants:
        try:
            fits.append(fit_garch(r, v, seed=seed))
        except (ValueError, FloatingPointError, RuntimeError) as exc:
            failures[v.tag] = str(exc)
    if not fits:
        raise RuntimeError(f"all fits failed: {failures}")
    key_aic = lambda f: (f.aic, _ORDER[f.variant.tag])
    fits.sort(key=key_aic)
    by_bic = [f.variant.tag for f in sorted(fits, key=lambda f: (f.bic, _ORDER[f.variant.tag]))]
    by_hq = [f.variant.tag for f in sorted(fits, key=lambda f: (f.hq, _ORDER[f.variant.tag]))]
    return ModelSelection(fits=fits, by_bic=by_bic, by_hq=by_hq, failures=failures)


@njit(cache=True)
def _simulate_core(code, z, c, ar1, lam, omega, alpha, beta, gamma, phi, s_stat):  # pragma: no cover
    n = z.shape[0]
    q = alpha.shape[0]
    p = beta.shape[0]
    sigma2 = np.empty(n)
    eps = np.empty(n)
    r = np.empty(n)
    k = np.sqrt(2.0 / np.pi)
    lns_prev = np.log(s_stat)
    lns = np.empty(n)
    st = np.empty(n)
    s_init_pow = s_stat ** (phi / 2.0)
    for t in range(n):
        if code == 5:
            acc = omega
            for i in range(q):
                if t - 1 - i >= 0:
                    zz = eps[t - 1 - i] / np.sqrt(sigma2[t - 1 - i])
                    g = gamma if i == 0 else 0.0
                    acc += alpha[i] * zz + g * (np.abs(zz) - k)
            for j in range(p):
                acc += beta[j] * (lns[t - 1 - j] if t - 1 - j >= 0 else lns_prev)
            lns[t] = acc
            sigma2[t] = np.exp(acc)
        elif code == 6 or code == 7:
            acc = omega
            for i in range(q):
                if t - 1 - i >= 0:
                    e = eps[t - 1 - i]
                    if code == 6:
                        shock = np.abs(e) ** phi
                    else:
                        g = gamma if i == 0 else 0.0
                        shock = (np.abs(e) - g * e) ** phi
                else:
                    shock = s_init_pow
                acc += alpha[i] * shock
            for j in range(p):
                acc += beta[j] * (st[t - 1 - j] if t - 1 - j >= 0 else s_init_pow)
            st[t] = acc
            sigma2[t] = acc ** (2.0 / phi)
        elif code == 2:
            if t == 0:
                sigma2[t] = s_stat
            else:
                e2 = eps[t - 1] * eps[t - 1]
                sigma2[t] = s_stat + alpha[0] * (e2 - s_stat) + beta[0] * (sigma2[t - 1] - s_stat)
        elif code == 3:
            if t == 0:
                sigma2[t] = s_stat
            else:
                if t >= 2:
                    e2lag = eps[t - 2]
                    coef = alpha[0] + (gamma if e2lag < 0.0 else 0.0)
                    inner = omega + coef * e2lag * e2lag + beta[0] * sigma2[t - 2]
                else:
                    inner = s_stat
                sigma2[t] = omega + alpha[0] * eps[t - 1] * eps[t - 1] + beta[0] * inner
        else:
            acc = omega
            for i in range(q):
                if t - 1 - i >= 0:
                    e = eps[t - 1 - i]
                    coef = alpha[i]
                    if code == 4 and i == 0 and e < 0.0:
                        coef += gamma
                    acc += coef * e * e
                else:
                    acc += alpha[i] * s_stat
            for j in range(p):
                acc += beta[j] * (sigma2[t - 1 - j] if t - 1 - j >= 0 else s_stat)
            if t == 0:
                acc = s_stat
            sigma2[t] = acc
        if not (sigma2[t] > 0.0 and np.isfinite(sigma2[t])):
            return r, sigma2, False
        eps[t] = np.sqrt(sigma2[t]) * z[t]
        r_lag = r[t - 1] if t >= 1 else (c / (1.0 - ar1) if np.abs(ar1) < 1.0 else 0.0)
        r[t] = c + ar1 * r_lag + lam * sigma2[t] + eps[t]
    return r, sigma2, True


def simulate_garch(
    v: GarchVariant,
    p: GarchParams,
    n: int,
    seed: int,
    *,
    burn_in: int = 500,
    allow_explosive: bool = False,
) -> ReturnSeries:
    """Simulate n returns with Gaussian innovations after a discarded burn-in."""
    validate_params(v, p)
    pers = persistence(p)
    exploding = pers > 1.0 + 1e-12 or (v.tag == "E_GARCH" and abs(p.beta.sum()) >= 1.0)
    if exploding and not allow_explosive:
        raise ValueError(
            f"persistence {pers:.4f} is explosive; pass allow_explosive=True to simulate anyway"
        )
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n + burn_in)
    beta = p.beta
    if v.tag == "I_GARCH":
        beta = p.beta.copy()
        beta[0] = 1.0 - p.alpha.sum() - p.beta[1:].sum()
    if v.tag == "E_GARCH":
        bsum = beta.sum()
        s_stat = math.exp(p.omega / (1.0 - bsum)) if abs(bsum) < 1.0 else math.exp(p.omega)
    elif v.tag == "C_GARCH":
        s_stat = 1.0  # long-run level of the simulated process
    elif v.tag in ("P_GARCH", "AP_GARCH"):
        ab = p.alpha.sum() + beta.sum()
        sp = p.omega / (1.0 - ab) if ab < 1.0 else p.omega
        s_stat = sp ** (2.0 / p.phi_power)
    else:
        ab = p.alpha.sum() + beta.sum() + (0.5 * p.gamma if v.tag in ("T_GARCH", "CMT_GARCH") else 0.0)
        s_stat = p.omega / (1.0 - ab) if ab < 1.0 else p.omega
    phi = p.phi_power if p.phi_power is not None else 2.0
    r, _, ok = _simulate_core(
        _CODES[v.tag], z, p.mean_const, p.ar1, p.lambda_m,
        p.omega, p.alpha, beta, p.gamma, phi, s_stat,
    )
    if not ok:
        raise FloatingPointError("simulation produced non-finite variance")
    dates = np.datetime64("2000-01-03") + np.arange(n)
    return ReturnSeries(asset_id=f"sim_{v.tag.lower()}", dates=dates, values=r[burn_in:])
