"""Deterministic synthetic five-asset price panel for demos and end-to-end runs.

Two crypto-style series (every calendar day, high volatility, one with an
explosive bubble episode that collapses) and three benchmark series (weekday
dates only, lower volatility) with mildly negative cross-dependence to the
cryptos.  Everything derives from a single seed.
"""

from __future__ import annotations

import os

import numpy as np

from finmetrics.timeseries import PriceSeries

__all__ = ["synthetic_panel", "write_panel_csv", "DEFAULT_ASSETS"]

DEFAULT_ASSETS = ("BPI", "ETH", "STR", "BdR", "Oil")

_CORR = np.array(
    [
        [1.00, 0.45, -0.25, -0.20, -0.15],
        [0.45, 1.00, -0.20, -0.25, -0.10],
        [-0.25, -0.20, 1.00, 0.30, 0.25],
        [-0.20, -0.25, 0.30, 1.00, 0.15],
        [-0.15, -0.10, 0.25, 0.15, 1.00],
    ]
)

# (omega, alpha, beta, gamma) of a threshold recursion per asset, daily scale
_VOL = {
    "BPI": (4.0e-5, 0.10, 0.82, 0.06),
    "ETH": (8.0e-5, 0.12, 0.80, 0.05),
    "STR": (8.0e-6, 0.08, 0.86, 0.05),
    "BdR": (4.0e-6, 0.05, 0.90, 0.02),
    "Oil": (2.0e-5, 0.07, 0.87, 0.04),
}

_P0 = {"BPI": 430.0, "ETH": 8.0, "STR": 2050.0, "BdR": 104.0, "Oil": 37.0}


def synthetic_panel(seed: int = 20160104, n_days: int = 760) -> dict[str, PriceSeries]:
    """Generate the five-asset panel; deterministic in the seed."""
    rng = np.random.default_rng(seed)
    chol = np.linalg.cholesky(_CORR)
    z = rng.standard_normal((n_days, 5)) @ chol.T

    start = np.datetime64("2016-01-04")
    all_dates = start + np.arange(n_days)
    weekday = (all_dates.astype("datetime64[D]").view("int64") - 4) % 7 < 5

    panel: dict[str, PriceSeries] = {}
    for k, asset in enumerate(DEFAULT_ASSETS):
        omega, alpha, beta, gamma = _VOL[asset]
        s2 = omega / max(1.0 - alpha - beta - 0.5 * gamma, 0.05)
        r = np.empty(n_days)
        eps_prev = 0.0
        for t in range(n_days):
            if t > 0:
                coef = alpha + (gamma if eps_prev < 0 else 0.0)
                s2 = omega + coef * eps_prev**2 + beta * s2
            eps_prev = np.sqrt(s2) * z[t, k]
            r[t] = eps_prev
        lp = np.log(_P0[asset]) + np.cumsum(r)
        if asset == "BPI":
            lp = _inject_bubble(lp, start_idx=420, duration=60, growth=1.004)
        dates = all_dates if asset in ("BPI", "ETH") else all_dates[weekday]
        prices = np.exp(lp) if asset in ("BPI", "ETH") else np.exp(lp[weekday])
        panel[asset] = PriceSeries(asset_id=asset, dates=dates, prices=prices)
    return panel


def _inject_bubble(lp: np.ndarray, start_idx: int, duration: int, growth: float) -> np.ndarray:
    """Explosive log-price segment collapsing back to its pre-bubble level."""
    out = lp.copy()
    for t in range(start_idx, start_idx + duration):
        out[t] = growth * out[t - 1] + (lp[t] - lp[t - 1])
    collapse = out[start_idx + duration - 1] - lp[start_idx - 1]
    for t in range(start_idx + duration, len(lp)):
        out[t] = lp[t] + max(collapse - 0.08 * (t - start_idx - duration), 0.0)
    return out


def write_panel_csv(directory: str, seed: int = 20160104, n_days: int = 760) -> dict[str, str]:
    """Write one ``date,price`` CSV per asset; returns asset -> path."""
    os.makedirs(directory, exist_ok=True)
    panel = synthetic_panel(seed=seed, n_days=n_days)
    paths = {}
    for asset, series in panel.items():
        path = os.path.join(directory, f"{asset.lower()}.csv")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("date,price\n")
            for d, p in zip(series.dates, series.prices):
                fh.write(f"{d},{p:.10g}\n")
        paths[asset] = path
    return paths
