"""Mix a crypto asset into benchmark portfolios and measure the risk effect.

Run from the repository root:  python demos/05_portfolio_hedging.py
"""

import numpy as np

from finmetrics.copulas import CopulaFamily
from finmetrics.garch import GarchVariant
from finmetrics.portfolio import PortfolioConfig, evaluate_portfolios
from finmetrics.timeseries import align, load_price_csv, log_returns

ASSETS = {
    "BPI": "data/synthetic/bpi.csv",
    "STR": "data/synthetic/str.csv",
    "Oil": "data/synthetic/oil.csv",
}
series = align([load_price_csv(p, a) for a, p in ASSETS.items()])
returns = {s.asset_id: log_returns(s) for s in series}
print(f"aligned sample: {len(returns['BPI'])} observations")

config = PortfolioConfig(
    returns=returns,
    seed=21,
    pairs=(("BPI", "STR"), ("BPI", "Oil")),
    garch_variants=(GarchVariant("GARCH"), GarchVariant("T_GARCH")),
    copula_families=(
        CopulaFamily("gaussian"),
        CopulaFamily("rotated_gumbel"),
        CopulaFamily("gaussian", time_varying=True),
    ),
    level=0.99,
    split=0.75,      # fit on the first 75%, evaluate coverage on the rest
    n_draws=5000,    # simulated draws per day for the VaR quantile
)
print("Fitting marginals and copulas on the training window, evaluating the")
print("variance-minimising crypto/benchmark mix out of sample...\n")
reports = evaluate_portfolios(config)

print(f"{'comparison':12s} {'copula':14s} {'mean w':>8s} {'risk red.':>10s} "
      f"{'VaR hits':>9s} {'cc p-value':>11s}")
for rep in reports:
    hits = int(rep.exceedance_flags.sum())
    n = len(rep.exceedance_flags)
    print(f"{rep.label:12s} {rep.copula_label:14s} {rep.weight_path.mean():8.3f} "
          f"{rep.risk_reduction:10.4f} {hits:4d}/{n:4d} {rep.cc_test.p_value:11.4f}")

print("\nRisk reduction is one minus the mixed-to-benchmark variance ratio,")
print("so 0.35 means the mix carries 35% less conditional variance than the")
print("benchmark alone. A conditional-coverage p-value above 0.05 means the")
print("99% VaR exceedances are both correctly sized and serially independent.")
