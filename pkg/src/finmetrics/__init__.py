"""finmetrics: volatility, explosiveness, dependence and portfolio-risk analytics.

The package is organised around five building blocks:

- ``timeseries``: price/return containers, CSV ingestion, descriptive stats.
- ``garch``: a zoo of conditional-variance recursions estimated by Gaussian
  quasi maximum likelihood, with information-criterion model selection.
- ``bubbles``: right-tailed recursive unit-root tests (ADF/SADF/BSADF/GSADF)
  with Monte Carlo critical values and episode date-stamping.
- ``copulas``: seven bivariate copula families, static and time-varying,
  fitted to probability-integral-transformed residuals.
- ``portfolio``: minimum-variance two-asset weights, risk-reduction ratios,
  simulated value-at-risk and conditional-coverage backtests.

``finmetrics.cli`` wires everything into a reproducible batch pipeline.
"""

from finmetrics.timeseries import (
    DescriptiveStats,
    PriceSeries,
    ReturnSeries,
    align,
    describe,
    load_price_csv,
    log_returns,
)

__version__ = "0.1.0"

__all__ = [
    "PriceSeries",
    "ReturnSeries",
    "DescriptiveStats",
    "load_price_csv",
    "align",
    "log_returns",
    "describe",
]
