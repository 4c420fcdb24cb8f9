"""Dated price and return series: ingestion, alignment, descriptive statistics.

Prices are strictly positive and strictly date-ordered so that the log
transform and first differences are always defined.  Returns are continuously
compounded: ``r_t = ln(p_t / p_{t-1})``, dated at the later observation.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import date
from typing import IO, Iterable, Union

import numpy as np

__all__ = [
    "PriceSeries",
    "ReturnSeries",
    "DescriptiveStats",
    "load_price_csv",
    "align",
    "log_returns",
    "describe",
    "write_returns_csv",
]


def _as_date_array(dates: Iterable) -> np.ndarray:
    arr = np.asarray(dates, dtype="datetime64[D]")
    if arr.ndim != 1:
        raise ValueError("dates must be one-dimensional")
    return arr


@dataclass
class PriceSeries:
    """Daily price observations for a single asset.

    Invariants: dates strictly increasing (no duplicates), all prices > 0.
    """

    asset_id: str
    dates: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        self.dates = _as_date_array(self.dates)
        self.prices = np.asarray(self.prices, dtype=float)
        if self.dates.shape != self.prices.shape:
            raise ValueError("dates and prices must have equal length")
        if len(self.dates) > 1 and not np.all(self.dates[1:] > self.dates[:-1]):
            raise ValueError("dates must be strictly increasing with no duplicates")
        if not np.all(np.isfinite(self.prices)):
            raise ValueError("prices must be finite")
        if np.any(self.prices <= 0.0):
            raise ValueError("prices must be strictly positive")

    def __len__(self) -> int:
        return len(self.prices)


@dataclass
class ReturnSeries:
    """Log-return observations, one fewer than the generating price series."""

    asset_id: str
    dates: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.dates = _as_date_array(self.dates)
        self.values = np.asarray(self.values, dtype=float)
        if self.dates.shape != self.values.shape:
            raise ValueError("dates and values must have equal length")
        if len(self.dates) > 1 and not np.all(self.dates[1:] > self.dates[:-1]):
            raise ValueError("dates must be strictly increasing with no duplicates")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("returns must be finite")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class DescriptiveStats:
    """Moment summary of a return sample.

    Skewness and kurtosis use population (divide-by-n) moment estimators and
    kurtosis is non-excess (normal = 3), so the Jarque-Bera statistic is the
    textbook ``(n/6) * (S^2 + (K-3)^2 / 4)`` of the stored values.
    """

    n: int
    mean: float
    std_dev: float
    skewness: float
    kurtosis: float
    jarque_bera: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean,
            "std_dev": self.std_dev,
            "skewness": self.skewness,
            "kurtosis": self.kurtosis,
            "jarque_bera": self.jarque_bera,
        }


def _read_text(source: Union[str, bytes, IO]) -> str:
    """Accept a path, raw bytes, or an open (binary or text) stream."""
    if isinstance(source, bytes):
        return source.decode("utf-8-sig")
    if isinstance(source, str):
        with open(source, "rb") as fh:
            return fh.read().decode("utf-8-sig")
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8-sig")
    return data


def load_price_csv(source: Union[str, bytes, IO], asset_id: str) -> PriceSeries:
    """Parse a ``date,price`` CSV into a :class:`PriceSeries`.

    Rows with an empty price field are dropped.  Rows arriving out of order
    are sorted; duplicate dates and non-positive prices are errors.  Parse
    failures report the offending 1-based line number.
    """
    text = _read_text(source)
    reader = csv.reader(io.StringIO(text, newline=""))
    rows = list(reader)
    if not rows:
        raise ValueError(f"{asset_id}: empty input")
    header = [h.strip().lower() for h in rows[0]]
    if header[:2] != ["date", "price"]:
        raise ValueError(f"{asset_id}: expected header 'date,price', got {rows[0]!r}")

    dates: list[date] = []
    prices: list[float] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < 2:
            raise ValueError(f"{asset_id}: line {lineno}: malformed row {row!r}")
        d_raw, p_raw = row[0].strip(), row[1].strip()
        if not p_raw:
            continue
        try:
            d = date.fromisoformat(d_raw)
        except ValueError as exc:
            raise ValueError(f"{asset_id}: line {lineno}: bad date {d_raw!r}") from exc
        try:
            p = float(p_raw)
        except ValueError as exc:
            raise ValueError(f"{asset_id}: line {lineno}: bad price {p_raw!r}") from exc
        if not math.isfinite(p) or p <= 0.0:
            raise ValueError(f"{asset_id}: line {lineno}: non-positive price {p_raw!r}")
        dates.append(d)
        prices.append(p)

    if not dates:
        raise ValueError(f"{asset_id}: no usable observations")
    order = np.argsort(np.asarray(dates, dtype="datetime64[D]"), kind="stable")
    d_arr = np.asarray(dates, dtype="datetime64[D]")[order]
    p_arr = np.asarray(prices, dtype=float)[order]
    dup = np.nonzero(d_arr[1:] == d_arr[:-1])[0]
    if dup.size:
        raise ValueError(f"{asset_id}: duplicate date {d_arr[dup[0] + 1]}")
    return PriceSeries(asset_id=asset_id, dates=d_arr, prices=p_arr)


def align(series: list[PriceSeries]) -> list[PriceSeries]:
    """Restrict every series to the dates common to all of them.

    Idempotent; series already on identical dates are returned unchanged.
    """
    if len(series) < 2:
        raise ValueError("align needs at least two series")
    common = series[0].dates
    for s in series[1:]:
        common = np.intersect1d(common, s.dates)
    if common.size == 0:
        raise ValueError("empty date intersection")
    if all(len(s) == common.size for s in series):
        return list(series)
    out = []
    for s in series:
        mask = np.isin(s.dates, common)
        out.append(PriceSeries(s.asset_id, s.dates[mask], s.prices[mask]))
    return out


def log_returns(p: PriceSeries) -> ReturnSeries:
    """First differences of natural log prices, dated at the later observation."""
    if len(p) < 2:
        raise ValueError("need at least two observations to form returns")
    # ratio-first form keeps the result invariant under price rescaling
    r = np.log(p.prices[1:] / p.prices[:-1])
    return ReturnSeries(asset_id=p.asset_id, dates=p.dates[1:], values=r)


def describe(r: Union[ReturnSeries, np.ndarray]) -> DescriptiveStats:
    """Population-moment descriptive statistics with the Jarque-Bera statistic."""
    x = r.values if isinstance(r, ReturnSeries) else np.asarray(r, dtype=float)
    n = x.size
    if n < 4:
        raise ValueError("need at least 4 observations")
    mean = float(np.mean(x))
    dev = x - mean
    m2 = float(np.mean(dev**2))
    if m2 <= 0.0:
        raise ValueError("zero variance: skewness and kurtosis undefined")
    m3 = float(np.mean(dev**3))
    m4 = float(np.mean(dev**4))
    skew = m3 / m2**1.5
    kurt = m4 / m2**2
    jb = (n / 6.0) * (skew**2 + 0.25 * (kurt - 3.0) ** 2)
    return DescriptiveStats(
        n=n,
        mean=mean,
        std_dev=math.sqrt(m2),
        skewness=skew,
        kurtosis=kurt,
        jarque_bera=jb,
    )


def write_returns_csv(r: ReturnSeries, fh: IO[str]) -> None:
    """Emit ``date,return`` rows, returns printed with 10 significant digits."""
    fh.write("date,return\n")
    for d, v in zip(r.dates, r.values):
        fh.write(f"{d},{v:.10g}\n")
