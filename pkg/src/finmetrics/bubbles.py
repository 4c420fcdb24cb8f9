"""Right-tailed recursive unit-root tests for explosive-episode detection.

The building block is the ADF regression

    dy_t = mu + b * y_{t-1} + sum_{i=1..lags} phi_i * dy_{t-i} (+ c * t) + e_t

whose t-ratio on ``y_{t-1}`` is tested against the right-sided explosive
alternative: large positive values are evidence of explosiveness.  SADF takes
the sup of that statistic over expanding windows anchored at the first
observation; BSADF at an endpoint takes the sup over all admissible window
starts; GSADF takes the sup of BSADF over all endpoints.  Critical values
come from Monte Carlo simulation under a driftless Gaussian random walk null,
never from packaged tables.  Episodes are date-stamped where the BSADF
sequence crosses a per-endpoint critical-value sequence from below.

Every (start, end) sub-regression shares the same regressor rows, so the full
window sweep is computed from prefix sums of the cross-moment matrices with
one batched small-matrix solve; statistics are identical to running each OLS
separately but hundreds of times faster.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from finmetrics.timeseries import PriceSeries, ReturnSeries

__all__ = [
    "WindowFrac",
    "BubbleEpisode",
    "BubbleReport",
    "BubbleConfig",
    "CriticalValues",
    "adf_stat",
    "bsadf_at",
    "sadf",
    "gsadf",
    "mc_critical_values",
    "date_stamp",
    "run_bubble_test",
    "simulate_random_walk",
    "simulate_collapsing_bubble",
]


@dataclass(frozen=True)
class WindowFrac:
    """Window expressed as sample fractions; r_w = r2 - r1."""

    r1: float
    r2: float

    def __post_init__(self):
        if not (0.0 <= self.r1 < 1.0 and 0.0 < self.r2 <= 1.0 and self.r2 > self.r1):
            raise ValueError("need 0 <= r1 < r2 <= 1")

    @property
    def r_w(self) -> float:
        return self.r2 - self.r1


@dataclass(frozen=True)
class BubbleEpisode:
    """Half-open index range [start_index, end_index) of sustained exceedance."""

    start_index: int
    end_index: int
    peak_bsadf: float

    def to_dict(self) -> dict:
        return {
            "start_index": self.start_index,
            "end_index": self.end_index,
            "peak_bsadf": self.peak_bsadf,
        }


@dataclass
class CriticalValues:
    """Monte Carlo quantiles of SADF/GSADF plus a per-endpoint BSADF curve."""

    quantiles: tuple
    sadf: dict
    gsadf: dict
    bsadf_curve: dict
    T: int
    r0: float
    lags: int
    trend: bool
    reps: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "quantiles": list(self.quantiles),
            "sadf": {str(q): v for q, v in self.sadf.items()},
            "gsadf": {str(q): v for q, v in self.gsadf.items()},
            "bsadf_curve": {str(q): list(map(float, v)) for q, v in self.bsadf_curve.items()},
            "T": self.T,
            "r0": self.r0,
            "lags": self.lags,
            "trend": self.trend,
            "reps": self.reps,
            "seed": self.seed,
        }


@dataclass
class BubbleConfig:
    """Settings for a full bubble-detection run; the seed is mandatory."""

    seed: int
    r0: float = 0.1
    lags: int = 1
    trend: bool = False
    mc_reps: int = 1000
    quantiles: tuple = (0.90, 0.95, 0.99)
    stamp_quantile: float = 0.95
    min_duration: int = 1


@dataclass
class BubbleReport:
    """Test statistics, critical values and date-stamped episodes."""

    asset_id: str
    sadf_stat: float
    gsadf_stat: float
    bsadf_sequence: np.ndarray
    critical_values: CriticalValues
    episodes: list
    r0: float
    lags: int
    mc_reps: int
    seed: int
    obs_index: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))
    dates: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "asset_id": self.asset_id,
            "sadf_stat": self.sadf_stat,
            "gsadf_stat": self.gsadf_stat,
            "r0": self.r0,
            "lags": self.lags,
            "mc_reps": self.mc_reps,
            "seed": self.seed,
            "episodes": [e.to_dict() for e in self.episodes],
            "bsadf_sequence": list(map(float, self.bsadf_sequence)),
            "obs_index": list(map(int, self.obs_index)),
            "dates": None if self.dates is None else [str(d) for d in self.dates],
            "critical_values": self.critical_values.to_dict(),
        }


def _n_regressors(lags: int, trend: bool) -> int:
    return 2 + lags + (1 if trend else 0)


def _min_window(lags: int, trend: bool) -> int:
    # rows = window - 1 - lags must exceed the regressor count with df >= 2
    return _n_regressors(lags, trend) + lags + 3


def _design(y: np.ndarray, lags: int, trend: bool) -> tuple[np.ndarray, np.ndarray]:
    """Response and regressors shared by every window; row j is time lags+1+j."""
    T = y.size
    dy = np.diff(y)
    t0 = lags + 1
    resp = dy[lags:]
    cols = [np.ones(T - t0), y[t0 - 1 : T - 1]]
    for i in range(1, lags + 1):
        cols.append(dy[lags - i : T - 1 - i])
    if trend:
        cols.append(np.arange(t0, T, dtype=float) - T / 2.0)
    return resp, np.column_stack(cols)


def adf_stat(y: Union[np.ndarray, Sequence[float]], lags: int = 1, trend: bool = False) -> float:
    """Full-sample ADF t-ratio on the lagged level (right-tailed usage).

    Shares the window sweep's prefix-sum arithmetic bit for bit, so the sup
    statistics dominate this value exactly, not just up to rounding.
    """
    y = np.asarray(y, dtype=float)
    T = y.size
    if T < _min_window(lags, trend):
        raise ValueError(f"need at least {_min_window(lags, trend)} observations")
    w0 = T  # single full-sample window
    _, _, t_flat = _window_sweep(y, lags, trend, w0)
    stat = float(t_flat[0])
    if not np.isfinite(stat):
        raise ValueError("singular regressor matrix")
    return stat


@lru_cache(maxsize=32)
def _sweep_plan(T: int, lags: int, trend: bool, w0: int):
    """Flat (endpoint, start) enumeration reused across series of equal shape."""
    e_grid = np.arange(w0, T + 1)
    counts = e_grid - w0 + 1
    seg_starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    e_flat = np.repeat(e_grid, counts)
    s_flat = np.arange(counts.sum()) - np.repeat(seg_starts, counts)
    lo = s_flat
    hi = e_flat - lags - 1
    return e_grid, seg_starts, lo, hi


def _window_sweep(y: np.ndarray, lags: int, trend: bool, w0: int):
    """ADF t-stats for every feasible window; returns (e_grid, seg_starts, t_flat)."""
    T = y.size
    y = y - y.mean()
    resp, X = _design(y, lags, trend)
    k = X.shape[1]
    m = resp.size

    # prefix cross-moments: window moments are differences of prefixes
    zz = np.einsum("ji,jl->jil", X, X)
    pzz = np.concatenate([np.zeros((1, k, k)), np.cumsum(zz, axis=0)])
    pzy = np.concatenate([np.zeros((1, k)), np.cumsum(X * resp[:, None], axis=0)])
    pyy = np.concatenate([[0.0], np.cumsum(resp * resp)])

    e_grid, seg_starts, lo, hi = _sweep_plan(T, lags, trend, w0)
    G = pzz[hi] - pzz[lo]
    g = pzy[hi] - pzy[lo]
    yy = pyy[hi] - pyy[lo]
    nw = (hi - lo).astype(float)

    rhs = np.concatenate([g[:, :, None], np.zeros((g.shape[0], k, 1))], axis=2)
    rhs[:, 1, 1] = 1.0  # second column solves for (X'X)^{-1} e_1
    try:
        sol = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular regressor matrix in window sweep") from exc
    b = sol[:, :, 0]
    inv11 = sol[:, 1, 1]
    rss = np.maximum(yy - np.einsum("ij,ij->i", b, g), 0.0)
    s2 = rss / (nw - k)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_flat = b[:, 1] / np.sqrt(s2 * inv11)
    return e_grid, seg_starts, t_flat


def _check_r0(T: int, r0: float, lags: int, trend: bool) -> int:
    if not 0.0 < r0 < 1.0:
        raise ValueError("r0 must lie in (0, 1)")
    w0 = int(np.floor(r0 * T))
    if w0 < _min_window(lags, trend):
        raise ValueError(
            f"initial window {w0} too short; need at least {_min_window(lags, trend)} observations"
        )
    return w0


def bsadf_at(
    y: Union[np.ndarray, Sequence[float]], r2: float, r0: float, lags: int = 1, trend: bool = False
) -> float:
    """Backward sup ADF at endpoint fraction r2: sup over admissible starts."""
    y = np.asarray(y, dtype=float)
    T = y.size
    if r2 < r0:
        raise ValueError("r2 must be >= r0")
    w0 = _check_r0(T, r0, lags, trend)
    e = int(np.floor(r2 * T))
    stats = [adf_stat(y[s:e], lags, trend) for s in range(0, e - w0 + 1)]
    return float(max(stats))


def sadf(y: Union[np.ndarray, Sequence[float]], r0: float, lags: int = 1, trend: bool = False) -> float:
    """Sup of ADF statistics over forward-expanding windows anchored at 0."""
    y = np.asarray(y, dtype=float)
    w0 = _check_r0(y.size, r0, lags, trend)
    e_grid, seg_starts, t_flat = _window_sweep(y, lags, trend, w0)
    return float(np.max(t_flat[seg_starts]))


def gsadf(
    y: Union[np.ndarray, Sequence[float]], r0: float, lags: int = 1, trend: bool = False
) -> tuple[float, np.ndarray]:
    """GSADF statistic and the BSADF sequence over the endpoint grid."""
    y = np.asarray(y, dtype=float)
    w0 = _check_r0(y.size, r0, lags, trend)
    e_grid, seg_starts, t_flat = _window_sweep(y, lags, trend, w0)
    bsadf_seq = np.maximum.reduceat(t_flat, seg_starts)
    return float(bsadf_seq.max()), bsadf_seq


def _full_stats(y: np.ndarray, lags: int, trend: bool, w0: int):
    """(sadf, gsadf, bsadf sequence) from a single sweep."""
    e_grid, seg_starts, t_flat = _window_sweep(y, lags, trend, w0)
    bsadf_seq = np.maximum.reduceat(t_flat, seg_starts)
    return float(np.max(t_flat[seg_starts])), float(bsadf_seq.max()), bsadf_seq


def mc_critical_values(
    T: int,
    r0: float,
    lags: int = 1,
    reps: int = 10_000,
    quantiles: Sequence[float] = (0.90, 0.95, 0.99),
    seed: int = 0,
    trend: bool = False,
) -> CriticalValues:
    """Empirical null quantiles under a driftless Gaussian random walk.

    Replication i draws from ``default_rng(seed + i)``, so tables are
    deterministic in the seed and independent of execution order.
    """
    if reps < 200:
        raise ValueError("need at least 200 Monte Carlo replications")
    w0 = _check_r0(T, r0, lags, trend)
    qs = tuple(quantiles)
    n_seq = T - w0 + 1
    sadf_draws = np.empty(reps)
    gsadf_draws = np.empty(reps)
    bsadf_draws = np.empty((reps, n_seq))
    for i in range(reps):
        rng = np.random.default_rng(seed + i)
        y = np.cumsum(rng.standard_normal(T))
        s, gs, seq = _full_stats(y, lags, trend, w0)
        sadf_draws[i] = s
        gsadf_draws[i] = gs
        bsadf_draws[i] = seq
    return CriticalValues(
        quantiles=qs,
        sadf={q: float(np.quantile(sadf_draws, q)) for q in qs},
        gsadf={q: float(np.quantile(gsadf_draws, q)) for q in qs},
        bsadf_curve={q: np.quantile(bsadf_draws, q, axis=0) for q in qs},
        T=T,
        r0=r0,
        lags=lags,
        trend=trend,
        reps=reps,
        seed=seed,
    )


def date_stamp(
    bsadf_sequence: np.ndarray,
    cv_sequence: np.ndarray,
    min_duration: int = 1,
    index_offset: int = 0,
) -> list[BubbleEpisode]:
    """Episodes where BSADF crosses the critical sequence from below.

    An episode opens at the first index with BSADF > cv (coming from <= cv)
    and closes at the next index with BSADF < cv; an open episode at the end
    of the sample closes at the sequence end.  Episodes shorter than
    ``min_duration`` are dropped.  ``index_offset`` shifts reported indices
    (used to map sequence positions onto observation indices).
    """
    b = np.asarray(bsadf_sequence, dtype=float)
    c = np.asarray(cv_sequence, dtype=float)
    if b.shape != c.shape:
        raise ValueError("sequences must have equal length")
    episodes: list[BubbleEpisode] = []
    start = -1
    for i in range(b.size):
        if start < 0:
            if b[i] > c[i]:
                start = i
        elif b[i] < c[i]:
            episodes.append(_episode(b, start, i, index_offset))
            start = -1
    if start >= 0:
        episodes.append(_episode(b, start, b.size, index_offset))
    return [e for e in episodes if e.end_index - e.start_index >= min_duration]


def _episode(b: np.ndarray, start: int, end: int, offset: int) -> BubbleEpisode:
    return BubbleEpisode(
        start_index=start + offset,
        end_index=end + offset,
        peak_bsadf=float(b[start:end].max()),
    )


def run_bubble_test(
    series: Union[PriceSeries, ReturnSeries], config: BubbleConfig
) -> BubbleReport:
    """Full pipeline: statistics, Monte Carlo critical values, date-stamping.

    Price series are tested on log levels (the intended usage); return series
    are accepted with a warning.  Explosive evidence means the statistic
    exceeds its critical value.
    """
    if isinstance(series, PriceSeries):
        y = np.log(series.prices)
        dates = series.dates
        asset = series.asset_id
    elif isinstance(series, ReturnSeries):
        warnings.warn(
            "bubble tests are designed for (log) price levels; running on returns",
            stacklevel=2,
        )
        y = series.values
        dates = series.dates
        asset = series.asset_id
    else:
        y = np.asarray(series, dtype=float)
        dates = None
        asset = "series"
    T = y.size
    if T < 100:
        raise ValueError("need at least 100 observations")
    w0 = _check_r0(T, config.r0, config.lags, config.trend)
    sadf_stat_, gsadf_stat_, bsadf_seq = _full_stats(y, config.lags, config.trend, w0)
    cv = mc_critical_values(
        T,
        config.r0,
        config.lags,
        reps=config.mc_reps,
        quantiles=config.quantiles,
        seed=config.seed,
        trend=config.trend,
    )
    if config.stamp_quantile not in cv.bsadf_curve:
        raise ValueError("stamp_quantile must be one of the requested quantiles")
    episodes = date_stamp(
        bsadf_seq,
        cv.bsadf_curve[config.stamp_quantile],
        min_duration=config.min_duration,
        index_offset=w0 - 1,
    )
    obs_index = np.arange(w0 - 1, T)  # observation dated at each window endpoint
    return BubbleReport(
        asset_id=asset,
        sadf_stat=sadf_stat_,
        gsadf_stat=gsadf_stat_,
        bsadf_sequence=bsadf_seq,
        critical_values=cv,
        episodes=episodes,
        r0=config.r0,
        lags=config.lags,
        mc_reps=config.mc_reps,
        seed=config.seed,
        obs_index=obs_index,
        dates=None if dates is None else dates[obs_index],
    )


def simulate_random_walk(T: int, seed: int, scale: float = 1.0, start: float = 0.0) -> np.ndarray:
    """Driftless Gaussian random walk, the null of the Monte Carlo tables."""
    rng = np.random.default_rng(seed)
    return start + np.cumsum(rng.standard_normal(T)) * scale


def simulate_collapsing_bubble(
    T: int,
    bubble_start: int,
    duration: int,
    delta: float = 1.02,
    seed: int = 0,
    y0: float = 100.0,
) -> np.ndarray:
    """Random walk with one explosive segment that collapses back.

    During the bubble ``y_t = delta * y_{t-1} + e_t``; afterwards the level
    resets to its pre-bubble value and the random walk resumes.
    """
    if not 0 < bubble_start < bubble_start + duration <= T:
        raise ValueError("bubble segment must lie inside the sample")
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(T)
    y = np.empty(T)
    y[0] = y0 + e[0]
    for t in range(1, T):
        if bubble_start <= t < bubble_start + duration:
            y[t] = delta * y[t - 1] + e[t]
        elif t == bubble_start + duration:
            y[t] = y[bubble_start - 1] + e[t]  # collapse to pre-bubble level
        else:
            y[t] = y[t - 1] + e[t]
    return y
