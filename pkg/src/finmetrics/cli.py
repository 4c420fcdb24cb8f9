"""Batch pipeline: ingest price CSVs, fit, test, and write machine-readable reports.

Subcommands ``describe``, ``garch``, ``bubbles``, ``copulas``, ``portfolio``
and ``all`` each read one declarative JSON config (plus flag overrides) and
write CSV tables and JSON record documents under the output directory.  All
randomness flows from the mandatory master seed, so identical inputs produce
byte-identical output trees.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from finmetrics import bubbles as bb
from finmetrics import copulas as cop
from finmetrics import portfolio as pf
from finmetrics.garch import GarchVariant, VARIANT_TAGS, select_model
from finmetrics.timeseries import align, describe, load_price_csv, log_returns, write_returns_csv

__all__ = ["RunConfig", "main", "cmd_describe", "cmd_garch", "cmd_bubbles", "cmd_copulas", "cmd_portfolio"]

_STAT_ROWS = (
    ("Mean", "mean"),
    ("Std. Dev.", "std_dev"),
    ("Skewness", "skewness"),
    ("Kurtosis", "kurtosis"),
    ("Jarque Bera", "jarque_bera"),
)

_DEFAULT_FAMILIES = (
    "gaussian",
    "student_t",
    "plackett",
    "frank",
    "gumbel",
    "rotated_gumbel",
    "sjc",
    "tv_gaussian",
    "tv_student_t",
    "tv_gumbel",
    "tv_rotated_gumbel",
    "tv_sjc",
)


@dataclass
class RunConfig:
    """Declarative run description; the seed is mandatory (no wall-clock default)."""

    assets: dict
    seed: int
    out_dir: str = "out"
    pairs: list = field(default_factory=list)
    garch_variants: list = field(default_factory=lambda: list(VARIANT_TAGS))
    copula_families: list = field(default_factory=lambda: list(_DEFAULT_FAMILIES))
    r0: float = 0.1
    lags: int = 1
    trend: bool = False
    mc_reps: int = 1000
    quantiles: tuple = (0.90, 0.95, 0.99)
    stamp_quantile: float = 0.95
    min_duration: int = 1
    bubble_input: str = "levels"  # "levels" (log prices) or "returns"
    level: float = 0.99
    split: float = 0.75
    in_sample: bool = False
    n_draws: int = 10_000

    def __post_init__(self):
        if self.seed is None:
            raise ValueError("config must set an explicit seed")
        if not 0.0 < self.r0 <= 0.5:
            raise ValueError("r0 must lie in (0, 0.5]")
        if self.mc_reps < 200:
            raise ValueError("mc_reps must be at least 200")
        if self.bubble_input not in ("levels", "returns"):
            raise ValueError("bubble_input must be 'levels' or 'returns'")
        if not self.assets:
            raise ValueError("config must name at least one asset")
        self.pairs = [tuple(p) for p in self.pairs]
        if not self.pairs and len(self.assets) >= 2:
            ids = list(self.assets)
            self.pairs = [(a, b) for a in ids[:2] for b in ids[2:]] or [tuple(ids[:2])]

    @classmethod
    def from_file(cls, path: str, overrides: dict | None = None) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "quantiles" in raw:
            raw["quantiles"] = tuple(raw["quantiles"])
        return cls(**raw)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _write_csv(path: str, header: list, rows: list) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(c) for c in row) + "\n")


def _write_json(path: str, payload: dict) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


class Pipeline:
    """Shared state across subcommands so ``all`` fits each asset only once."""

    def __init__(self, config: RunConfig):
        self.config = config
        self._returns = None
        self._garch = None

    @property
    def returns(self) -> dict:
        if self._returns is None:
            series = [load_price_csv(path, asset) for asset, path in self.config.assets.items()]
            if len(series) >= 2:
                series = align(series)
            self._returns = {s.asset_id: log_returns(s) for s in series}
            self._prices = {s.asset_id: s for s in series}
        return self._returns

    @property
    def prices(self) -> dict:
        self.returns
        return self._prices

    @property
    def garch_selections(self) -> dict:
        if self._garch is None:
            variants = [GarchVariant(t) for t in self.config.garch_variants]
            self._garch = {}
            failures = {}
            for asset, r in self.returns.items():
                try:
                    self._garch[asset] = select_model(r, variants, seed=self.config.seed)
                except (RuntimeError, ValueError) as exc:
                    failures[asset] = str(exc)
            if failures:
                raise RuntimeError(f"volatility fits failed: {failures}")
        return self._garch


def cmd_describe(pipe: Pipeline) -> list[str]:
    cfg = pipe.config
    stats = {a: describe(r) for a, r in pipe.returns.items()}
    assets = list(pipe.returns)
    rows = [[label] + [getattr(stats[a], attr) for a in assets] for label, attr in _STAT_ROWS]
    out = os.path.join(cfg.out_dir, "describe.csv")
    _write_csv(out, ["stat"] + assets, rows)
    written = [out]
    for a, r in pipe.returns.items():
        path = os.path.join(cfg.out_dir, f"returns_{a.lower()}.csv")
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            write_returns_csv(r, fh)
        written.append(path)
    return written


def cmd_garch(pipe: Pipeline) -> list[str]:
    cfg = pipe.config
    written = []
    grid_rows = []
    coef_rows = {label: [] for label in
                 ("variant", "C", "r_lag1", "omega", "alpha", "beta", "gamma", "persistence", "leverage")}
    assets = list(pipe.returns)
    for asset in assets:
        sel = pipe.garch_selections[asset]
        for fit in sorted(sel.fits, key=lambda f: f.variant.tag):
            grid_rows.append([asset, fit.variant.tag, fit.aic, fit.bic, fit.hq])
        best = sel.best
        p = best.params
        coef_rows["variant"].append(best.variant.tag)
        coef_rows["C"].append(p.mean_const)
        coef_rows["r_lag1"].append(p.ar1)
        coef_rows["omega"].append(p.omega)
        coef_rows["alpha"].append(float(p.alpha.sum()))
        coef_rows["beta"].append(float(p.beta.sum()))
        coef_rows["gamma"].append(p.gamma)
        coef_rows["persistence"].append(best.persistence)
        coef_rows["leverage"].append(p.gamma)
        path = os.path.join(cfg.out_dir, "garch", f"{asset.lower()}_best.json")
        _write_json(path, sel.to_dict() | {"asset": asset})
        written.append(path)
    grid = os.path.join(cfg.out_dir, "garch", "ic_grid.csv")
    _write_csv(grid, ["asset", "variant", "aic", "bic", "hq"], grid_rows)
    coefs = os.path.join(cfg.out_dir, "garch", "coefficients.csv")
    _write_csv(coefs, ["row"] + assets, [[k] + v for k, v in coef_rows.items()])
    return written + [grid, coefs]


def cmd_bubbles(pipe: Pipeline) -> list[str]:
    cfg = pipe.config
    bcfg = bb.BubbleConfig(
        seed=cfg.seed,
        r0=cfg.r0,
        lags=cfg.lags,
        trend=cfg.trend,
        mc_reps=cfg.mc_reps,
        quantiles=tuple(cfg.quantiles),
        stamp_quantile=cfg.stamp_quantile,
        min_duration=cfg.min_duration,
    )
    written = []
    summary = []
    cv_cache: dict[tuple, bb.CriticalValues] = {}
    for asset, series in pipe.prices.items():
        if cfg.bubble_input == "returns":
            warnings.warn(
                "bubble tests are designed for (log) price levels; running on returns",
                stacklevel=2,
            )
            r = pipe.returns[asset]
            y, dates = r.values, r.dates
        else:
            y, dates = np.log(series.prices), series.dates
        T = y.size
        key = (T, bcfg.r0, bcfg.lags, bcfg.trend, bcfg.mc_reps, bcfg.quantiles, bcfg.seed)
        if key not in cv_cache:
            cv_cache[key] = bb.mc_critical_values(
                T, bcfg.r0, bcfg.lags, reps=bcfg.mc_reps,
                quantiles=bcfg.quantiles, seed=bcfg.seed, trend=bcfg.trend,
            )
        report = _bubble_report_with_cv(asset, y, dates, bcfg, cv_cache[key])
        summary.append(
            [asset, report.sadf_stat, report.gsadf_stat]
            + [report.critical_values.sadf[q] for q in bcfg.quantiles]
            + [report.critical_values.gsadf[q] for q in bcfg.quantiles]
            + [len(report.episodes)]
        )
        fig = os.path.join(cfg.out_dir, "bubbles", f"{asset.lower()}_bsadf.csv")
        cv95 = report.critical_values.bsadf_curve[bcfg.stamp_quantile]
        rows = [
            [int(i), str(d), b, c]
            for i, d, b, c in zip(report.obs_index, report.dates, report.bsadf_sequence, cv95)
        ]
        _write_csv(fig, ["index", "date", "bsadf", f"cv{int(bcfg.stamp_quantile * 100)}"], rows)
        doc = os.path.join(cfg.out_dir, "bubbles", f"{asset.lower()}_report.json")
        _write_json(doc, report.to_dict())
        written += [fig, doc]
    qlabels = [f"sadf_cv{int(q * 100)}" for q in bcfg.quantiles] + [
        f"gsadf_cv{int(q * 100)}" for q in bcfg.quantiles
    ]
    out = os.path.join(cfg.out_dir, "bubbles", "summary.csv")
    _write_csv(out, ["asset", "sadf", "gsadf"] + qlabels + ["episodes"], summary)
    return written + [out]


def _bubble_report_with_cv(
    asset: str, y: np.ndarray, dates: np.ndarray, bcfg: bb.BubbleConfig, cv: bb.CriticalValues
) -> bb.BubbleReport:
    """run_bubble_test with a shared critical-value table (equal-length series)."""
    w0 = int(np.floor(bcfg.r0 * y.size))
    sadf_stat, gsadf_stat, seq = bb._full_stats(y, bcfg.lags, bcfg.trend, w0)
    episodes = bb.date_stamp(
        seq, cv.bsadf_curve[bcfg.stamp_quantile],
        min_duration=bcfg.min_duration, index_offset=w0 - 1,
    )
    obs_index = np.arange(w0 - 1, y.size)
    return bb.BubbleReport(
        asset_id=asset,
        sadf_stat=sadf_stat,
        gsadf_stat=gsadf_stat,
        bsadf_sequence=seq,
        critical_values=cv,
        episodes=episodes,
        r0=bcfg.r0,
        lags=bcfg.lags,
        mc_reps=bcfg.mc_reps,
        seed=bcfg.seed,
        obs_index=obs_index,
        dates=dates[obs_index],
    )


def _parse_family(label: str) -> cop.CopulaFamily:
    tv = label.startswith("tv_")
    return cop.CopulaFamily(label[3:] if tv else label, time_varying=tv)


def cmd_copulas(pipe: Pipeline) -> list[str]:
    cfg = pipe.config
    families = [_parse_family(lbl) for lbl in cfg.copula_families]
    written = []
    for a, b in cfg.pairs:
        sel_a, sel_b = pipe.garch_selections[a], pipe.garch_selections[b]
        u = cop.pit_transform(sel_a.best.std_residuals)
        v = cop.pit_transform(sel_b.best.std_residuals)
        pair = cop.UniformPair(u, v, dates=pipe.returns[a].dates)
        ranked = cop.select_copula(pair, families, seed=cfg.seed)
        label = f"{a.lower()}_{b.lower()}"
        rows = [
            [f.family.label, f.loglik, f.aic, f.tail_dep[0], f.tail_dep[1], int(f.converged)]
            for f in ranked
        ]
        rank_path = os.path.join(cfg.out_dir, "copulas", f"{label}_ranking.csv")
        _write_csv(rank_path, ["family", "loglik", "aic", "tail_lower", "tail_upper", "converged"], rows)
        best = ranked[0]
        best_path = os.path.join(cfg.out_dir, "copulas", f"{label}_best.json")
        _write_json(best_path, best.to_dict() | {"pair": [a, b]})
        written += [rank_path, best_path]
        if best.param_path is not None:
            path_csv = os.path.join(cfg.out_dir, "copulas", f"{label}_path.csv")
            dates = pipe.returns[a].dates
            arr = np.asarray(best.param_path)
            if arr.ndim == 2:
                rows = [[str(d), x, y] for d, (x, y) in zip(dates, arr)]
                _write_csv(path_csv, ["date", "param_upper", "param_lower"], rows)
            else:
                rows = [[str(d), x] for d, x in zip(dates, arr)]
                _write_csv(path_csv, ["date", "param_t"], rows)
            written.append(path_csv)
    return written


def cmd_portfolio(pipe: Pipeline) -> list[str]:
    cfg = pipe.config
    pconf = pf.PortfolioConfig(
        returns=pipe.returns,
        seed=cfg.seed,
        pairs=cfg.pairs,
        garch_variants=tuple(GarchVariant(t) for t in cfg.garch_variants),
        copula_families=tuple(_parse_family(lbl) for lbl in cfg.copula_families),
        level=cfg.level,
        split=cfg.split,
        in_sample=cfg.in_sample,
        n_draws=cfg.n_draws,
    )
    reports = pf.evaluate_portfolios(pconf)
    written = []
    rows = []
    for rep in reports:
        rows.append([rep.label, rep.risk_reduction, rep.cc_test.p_value])
        doc = os.path.join(cfg.out_dir, "portfolio", f"{rep.label.lower().replace('-', '_')}.json")
        _write_json(doc, rep.to_dict())
        written.append(doc)
    out = os.path.join(cfg.out_dir, "portfolio", "summary.csv")
    _write_csv(out, ["comparison", "risk_reduction", "cc_pvalue"], rows)
    return written + [out]


_COMMANDS = {
    "describe": cmd_describe,
    "garch": cmd_garch,
    "bubbles": cmd_bubbles,
    "copulas": cmd_copulas,
    "portfolio": cmd_portfolio,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="finmetrics",
        description="volatility, explosiveness, dependence and portfolio-risk pipeline",
    )
    parser.add_argument("command", choices=list(_COMMANDS) + ["all"])
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--seed", type=int, default=None, help="override the master seed")
    parser.add_argument("--out", default=None, help="override the output directory")
    parser.add_argument("--r0", type=float, default=None, help="initial window fraction")
    parser.add_argument("--mc-reps", type=int, default=None, help="Monte Carlo replications")
    parser.add_argument("--trend", action="store_true", default=None,
                        help="include a linear trend in the test regression")
    parser.add_argument("--level", type=float, default=None, help="VaR confidence level")
    args = parser.parse_args(argv)

    overrides = {
        "seed": args.seed,
        "out_dir": args.out,
        "r0": args.r0,
        "mc_reps": args.mc_reps,
        "trend": args.trend,
        "level": args.level,
    }
    try:
        config = RunConfig.from_file(args.config, overrides)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    pipe = Pipeline(config)
    commands = list(_COMMANDS) if args.command == "all" else [args.command]
    failures = {}
    for name in commands:
        try:
            _COMMANDS[name](pipe)
        except Exception as exc:  # noqa: BLE001 - report per-unit failures, keep going
            failures[name] = str(exc)
    if failures:
        for name, msg in failures.items():
            print(f"{name}: FAILED: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
