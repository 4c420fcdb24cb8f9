import json
import os
import subprocess
import sys

import numpy as np
import pytest

from finmetrics.cli import RunConfig, Pipeline, cmd_describe, cmd_garch
from finmetrics.garch import GarchParams, GarchVariant, simulate_garch


def run_cli(args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "finmetrics", *args],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


def write_prices(path, seed, n=320):
    r = simulate_garch(
        GarchVariant("GARCH"),
        GarchParams(omega=2e-5, alpha=np.array([0.08]), beta=np.array([0.85])),
        n,
        seed=seed,
    )
    prices = 100.0 * np.exp(np.cumsum(r.values))
    dates = np.datetime64("2019-01-01") + np.arange(n)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("date,price\n")
        for d, p in zip(dates, prices):
            fh.write(f"{d},{p:.10g}\n")


@pytest.fixture
def two_asset_config(tmp_path):
    write_prices(tmp_path / "a.csv", seed=1)
    write_prices(tmp_path / "b.csv", seed=2)
    cfg = {
        "assets": {"AAA": str(tmp_path / "a.csv"), "BBB": str(tmp_path / "b.csv")},
        "pairs": [["AAA", "BBB"]],
        "garch_variants": ["GARCH", "T_GARCH", "I_GARCH"],
        "copula_families": ["gaussian", "gumbel"],
        "seed": 9,
        "out_dir": str(tmp_path / "out"),
        "mc_reps": 200,
        "r0": 0.2,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path, cfg, tmp_path


class TestRunConfig:
    def test_seed_is_mandatory(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"assets": {"A": "a.csv"}}))
        with pytest.raises(TypeError):
            RunConfig.from_file(str(p))

    def test_r0_range_enforced(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"assets": {"A": "a.csv"}, "seed": 1, "r0": 0.7}))
        with pytest.raises(ValueError, match="r0"):
            RunConfig.from_file(str(p))

    def test_mc_reps_floor(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"assets": {"A": "a.csv"}, "seed": 1, "mc_reps": 100}))
        with pytest.raises(ValueError, match="mc_reps"):
            RunConfig.from_file(str(p))

    def test_unknown_keys_rejected(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"assets": {"A": "a.csv"}, "seed": 1, "bogus": True}))
        with pytest.raises(ValueError, match="bogus"):
            RunConfig.from_file(str(p))

    def test_overrides_win(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"assets": {"A": "a.csv"}, "seed": 1, "out_dir": "x"}))
        cfg = RunConfig.from_file(str(p), {"seed": 7, "out_dir": None})
        assert cfg.seed == 7 and cfg.out_dir == "x"


class TestDescribeCommand:
    def test_csv_layout(self, two_asset_config):
        path, raw, tmp = two_asset_config
        cfg = RunConfig.from_file(str(path))
        cmd_describe(Pipeline(cfg))
        lines = (tmp / "out" / "describe.csv").read_text().splitlines()
        assert lines[0] == "stat,AAA,BBB"
        assert [ln.split(",")[0] for ln in lines[1:]] == [
            "Mean", "Std. Dev.", "Skewness", "Kurtosis", "Jarque Bera",
        ]
        assert len(lines) == 6
        assert (tmp / "out" / "returns_aaa.csv").exists()

    def test_missing_file_nonzero_exit(self, tmp_path):
        cfg = {"assets": {"AAA": str(tmp_path / "missing.csv")}, "seed": 1}
        p = tmp_path / "c.json"
        p.write_text(json.dumps(cfg))
        res = run_cli(["describe", "--config", str(p)], cwd=tmp_path)
        assert res.returncode != 0
        assert "missing.csv" in res.stderr

    def test_byte_identical_reruns(self, two_asset_config):
        path, raw, tmp = two_asset_config
        res1 = run_cli(["describe", "--config", str(path), "--out", str(tmp / "o1")], cwd=tmp)
        res2 = run_cli(["describe", "--config", str(path), "--out", str(tmp / "o2")], cwd=tmp)
        assert res1.returncode == res2.returncode == 0
        b1 = (tmp / "o1" / "describe.csv").read_bytes()
        b2 = (tmp / "o2" / "describe.csv").read_bytes()
        assert b1 == b2


class TestGarchCommand:
    def test_grid_has_one_row_per_variant_per_asset(self, two_asset_config):
        path, raw, tmp = two_asset_config
        cfg = RunConfig.from_file(str(path))
        pipe = Pipeline(cfg)
        cmd_garch(pipe)
        lines = (tmp / "out" / "garch" / "ic_grid.csv").read_text().splitlines()
        assert len(lines) == 1 + 2 * 3  # header + assets x variants
        best = json.loads((tmp / "out" / "garch" / "aaa_best.json").read_text())
        grid_aaa = {ln.split(",")[1]: float(ln.split(",")[2]) for ln in lines[1:] if ln.startswith("AAA,")}
        assert best["ranking_aic"][0] == min(grid_aaa, key=grid_aaa.get)

    def test_coefficient_table_rows(self, two_asset_config):
        path, raw, tmp = two_asset_config
        cfg = RunConfig.from_file(str(path))
        cmd_garch(Pipeline(cfg))
        lines = (tmp / "out" / "garch" / "coefficients.csv").read_text().splitlines()
        assert [ln.split(",")[0] for ln in lines] == [
            "row", "variant", "C", "r_lag1", "omega", "alpha", "beta",
            "gamma", "persistence", "leverage",
        ]


def test_unknown_command_rejected(tmp_path):
    res = run_cli(["frobnicate", "--config", "x.json"], cwd=tmp_path)
    assert res.returncode == 2


def test_help_runs(tmp_path):
    res = run_cli(["--help"], cwd=tmp_path)
    assert res.returncode == 0
    for sub in ("describe", "garch", "bubbles", "copulas", "portfolio", "all"):
        assert sub in res.stdout
