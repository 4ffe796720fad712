from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from longrun import cli, processes
from longrun.ensemble import path_seed
from longrun.diagnostics import ReturnPanel, long_term_excess, return_panel_to_csv
from longrun.options import black_scholes_chain, option_chain_to_csv, svix_variance
from longrun.sdf import DisasterParams, LrrParams, disaster_pi, lrr_pi, lrr_solve_constants
from longrun.series import read_forecast_series
from longrun.term import DiscountCurve


def run(*argv) -> int:
    return cli.main([str(a) for a in argv])


def files(root):
    return {p.name: p.read_bytes() for p in sorted(root.iterdir())}


class TestGrid:
    def test_range_inclusive(self):
        grid = cli.parse_s_grid("-3:-0.1:0.1")
        assert len(grid) == 30 and grid[0] == -3.0 and grid[-1] == -0.1

    def test_list(self):
        assert cli.parse_s_grid("-1,0.5,2") == [-1.0, 0.5, 2.0]

    @pytest.mark.parametrize("text", ["-1:1:0.5", "0.5,1", "1e-7", "a:b:c", "1:0:0.1", "0:1:0"])
    def test_rejected(self, text):
        with pytest.raises(cli.ValidationError):
            cli.parse_s_grid(text)


class TestSimulate:
    def test_deterministic_and_thread_independent(self, tmp_path):
        argv = ["simulate", "--model", "garch11", "--n", 1000, "--paths", 4, "--seed", 7]
        assert run(*argv, "--out", tmp_path / "a") == 0
        assert run(*argv, "--out", tmp_path / "b") == 0
        assert run(*argv, "--out", tmp_path / "c", "--threads", 4) == 0
        a = files(tmp_path / "a")
        assert len(a) == 4
        assert a == files(tmp_path / "b") == files(tmp_path / "c")

    def test_single_csv_matches_library(self, tmp_path):
        out = tmp_path / "p.csv"
        assert run("simulate", "--model", "lognormal", "--n", 50, "--seed", 3, "--out", out) == 0
        fs, _ = read_forecast_series(out)
        ref = processes.sim_unit_mean_lognormal(0.5, 50, path_seed(3, 0))
        assert np.array_equal(fs.realized, ref.fs.realized)

    def test_params_file(self, tmp_path):
        pf = tmp_path / "g.params"
        pf.write_text("omega = 0.1\nalpha = 0.1\nbeta = 0.8\n")
        rep = tmp_path / "r.json"
        assert run("simulate", "--model", "garch11", "--params", pf, "--n", 10, "--seed", 1, "--report", rep) == 0
        assert json.loads(rep.read_text())["n"] == 10

    def test_unknown_key(self, tmp_path):
        pf = tmp_path / "g.params"
        pf.write_text("omgea = 0.1\n")
        assert run("simulate", "--model", "garch11", "--params", pf, "--n", 10, "--seed", 1) == 1

    def test_missing_file(self, tmp_path):
        assert run("simulate", "--model", "garch11", "--params", tmp_path / "none", "--n", 10, "--seed", 1) == 1

    def test_missing_seed(self):
        assert run("simulate", "--model", "garch11", "--n", 10) == 1

    def test_unknown_model(self):
        assert run("simulate", "--model", "heston", "--n", 10, "--seed", 1) == 1

    def test_nelson_truncation_exit(self, monkeypatch, tmp_path):
        monkeypatch.setattr(processes, "NELSON_CAP", 1e-3)
        assert run("simulate", "--model", "nelson", "--n", 50, "--paths", 3, "--seed", 1, "--out", tmp_path / "n") == 2

    def test_lrr_with_grid(self, tmp_path):
        argv = ["simulate", "--model", "lrr", "--n", 200, "--seed", 2, "--s-grid", "-1,0.5", "--out"]
        assert run(*argv, tmp_path / "l.csv") == 0
        header = (tmp_path / "l.csv").read_text().splitlines()[0]
        assert {"aux_cm_-1.0", "aux_cm_0.5"} <= set(header.split(","))


class TestSdf:
    def test_disaster_equals_library(self, tmp_path):
        pf = tmp_path / "fig2.params"
        pf.write_text("preset = figure2\n")
        rep = tmp_path / "pi.json"
        assert run("sdf", "--model", "disaster", "--params", pf, "--s-grid", "-3:-0.1:0.1", "--report", rep) == 0
        d = json.loads(rep.read_text())
        p = DisasterParams.figure2()
        assert d["model"] == "disaster"
        assert d["values"] == [disaster_pi(p, s) for s in d["s_grid"]]

    def test_lrr_equals_library(self, tmp_path):
        rep = tmp_path / "pi.json"
        assert run("sdf", "--model", "lrr", "--s-grid", "-1,0.5", "--report", rep) == 0
        d = json.loads(rep.read_text())
        p = LrrParams.figure2()
        dd = lrr_solve_constants(p)
        assert d["values"] == [lrr_pi(p, dd, s) for s in (-1.0, 0.5)]

    def test_bad_grid_exit(self):
        assert run("sdf", "--model", "disaster", "--s-grid", "0.5:1.5:0.5") == 1

    def test_mu_and_rf_conflict(self, tmp_path):
        pf = tmp_path / "x.params"
        pf.write_text("mu = 0.002\nrf = 0.001\n")
        assert run("sdf", "--model", "disaster", "--params", pf, "--s-grid", "0.5") == 1


class TestSvix:
    def test_matches_library(self, tmp_path):
        chain = black_scholes_chain()
        path = tmp_path / "synthetic_bs.csv"
        option_chain_to_csv(chain, path)
        rep = tmp_path / "svix.json"
        assert run("svix", "--chain", path, "--report", rep) == 0
        assert json.loads(rep.read_text())["svix_variance"] == svix_variance(chain).value

    def test_too_few_strikes(self, tmp_path):
        path = tmp_path / "c.csv"
        option_chain_to_csv(black_scholes_chain(n_strikes=6), path)
        assert run("svix", "--chain", path) == 1


class TestLaws:
    def test_report(self, tmp_path):
        sim = tmp_path / "p.csv"
        assert run("simulate", "--model", "lognormal", "--n", 2000, "--seed", 4, "--out", sim) == 0
        rep, table = tmp_path / "laws.json", tmp_path / "laws.csv"
        assert run("laws", "--in", sim, "--decay", 0.9, "--report", rep, "--out", table) == 0
        d = json.loads(rep.read_text())
        assert d["length"] == 2000
        assert d["entropy"]["terminal"] == pytest.approx(0.125, abs=1e-12)
        assert "weighted" in d and "multiplicative" in d
        assert table.read_text().splitlines()[0].startswith("n,")


class TestDiagnose:
    def test_panel(self, tmp_path):
        rf = np.full(100, 1.001)
        panel = ReturnPanel(rf + 0.006, rf)
        path = tmp_path / "panel.csv"
        return_panel_to_csv(panel, path)
        pf = tmp_path / "d.params"
        pf.write_text("z = 0.0885\n")
        rep = tmp_path / "d.json"
        assert run("diagnose", "--in", path, "--params", pf, "--report", rep) == 0
        d = json.loads(rep.read_text())
        assert d["excess_gross"] == long_term_excess(panel).terminal
        assert d["entropy_bound"]["holds"] is True

    def test_unknown_diag_key(self, tmp_path):
        rf = np.full(10, 1.001)
        path = tmp_path / "panel.csv"
        return_panel_to_csv(ReturnPanel(rf, rf), path)
        pf = tmp_path / "d.params"
        pf.write_text("zz = 1\n")
        assert run("diagnose", "--in", path, "--params", pf) == 1

    def test_disaster_market(self, tmp_path):
        rep = tmp_path / "d.json"
        argv = ["diagnose", "--model", "disaster", "--n", 5000, "--seed", 5, "--report", rep]
        assert run(*argv) == 0
        first = rep.read_bytes()
        assert run(*argv, "--threads", 3) == 0
        assert rep.read_bytes() == first
        d = json.loads(first)
        assert set(d["returns"]) == {"equity", "growth_optimal"}


class TestTerm:
    def test_flat_curve_with_aj(self, tmp_path):
        curve = tmp_path / "curve.csv"
        DiscountCurve.flat(0.003, range(21), 8).to_csv(curve)
        m = tmp_path / "m.csv"
        m.write_text("t,m\n" + "".join(f"{i},{0.99 + 0.001 * (i % 3)!r}\n" for i in range(1, 21)))
        pf = tmp_path / "t.params"
        pf.write_text("k_max = 8\nz = 0.02\n")
        rep = tmp_path / "t.json"
        assert run("term", "--curve", curve, "--in", m, "--params", pf, "--report", rep) == 0
        d = json.loads(rep.read_text())
        assert d["dir_violations"] == [] and d["flags"] == []
        assert d["aj"]["z_perm"] == pytest.approx(0.02, abs=1e-10)

    def test_bcz_lognormal(self, tmp_path):
        rep = tmp_path / "b.json"
        assert run("term", "--model", "lognormal", "--paths", 1000, "--seed", 6, "--report", rep) == 0
        d = json.loads(rep.read_text())["bcz"]
        assert d["z_closed_form"] == pytest.approx(0.02)
        assert d["measures"]["n_paths"] == 1000

    def test_bcz_needs_paths(self):
        assert run("term", "--model", "lognormal", "--paths", 10, "--seed", 6) == 1

    def test_short_curve(self, tmp_path):
        curve = tmp_path / "curve.csv"
        DiscountCurve.flat(0.01, range(3), 2).to_csv(curve)
        assert run("term", "--curve", curve) == 1


def test_module_entry_point(tmp_path):
    rep = tmp_path / "pi.json"
    proc = subprocess.run(
        [sys.executable, "-m", "longrun", "sdf", "--model", "disaster", "--s-grid", "-1,0.5", "--report", str(rep)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(rep.read_text())["s_grid"] == [-1.0, 0.5]


def test_argparse_error_is_exit_one():
    assert run("simulate", "--n", "ten") == 1
