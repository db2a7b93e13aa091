import json
from pathlib import Path

import numpy as np
import pytest

from rangecorr import cli, panel
from rangecorr.errors import CsvFormatError, EmptyIntersectionError, InputError
from rangecorr.special_fn import PhiTable

from synth import write_panel, write_rows

FIXTURES = Path(__file__).parent / "fixtures"
PANEL = [FIXTURES / f"{n}.csv" for n in ("alpha", "beta", "gamma", "delta")]


@pytest.fixture(autouse=True)
def cache_dir(tmp_path_factory, monkeypatch, phi_table):
    # a shared cache seeded with the session table keeps CLI runs fast
    d = tmp_path_factory.getbasetemp() / "phi_cache"
    path = d / "phi_table_1000.csv"
    if not path.exists():
        d.mkdir(exist_ok=True)
        phi_table.to_csv(path)
    monkeypatch.setenv(cli.CACHE_ENV, str(d))
    return d


def run(args, capsys):
    code = cli.main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


class TestIngest:
    def test_three_rows(self):
        bars = panel.ingest_csv(FIXTURES / "three_rows.csv")
        assert len(bars) == 3
        assert bars[2].high == 10.9

    def test_high_below_low_names_line(self):
        with pytest.raises(CsvFormatError) as exc:
            panel.ingest_csv(FIXTURES / "high_below_low.csv")
        assert exc.value.line == 3
        assert ":3:" in str(exc.value) or "line 3" in str(exc.value)

    def test_column_map(self):
        mapped = panel.ingest_csv(FIXTURES / "three_rows_shuffled.csv", "Day,Open,High,Low,Close")
        assert mapped == panel.ingest_csv(FIXTURES / "three_rows.csv")

    def test_missing_column(self):
        with pytest.raises(CsvFormatError):
            panel.ingest_csv(FIXTURES / "three_rows_shuffled.csv")

    @pytest.mark.parametrize("row,line", [
        (("2020-01-02", "x", 1, 1, 1), 2),
        (("2020-13-02", 1, 1, 1, 1), 2),
    ])
    def test_unparseable(self, tmp_path, row, line):
        p = tmp_path / "bad.csv"
        write_rows(p, panel.FIELDS, [row])
        with pytest.raises(CsvFormatError) as exc:
            panel.ingest_csv(p)
        assert exc.value.line == line

    def test_duplicate_date(self, tmp_path):
        p = tmp_path / "dup.csv"
        write_rows(p, panel.FIELDS, [("2020-01-02", 1, 1, 1, 1)] * 2)
        with pytest.raises(CsvFormatError):
            panel.ingest_csv(p)


class TestAlign:
    def test_no_drops(self):
        bars = panel.ingest_csv(PANEL[0])
        p = panel.align({"a": bars, "b": panel.ingest_csv(PANEL[1])})
        assert p.dropped == 0 and len(p) == len(bars)

    def test_one_missing_date(self):
        p = panel.load_panel(PANEL)
        assert p.dropped == 1
        assert p.drops_by_asset == {"alpha": 1, "beta": 1, "gamma": 1, "delta": 0}
        assert len(p) == 399
        assert all(len(s) == len(p) for s in p.standardized)
        assert list(p.dates) == sorted(set(p.dates))

    def test_standardized_unit_sd(self):
        p = panel.load_panel(PANEL)
        for s in p.standardized:
            assert np.std(s.final, ddof=1) == pytest.approx(1.0, rel=1e-12)

    def test_disjoint(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_rows(a, panel.FIELDS, [("2020-01-02", 1, 1.1, 0.9, 1)])
        write_rows(b, panel.FIELDS, [("2020-01-03", 1, 1.1, 0.9, 1)])
        with pytest.raises(EmptyIntersectionError):
            panel.load_panel([a, b])

    def test_single_asset(self):
        with pytest.raises(InputError):
            panel.load_panel(PANEL[:1])


class TestEstimate:
    def test_identical_assets(self, tmp_path, phi_table):
        copy = tmp_path / "twin.csv"
        copy.write_bytes(PANEL[0].read_bytes())
        bundle = panel.cmd_estimate(panel.load_panel([PANEL[0], copy]), phi_table)
        assert bundle.rho0[0, 1] == pytest.approx(1.0, abs=1e-12)
        # the range mean is a sample statistic: 1 only within sampling error
        e = bundle.pair(0, 1)
        assert abs(e.rz_raw_mean - 1.0) < 3 * e.sd_rz / np.sqrt(e.n_days)
        assert e.ci95_rz[1] == 1.0

    def test_bundle_invariants(self, phi_table):
        b = panel.cmd_estimate(panel.load_panel(PANEL), phi_table)
        for m in (b.rho0, b.rho_rz, b.variance_ratio_pct):
            np.testing.assert_array_equal(m, m.T)
        np.testing.assert_array_equal(np.diag(b.rho0), 1.0)
        np.testing.assert_array_equal(np.diag(b.rho_rz), 1.0)
        assert np.all(b.variance_ratio_pct > 0)
        e = b.pair(0, 2)
        assert b.variance_ratio_pct[0, 2] == pytest.approx(100 * e.sd_rz**2 / e.sd_rho0**2, rel=1e-12)

    def test_estimates_overlap_within_ci(self, phi_table):
        b = panel.cmd_estimate(panel.load_panel(PANEL), phi_table)
        for i, j in b.figure_pairs():
            e = b.pair(i, j)
            lo = min(e.ci95_rho0[0], e.ci95_rz[0])
            hi = max(e.ci95_rho0[1], e.ci95_rz[1])
            assert lo <= b.rho0[i, j] <= hi and lo <= b.rho_rz[i, j] <= hi

    @pytest.mark.slow
    def test_known_correlation_panel(self, tmp_path, phi_table):
        paths = write_panel(tmp_path, n_days=20_000, rho=0.3, n_steps=500, seed=77)
        b = panel.cmd_estimate(panel.load_panel(paths), phi_table)
        off = ~np.eye(4, dtype=bool)
        assert np.all((b.rho_rz[off] >= 0.28) & (b.rho_rz[off] <= 0.32)), b.rho_rz
        ratios = 100.0 / b.variance_ratio_pct[off]
        assert np.all(ratios >= 1.9), ratios


class TestReport:
    def test_plot_rows_order_and_ci(self, phi_table):
        b = panel.cmd_estimate(panel.load_panel(PANEL), phi_table)
        rows = panel.plot_rows(b)
        assert [r["pair"] for r in rows] == [
            "alpha:beta", "alpha:gamma", "beta:gamma", "alpha:delta", "beta:delta", "gamma:delta"]
        for r in rows:
            assert -1 <= r["rho0_ci_low"] <= r["rho0"] <= r["rho0_ci_high"] <= 1
            assert -1 <= r["rz_ci_low"] <= r["rho_rz"] <= r["rz_ci_high"] <= 1

    def test_report_command(self, capsys):
        code, out, _ = run(["report", "--input", *PANEL], capsys)
        assert code == 0
        body = [l for l in out.splitlines() if not l.startswith("#")]
        assert body[0] == "pair,rho0,rho0_ci_low,rho0_ci_high,rho_rz,rz_ci_low,rz_ci_high"
        assert len(body) == 7
        assert "dates dropped in alignment: 1" in out


class TestCommands:
    def test_estimate_csv_sections(self, capsys):
        code, out, _ = run(["estimate", "--input", *PANEL], capsys)
        assert code == 0
        sec = panel.read_sections(out)
        assert set(sec) == {"rho0", "rho_rz", "variance_ratio_pct", "pairs"}
        m = np.array([[float(v) for v in r[1:]] for r in sec["rho_rz"][1:]])
        np.testing.assert_array_equal(m, m.T)
        assert len(sec["pairs"]) == 1 + 10

    def test_estimate_json_and_daily_cov(self, tmp_path, capsys):
        cov = tmp_path / "cov.csv"
        code, out, _ = run(["estimate", "--input", *PANEL, "--format", "json", "--daily-cov", cov], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["assets"] == ["alpha", "beta", "gamma", "delta"]
        assert doc["n_days"] == 399
        lines = cov.read_text().splitlines()
        assert lines[0] == "date,asset_a,asset_b,cov"
        assert len(lines) == 1 + 399 * 10

    def test_byte_identical_reruns(self, tmp_path, capsys):
        outs = []
        for k in range(2):
            dest = tmp_path / f"run{k}.csv"
            assert run(["estimate", "--input", *PANEL, "--out", dest], capsys)[0] == 0
            outs.append(dest.read_bytes())
        assert outs[0] == outs[1]

    def test_simulate(self, capsys):
        code, out, _ = run(["simulate", "--process", "vg", "--paths", 200, "--steps", 20, "--rho", 0.1, 0.5], capsys)
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("# process=vg") and lines[1] == "# vg_kappa=0.5"
        assert len(lines) == 2 + 1 + 2

    def test_simulate_default_rows_and_drift(self, capsys):
        code, out, _ = run(["simulate", "--drift", 0.1, "--paths", 50, "--steps", 5], capsys)
        assert code == 0
        assert "process=bm_drift" in out and "# drift=0.1" in out
        assert len([l for l in out.splitlines() if not l.startswith("#")]) == 20

    def test_weights(self, capsys):
        code, out, _ = run(["weights", "--format", "json"], capsys)
        assert code == 0
        doc = json.loads(out)
        assert doc["max_abs_difference"] < 1e-10
        assert doc["minimized_variance"] == pytest.approx(0.5, abs=1e-12)
        code, out, _ = run(["weights"], capsys)
        assert code == 0 and "# section: V" in out

    def test_phi_table_cache_roundtrip(self, tmp_path, capsys, monkeypatch, phi_table):
        monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path))
        code, _, err = run(["phi-table"], capsys)
        assert code == 0
        path = tmp_path / "phi_table_1000.csv"
        assert len(path.read_text().splitlines()) == 2002  # header + 2001 rows
        assert PhiTable.from_csv(path) == phi_table
        assert cli.load_phi_table(0.001) == phi_table

    def test_corrupted_cache_rebuilds(self, tmp_path, monkeypatch, caplog, phi_table):
        monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path))
        path = tmp_path / "phi_table_1000.csv"
        path.write_text("rho,phi\n0,garbage\n")
        with caplog.at_level("WARNING", logger="rangecorr"):
            table = cli.load_phi_table(0.001)
        assert "corrupted" in caplog.text
        assert table == phi_table
        assert PhiTable.from_csv(path) == phi_table

    def test_exit_code_input(self, capsys):
        code, _, err = run(["estimate", "--input", FIXTURES / "high_below_low.csv", FIXTURES / "three_rows.csv"], capsys)
        assert code == 2 and "high_below_low.csv" in err
        assert run(["estimate", "--input", FIXTURES / "nope.csv", PANEL[0]], capsys)[0] == 2
        assert run(["simulate", "--rho", 2.0], capsys)[0] == 2

    def test_exit_code_numerical(self, capsys, monkeypatch):
        from rangecorr import optimal_weights
        monkeypatch.setattr(optimal_weights, "build_covariance_matrix", lambda: np.zeros((9, 9)))
        code, _, err = run(["weights"], capsys)
        assert code == 3
