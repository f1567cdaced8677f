import csv
import json

import numpy as np
import pytest

from smfbm import __version__
from smfbm.cli import main


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


class TestCov:
    def test_shape_and_manifest(self, tmp_path):
        out = tmp_path / "cov.csv"
        assert main(["cov", "--process", "smfbm", "--a", "1", "--b", "1", "--hurst", "0.7", "--grid", "0:1:16", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert len(rows) == 18 and all(len(r) == 17 for r in rows)
        assert float(rows[-1][-1]) == pytest.approx(1.68049208922710574063, rel=1e-14)
        man = json.loads((tmp_path / "cov.manifest.json").read_text())
        assert list(man) == ["command", "subcommand", "parameters", "seed", "version", "outputs"]
        assert man["version"] == __version__ and man["outputs"] == [str(out)]

    def test_sfbm_half_is_min(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["cov", "--process", "sfbm", "--hurst", "0.5", "--grid", "0:2:4", "--out", str(out)]) == 0
        m = np.array(read_csv(out)[1:], dtype=float)
        g = np.linspace(0, 2, 5)
        np.testing.assert_allclose(m, np.minimum.outer(g, g), rtol=1e-14)

    def test_zero_coeffs(self, tmp_path, capsys):
        code = main(["cov", "--a", "0", "--b", "0", "--grid", "0:1:4", "--out", str(tmp_path / "z.csv")])
        assert code == 2
        assert "(a,b) must not be (0,0)" in capsys.readouterr().err

    def test_bad_hurst(self, tmp_path):
        assert main(["cov", "--hurst", "1.5", "--grid", "0:1:4", "--out", str(tmp_path / "z.csv")]) == 2

    def test_grid_file(self, tmp_path):
        gf = tmp_path / "g.txt"
        gf.write_text("0.5\n1.0, 4.0\n")
        out = tmp_path / "c.csv"
        assert main(["cov", "--grid-file", str(gf), "--out", str(out)]) == 0
        assert len(read_csv(out)) == 4

    def test_bad_grid_file(self, tmp_path):
        gf = tmp_path / "g.txt"
        gf.write_text("1.0 0.5\n")
        assert main(["cov", "--grid-file", str(gf), "--out", str(tmp_path / "c.csv")]) == 2

    def test_missing_grid(self, tmp_path):
        assert main(["cov", "--out", str(tmp_path / "c.csv")]) == 2


class TestSimulate:
    def test_byte_identical_reruns(self, tmp_path):
        args = ["simulate", "--hurst", "0.7", "--grid", "0:1:8", "--paths", "300", "--seed", "9"]
        main(args + ["--out", str(tmp_path / "a.csv"), "--threads", "1"])
        main(args + ["--out", str(tmp_path / "b.csv"), "--threads", "3"])
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        meta = json.loads((tmp_path / "a.meta.json").read_text())
        assert meta["seed"] == 9 and meta["method"] == "direct"

    def test_methods_differ(self, tmp_path):
        base = ["simulate", "--grid", "0:1:4", "--paths", "5", "--seed", "1", "--hurst", "0.7"]
        main(base + ["--out", str(tmp_path / "d.csv")])
        main(base + ["--method", "constructive", "--out", str(tmp_path / "c.csv")])
        assert (tmp_path / "d.csv").read_bytes() != (tmp_path / "c.csv").read_bytes()

    def test_zero_paths(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["simulate", "--paths", "0", "--grid", "0:1:4", "--out", str(tmp_path / "x.csv")])
        assert info.value.code == 2

    def test_numerical_failure_exit_code(self, tmp_path, monkeypatch):
        import smfbm.cli as cli
        from smfbm import FactorizationError

        def boom(cfg, threads=None):
            raise FactorizationError("covariance not factorizable")

        monkeypatch.setattr(cli, "sample", boom)
        assert main(["simulate", "--grid", "0:1:4", "--out", str(tmp_path / "x.csv")]) == 3


class TestDiag:
    def test_verdict(self, tmp_path):
        out = tmp_path / "v.json"
        assert main(["diag", "verdict", "--a", "1", "--b", "1", "--hurst", "0.6", "--out", str(out)]) == 0
        d = json.loads(out.read_text())
        assert list(d) == ["spec", "operation", "inputs", "outputs", "trend_fits", "verdict", "citations"]
        assert d["outputs"] == {"is_semimartingale": False, "regime": "intermediate_not_quasimart"}

    def test_qv_half(self, tmp_path):
        out = tmp_path / "qv.json"
        assert main(["diag", "qv", "--hurst", "0.5", "--a", "1", "--b", "1", "--t", "1", "--n-ladder", "2:16", "--out", str(out)]) == 0
        rows = read_csv(tmp_path / "qv.csv")
        assert rows[0] == ["n", "a_n"]
        assert [int(r[0]) for r in rows[1:]] == [2**k for k in range(2, 17)]
        np.testing.assert_allclose([float(r[1]) for r in rows[1:]], 2.0, rtol=1e-12)

    def test_qv_smooth_trend(self, tmp_path):
        out = tmp_path / "qv.json"
        main(["diag", "qv", "--hurst", "0.8", "--n-ladder", "8:16", "--out", str(out)])
        fits = json.loads(out.read_text())["trend_fits"]
        assert fits["convergence_exponent"] == pytest.approx(1 - 1.6, abs=0.1)

    def test_markov_half(self, tmp_path):
        out = tmp_path / "m.json"
        assert main(["diag", "markov", "--hurst", "0.5", "--s", "1", "--t", "2", "--u", "3", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["outputs"]["defect"] == pytest.approx(0.0, abs=1e-12)

    def test_markov_order(self, tmp_path):
        assert main(["diag", "markov", "--s", "2", "--t", "1", "--u", "3", "--out", str(tmp_path / "m.json")]) == 2

    def test_quasimart(self, tmp_path):
        out = tmp_path / "q.json"
        assert main(["diag", "quasimart", "--hurst", "0.6", "--n-ladder", "10:14", "--out", str(out)]) == 0
        fits = json.loads(out.read_text())["trend_fits"]
        assert fits["growth_exponent"] == pytest.approx(0.3, abs=0.05)
        assert len(read_csv(tmp_path / "q.csv")) == 6

    def test_quasimart_needs_b(self, tmp_path):
        assert main(["diag", "quasimart", "--b", "0", "--hurst", "0.6", "--out", str(tmp_path / "q.json")]) == 2

    def test_condl2(self, tmp_path):
        out = tmp_path / "c.json"
        assert main(["diag", "condl2", "--hurst", "0.75", "--n", "64", "--out", str(out)]) == 0
        o = json.loads(out.read_text())["outputs"]
        assert o["lambda_max_bound_ok"] is True and o["lower_bound_ok"] is True
        assert len(o["per_j"]) == 63

    def test_l2probe(self, tmp_path):
        out = tmp_path / "p.json"
        assert main(["diag", "l2probe", "--hurst", "0.9", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["outputs"]["converged"] is True
        assert main(["diag", "l2probe", "--a", "0", "--hurst", "0.9", "--out", str(out)]) == 2


class TestCompare:
    def test_sign_change_at_half(self, tmp_path):
        out = tmp_path / "ci.csv"
        code = main(
            ["compare", "intervals", "--u", "0", "--v", "1", "--s", "1", "--t", "2", "--sweep", "hurst=0.1:0.9:8", "--out", str(out)]
        )
        assert code == 0
        rows = read_csv(out)
        assert rows[0] == ["a", "b", "hurst", "u", "v", "s", "t", "R", "C", "D", "rho_mfbm", "rho_smfbm"]
        for r in rows[1:]:
            h, d = float(r[2]), float(r[9])
            assert np.sign(d) == -np.sign(round(h - 0.5, 12))

    def test_adjacent_sweep_a(self, tmp_path):
        out = tmp_path / "ca.csv"
        main(["compare", "intervals", "--u", "0.5", "--r", "1", "--hurst", "0.7", "--sweep", "a=0:4:8", "--out", str(out)])
        rho = [abs(float(r[11])) for r in read_csv(out)[1:]]
        assert all(x >= y for x, y in zip(rho, rho[1:]))

    def test_ordering_violation(self, tmp_path):
        code = main(["compare", "intervals", "--u", "0", "--v", "2", "--s", "1", "--t", "3", "--out", str(tmp_path / "x.csv")])
        assert code == 2

    def test_bad_sweep_name(self, tmp_path):
        code = main(["compare", "intervals", "--r", "1", "--sweep", "zeta=0:1:2", "--out", str(tmp_path / "x.csv")])
        assert code == 2

    def test_lag_ratio(self, tmp_path):
        out = tmp_path / "lag.csv"
        main(["compare", "lag", "--hurst", "0.7", "--p", "1", "--n-ladder", "4:17", "--out", str(out)])
        rows = read_csv(out)
        assert rows[0] == ["p", "n", "C", "asymptote", "ratio"]
        gaps = [abs(float(r[4]) - 1) for r in rows[1:]]
        assert all(x > y for x, y in zip(gaps, gaps[1:])) and gaps[-1] < 1e-4


class TestConfigAndReplay:
    def test_config_precedence(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"hurst": 0.3, "b": 2.0}))
        out = tmp_path / "v.json"
        main(["diag", "verdict", "--config", str(cfg), "--b", "1", "--out", str(out)])
        spec = json.loads(out.read_text())["spec"]
        assert spec["hurst"] == 0.3 and spec["b"] == 1.0

    def test_config_unknown_key(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"hurstt": 0.3}))
        with pytest.raises(SystemExit) as info:
            main(["diag", "verdict", "--config", str(cfg), "--out", str(tmp_path / "v.json")])
        assert info.value.code == 2

    @pytest.mark.parametrize(
        "argv",
        [
            ["cov", "--hurst", "0.3", "--grid", "0:1:8"],
            ["simulate", "--hurst", "0.3", "--grid", "0:1:8", "--paths", "600", "--seed", "4", "--method", "constructive"],
            ["diag", "qv", "--hurst", "0.3", "--n-ladder", "2:6"],
            ["compare", "lag", "--hurst", "0.3", "--n-ladder", "0:5"],
        ],
    )
    def test_replay(self, tmp_path, argv):
        out = tmp_path / "first.csv" if argv[0] != "diag" else tmp_path / "first.json"
        assert main(argv + ["--out", str(out), "--threads", "1"]) == 0
        manifest = out.with_name(out.stem + ".manifest.json")
        again = out.with_name("again" + out.suffix)
        assert main(["replay", str(manifest), "--out", str(again), "--threads", "4"]) == 0
        assert again.read_bytes() == out.read_bytes()

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--version"])
        assert info.value.code == 0
        assert __version__ in capsys.readouterr().out
