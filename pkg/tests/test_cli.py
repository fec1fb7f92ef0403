import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from hamform import zoo
from hamform.cli import ConfigError, apply_override, main
from hamform.reservoir import EffectiveInvariant, ReservoirSpec

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _write(tmp_path, name, payload):
    p = tmp_path / name
    p.write_text(json.dumps(payload))
    return p


def _vdp(**over):
    cfg = {"system": {"name": "vdp", "params": {"eps": 0.5}}, "initial_state": [2.0, 0.0],
           "T": 1.0, "h": 0.01, "integrator": {"method": "rk4"}}
    cfg.update(over)
    return cfg


class TestSimulate:
    def test_vdp_full_run(self, tmp_path):
        out = tmp_path / "out"
        code = main(["simulate", str(CONFIGS / "vdp.json"), "--out-dir", str(out)])
        assert code == 0
        lines = (out / "vdp.csv").read_text().splitlines()
        assert lines[0] == "t,x1,x2,w1,H,K,div"
        assert len(lines) - 1 == 20001
        report = json.loads((out / "vdp.report.json").read_text())
        assert set(report) >= {"k_drift_max", "k_initial", "h", "steps", "method", "wall_time"}
        assert report["steps"] == 20000 and report["method"] == "rk4"
        assert report["k_drift_max"] <= 1e-5
        assert report["k_initial"] == 2.0

    def test_row_count_floor(self, tmp_path):
        cfg = _write(tmp_path, "c.json", _vdp(T=1.0, h=0.3))
        assert main(["simulate", str(cfg), "--out-dir", str(tmp_path)]) == 0
        rows = (tmp_path / "c.csv").read_text().splitlines()
        assert len(rows) - 1 == 4

    def test_csv_round_trip_precision(self, tmp_path):
        cfg = _write(tmp_path, "c.json", _vdp())
        main(["simulate", str(cfg), "--out-dir", str(tmp_path)])
        raw = (tmp_path / "c.csv").read_bytes()
        assert b"\r" not in raw
        data = np.loadtxt(tmp_path / "c.csv", delimiter=",", skiprows=1)
        assert data[1, 0] == 0.01

    def test_deterministic_bytes(self, tmp_path):
        cfg = _write(tmp_path, "c.json", _vdp())
        main(["simulate", str(cfg), "--out-dir", str(tmp_path / "a")])
        main(["simulate", str(cfg), "--out-dir", str(tmp_path / "b")])
        assert (tmp_path / "a" / "c.csv").read_bytes() == (tmp_path / "b" / "c.csv").read_bytes()

    def test_invalid_system_writes_nothing(self, tmp_path, capsys):
        cfg = _write(tmp_path, "bad.json", _vdp(system={"name": "nope"}))
        out = tmp_path / "out"
        assert main(["simulate", str(cfg), "--out-dir", str(out)]) == 1
        assert not out.exists()
        assert "unknown system" in capsys.readouterr().err

    @pytest.mark.parametrize("over", [{"h": 2.0}, {"h": -1}, {"T": 0}, {"initial_state": [1, 2, 3]},
                                      {"integrator": {"method": "euler"}}, {"bogus": 1},
                                      {"system": {"name": "vdp", "params": {"eps": -1}}},
                                      {"reservoirs": [{"integrand": "x9", "against": "x1"}]},
                                      {"integrator": {"method": "discrete_gradient"}}])
    def test_config_errors(self, tmp_path, over):
        cfg = _write(tmp_path, "bad.json", _vdp(**over))
        assert main(["simulate", str(cfg), "--out-dir", str(tmp_path / "o")]) == 1
        assert not (tmp_path / "o").exists()

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text("{not json")
        assert main(["simulate", str(p)]) == 1

    def test_stiff_robertson_domain_exit(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["simulate", str(CONFIGS / "robertson_stiff.json"), "--out-dir", str(out)])
        assert code == 2
        assert "domain" in capsys.readouterr().err
        assert (out / "robertson_stiff.csv").exists()
        report = json.loads((out / "robertson_stiff.report.json").read_text())
        assert "domain" in report["error"]

    def test_param_override(self, tmp_path):
        cfg = _write(tmp_path, "c.json", _vdp())
        main(["simulate", str(cfg), "--out-dir", str(tmp_path), "--param", "system.params.eps=0.0"])
        w = np.loadtxt(tmp_path / "c.csv", delimiter=",", skiprows=1)[:, 3]
        np.testing.assert_array_equal(w, 0.0)

    def test_explicit_reservoirs_on_network(self, tmp_path):
        out = tmp_path / "out"
        assert main(["simulate", str(CONFIGS / "brusselator_network.json"), "--out-dir", str(out),
                     "--param", "T=2"]) == 0
        report = json.loads((out / "brusselator_network.report.json").read_text())
        assert report["k_initial"] == pytest.approx(1.0 - 1.5)
        assert report["k_drift_max"] < 1e-4

    def test_no_reservoirs(self, tmp_path):
        cfg = _write(tmp_path, "c.json", _vdp(reservoirs="none"))
        main(["simulate", str(cfg), "--out-dir", str(tmp_path)])
        header = (tmp_path / "c.csv").read_text().splitlines()[0]
        assert header == "t,x1,x2,H,K,div"
        report = json.loads((tmp_path / "c.report.json").read_text())
        assert report["k_drift_max"] is None

    def test_parallel_sweep(self, tmp_path):
        paths = [_write(tmp_path, f"run{k}.json", _vdp(initial_state=[1.0 + k, 0.0])) for k in range(3)]
        out = tmp_path / "out"
        assert main(["simulate", *map(str, paths), "--jobs", "3", "--out-dir", str(out)]) == 0
        serial = tmp_path / "serial"
        main(["simulate", *map(str, paths), "--out-dir", str(serial)])
        for k in range(3):
            assert (out / f"run{k}.csv").read_bytes() == (serial / f"run{k}.csv").read_bytes()


class TestCheck:
    def test_lv_all_pass(self, tmp_path):
        code = main(["check", str(CONFIGS / "lv_check.json"), "--out-dir", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "lv_check.check.json").read_text())
        assert report["passed"]
        assert all(s["status"] in ("pass", "skipped") for s in report["suites"].values())
        assert report["suites"]["pfaffian"]["status"] == "pass"

    def test_robertson_jacobi_expected_fail(self, tmp_path):
        code = main(["check", str(CONFIGS / "robertson_check.json"), "--out-dir", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "robertson_check.check.json").read_text())
        jac = report["suites"]["jacobi"]
        assert jac["status"] == "expected-fail" and jac["passed"]
        assert jac["per_matrix"]["structure"]["status"] == "pass"
        assert report["suites"]["casimir"]["status"] == "pass"

    def test_corrupted_entry_fails(self, tmp_path, monkeypatch):
        original = zoo.FACTORIES["vdp"]

        def corrupted(**params):
            parts = original(**params)
            inv = parts["invariant"]
            (w,) = inv.reservoirs
            flipped = ReservoirSpec(lambda x: -w.integrand(x), w.against_index)
            parts["invariant"] = EffectiveInvariant(2, inv.potential, (flipped,))
            return parts

        monkeypatch.setitem(zoo.FACTORIES, "vdp", corrupted)
        cfg = _write(tmp_path, "c.json", _vdp(check={"suites": ["pfaffian"]}))
        assert main(["check", str(cfg), "--out-dir", str(tmp_path)]) == 3
        report = json.loads((tmp_path / "c.check.json").read_text())
        assert report["suites"]["pfaffian"]["status"] == "fail"

    def test_network_linear_invariants(self, tmp_path):
        cfg = _write(tmp_path, "r.json", {"system": {"network": str(CONFIGS / "robertson.rxn")},
                                          "initial_state": [1, 0, 0], "T": 1e-3, "h": 1e-6})
        assert main(["check", str(cfg), "--out-dir", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "r.check.json").read_text())
        assert report["suites"]["linear_invariants"]["invariants"] == ["x + y + z"]

    def test_unknown_suite(self, tmp_path):
        cfg = _write(tmp_path, "c.json", _vdp(check={"suites": ["telepathy"]}))
        assert main(["check", str(cfg)]) == 1


class TestCompile:
    def test_robertson(self, capsys):
        assert main(["compile", str(CONFIGS / "robertson.rxn")]) == 0
        out = capsys.readouterr().out
        assert "conserved: x + y + z" in out

    def test_brusselator(self, capsys):
        assert main(["compile", str(CONFIGS / "brusselator.rxn")]) == 0
        out = capsys.readouterr().out.splitlines()
        assert "dx/dt = a + x^2*y - b*x - x" in out
        assert "dy/dt = -x^2*y + b*x" in out
        assert "conserved: none" in out

    def test_empty(self, tmp_path, capsys):
        p = tmp_path / "empty.rxn"
        p.write_text("")
        assert main(["compile", str(p)]) == 0
        assert "empty network" in capsys.readouterr().err

    def test_parse_error(self, tmp_path, capsys):
        p = tmp_path / "bad.rxn"
        p.write_text("X -> Y [1]\nX + -> Y [1]\n")
        assert main(["compile", str(p)]) == 1
        assert "line 2, column 5" in capsys.readouterr().err

    def test_named_rate_via_param(self, tmp_path, capsys):
        p = tmp_path / "k.rxn"
        p.write_text("X -> Y [k]\n")
        assert main(["compile", str(p)]) == 1
        assert main(["compile", str(p), "--param", "k=2"]) == 0
        assert "dX/dt = -k*X" in capsys.readouterr().out


def test_apply_override_nested():
    cfg = {"system": {"name": "vdp"}}
    apply_override(cfg, "system.params.eps=0.25")
    apply_override(cfg, "outputs.trajectory=x.csv")
    assert cfg["system"]["params"]["eps"] == 0.25
    assert cfg["outputs"]["trajectory"] == "x.csv"
    with pytest.raises(ConfigError):
        apply_override(cfg, "novalue")


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hamform", "compile", str(CONFIGS / "robertson.rxn")],
                          capture_output=True, text=True, cwd=tmp_path)
    assert proc.returncode == 0
    assert "conserved: x + y + z" in proc.stdout
