import json

import pytest

from eqlearn.cli import main


def write_config(tmp_path, **updates):
    cfg = {
        "alpha": 0.5,
        "sectors": [{"zeta_star": 0.5, "m": 0.0, "sigma": 0.1, "tau": 0.1, "zeta0": 0.1}],
        "horizon": 20,
        "labor_supply": {"kind": "constant", "value": 10.0},
        "l0": {"kind": "constant", "value": 1.0},
        "learning_mode": "PD",
        "seed": 42,
    }
    cfg.update(updates)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


class TestSimulate:
    def test_writes_trajectory_and_manifest(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "run"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "trajectory.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 42
        assert manifest["command"] == "simulate"
        assert "runtime_seconds" in manifest and "version" in manifest and "backend" in manifest

    def test_refuses_overwrite_without_force(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        out = tmp_path / "run"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 1
        assert "refusing to overwrite" in capsys.readouterr().err
        assert main(["simulate", "--config", str(cfg), "--out", str(out), "--force"]) == 0

    def test_seed_override(self, tmp_path):
        cfg = write_config(tmp_path)
        out_a, out_b, out_c = (tmp_path / d for d in ("a", "b", "c"))
        main(["simulate", "--config", str(cfg), "--out", str(out_a)])
        main(["simulate", "--config", str(cfg), "--out", str(out_b), "--seed", "43"])
        main(["simulate", "--config", str(cfg), "--out", str(out_c), "--seed", "43"])
        a = (out_a / "trajectory.csv").read_bytes()
        b = (out_b / "trajectory.csv").read_bytes()
        c = (out_c / "trajectory.csv").read_bytes()
        assert a != b
        assert b == c
        assert json.loads((out_b / "manifest.json").read_text())["seed"] == 43


class TestConfigErrors:
    def test_malformed_json_exit_one(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{\n  'alpha': 0.5,\n}")
        out = tmp_path / "run"
        assert main(["simulate", "--config", str(path), "--out", str(out)]) == 1
        err = capsys.readouterr().err
        assert "config error" in err and "line" in err

    def test_unknown_field_exit_one(self, tmp_path, capsys):
        cfg = write_config(tmp_path, discount=0.9)
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "r")]) == 1
        assert "discount" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["simulate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "r")]) == 1


class TestNumericErrors:
    def test_solver_failure_exit_two(self, tmp_path, capsys):
        # a huge shock scale overflows expected productivity, so labor demand
        # is not finite and the clearing solver reports failure
        cfg = write_config(
            tmp_path,
            sectors=[{"zeta_star": 0.5, "m": 0.0, "sigma": 1e3, "tau": 0.1, "zeta0": 0.1}],
        )
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "r")]) == 2
        assert "numerical error" in capsys.readouterr().err


class TestEnsembleCommand:
    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_config(tmp_path, horizon=15)
        out_a, out_b = tmp_path / "e1", tmp_path / "e2"
        args = ["ensemble", "--config", str(cfg), "--reps", "6", "--seed", "7"]
        assert main(args + ["--out", str(out_a)]) == 0
        assert main(args + ["--out", str(out_b), "--workers", "3"]) == 0
        assert (out_a / "ensemble.csv").read_bytes() == (out_b / "ensemble.csv").read_bytes()
        assert (out_a / "zeta_band.csv").read_bytes() == (out_b / "zeta_band.csv").read_bytes()


class TestScenarioCommand:
    def test_example2_outputs(self, tmp_path):
        out = tmp_path / "ex2"
        assert main(["scenario", "example2", "--out", str(out), "--reps", "10", "--seed", "3"]) == 0
        for zeta0 in (0.1, 0.5, 0.9):
            assert (out / f"labor_share_zeta0{zeta0}.csv").exists()
        assert (out / "labor_share_summary.csv").exists()
        assert (out / "manifest.json").exists()

    def test_unknown_scenario_rejected_by_argparse(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["scenario", "examples9", "--out", str(tmp_path / "x")])


class TestMomentsCommand:
    def test_writes_moment_table(self, tmp_path):
        cfg = write_config(tmp_path, horizon=12)
        out = tmp_path / "mom"
        assert main(["moments", "--config", str(cfg), "--out", str(out)]) == 0
        lines = (out / "moments.csv").read_text().strip().splitlines()
        assert lines[0].startswith("t,sector,expectation,variance,mode")
        assert len(lines) == 1 + 12


class TestHighdimCommand:
    def test_writes_traces(self, tmp_path):
        out = tmp_path / "hd"
        assert main(["highdim", "--out", str(out), "--seed", "1"]) == 0
        assert (out / "elasticity_pd.csv").exists()
        assert (out / "elasticity_pi.csv").exists()
