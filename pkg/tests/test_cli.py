import json
import subprocess
import sys

import numpy as np
import pytest

from stepstress.cli import main
from stepstress.config import read_dataset, plan_from_config

from helpers import TABLE_I


def write(path, doc):
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def experiment(tmp_path):
    return write(tmp_path / "exp.json", {
        "gamma0": 0.76, "gamma1": 0.107, "sigma": 0.05,
        "levels": {"celsius": [50, 150, 300]}, "taus": [95, 97.5],
        "n": 35, "scheme": "27*0,7", "seed": 11,
    })


@pytest.fixture
def table1_csv(tmp_path):
    lines = ["step,time,removed_after"]
    for k, t in enumerate(TABLE_I[:28]):
        step = 1 if t <= 95 else 2 if t <= 97.5 else 3
        lines.append(f"{step},{t},{7 if k == 27 else 0}")
    path = tmp_path / "t1.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


class TestSimulate:
    def test_writes_dataset_and_sidecar(self, experiment, tmp_path):
        out = tmp_path / "d.csv"
        assert main(["simulate", str(experiment), str(out)]) == 0
        rows = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
        assert rows[0] == "step,time,removed_after" and len(rows) == 29
        side = json.loads(out.with_suffix(".plan.json").read_text())
        assert side["taus"] == [95.0, 97.5] and side["seed"] == 11

    def test_byte_identical_rerun(self, experiment, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["simulate", str(experiment), str(a)])
        main(["simulate", str(experiment), str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_round_trip(self, experiment, tmp_path):
        out = tmp_path / "d.csv"
        main(["simulate", str(experiment), str(out)])
        cfg = json.loads(experiment.read_text())
        sample = read_dataset(out, plan_from_config(cfg))
        assert sample.n == 35 and sample.r == 28

    def test_designed_taus(self, tmp_path):
        cfg = write(tmp_path / "e.json", {
            "gamma0": 0.76, "gamma1": 0.107, "sigma": 0.05,
            "levels": {"celsius": [50, 150, 300]}, "target_cum_probs": [0.2, 0.6],
            "n": 10, "scheme": "2,2,3",
        })
        out = tmp_path / "d.csv"
        assert main(["simulate", str(cfg), str(out)]) == 0
        taus = json.loads(out.with_suffix(".plan.json").read_text())["taus"]
        assert taus == pytest.approx([95.619, 97.789], abs=1e-3)

    @pytest.mark.parametrize("drop", ["taus", "scheme", "levels", "sigma"])
    def test_missing_keys_exit_2(self, experiment, tmp_path, drop):
        cfg = json.loads(experiment.read_text())
        del cfg[drop]
        path = write(tmp_path / "bad.json", cfg)
        assert main(["simulate", str(path), str(tmp_path / "d.csv")]) == 2

    def test_bad_scheme_sum_exit_2(self, experiment, tmp_path, capsys):
        cfg = json.loads(experiment.read_text())
        cfg["scheme"] = "27*0,6"
        assert main(["simulate", str(write(tmp_path / "bad.json", cfg)), str(tmp_path / "d.csv")]) == 2
        assert "n - r = 7" in capsys.readouterr().err

    def test_missing_file_exit_3(self, tmp_path):
        assert main(["simulate", str(tmp_path / "nope.json"), str(tmp_path / "d.csv")]) == 3


class TestFit:
    def test_report(self, table1_csv, experiment, tmp_path):
        out = tmp_path / "r.json"
        code = main(["fit", str(table1_csv), str(experiment), "--ci", "--boot", "200",
                     "--test-gamma1", "--seed", "1", "-o", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["converged"] and doc["n"] == 35 and doc["r"] == 28
        assert doc["estimates"]["gamma0"] == pytest.approx(2.3944, abs=1e-4)
        assert set(doc["approximate"]["intervals"]["sigma"]) == {"0.9", "0.95", "0.99"}
        assert doc["percentile_bootstrap"]["B"] == 200
        assert 0 <= doc["test_gamma1"]["t_pvalue"] < 0.05

    def test_single_step_data_reports_singular(self, tmp_path, experiment, capsys):
        data = tmp_path / "one.csv"
        data.write_text("step,time,removed_after\n1,80,0\n1,85,0\n1,90,5\n")
        assert main(["fit", str(data), str(experiment)]) == 0
        assert json.loads(capsys.readouterr().out)["error"] == "singular information"

    def test_step_column_checked(self, tmp_path, experiment):
        data = tmp_path / "wrong.csv"
        data.write_text("step,time,removed_after\n2,80,0\n1,96,0\n3,98,0\n")
        assert main(["fit", str(data), str(experiment)]) == 2


class TestMc:
    def scenario(self, tmp_path, **kw):
        doc = {"gamma0": 0.76, "gamma1": 0.107, "sigma": 0.05,
               "levels": {"celsius": [50, 150, 300]}, "taus": [95, 97.5],
               "n": 35, "scheme": "7*(0,0,1,0)", "replications": 6, "seed": 2,
               "scenario_id": "small"}
        doc.update(kw)
        return write(tmp_path / "sc.json", doc)

    def test_jobs_invariant(self, tmp_path):
        sc = self.scenario(tmp_path)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["mc", str(sc), str(a), "--jobs", "1"]) == 0
        assert main(["mc", str(sc), str(b), "--jobs", "8"]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_text_format(self, tmp_path):
        out = tmp_path / "t.txt"
        assert main(["mc", str(self.scenario(tmp_path)), str(out), "--format", "text"]) == 0
        assert "App." in out.read_text()

    def test_zero_replications_exit_2(self, tmp_path):
        assert main(["mc", str(self.scenario(tmp_path, replications=0)), str(tmp_path / "o.csv")]) == 2

    def test_bad_jobs_exit_2(self, tmp_path):
        assert main(["mc", str(self.scenario(tmp_path)), str(tmp_path / "o.csv"), "--jobs", "0"]) == 2


class TestHelpers:
    def test_design_taus(self, tmp_path, capsys):
        cfg = write(tmp_path / "d.json", {"gamma0": 0.76, "gamma1": 0.107, "sigma": 0.05,
                                         "levels": {"celsius": [50, 150, 300]},
                                         "target_cum_probs": [0.2, 0.6]})
        assert main(["design-taus", str(cfg)]) == 0
        assert json.loads(capsys.readouterr().out)["taus"] == pytest.approx([95.619, 97.789], abs=1e-3)

    def test_calibrate(self, capsys):
        assert main(["calibrate", "--celsius", "50", "150", "300", "--means", "100", "40", "20",
                     "--sd-first", "5"]) == 0
        assert json.loads(capsys.readouterr().out)["sigma"] == pytest.approx(np.sqrt(np.log(1.0025)))

    def test_calibrate_mismatch_exit_2(self):
        assert main(["calibrate", "--x", "1", "2", "--means", "10", "--sd-first", "1"]) == 2


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "stepstress.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "stepstress" in proc.stdout
