import json
import subprocess
import sys

import pytest

from wavereg.cli import main
from wavereg.io import read_csv


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = main([*args, "--output-dir", str(out)])
    return code, out


def report(out):
    return json.loads((out / "report.json").read_text())


def test_zoo_list(tmp_path, capsys):
    code, out = run(tmp_path, "zoo-list")
    assert code == 0
    assert "dirac" in capsys.readouterr().out
    assert (out / "zoo.json").is_file()


def test_weyl_report_schema(tmp_path):
    code, out = run(tmp_path, "weyl")
    assert code == 0
    r = report(out)
    assert set(r) >= {"schema", "version", "command", "config", "passed", "checks", "timestamps"}
    assert r["command"] == "weyl" and r["passed"] is True
    chk = r["checks"]["weyl"]
    assert chk["verdict"] == "pass" and 0.99 <= chk["metrics"]["final_ratio"] <= 1.01
    header, rows = read_csv(out / chk["artifacts"][0])
    assert header[0] == "lambda (1/length^2)" and len(rows) == 13
    assert "output_dir" not in r["config"]


def test_weyl_failure_exit_code(tmp_path):
    code, _ = run(tmp_path, "weyl", "--weyl-tol", "1e-9")
    assert code == 1


@pytest.mark.parametrize("args", [("weyl", "--eps-ratio", "1.5"), ("weyl", "--bogus", "1"),
                                  ("weyl", "--lambda-max"), ("weyl", "stray"),
                                  ("weyl", "--lambda-max", "10")])
def test_bad_input_exit_code(tmp_path, args):
    code, _ = run(tmp_path, *args)
    assert code == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[weyl]\nlambda_max = 2e6\n[manifold]\nmanifold = circle\n")
    code, out = run(tmp_path, "weyl", "--config", str(cfg), "--lambda-max=3e6")
    assert code == 0
    assert report(out)["config"]["lambda_max"] == 3e6


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("REG_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["weyl"]) == 0
    assert (tmp_path / "env" / "report.json").is_file()


def test_scan_writes_csv(tmp_path):
    code, out = run(tmp_path, "scan", "--eps-count", "8", "--zoo", "dirac")
    assert code == 0
    header, rows = read_csv(out / "scan_dirac.csv")
    assert header[0] == "eps (1)" and len(rows) == 8
    assert report(out)["checks"]["scan:dirac"]["verdict"] == "pass"


def test_kernel_artifacts(tmp_path):
    code, out = run(tmp_path, "kernel", "--eps-count", "8")
    assert code == 0
    r = report(out)
    assert r["checks"]["kernel_support"]["verdict"] == "pass"
    assert (out / "wave_snapshot_s1.csv").is_file()
    assert any(p.startswith("multiplier_eps") for p in r["checks"]["kernel_support"]["artifacts"])


def test_template(tmp_path):
    code, out = run(tmp_path, "template")
    assert code == 0 and (out / "wavereg.ini").is_file()


def test_console_script_entry():
    res = subprocess.run([sys.executable, "-m", "wavereg.cli", "--version"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "wavereg" in res.stdout
