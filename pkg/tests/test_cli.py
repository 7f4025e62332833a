import json
import subprocess
import sys

import pytest

from qrbackward.cli import main


def test_unknown_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["run", "--nope"])
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_missing_config(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "none.json")]) == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config" and err["path"].endswith("none.json")


def test_schema_violation(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"case": "test1", "K": 0}))
    assert main(["run", "--config", str(path)]) == 3
    assert json.loads(capsys.readouterr().err)["path"] == "K"


def test_run(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"case": "test2", "epsilons": [1e-3], "samples": 2,
                                "output": {"directory": str(tmp_path / "out")}}))
    assert main(["run", "--config", str(path)]) == 0
    assert (tmp_path / "out" / "errors.csv").exists()
    assert "test2" in capsys.readouterr().out


def test_sweep(tmp_path):
    out = tmp_path / "sweep"
    code = main(["sweep", "--case", "test1", "--eps", "1e-3,1e-4", "--samples", "2",
                 "--out", str(out), "--plots"])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert [r["epsilon"] for r in summary["results"]] == [1e-3, 1e-4]
    assert (out / "test1_rate.svg").exists()


def test_bad_eps_list():
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--case", "test1", "--eps", "a,b"])
    assert info.value.code == 2


def test_verify_quick():
    proc = subprocess.run([sys.executable, "-m", "qrbackward", "verify", "--quick"],
                          capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert "PASS" in proc.stdout and "FAIL" not in proc.stdout
