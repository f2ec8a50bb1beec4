import csv
import io
import json
import subprocess
import sys

import pytest

from planmean.cli import main


def read_csv(text):
    return list(csv.reader(io.StringIO(text)))


def test_allocate(capsys):
    assert main(["allocate", "--deltas", "4,1", "--p", "2", "--rho", "1"]) == 0
    rows = read_csv(capsys.readouterr().out)
    assert rows[0] == ["query", "delta", "scale"]
    assert float(rows[1][2]) == pytest.approx(4.4721, abs=1e-4)
    assert float(rows[2][2]) == pytest.approx(2.2361, abs=1e-4)
    values = {r[0]: float(r[2]) for r in rows[3:]}
    assert values["optimal_moment"] == pytest.approx(12.5)
    assert values["optimal_scaling_moment"] == pytest.approx(12.5)
    assert values["uniform_moment"] == pytest.approx(17.0)


def test_allocate_rejects_zero_sensitivity(capsys):
    assert main(["allocate", "--deltas", "1,0"]) == 2
    assert capsys.readouterr().err.startswith("planmean: error:")


def test_run_and_summarize(tmp_path, capsys):
    config = tmp_path / "exp.json"
    config.write_text(json.dumps({"name": "tiny", "family": "gaussianA", "n": 500, "dims": [4],
                                  "repetitions": 2, "estimators": ["plan", "empirical"]}))
    out = tmp_path / "res.csv"
    assert main(["run", str(config), "--seed", "3", "--out", str(out)]) == 0
    printed = read_csv(capsys.readouterr().out)
    assert printed[0][:2] == ["config", "estimator"]
    assert len(printed) == 3
    assert out.exists()
    assert main(["summarize", str(out)]) == 0
    assert read_csv(capsys.readouterr().out) == printed
    summary = tmp_path / "s.csv"
    assert main(["summarize", str(out), "--out", str(summary)]) == 0
    assert read_csv(summary.read_text()) == printed


def test_run_with_preset_override(tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert main(["run", "--preset", "gaussianA", "--repetitions", "1", "--out", str(out)]) == 0
    rows = read_csv(out.read_text())
    assert rows[0][0] == "config"
    assert len(rows) == 1 + 6 * 3 * 2


@pytest.mark.parametrize("argv", [
    ["run", "/nonexistent/config.json"],
    ["run"],
    ["summarize", "/nonexistent/results.csv"],
])
def test_config_errors_exit_with_status_2(argv, capsys):
    assert main(argv) == 2
    err = capsys.readouterr().err
    assert err.startswith("planmean: error:")
    assert len(err.strip().splitlines()) == 1


def test_bad_config_content(tmp_path, capsys):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"name": "bad", "family": "gaussianA", "repetitions": 0}))
    assert main(["run", str(config)]) == 2
    assert "repetitions" in capsys.readouterr().err


def test_check_concentration(capsys):
    assert main(["check-concentration", "--family", "gaussianB", "--n", "20000", "--d", "8",
                 "--t-grid", "0.5,1.5,2,3"]) == 0
    out = capsys.readouterr().out.splitlines()
    rows = read_csv("\n".join(line for line in out if not line.startswith("#")))
    assert rows[0] == ["t", "raw_fraction", "scaled_fraction", "out_of_domain"]
    assert rows[1][3] == "1"
    assert rows[2][3] == "0"
    assert "passed=True" in out[-1]


def test_check_concentration_binary_upper_window(capsys):
    assert main(["check-concentration", "--family", "binary", "--alpha", "0.5", "--n", "5000", "--d", "64",
                 "--p", "1", "--upper-window"]) == 0
    assert "scaled_slope" in capsys.readouterr().out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "planmean", "allocate", "--deltas", "1"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.startswith("query,delta,scale")
