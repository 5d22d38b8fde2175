"""CLI contract: subcommands, outputs on disk, exit codes, determinism."""

import json

import pytest
from click.testing import CliRunner

from nicholson.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def ex22_file(tmp_path):
    payload = {
        "name": "example-2.2",
        "n": 2, "m": 1,
        "d": [3.0, 2.0],
        "a": [[0.0, 1.0], [1.0, 0.0]],
        "beta": [[1.0], [3.0]],
        "tau": [[5.0], [10.0]],
        "history": {"kind": "constant", "value": [1.0, 1.0]},
        "t_end": 60.0,
    }
    path = tmp_path / "ex22.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_validate_ok(runner, ex22_file):
    result = runner.invoke(main, ["validate", str(ex22_file)])
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["ok"] is True


def test_validate_violation_exit_code(runner, tmp_path, ex22_file):
    payload = json.loads(ex22_file.read_text())
    payload["beta"] = [[0.0], [3.0]]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(payload), encoding="utf-8")
    result = runner.invoke(main, ["validate", str(bad)])
    assert result.exit_code == 1


def test_validate_malformed_json_exit_code(runner, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    result = runner.invoke(main, ["validate", str(broken)])
    assert result.exit_code == 2


def test_validate_missing_keys_exit_code(runner, tmp_path):
    sparse = tmp_path / "sparse.json"
    sparse.write_text(json.dumps({"n": 2}), encoding="utf-8")
    result = runner.invoke(main, ["validate", str(sparse)])
    assert result.exit_code == 2


def test_classify_output(runner, ex22_file, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(main, ["classify", str(ex22_file), "--out", str(out)])
    assert result.exit_code == 0
    report = json.loads(out.read_text())["report"]
    assert report["verdict_zero"] == "ZeroUnstable"


def test_classify_deterministic(runner, ex22_file):
    first = runner.invoke(main, ["classify", str(ex22_file)])
    second = runner.invoke(main, ["classify", str(ex22_file)])
    assert first.exit_code == second.exit_code == 0
    assert first.output == second.output


def test_simulate_writes_csv(runner, ex22_file, tmp_path):
    out = tmp_path / "traj.csv"
    result = runner.invoke(main, ["simulate", str(ex22_file), "--out", str(out)])
    assert result.exit_code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "t,x1,x2"
    summary = json.loads(result.output)
    assert summary["labels"] == ["ConvergedToPositive", "ConvergedToPositive"]


def test_simulate_deterministic_bytes(runner, ex22_file, tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert runner.invoke(main, ["simulate", str(ex22_file), "--out", str(out1)]).exit_code == 0
    assert runner.invoke(main, ["simulate", str(ex22_file), "--out", str(out2)]).exit_code == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_reproduce_single_figure(runner, tmp_path):
    result = runner.invoke(main, ["reproduce", "1a", "--out-dir", str(tmp_path / "repro")])
    assert result.exit_code == 0
    manifest = json.loads((tmp_path / "repro" / "1a" / "manifest.json").read_text())
    assert manifest["matched"] is True
    assert (tmp_path / "repro" / "1a" / "trajectory.csv").exists()


def test_reproduce_unknown_figure(runner, tmp_path):
    result = runner.invoke(main, ["reproduce", "7x", "--out-dir", str(tmp_path)])
    assert result.exit_code == 2


def test_sweep_zero_length(runner, ex22_file, tmp_path):
    out = tmp_path / "sweep.csv"
    result = runner.invoke(main, [
        "sweep-delay", str(ex22_file),
        "--patch", "2", "--delay-index", "1",
        "--from", "10", "--to", "10", "--steps", "1",
        "--out", str(out),
    ])
    assert result.exit_code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "tau,label,amplitude"
    assert len(lines) == 2
    assert lines[1].startswith("10,")
