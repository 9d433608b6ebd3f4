import csv
import io
import json
import subprocess
import sys

import pytest

from flapfin import harness
from flapfin.cli import EXIT_CONFIG, EXIT_FAILURE, EXIT_OK, main


@pytest.fixture
def workspace(tmp_path):
    cfg = harness.default_config("cli")
    data = cfg.to_dict()
    data["optimizer"]["max_generations"] = 5
    path = tmp_path / "cli.json"
    path.write_text(json.dumps(data))
    return tmp_path, path


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_full_cycle(workspace, capsys):
    tmp, cfg = workspace
    root = str(tmp / "runs")
    code, out, _ = call(capsys, "--root", root, "run", "--config", str(cfg))
    assert code == EXIT_OK
    assert json.loads(out) == {"run": "cli", "termination": "cap", "generations": 5}

    code, out, _ = call(capsys, "--root", root, "branch", "--run", "cli", "--at-gen", "2",
                        "--damage-fraction", "0.442", "--branches", "2", "--seeds", "7", "8")
    assert code == EXIT_OK
    lines = [json.loads(x) for x in out.splitlines()]
    assert [x["run"] for x in lines] == ["cli-b1", "cli-b2"]
    assert all(x["generations"] == 2 for x in lines)

    code, out, _ = call(capsys, "--root", root, "analyze", "--runs", "cli", "cli-b1", "cli-b2",
                        "--out", str(tmp / "report"))
    assert code == EXIT_OK
    assert "classification.csv" in json.loads(out)["files"]

    for what in harness.EXPORTS:
        run = "cli-b1" if what == "classification" else "cli"
        code, out, _ = call(capsys, "--root", root, "export", "--run", run, "--what", what, "--format", "csv")
        assert code == EXIT_OK
        rows = list(csv.DictReader(io.StringIO(out)))
        assert rows, what

    code, _, _ = call(capsys, "--root", root, "export", "--run", "cli", "--what", "paths",
                      "--output", str(tmp / "paths.csv"))
    assert code == EXIT_OK and (tmp / "paths.csv").read_bytes().startswith(b"generation,")


def test_bad_config_is_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"evaluation": {"n_runs": 1}}')
    code, _, err = call(capsys, "--root", str(tmp_path), "run", "--config", str(bad))
    assert code == EXIT_CONFIG and "n_runs" in err
    code, _, _ = call(capsys, "--root", str(tmp_path), "run", "--config", str(tmp_path / "missing.json"))
    assert code == EXIT_CONFIG


def test_usage_errors_are_exit_2(capsys):
    assert call(capsys, "export", "--run", "x", "--what", "nothing")[0] == EXIT_CONFIG
    assert call(capsys, "frobnicate")[0] == EXIT_CONFIG


def test_runtime_errors_are_exit_3(workspace, capsys):
    tmp, cfg = workspace
    root = str(tmp / "runs")
    assert call(capsys, "--root", root, "export", "--run", "ghost", "--what", "paths")[0] == EXIT_FAILURE
    call(capsys, "--root", root, "run", "--config", str(cfg))
    code, _, err = call(capsys, "--root", root, "branch", "--run", "cli", "--at-gen", "40", "--branches", "1")
    assert code == EXIT_FAILURE and "snapshot" in err
    assert call(capsys, "--root", root, "export", "--run", "cli", "--what", "classification")[0] == EXIT_FAILURE


def test_empty_analyze_rejected(capsys, tmp_path):
    # argparse already demands at least one run id
    assert call(capsys, "--root", str(tmp_path), "analyze", "--runs", "--out", str(tmp_path))[0] == EXIT_CONFIG


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "flapfin", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "branch" in out.stdout
