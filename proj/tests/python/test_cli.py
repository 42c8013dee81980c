import json
import os
import subprocess
from pathlib import Path

import pytest

CLI = os.environ.get("RMTL_CLI", "rmtl")
DATA = Path(__file__).resolve().parents[1] / "data"


def run(*args):
    return subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, timeout=600)


def test_analyze(tmp_path):
    out = tmp_path / "report.json"
    r = run("analyze", DATA / "synthetic.csv", "--json", out, "--figure-data", tmp_path / "fig")
    assert r.returncode == 0, r.stderr
    assert "Statistical inference" in r.stdout
    report = json.loads(out.read_text())
    assert report["tau_source"] == "rule"
    assert (tmp_path / "fig" / "group2_one_minus_cif_competing.tsv").exists()
    same = run("analyze", DATA / "synthetic.csv", "--tau", report["tau"])
    assert same.stdout == r.stdout


@pytest.mark.parametrize(
    "body, needle",
    [
        ("time,status,group\n0,1,1\n", "time must be positive (row 2)"),
        ("time,status,group\n3.2,4,1\n", "unknown status 4 (row 2)"),
        ("time,status,group\n1,1,1\nx,1,2\n", "row 3"),
        ("", "empty input"),
        ("time,status,group\n1,1,1\n2,1,1\n", "group"),
    ],
)
def test_analyze_input_errors(tmp_path, body, needle):
    f = tmp_path / "bad.csv"
    f.write_text(body)
    r = run("analyze", f)
    assert r.returncode == 2
    assert needle in r.stderr
    assert "Traceback" not in r.stderr


def test_degenerate_exit_code(tmp_path):
    # Two events of interest in total: many relabellings leave a group without
    # one, so tau cannot be recomputed for them.
    f = tmp_path / "degenerate.csv"
    f.write_text(
        "time,status,group\n1,1,1\n2,2,1\n3,2,1\n4,2,1\n"
        "1.5,1,2\n2.5,2,2\n3.5,2,2\n4.5,2,2\n"
    )
    r = run("analyze", f)
    assert r.returncode == 3, r.stderr
    assert "permutations" in r.stderr


def test_bad_arguments():
    assert run("analyze").returncode == 2
    assert run("simulate", "--scenario", "Q").returncode == 2
    assert run("bogus").returncode == 2
    assert run("analyze", DATA / "missing.csv").returncode == 2


def test_simulate_is_deterministic(tmp_path):
    args = ["simulate", "--scenario", "A", "--n1", "20", "--n2", "20", "--censoring", "0.3",
            "--reps", "20", "--perms", "20", "--seed", "7"]
    a = run(*args, "--out", tmp_path / "a")
    b = run(*args, "--out", tmp_path / "b", "--threads", "3")
    assert a.returncode == 0, a.stderr
    assert a.stdout == b.stdout
    name = "scenarioA_n20_20_c30.tsv"
    assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    lines = a.stdout.strip().splitlines()
    assert lines[0].split("\t") == ["method", "rejection_rate", "mc_stderr"]
    assert [l.split("\t")[0] for l in lines[1:]] == ["Gray", "Diff", "PComb", "FComb", "TComb"]


def test_simulate_single_replicate():
    r = run("simulate", "--scenario", "C", "--n1", "20", "--n2", "20", "--reps", "1", "--perms", "10")
    assert r.returncode == 0, r.stderr
    for line in r.stdout.strip().splitlines()[1:]:
        assert float(line.split("\t")[1]) in (0.0, 1.0)


def test_simulate_config_file(tmp_path):
    cfg = tmp_path / "cell.cfg"
    cfg.write_text("scenario = B\nn1 = 20\nn2 = 20\ncensoring = 0.15\nreps = 5\nperms = 10\nbeta = 0.5\n")
    r = run("simulate", "--config", cfg, "--out", tmp_path)
    assert r.returncode == 0, r.stderr
    report = json.loads((tmp_path / "scenarioB_n20_20_c15.json").read_text())
    assert report["config"]["beta"] == 0.5
    bad = tmp_path / "bad.cfg"
    bad.write_text("scenario = B\nwhatever = 1\n")
    assert run("simulate", "--config", bad).returncode == 2
