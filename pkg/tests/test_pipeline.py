import io
import json
import math

import pandas as pd
import pytest

from model.errors import ArgumentError, ConvergenceError
from pipeline import pipeline, writers
from pipeline.pipeline import parse_grid, run


@pytest.fixture
def outputs(tmp_path, monkeypatch):
    monkeypatch.setattr(writers, "OUTPUT_DIR", tmp_path)
    return tmp_path


# -------------------- GRID SPEC --------------------

def test_parse_grid():
    assert parse_grid("0.25:3:12") == (0.25, 3.0, 12)
    assert parse_grid("-4:2:25") == (-4.0, 2.0, 25)


@pytest.mark.parametrize("text", ["1:2", "a:2:3", "2:1:5", "0:1:1", "0:inf:4"])
def test_parse_grid_rejects(text):
    with pytest.raises(ArgumentError):
        parse_grid(text)


# -------------------- CDF --------------------

def test_cdf_single_bridge_table(outputs):
    code = run(["cdf", "--kind", "maxheight", "--n", "1", "--grid", "0.25:3:12",
                "--format", "csv", "--output", "table.csv", "--quiet"])
    assert code == 0

    text = (outputs / "table.csv").read_text()
    assert text.startswith("arg,prob\n")
    frame = pd.read_csv(io.StringIO(text))
    assert len(frame) == 12
    row = frame[frame["arg"] == 1.0]
    assert float(row["prob"].iloc[0]) == pytest.approx(1.0 - math.exp(-2.0), abs=1e-12)


def test_cdf_to_stdout_keeps_status_on_stderr(capsys):
    assert run(["cdf", "--kind", "loe", "--n", "2", "--grid", "1:5:3", "--format", "json"]) == 0
    captured = capsys.readouterr()
    payload = json.loads(captured.out)
    assert payload["label"] == "loe-N2"
    assert len(payload["rows"]) == 3
    assert "✅" in captured.err


def test_output_path_with_directory_is_used_as_given(tmp_path):
    target = tmp_path / "nested" / "t.csv"
    assert run(["cdf", "--n", "1", "--grid", "0.5:1:2", "--output", str(target), "--quiet"]) == 0
    assert target.read_text().count("\n") == 3
    assert [p.name for p in target.parent.iterdir()] == ["t.csv"]


def test_repeat_runs_are_byte_identical(outputs):
    args = ["cdf", "--kind", "maxheight", "--n", "3", "--grid", "0.5:2.5:9", "--quiet"]
    run(args + ["--output", "a.csv"])
    run(args + ["--output", "b.csv"])
    assert (outputs / "a.csv").read_bytes() == (outputs / "b.csv").read_bytes()


# -------------------- EXIT CODES --------------------

@pytest.mark.parametrize("argv", [
    ["cdf", "--n", "1", "--grid", "3:1:4", "--quiet"],
    ["cdf", "--n", "0", "--grid", "0:1:4", "--quiet"],
    ["cdf", "--kind", "gue", "--n", "1", "--grid", "0:1:4"],
    ["histogram"],
    ["mc-loe", "--n", "1", "--samples", "5", "--quiet"],
    ["verify", "--n-max", "20", "--quiet"],
    ["tw-limit", "--n", "2,8", "--quiet"],
])
def test_argument_errors_exit_two(argv):
    assert run(argv) == 2


def test_numeric_failure_exits_three(monkeypatch):
    def broken(*args, **kwargs):
        raise ConvergenceError("no convergence")

    monkeypatch.setattr(pipeline, "cdf_table", broken)
    assert run(["cdf", "--n", "1", "--grid", "0:1:4", "--quiet"]) == 3


# -------------------- VERIFY --------------------

def test_verify_json_report(outputs):
    code = run(["verify", "--n-max", "3", "--r", "1", "--format", "json",
                "--output", "report.json", "--quiet"])
    assert code == 0
    payload = json.loads((outputs / "report.json").read_text())
    assert payload["pass"] is True
    assert payload["suite"] == "verify"
    assert all(set(c) == {"name", "anchor", "max_err", "tol", "pass"} for c in payload["checks"])
    names = [c["name"] for c in payload["checks"]]
    assert names == sorted(names)


def test_verify_default_grid_passes(outputs):
    code = run(["verify", "--n-max", "8", "--r", "0.5,1,2", "--format", "json",
                "--output", "full.json", "--quiet"])
    assert code == 0
    payload = json.loads((outputs / "full.json").read_text())
    skipped = [c for c in payload["informational"] if c["name"].startswith("resolvent_derivative_skipped")]
    assert skipped and all(c["tol"] is None for c in skipped)


def test_verify_csv_report(capsys):
    code = run(["verify", "--n-max", "2", "--r", "1", "--format", "csv",
                "--no-informational", "--quiet"])
    assert code == 0
    assert capsys.readouterr().out.startswith("name,anchor,max_err,tol,pass\n")


# -------------------- MONTE CARLO --------------------

def test_mc_loe_is_reproducible(outputs):
    args = ["mc-loe", "--n", "1", "--samples", "2000", "--seed", "7",
            "--ks-threshold", "0.05", "--workers", "1", "--quiet"]
    assert run(args + ["--output", "one.json"]) == 0
    assert run(args + ["--output", "two.json"]) == 0
    first = (outputs / "one.json").read_bytes()
    assert first == (outputs / "two.json").read_bytes()

    payload = json.loads(first)
    assert payload["suite"] == "mc-loe"
    assert payload["seed"] == 7
    assert len(payload["checks"]) == 1


def test_mc_loe_threshold_failure_exits_one():
    args = ["mc-loe", "--n", "1", "--samples", "200", "--ks-threshold", "0",
            "--workers", "1", "--quiet", "--output", "-"]
    assert run(args) == 1


def test_mc_bridges_small_run(capsys):
    code = run(["mc-bridges", "--n", "1", "--samples", "500", "--steps", "100",
                "--grid-kind", "t", "--ks-threshold", "0.1", "--workers", "1", "--quiet"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["suite"] == "mc-bridges"
    assert payload["checks"][0]["name"].startswith("ks[bridges-N1-K100")


# -------------------- TW LIMIT --------------------

def test_tw_limit_csv_blocks(outputs):
    code = run(["tw-limit", "--n", "8", "--grid=-2:1:4", "--output", "tw.csv", "--quiet"])
    assert code == 0
    lines = (outputs / "tw.csv").read_text().splitlines()
    assert lines[0] == "# N=8"
    assert lines[1] == "s,G_N,F_GOE,abs_err"
    assert len(lines) == 6


def test_tw_limit_json(capsys):
    assert run(["tw-limit", "--n", "4,8", "--grid=-1:1:3", "--format", "json", "--quiet"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert [b["N"] for b in payload["blocks"]] == [4, 8]
    assert all(b["matched_diff"] <= 1e-9 for b in payload["blocks"])


# -------------------- WRITERS --------------------

def test_atomic_write_leaves_no_temp_files(tmp_path):
    target = tmp_path / "x.json"
    writers.write_atomic(target, "{}\n")
    writers.write_atomic(target, "[]\n")
    assert target.read_text() == "[]\n"
    assert [p.name for p in tmp_path.iterdir()] == ["x.json"]


def test_resolve_output(outputs):
    assert writers.resolve_output("-") is None
    assert writers.resolve_output("a.csv") == outputs / "a.csv"
    with pytest.raises(ArgumentError):
        writers.serialize(object(), "csv")
