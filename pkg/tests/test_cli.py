import csv
import hashlib
import json
import math

import pytest

from covertlink.cli import (
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_IO,
    EXIT_OK,
    _conv_grid,
    dispatch,
    emit_csv,
)


def read_rows(path):
    with open(path) as fh:
        rows = [r for r in csv.DictReader(line for line in fh if not line.startswith("#"))]
    return rows


def manifest_of(out_dir):
    return json.loads((out_dir / "manifest.json").read_text())


def test_grid_parsing():
    assert _conv_grid("1024") == (1024,)
    assert _conv_grid("256:4096:x4") == (256, 1024, 4096)
    assert _conv_grid("100:250:x2") == (100, 200)  # stops at the last point <= stop
    for bad in ("abc", "256:128:x2", "0:16:x2", "4:16:x1", "4:16", "-4"):
        with pytest.raises(ValueError):
            _conv_grid(bad)


def test_emit_csv_formats(tmp_path):
    path = tmp_path / "t.csv"
    emit_csv(
        [{"a": 1, "b": 0.1, "c": None, "d": True, "e": "x"}],
        path,
    )
    text = path.read_text()
    assert text.splitlines()[0] == "a,b,c,d,e"
    row = text.splitlines()[1].split(",")
    assert row == ["1", "0.10000000000000001", "", "1", "x"]
    # 17 significant digits round-trip doubles exactly
    assert float(row[1]) == 0.1

    with pytest.raises(ValueError):
        emit_csv([], path)
    with pytest.raises(ValueError):
        emit_csv([{"a": 1}, {"b": 2}], path)
    with pytest.raises(ValueError):
        emit_csv([{"a": "has,comma"}], path)


def test_bounds_subcommand_stdout(capsys):
    rc = dispatch(
        ["bounds", "--scheme", "gaussian", "--n", "10000", "--eps", "0.1",
         "--sigma-w-hat", "1"]
    )
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "P_f = 0.00282843" in out
    assert "tv bound = 0.1" in out


def test_bounds_csv_output(tmp_path):
    out = tmp_path / "b"
    rc = dispatch(["bounds", "--scheme", "sparse_bpsk", "--n", "1:1024:x4",
                   "--out", str(out)])
    assert rc == EXIT_OK
    rows = read_rows(out / "bounds.csv")
    assert rows[0]["feasible"] == "0" and rows[0]["min_feasible_n"] == "2"
    assert rows[1]["feasible"] == "1"
    assert float(rows[-1]["tv_bound"]) == pytest.approx(0.1, abs=1e-12)
    manifest = manifest_of(out)
    assert manifest["subcommand"] == "bounds"
    assert manifest["outputs"][0]["path"] == "bounds.csv"


def test_bounds_infeasible_everywhere_exit_code(tmp_path):
    rc = dispatch(["bounds", "--scheme", "sparse_bpsk", "--n", "1"])
    assert rc == EXIT_INFEASIBLE


def test_config_errors_exit_2(tmp_path):
    assert dispatch(["detect", "--n", "128", "--detector", "lrt",
                     "--trials", "100", "--out", str(tmp_path)]) == EXIT_CONFIG  # no seed
    assert dispatch(["reliability", "--n", "junk", "--seed", "1",
                     "--out", str(tmp_path)]) == EXIT_CONFIG
    assert dispatch(["detect", "--n", "128", "--detector", "lrt", "--seed", "1",
                     "--power", "0.1", "--eps", "0.1",
                     "--out", str(tmp_path)]) == EXIT_CONFIG
    assert dispatch(["bounds", "--n", "100", "--eps", "2.0"]) == EXIT_CONFIG
    assert dispatch(["nonsense"]) == EXIT_CONFIG


def test_config_file_merge_and_unknown_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 256\nscheme = bpsk  # inline comment\ntrials = 120\n")
    out = tmp_path / "out"
    rc = dispatch(["reliability", "--config", str(cfg), "--trials", "150",
                   "--seed", "3", "--out", str(out)])
    assert rc == EXIT_OK
    manifest = manifest_of(out)
    assert manifest["config"]["trials"] == "150"  # flag wins over file
    assert manifest["config"]["scheme"] == "bpsk"
    assert manifest["master_seed"] == 3

    cfg.write_text("mystery = 1\n")
    assert dispatch(["reliability", "--config", str(cfg), "--n", "256",
                     "--seed", "3", "--out", str(out)]) == EXIT_CONFIG
    cfg.write_text("no equals sign\n")
    assert dispatch(["reliability", "--config", str(cfg), "--n", "256",
                     "--seed", "3", "--out", str(out)]) == EXIT_CONFIG


def test_detect_with_explicit_power(tmp_path):
    out = tmp_path / "d"
    rc = dispatch(["detect", "--n", "256", "--detector", "radiometer",
                   "--power", "0.3", "--trials", "150", "--seed", "5",
                   "--out", str(out)])
    assert rc == EXIT_OK
    row = read_rows(out / "detect.csv")[0]
    assert row["detector"] == "radiometer"
    assert row["tv_bound"] == ""  # no budget attached on the explicit-power path
    assert float(row["alpha_bound"]) == 0.05


def test_detect_grid_rejected(tmp_path):
    rc = dispatch(["detect", "--n", "256:1024:x2", "--detector", "lrt",
                   "--eps", "0.1", "--seed", "5", "--out", str(tmp_path / "x")])
    assert rc == EXIT_CONFIG


def test_reliability_run_deterministic_and_reproducible(tmp_path):
    args = ["reliability", "--n", "256:1024:x4", "--scheme", "bpsk",
            "--trials", "100", "--message-bits", "4", "--seed", "3"]
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert dispatch(args + ["--out", str(out1)]) == EXIT_OK
    assert dispatch(args + ["--out", str(out2)]) == EXIT_OK

    csv1 = (out1 / "reliability.csv").read_bytes()
    assert csv1 == (out2 / "reliability.csv").read_bytes()

    m1, m2 = manifest_of(out1), manifest_of(out2)
    for m in (m1, m2):
        m.pop("started_utc")
        m.pop("finished_utc")
    assert m1 == m2
    assert m1["outputs"][0]["sha256"] == hashlib.sha256(csv1).hexdigest()
    assert m1["outputs"][0]["bytes"] == len(csv1)

    # the config echo alone reproduces the run byte for byte
    out3 = tmp_path / "r3"
    replay = ["reliability"]
    for key, value in m1["config"].items():
        replay += [f"--{key}", value]
    assert dispatch(replay + ["--out", str(out3)]) == EXIT_OK
    assert (out3 / "reliability.csv").read_bytes() == csv1


def test_reliability_infeasible_everywhere(tmp_path):
    rc = dispatch(["reliability", "--n", "1", "--scheme", "sparse_bpsk",
                   "--trials", "100", "--seed", "1",
                   "--out", str(tmp_path / "r")])
    assert rc == EXIT_INFEASIBLE
    rows = read_rows(tmp_path / "r" / "reliability.csv")
    assert rows[0]["feasible"] == "0"


def test_scaling_writes_slope_comment(tmp_path):
    out = tmp_path / "s"
    rc = dispatch(["scaling", "--n", "256:65536:x4", "--scheme", "gaussian",
                   "--message-bits", "4", "--spot-trials", "100",
                   "--spot-decode-trials", "100", "--seed", "7",
                   "--out", str(out)])
    assert rc == EXIT_OK
    lines = (out / "scaling.csv").read_text().splitlines()
    assert lines[-1].startswith("# fitted_slope=")
    manifest = manifest_of(out)
    slope = manifest["results"]["fitted_slope"]
    assert abs(slope - 0.5) < 0.03
    # the comment repeats the manifest value to full precision
    assert f"fitted_slope={slope:.17g}" in lines[-1]

    # recompute the fit from the emitted rows alone
    rows = read_rows(out / "scaling.csv")
    xs = [math.log2(float(r["n"])) for r in rows if r["feasible"] == "1"]
    ys = [math.log2(float(r["bits"])) for r in rows if r["feasible"] == "1"]
    xbar = sum(xs) / len(xs)
    ybar = sum(ys) / len(ys)
    slope_again = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys)) / sum(
        (x - xbar) ** 2 for x in xs
    )
    assert abs(slope_again - slope) < 1e-12


def test_converse_csv(tmp_path):
    out = tmp_path / "c"
    rc = dispatch(["converse", "--n", "256:1024:x4", "--trials", "150",
                   "--seed", "11", "--out", str(out)])
    assert rc == EXIT_OK
    rows = read_rows(out / "converse.csv")
    assert len(rows) == 2
    for row in rows:
        assert row["beta_bound_vacuous"] == "1"
        assert float(row["alpha_hat"]) <= 0.05 + 3.0 * float(row["alpha_ci"])
        assert float(row["goodput_upper"]) >= 0.0


def test_output_io_failure(tmp_path):
    blocker = tmp_path / "file.txt"
    blocker.write_text("in the way")
    rc = dispatch(["reliability", "--n", "256", "--trials", "100", "--seed", "1",
                   "--out", str(blocker / "nested")])
    assert rc == EXIT_IO


def test_help_exits_cleanly():
    assert dispatch(["bounds", "--help"]) == EXIT_OK
    assert dispatch(["--help"]) == EXIT_OK
