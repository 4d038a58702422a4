import json
import math

import numpy as np
import pytest

from eqfield.cli import main
from eqfield.field import FieldParams, sample_max
from eqfield.streams import Stream


def run(argv):
    return main(argv)


def test_field_max_rows_match_library(tmp_path):
    out = tmp_path / "fm.csv"
    assert run(["field-max", "--n", "20", "--r", "0.2", "--reps", "5",
                "--seed", "7", "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "replicate,max,standardized"
    assert len(lines) == 6
    for i, line in enumerate(lines[1:]):
        idx, value, _std = line.split(",")
        assert int(idx) == i
        want = sample_max(FieldParams(n=20, r=0.2), Stream(7, (i,)))
        assert float(value) == want  # 17 significant digits round-trip


def test_repeated_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["field-max", "--n", "30", "--r", "0.1", "--reps", "20", "--seed", "3"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_worker_count_invariance(tmp_path):
    a, b = tmp_path / "w1.csv", tmp_path / "w2.csv"
    args = ["limit-sample", "--lam", "0.5", "--K", "256", "--reps", "16",
            "--seed", "11"]
    assert run(args + ["--out", str(a), "--workers", "1"]) == 0
    assert run(args + ["--out", str(b), "--workers", "2"]) == 0
    assert a.read_text() == b.read_text()


def test_sidecar_records_config_and_version(tmp_path):
    out = tmp_path / "fm.csv"
    assert run(["field-max", "--n", "12", "--r", "0.0", "--reps", "2",
                "--seed", "9", "--out", str(out)]) == 0
    side = json.loads((tmp_path / "fm.csv.json").read_text())
    assert side["n"] == 12
    assert side["seed"] == 9
    assert side["command"] == "field-max"
    assert "version" in side


def test_config_file_defaults_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nn = 12\nr = 0.1\nreps = 3\n")
    out = tmp_path / "c.csv"
    assert run(["field-max", "--config", str(cfg), "--reps", "4",
                "--seed", "5", "--out", str(out)]) == 0
    side = json.loads((tmp_path / "c.csv.json").read_text())
    assert side["n"] == 12
    assert side["reps"] == 4  # explicit flag wins over config value


def test_chen_stein_table(tmp_path):
    out = tmp_path / "cs.csv"
    assert run(["chen-stein", "--n-grid", "100,50", "--r", "0.1", "--y", "0",
                "--slack", "1.0", "--seed", "1", "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0].startswith("n,r,y,p12,mean,b1")
    ns = [int(line.split(",")[0]) for line in lines[1:]]
    assert ns == [50, 100]


def test_spectra_verify_all_ok(tmp_path):
    out = tmp_path / "sp.csv"
    assert run(["spectra-verify", "--p-min", "4", "--p-max", "6",
                "--b-list", "0,0.25", "--seed", "1", "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "p,b,max_deviation,ok"
    assert all(line.split(",")[-1] == "1" for line in lines[1:])


def test_fwer_table(tmp_path):
    out = tmp_path / "fw.csv"
    assert run(["fwer", "--n", "50", "--r", "0.1", "--alphas", "0.05,0.2",
                "--reps", "1000", "--seed", "2", "--out", str(out)]) == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "alpha,q_alpha,u,rate,half_width"
    rows = [line.split(",") for line in lines[1:]]
    assert float(rows[0][2]) > float(rows[1][2])  # u decreasing in alpha


def test_ks_round_trip(tmp_path):
    sample = tmp_path / "s.csv"
    rng = np.random.default_rng(0)
    sample.write_text("value\n" + "\n".join(
        "%.17g" % v for v in rng.standard_normal(2000)) + "\n")
    out = tmp_path / "ks.csv"
    assert run(["ks", "--sample-a", str(sample), "--cdf", "normal",
                "--seed", "1", "--out", str(out)]) == 0
    header, row = out.read_text().strip().split("\n")
    assert header == "statistic,n1,n2,location"
    stat, n1, n2, _loc = row.split(",")
    assert float(stat) < 0.05
    assert int(n1) == 2000 and int(n2) == -1


def test_ks_two_sample_mode(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write_text("v\n1\n2\n3\n")
    b.write_text("v\n10\n11\n")
    out = tmp_path / "ks2.csv"
    assert run(["ks", "--sample-a", str(a), "--sample-b", str(b),
                "--seed", "1", "--out", str(out)]) == 0
    assert out.read_text().strip().split("\n")[1].split(",")[0] == "1"


def test_exit_code_config_error(tmp_path):
    out = tmp_path / "x.csv"
    # domain error: r outside [0, 1/2]
    assert run(["field-max", "--n", "10", "--r", "0.9", "--reps", "2",
                "--seed", "1", "--out", str(out)]) == 2
    sample = tmp_path / "a.csv"
    sample.write_text("v\n1\n2\n")
    assert run(["ks", "--sample-a", str(sample), "--cdf", "weibull",
                "--seed", "1", "--out", str(out)]) == 2


def test_exit_code_io_error(tmp_path):
    out = tmp_path / "x.csv"
    assert run(["ks", "--sample-a", str(tmp_path / "missing.csv"),
                "--cdf", "normal", "--seed", "1", "--out", str(out)]) == 4


def test_exit_code_numeric_error(tmp_path, monkeypatch):
    import eqfield.chenstein as cs
    from eqfield.errors import NumericError

    def boom(*a, **k):
        raise NumericError("quadrature did not converge")

    monkeypatch.setattr(cs, "report", boom)
    out = tmp_path / "x.csv"
    assert run(["chen-stein", "--n-grid", "100", "--r", "0.1", "--y", "0",
                "--seed", "1", "--out", str(out)]) == 3


def test_seed_is_mandatory(tmp_path, capsys):
    with pytest.raises(SystemExit):
        run(["field-max", "--n", "10", "--r", "0.1", "--reps", "2",
             "--out", str(tmp_path / "x.csv")])
