import csv
import io
import json
import math
from pathlib import Path

import pytest

from wignerfriend.cli import RunManifest, cmd_scan, main, parse_number

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_number():
    assert parse_number("pi/16") == pytest.approx(math.pi / 16)
    assert parse_number("-2*pi") == pytest.approx(-2 * math.pi)
    with pytest.raises(Exception):
        parse_number("__import__('os')")


def test_scan_default_grid(capsys):
    code, out, err = run(capsys, "scan")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 9
    feasible = [float(r["theta"]) for r in rows if r["feasible"] == "1"]
    assert feasible == pytest.approx([0, math.pi / 4, math.pi / 2])
    assert "feasible=3" in err


def test_scan_phase_sweep_at_bell_angle(capsys):
    code, out, _ = run(capsys, "scan", "--grid", "pi/4:pi/4:1", "--phases", "8", "--format", "json")
    assert code == 0
    rows = json.loads(out)
    assert len(rows) == 8
    assert all(r["feasible"] == 1 for r in rows)


def test_scan_empty_grid_is_config_error(capsys):
    code, _, err = run(capsys, "scan", "--grid", "1:0:0.1")
    assert code == 3
    assert "empty grid" in err


def test_scan_bad_flag_is_config_error(capsys):
    assert run(capsys, "scan", "--phases", "zero")[0] == 3


def test_scan_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, "scan", "--grid", "0:pi/2:pi/32", "--out", str(a))[0] == 0
    assert run(capsys, "scan", "--grid", "0:pi/2:pi/32", "--out", str(b), "--jobs", "2")[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_unwritable_output_is_config_error(tmp_path, capsys):
    code, _, err = run(capsys, "scan", "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == 3 and "cannot write" in err


def test_verify_passes(capsys):
    code, out, _ = run(capsys, "verify", "--samples", "40")
    assert code == 0
    report = json.loads(out)
    assert report["passed"] and len(report["suites"]) >= 10


def test_verify_zero_tolerance_fails(capsys):
    code, _, err = run(capsys, "verify", "--samples", "20", "--tol", "0")
    assert code == 1
    assert "invariant failed" in err


def test_verify_bell_case(capsys):
    code, out, _ = run(capsys, "verify", "--case", "bell")
    assert code == 0
    assert "0.5" in out


def test_predict_case1(capsys):
    code, out, _ = run(capsys, "predict", "--config", str(CONFIGS / "case1.json"))
    assert code == 0
    rep = json.loads(out)
    assert rep["conditionals"] == {"U": {"U": 1.0, "D": 0.0}, "D": {"U": 0.0, "D": 1.0}}


def test_predict_csv(capsys):
    code, out, _ = run(capsys, "predict", "--config", str(CONFIGS / "bell.json"), "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["f1"] + r["f2"] for r in rows} == {"UU", "UD", "DU", "DD"}


def test_predict_no_joint_exit_code(capsys):
    code, _, err = run(capsys, "predict", "--config", str(CONFIGS / "theta-pi8.json"))
    assert code == 2
    assert "NoJointDistribution" in err


def test_compare_gap(capsys):
    code, out, _ = run(capsys, "compare", "--config", str(CONFIGS / "theta-pi8-plus.json"))
    assert code == 0
    rep = json.loads(out)
    assert rep["max_gap"] == pytest.approx(0.25, abs=1e-12)
    assert rep["p_f2_unitary"]["U"] == pytest.approx(0.75, abs=1e-12)


def test_compare_sampling_needs_seed(capsys):
    code, _, err = run(capsys, "compare", "--config", str(CONFIGS / "bell.json"), "--shots", "10")
    assert code == 3 and "--seed" in err


def test_compare_sampling_csv(capsys):
    code, out, _ = run(capsys, "compare", "--config", str(CONFIGS / "hadamard.json"),
                       "--shots", "1000", "--seed", "5", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert sum(int(r["count"]) for r in rows) == 1000
    assert {r["w"] for r in rows} == {"-"}


def test_missing_config_is_config_error(tmp_path, capsys):
    code, _, err = run(capsys, "predict", "--config", str(tmp_path / "nope.json"))
    assert code == 3
    assert run(capsys, "compare")[0] == 3


def test_invalid_config_is_config_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"alpha": [1, 0], "beta": [1, 0], "a": [1, 0], "b": [0, 0],
                               "variant": "measurement"}))
    assert run(capsys, "predict", "--config", str(bad))[0] == 3
    bad.write_text("{not json")
    assert run(capsys, "predict", "--config", str(bad))[0] == 3


def test_cmd_scan_with_manifest(tmp_path):
    out = tmp_path / "scan.csv"
    assert cmd_scan(RunManifest("scan", grid="0:pi/2:pi/8", out=str(out))) == 0
    assert out.read_text().splitlines()[0] == \
        "theta,re_a,im_a,re_b,im_b,commutator_norm,feasible,residual,iters"
