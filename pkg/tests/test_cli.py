from __future__ import annotations

import cmath
import csv
import io
import json
import math

import pytest

from sllab import catalog
from sllab.cli import load_problem_file, main, parse_complex

FREE_DENSITY = {"expr": "1/(pi*sqrt(s))", "interval": [0.0, None], "tail_exponent": -0.5,
                "edge_exponent": [-0.5, None]}


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def _write(tmp_path, data, name="problem.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_builtins_load_and_validate():
    for name in catalog.builtin_names():
        data = load_problem_file(name)
        assert data["name"] == name


def test_parse_complex():
    assert parse_complex("0.1*i") == 0.1j
    assert parse_complex("1+i") == 1 + 1j
    assert parse_complex("-2") == -2


def test_mfun_decaying_weight(capsys):
    assert main(["mfun", "paper-sec5", "--lambda", "i", "--lambda", "1+i"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 4
    plus = [r for r in rows if r["function"] == "M+"]
    for r in plus:
        lam = complex(float(r["re_lambda"]), float(r["im_lambda"]))
        val = complex(float(r["re_value"]), float(r["im_value"]))
        exact = -1 / lam + 1 / cmath.sqrt(-lam)
        assert abs(val - exact) <= 1e-6 * abs(exact)
        assert float(r["error_bound"]) <= 1e-7
    minus = [r for r in rows if r["function"] == "M-"]
    val = complex(float(minus[0]["re_value"]), float(minus[0]["im_value"]))
    assert abs(val - (-1 / 1j - 1 / cmath.sqrt(1j))) <= 1e-6


def test_mfun_writes_file(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["mfun", "free", "--lambda", "i", "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    val = complex(float(rows[0]["re_value"]), float(rows[0]["im_value"]))
    assert val == pytest.approx(1 / cmath.sqrt(-1j), abs=1e-9)
    assert len(rows[0]["re_value"].lstrip("-0.")) <= 12


def test_scan_verdicts(capsys, tmp_path):
    assert main(["scan", "paper-sec5"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "similarity-excluded-near-0"
    prefix = str(tmp_path / "scan")
    assert main(["scan", "free", "--out", prefix, "--eps-decades", "3"]) == 0
    assert capsys.readouterr().out.strip() == "no-obstruction-found"
    assert json.loads((tmp_path / "scan.json").read_text())["verdict"] == "no-obstruction-found"
    assert (tmp_path / "scan.csv").read_text().startswith("regime,eps,theta")


def test_string_shift(capsys, tmp_path):
    assert main(["string-shift", "paper-sec5", "--x-max", "5", "--n-points", "6"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert float(rows[5]["density"]) == pytest.approx(16 ** (-4 / 3), abs=1e-10)
    assert float(rows[5]["M"]) == pytest.approx(1 - 16 ** (-1 / 3), abs=1e-11)
    prefix = str(tmp_path / "shift")
    assert main(["string-shift", "paper-sec5", "--out", prefix]) == 0
    assert json.loads((tmp_path / "shift.json").read_text())["mass_expr"] == "1-(3*x+1)^(-1/3)"


def test_string_shift_negative_constant_is_numeric_error(capsys):
    assert main(["string-shift", "paper-sec5", "--c", "-1"]) == 2
    assert "numerical error" in capsys.readouterr().err


def test_eigtest_and_roots(capsys):
    assert main(["eigtest", "paper-sec6.1"]) == 0
    assert capsys.readouterr().out.strip() == "simple_eigenvalue"
    assert main(["roots", "toy-roots"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 1
    assert float(rows[0]["re"]) == pytest.approx(0.0, abs=1e-10)
    assert float(rows[0]["im"]) == pytest.approx(1.0, abs=1e-10)
    assert main(["roots", "paper-sec5"]) == 0
    assert _rows(capsys.readouterr().out) == []


def test_invert(capsys):
    assert main(["invert", "paper-sec5", "--interval", "1", "4", "--n-points", "4"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert float(rows[-1]["tau"]) == pytest.approx(2 / math.pi, abs=1e-2)


def test_gl_table(capsys):
    assert main(["gl", "paper-sec6.2", "--x-max", "2", "--n-points", "3"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert [r["x"] for r in rows] == ["0", "1", "2"]
    # q at x = 1 from u = 2: 6 (16 - 8) / 100
    assert float(rows[1]["q"]) == pytest.approx(0.48, abs=1e-9)


def test_gl_singular_exit_code(tmp_path, capsys):
    data = {"name": "singular",
            "gl": {"measure": {"density": FREE_DENSITY},
                   "reference": {"atoms": [{"s": 0.0, "w": 1.0}], "density": FREE_DENSITY},
                   "x_max": 2.0, "n_points": 3}}
    assert main(["gl", _write(tmp_path, data)]) == 3
    captured = capsys.readouterr()
    assert "singular" in captured.err
    assert _rows(captured.out)[1]["flag"] == "singular"


def test_input_errors(tmp_path, capsys):
    assert main(["mfun", str(tmp_path / "missing.json")]) == 1
    assert main(["mfun", _write(tmp_path, {"name": "x", "bogus": 1})]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["mfun", str(bad)]) == 1
    assert main(["mfun", _write(tmp_path, {"name": "empty"}, "empty.json")]) == 1
    err = capsys.readouterr().err
    assert err.count("error:") == 4
