import json
from fractions import Fraction
from importlib import resources

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regverify.cli import REFERENCES, main, rationalize, run_check, run_lvalue, run_regulator, run_verify
from regverify.lfunc import LSpecError


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return path


def test_rationalize_examples():
    assert rationalize(mp.mpf("0.333333333333"), 1, max_den=100, tol=1e-10) == Fraction(1, 3)
    assert rationalize(mp.pi, 1, max_den=50, tol=1e-10) is None
    assert rationalize(-13, 12, digits=20) == Fraction(-13, 12)
    with pytest.raises(ZeroDivisionError):
        rationalize(1, 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(-60, 60).filter(bool), st.integers(1, 60), st.floats(1e-6, 1e6).filter(bool),
       st.booleans())
def test_rationalize_scale_invariance(p, q, c, negate):
    c = -c if negate else c
    with mp.workdps(40):
        y = mp.e
        x = mp.mpf(p) / q * y
        assert rationalize(x, y, digits=25) == rationalize(c * x, c * y, digits=25) == Fraction(p, q)


def test_check_on_preset(tmp_path):
    path = write(tmp_path, "c.json", {"N": 2, "preset": {"family": "ex1", "n": 3}})
    report = run_check(path, digits=20)
    assert report.passed and report.data["hypotheses"]["passed"]


def test_check_failing_curve_exit_code(tmp_path, capsys):
    path = write(tmp_path, "c.json", {"N": 2, "preset": {"family": "ex2", "n": 4, "l": 1}})
    assert main(["check", str(path), "--digits", "15"]) == 1
    assert json.loads(capsys.readouterr().out)["passed"] is False


def test_regulator_all_methods(tmp_path):
    path = write(tmp_path, "c.json", {"N": 2, "f": [0, -1, 1, 1]})
    report = run_regulator(path, digits=20)
    names = [r["name"] for r in report.data["records"]]
    assert names == ["regulator.series", "regulator.integral", "regulator.direct"]
    assert report.data["checks"][0]["name"] == "max pairwise deviation" and report.passed


def test_regulator_rejects_series_for_other_symbols(tmp_path):
    path = write(tmp_path, "c.json", {"N": 2, "f": [0, -1, 1, 1]})
    assert main(["regulator", str(path), "--symbol", "Y-X^N", "--methods", "series"]) == 2


def test_lvalue_malformed_names_field(tmp_path, capsys):
    spec = json.loads(resources.files("regverify").joinpath("data", "e23_l.json").read_text())
    spec["conductor"] = "twenty-three"
    path = write(tmp_path, "l.json", spec)
    with pytest.raises(LSpecError, match="conductor"):
        run_lvalue(path, 1, digits=10)
    assert main(["lvalue", str(path), "--order", "1"]) == 2
    assert "conductor" in capsys.readouterr().err


def test_lvalue_and_report_determinism(tmp_path):
    text = resources.files("regverify").joinpath("data", "e23_l.json").read_text()
    path = tmp_path / "l.json"
    path.write_text(text)
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["lvalue", str(path), "--order", "1", "--digits", "12", "--out", str(out1)]) == 0
    assert main(["lvalue", str(path), "--order", "1", "--digits", "12", "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    value = json.loads(out1.read_text())["records"][0]["value"]
    assert abs(mp.mpf(value) - mp.mpf(REFERENCES["e23.L1"])) < 1e-10


def test_verify_e23_report(tmp_path):
    report = run_verify("e23", digits=20)
    assert report.passed
    assert [r["rational"] for r in report.data["ratios"]] == ["1/3"]
    assert all(c["provenance"] == "reference" for c in report.data["comparisons"])
    assert all("elapsed" not in r for r in report.data["records"])
    assert run_verify("e23", digits=20).to_json() == report.to_json()


def test_verify_argument_errors():
    with pytest.raises(ValueError):
        run_verify("e99")
    with pytest.raises(ValueError):
        run_verify("e23", digits=60)
    with pytest.raises(SystemExit):
        main(["verify", "e99"])
