"""
Unit tests for checks, reports and their deterministic rendering.
"""

import json
import math

import numpy as np
import pytest

from holab.exceptions import DomainEscapeError
from holab.scenario.report import (
    Check,
    Report,
    format_float,
    render_json,
    render_text,
    to_jsonable,
    write_report,
)


@pytest.fixture
def report():
    r = Report(scenario="demo", kind="lie_pair", command="bott", seed=0, tolerances={"closure": 1e-9})
    r.add(Check.at_most("flatness", 1e-12, 1e-10))
    r.add(Check.holds("ideal_expected", True))
    return r


class TestCheck:
    """Test check constructors."""

    @pytest.mark.parametrize(
        "value,tolerance,passed",
        [(0.5, 1.0, True), (1.0, 1.0, True), (1.5, 1.0, False), (math.nan, 1.0, False)],
    )
    def test_at_most(self, value, tolerance, passed):
        """Test value ≤ tolerance, with NaN failing."""
        check = Check.at_most("x", value, tolerance)
        assert check.passed is passed

    def test_holds(self):
        """Test boolean checks record 0/1 against tolerance 0."""
        assert Check.holds("ok", True).value == 0.0
        bad = Check.holds("bad", False, deviation=0.2)
        assert (bad.value, bad.tolerance, bad.passed) == (1.0, 0.0, False)
        assert bad.detail == {"deviation": 0.2}

    def test_numpy_inputs(self):
        """Test numpy scalars become plain floats and bools."""
        check = Check.at_most("x", np.float64(0.25), 1.0)
        assert type(check.value) is float
        assert type(check.passed) is bool


class TestReport:
    """Test pass/fail aggregation."""

    def test_passed(self, report):
        """Test a report with only passing checks passes."""
        assert report.passed

    def test_failed_check(self, report):
        """Test one failed check fails the report."""
        report.add(Check.at_most("morphism", 1e-3, 1e-9))
        assert not report.passed

    def test_error(self, report):
        """Test a recorded numerical error fails the report."""
        report.error("foliation", DomainEscapeError("integration left the domain box", [1.0, 5.0]))
        assert not report.passed
        assert report.errors == [{
            "command": "foliation",
            "type": "DomainEscapeError",
            "message": "integration left the domain box at [1.0, 5.0]",
        }]

    def test_skipped_does_not_fail(self, report):
        """Test skipped checks are listed but do not fail the report."""
        report.skipped.append("differentiation_ratio[0]")
        assert report.passed


class TestRendering:
    """Test report.json and report.txt."""

    def test_jsonable(self):
        """Test numpy arrays, tuples and special floats convert."""
        value = {"m": np.eye(2), "t": (1, np.int64(2)), "b": np.bool_(True), "bad": [math.inf, -math.inf, math.nan]}
        assert to_jsonable(value) == {
            "m": [[1.0, 0.0], [0.0, 1.0]],
            "t": [1, 2],
            "b": True,
            "bad": ["inf", "-inf", "nan"],
        }

    def test_float_precision(self):
        """Test floats survive conversion unchanged."""
        assert to_jsonable(math.e) == math.e
        assert to_jsonable(0.1) == 0.1

    @pytest.mark.parametrize(
        "value,text",
        [(0.1, "0.10000000000000001"), (-2.0, "-2"), (1e-12, "9.9999999999999998e-13"), (math.e, "2.7182818284590451")],
    )
    def test_format_float(self, value, text):
        """Test floats are written with 17 significant digits."""
        assert format_float(value) == text

    def test_json_seventeen_digits(self, report):
        """Test report.json prints 0.1 as 0.10000000000000001 and reads back exactly."""
        report.add(Check.at_most("bott_flatness", 0.1, 1.0))
        text = render_json(report)
        assert '"value": 0.10000000000000001' in text
        assert json.loads(text)["checks"][-1]["value"] == 0.1

    def test_json_sorted_and_stable(self, report):
        """Test identical reports render to identical bytes with sorted keys."""
        report.results["bott"] = {"z": 1.0, "a": np.array([[-2.0]])}
        text = render_json(report)
        assert text == render_json(report)
        data = json.loads(text)
        assert list(data) == sorted(data)
        assert data["passed"] is True
        assert data["results"]["bott"]["a"] == [[-2.0]]
        assert data["checks"][0]["name"] == "flatness"

    def test_nan_value(self, report):
        """Test NaN check values are written as strings."""
        report.add(Check.at_most("differentiation[0]", math.nan, 1e-7))
        data = json.loads(render_json(report))
        assert data["checks"][-1]["value"] == "nan"
        assert data["passed"] is False

    def test_text(self, report):
        """Test the text summary lists each check and the verdict."""
        report.add(Check.at_most("morphism", 1e-3, 1e-9))
        report.skipped.append("pairdemo")
        report.error("agree", DomainEscapeError("left", [0.0]))
        text = render_text(report)
        assert "scenario: demo (lie_pair)" in text
        assert "[PASS] flatness" in text
        assert "[FAIL] morphism" in text
        assert "[SKIP] pairdemo" in text
        assert "[ERROR] agree: DomainEscapeError" in text
        assert text.rstrip().endswith("3 checks, 1 failed, 1 errors: FAIL")

    def test_text_pass(self, report):
        """Test a passing report ends with PASS."""
        assert render_text(report).rstrip().endswith("2 checks, 0 failed, 0 errors: PASS")

    def test_write_report(self, report, tmp_path):
        """Test both files are written into a created directory."""
        out = tmp_path / "runs" / "first"
        assert write_report(report, out) == out
        assert json.loads((out / "report.json").read_text(encoding="utf-8"))["scenario"] == "demo"
        assert (out / "report.txt").read_text(encoding="utf-8") == render_text(report)
