"""
Unit tests for building scenario objects and running commands.
"""

import copy

import numpy as np
import pytest

from holab.exceptions import ScenarioError
from holab.holonomy.foliation import GraphFoliation, SpannedFoliation
from holab.scenario.catalog import builtin_scenario
from holab.scenario.runner import (
    FOLIATION_COMMANDS,
    LIE_COMMANDS,
    ScenarioRunner,
    build_foliation,
    build_pair,
    run_scenario,
)
from holab.scenario.schema import Scenario

# sl(2) in the basis (H, E, F): [H,E] = 2E, [H,F] = -2F, [E,F] = H.
SL2_TENSOR = [[[0.0] * 3 for _ in range(3)] for _ in range(3)]
for (i, j, m, value) in [(0, 1, 1, 2.0), (0, 2, 2, -2.0), (1, 2, 0, 1.0)]:
    SL2_TENSOR[i][j][m] = value
    SL2_TENSOR[j][i][m] = -value


def lie_doc(**section):
    payload = {"algebra": {"catalog": "sl2"}, "subalgebra": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]}
    payload.update(section)
    return {"name": "custom", "kind": "lie_pair", "lie_pair": payload}


def foliation_doc(**section):
    payload = {
        "model": "ode_graph",
        "box": [[-1.0, 2.0], [-1.0, 1.0]],
        "rhs": ["y"],
        "paths": [{"start": [0.0, 0.0], "interval": [0.0, 1.0]}],
    }
    payload.update(section)
    return {"name": "custom_fol", "kind": "foliation", "foliation": payload}


def scenario(doc):
    return Scenario.from_dict(doc)


class TestBuildPair:
    """Test Lie pairs built from payloads."""

    def test_catalog(self):
        """Test a catalog algebra with a matrix realization."""
        pair = build_pair(lie_doc()["lie_pair"], scenario(lie_doc()).tolerances())
        assert (pair.dim, pair.sub_dim) == (3, 2)
        assert pair.realization is not None

    def test_structure_constants(self):
        """Test an abstract algebra has no realization."""
        doc = lie_doc(algebra={"structure_constants": SL2_TENSOR})
        pair = build_pair(doc["lie_pair"], scenario(doc).tolerances())
        assert pair.realization is None

    def test_explicit_basis(self):
        """Test a matrix basis given inline."""
        basis = [[[1.0, 0.0], [0.0, -1.0]], [[0.0, 1.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]
        doc = lie_doc(algebra={"basis": basis})
        assert build_pair(doc["lie_pair"], scenario(doc).tolerances()).realization is not None

    @pytest.mark.parametrize(
        "section,pointer",
        [
            ({"algebra": {"catalog": "e8"}}, "/lie_pair/algebra"),
            ({"subalgebra": [[1.0, 0.0]]}, "/lie_pair/subalgebra/0"),
            ({"subalgebra": [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]}, "/lie_pair/subalgebra"),
            ({"complement": [[1.0, 0.0, 0.0, 0.0]]}, "/lie_pair/complement/0"),
            ({"elements": {"h": [[0.0, 0.0, 1.0]]}}, "/lie_pair/elements/h/0"),
            ({"elements": {"g": [[0.0, 1.0]]}}, "/lie_pair/elements/g/0"),
        ],
    )
    def test_errors(self, section, pointer):
        """Test inconsistent payloads name the offending entry."""
        doc = lie_doc(**section)
        with pytest.raises(ScenarioError) as info:
            build_pair(doc["lie_pair"], scenario(doc).tolerances())
        assert info.value.pointer == pointer


class TestBuildFoliation:
    """Test foliation models built from payloads."""

    def test_graph(self):
        """Test an ode_graph payload with one path."""
        doc = foliation_doc()
        model, paths = build_foliation(doc["foliation"], scenario(doc).tolerances())
        assert isinstance(model, GraphFoliation)
        assert len(paths) == 1
        assert paths[0][1] == {}

    def test_spanned(self):
        """Test the exp-sheet built-in builds three flow-word paths."""
        sheet = builtin_scenario("fol_exp_sheet")
        model, paths = build_foliation(sheet.payload, sheet.tolerances())
        assert isinstance(model, SpannedFoliation)
        assert [p.is_interval for p, _ in paths] == [False, False, False]

    @pytest.mark.parametrize(
        "section,pointer,message",
        [
            ({"rhs": ["y + z"]}, "/foliation/rhs/0", "unknown identifier 'z'"),
            ({"paths": [{"start": [0.0], "interval": [0.0, 1.0]}]}, "/foliation/paths/0/start", "expected 2"),
            ({"paths": [{"start": [0.0, 0.0], "word": [[0, 1.0]]}]}, "/foliation/paths/0", "base intervals"),
            ({"homotopic": [[0, 3]]}, "/foliation/homotopic/0", "out of range"),
            ({"box": [[2.0, -1.0], [-1.0, 1.0]]}, "/foliation", "low < high"),
            ({"model": "spanned"}, "/foliation", "need 'fields'"),
            (
                {"paths": [{"start": [0.0, 0.0], "interval": [0.0, 1.0], "expected": {"closed_form": "q*y"}}]},
                "/foliation/paths/0/expected/closed_form",
                "unknown identifier 'q'",
            ),
        ],
    )
    def test_errors(self, section, pointer, message):
        """Test bad foliation payloads are scenario errors with pointers."""
        doc = foliation_doc(**section)
        with pytest.raises(ScenarioError, match=message) as info:
            build_foliation(doc["foliation"], scenario(doc).tolerances())
        assert info.value.pointer == pointer

    def test_non_involutive(self):
        """Test fields that do not close under the bracket are rejected."""
        doc = foliation_doc(
            model="spanned",
            box=[[-1.0, 1.0]] * 3,
            fields=[["1", "0", "0"], ["0", "1", "x"]],
            paths=[{"start": [0.0, 0.0, 0.0], "word": [[0, 0.1]]}],
        )
        del doc["foliation"]["rhs"]
        with pytest.raises(ScenarioError, match="involutive"):
            build_foliation(doc["foliation"], scenario(doc).tolerances())


class TestRunner:
    """Test command dispatch and report contents."""

    def test_applicable_lie(self):
        """Test realized pairs get every Lie command."""
        assert ScenarioRunner(builtin_scenario("sl2_borel")).applicable() == LIE_COMMANDS

    def test_applicable_abstract(self):
        """Test abstract pairs only get the algebraic commands."""
        runner = ScenarioRunner(scenario(lie_doc(algebra={"structure_constants": SL2_TENSOR})))
        assert runner.applicable() == ("bott", "differentiate")

    def test_applicable_foliations(self):
        """Test pairdemo needs a graph model."""
        assert ScenarioRunner(builtin_scenario("fol_linear")).applicable() == FOLIATION_COMMANDS
        assert ScenarioRunner(builtin_scenario("fol_exp_sheet")).applicable() == ("foliation",)

    def test_unknown_command(self):
        """Test unknown commands are rejected."""
        with pytest.raises(ScenarioError, match="unknown command 'frobnicate'"):
            run_scenario(builtin_scenario("sl2_borel"), "frobnicate")

    @pytest.mark.parametrize(
        "name,command",
        [("sl2_borel", "foliation"), ("fol_linear", "bott"), ("fol_exp_sheet", "pairdemo")],
    )
    def test_inapplicable_command(self, name, command):
        """Test commands for the other kind of scenario are rejected."""
        with pytest.raises(ScenarioError, match="does not apply"):
            run_scenario(builtin_scenario(name), command)

    def test_inapplicable_group_command(self):
        """Test group commands on an abstract pair are rejected."""
        doc = lie_doc(algebra={"structure_constants": SL2_TENSOR})
        with pytest.raises(ScenarioError, match="does not apply"):
            run_scenario(scenario(doc), "holonomy")

    def test_bott(self):
        """Test the Bott command on the Borel pair."""
        report = run_scenario(builtin_scenario("sl2_borel"), "bott")
        assert report.passed
        names = [c.name for c in report.checks]
        assert names[:2] == ["jacobi", "closure"]
        assert "bott_expected[0]" in names and "bott_flatness" in names
        assert report.results["bott"]["bott"][0]["matrix"][0, 0] == pytest.approx(-2.0)

    def test_all_abstract_skips_group_commands(self):
        """Test 'all' records the commands it could not run."""
        report = run_scenario(scenario(lie_doc(algebra={"structure_constants": SL2_TENSOR})), "all")
        assert set(report.results) == {"bott", "differentiate"}
        assert {"holonomy", "agree", "normality", "rightinv"} <= set(report.skipped)
        assert report.passed

    def test_all_spanned_skips_pairdemo(self):
        """Test 'all' on a spanned model skips the pair groupoid demo."""
        report = run_scenario(builtin_scenario("fol_exp_sheet"), "all")
        assert "pairdemo" in report.skipped
        assert report.passed

    def test_degenerate_ratio_is_skipped(self):
        """Test an exact difference quotient skips the ratio test."""
        report = run_scenario(builtin_scenario("heisenberg_center"), "differentiate")
        assert "differentiation_ratio[0]" in report.skipped
        assert report.results["differentiate"]["basis"][0]["ratio"] is None

    def test_ratio_window(self):
        """Test the Borel ratio is about 4 for the H direction."""
        report = run_scenario(builtin_scenario("sl2_borel"), "differentiate")
        ratio = report.results["differentiate"]["basis"][0]["ratio"]
        assert 3.5 <= ratio <= 4.5

    def test_numerical_error_is_recorded(self):
        """Test a base curve leaving the box is an error in the report."""
        doc = foliation_doc(paths=[{"start": [0.0, 0.5], "interval": [0.0, 1.0]}])
        report = run_scenario(scenario(doc), "foliation")
        assert not report.passed
        assert report.errors[0]["type"] == "DomainEscapeError"
        assert "foliation" not in report.results

    def test_linear_algebra_error_is_recorded(self, monkeypatch):
        """Test a LinAlgError inside a command is a recorded numerical error."""

        def singular(self, report):
            raise np.linalg.LinAlgError("Singular matrix")

        monkeypatch.setattr(ScenarioRunner, "_run_bott", singular)
        report = run_scenario(builtin_scenario("sl2_borel"), "bott")
        assert not report.passed
        assert report.errors == [{"command": "bott", "type": "LinAlgError", "message": "Singular matrix"}]

    def test_seed_sources(self):
        """Test the seed comes from the call, then the scenario, then 0."""
        doc = copy.deepcopy(lie_doc())
        assert ScenarioRunner(scenario(doc)).seed == 0
        doc["seed"] = 11
        assert ScenarioRunner(scenario(doc)).seed == 11
        assert ScenarioRunner(scenario(doc), seed=5).seed == 5

    def test_same_seed_same_results(self):
        """Test two runs with one seed agree exactly."""
        first = run_scenario(builtin_scenario("sl2_borel"), "bott", seed=3).as_dict()
        second = run_scenario(builtin_scenario("sl2_borel"), "bott", seed=3).as_dict()
        assert first == second

    def test_tol_scale(self):
        """Test acceptance thresholds in the report follow --tol-scale."""
        report = run_scenario(builtin_scenario("fol_trivial"), "foliation", tol_scale=2.0)
        assert report.tolerances["reversal"] == pytest.approx(2e-8)
        assert report.tolerances["ode_rtol"] == 1e-10
