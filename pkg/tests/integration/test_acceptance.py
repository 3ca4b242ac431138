"""
End-to-end checks on the built-in scenarios against closed-form answers.

Each test builds its objects through the scenario runner, so the built-in
catalog, the payload builders and the numerical modules are exercised together.
"""

import math

import numpy as np
import pytest

from holab.holonomy.foliation import (
    bott_transport_check,
    holonomy_transport,
    linear_holonomy_variational,
    pair_groupoid_demo,
    reversal_defect,
)
from holab.holonomy.group import (
    GroupElement,
    chi_conj,
    chi_via_bisection,
    composition_defect,
    normality_equivalence,
)
from holab.holonomy.groupoid import right_invariance_check
from holab.lie.pair import bott, bott_flatness_residual, differentiate_rep
from holab.scenario.catalog import builtin_scenario
from holab.scenario.report import render_json
from holab.scenario.runner import ScenarioRunner, run_scenario

LIE_PAIRS = ["sl2_borel", "heisenberg_center", "so3_in_so3_plus_r", "so3_axis"]
FOLIATIONS = ["fol_linear", "fol_riccati", "fol_sin", "fol_trivial", "fol_exp_sheet"]
GRAPH_FOLIATIONS = ["fol_linear", "fol_riccati", "fol_sin", "fol_trivial"]


def runner_for(name):
    return ScenarioRunner(builtin_scenario(name), seed=0)


def elements(runner):
    return [np.asarray(v, dtype=float) for v in runner.scenario.payload["elements"]["h"]]


def first_path(runner):
    model, paths = runner.foliation
    return model, paths[0][0], runner.scenario.payload.get("samples")


class TestBottConnection:
    """Test flatness and the differentiation chain on every Lie pair."""

    @pytest.mark.parametrize("name", LIE_PAIRS)
    def test_flatness(self, name):
        """Test the curvature vanishes on 100 random pairs (b1, b2)."""
        pair = runner_for(name).pair
        rng = np.random.default_rng(0)
        for _ in range(100):
            b1 = pair.sub_vector(rng.normal(size=pair.sub_dim))
            b2 = pair.sub_vector(rng.normal(size=pair.sub_dim))
            assert bott_flatness_residual(pair, b1, b2) <= 1e-10

    @pytest.mark.parametrize("name", LIE_PAIRS)
    def test_differentiation(self, name):
        """Test central differences at ε = 1e-4 match ∇_b with second-order error."""
        pair = runner_for(name).pair
        for b in pair.sub.coefficients.T:
            target = bott(pair, b)
            err = differentiate_rep(pair, b, 1e-4).distance(target)
            err_half = differentiate_rep(pair, b, 5e-5).distance(target)
            assert err <= 1e-7
            if err_half >= 1e-12:
                assert 3.5 <= err / err_half <= 4.5

    def test_borel_anchor(self):
        """Test ∇_H = -2 and Ψ(exp tH) = e^{-2t}."""
        runner = runner_for("sl2_borel")
        pair, chart = runner.pair, runner.chart
        assert bott(pair, [1.0, 0.0, 0.0]).matrix[0, 0] == pytest.approx(-2.0, abs=1e-12)
        for t in (0.1, 0.3):
            holonomy = chi_conj(chart, GroupElement.exp(pair, [t, 0.0, 0.0]))
            assert holonomy.linear_part.matrix[0, 0] == pytest.approx(math.exp(-2 * t), abs=1e-6)


class TestGroupHolonomy:
    """Test the holonomy of Lie subgroups on every realized pair."""

    @pytest.mark.parametrize("name", LIE_PAIRS)
    def test_routes_agree(self, name):
        """Test bisection and conjugation agree on a 9-point grid."""
        runner = runner_for(name)
        grid = runner.chart.lattice(9)
        for b in elements(runner):
            h = GroupElement.exp(runner.pair, b)
            conj = chi_conj(runner.chart, h, grid)
            assert conj.deviation_from(chi_via_bisection(runner.chart, h, grid)) <= 1e-10

    @pytest.mark.parametrize("name", LIE_PAIRS)
    def test_morphism(self, name):
        """Test χ(h2 h1) = χ(h2)∘χ(h1) on 20 seeded pairs."""
        runner = runner_for(name)
        pair = runner.pair
        rng = np.random.default_rng(0)
        for _ in range(20):
            h1 = GroupElement.exp(pair, pair.sub_vector(rng.uniform(-0.3, 0.3, pair.sub_dim)))
            h2 = GroupElement.exp(pair, pair.sub_vector(rng.uniform(-0.3, 0.3, pair.sub_dim)))
            assert composition_defect(runner.chart, h1, h2) <= 1e-9

    def test_normality(self):
        """Test the center is an ideal with trivial holonomy and the Borel pair is neither."""
        center = normality_equivalence(runner_for("heisenberg_center").chart)
        assert center.as_pair() == (True, True)
        borel = normality_equivalence(runner_for("sl2_borel").chart)
        assert borel.as_pair() == (False, False)
        assert borel.witness is not None and borel.witness[2] > 1e-3

    @pytest.mark.parametrize("name", LIE_PAIRS)
    def test_right_invariance(self, name):
        """Test holonomy along every catalog orbit matches holonomy at e."""
        runner = runner_for(name)
        pair = runner.pair
        bases = runner.scenario.payload["elements"]["g"]
        for b in elements(runner):
            h = GroupElement.exp(pair, b)
            for x in bases:
                assert right_invariance_check(runner.chart, h, GroupElement.exp(pair, x)) <= 1e-9


class TestFoliationHolonomy:
    """Test transport along leaves against closed-form flows."""

    def test_linear(self):
        """Test y' = y over [0, 1] multiplies by e."""
        model, path, samples = first_path(runner_for("fol_linear"))
        holonomy = holonomy_transport(model, path, samples=samples)
        assert holonomy.linear_part.matrix[0, 0] == pytest.approx(2.718281828459045, abs=1e-8)
        for c_in, c_out in holonomy.samples:
            assert c_out[0] == pytest.approx(math.e * c_in[0], abs=1e-8)

    def test_riccati(self):
        """Test y' = y² over [0, 1] is y ↦ y/(1 - y) for |y| ≤ 0.3."""
        model, path, samples = first_path(runner_for("fol_riccati"))
        holonomy = holonomy_transport(model, path, samples=samples)
        assert not holonomy.failures
        for c_in, c_out in holonomy.samples:
            y = c_in[0]
            assert abs(y) <= 0.3
            assert c_out[0] == pytest.approx(y / (1 - y), abs=1e-8)

    def test_sin_variational(self):
        """Test y' = sin(x) y over [0, π] has linear holonomy e²."""
        model, path, _ = first_path(runner_for("fol_sin"))
        assert linear_holonomy_variational(model, path).matrix[0, 0] == pytest.approx(math.e**2, abs=1e-7)

    @pytest.mark.parametrize("name", FOLIATIONS)
    def test_bott_transport(self, name):
        """Test sampled linearization matches variational transport."""
        runner = runner_for(name)
        model, paths = runner.foliation
        for path, _ in paths:
            assert bott_transport_check(model, path) <= 1e-6

    @pytest.mark.parametrize("name", GRAPH_FOLIATIONS)
    def test_pair_groupoid(self, name):
        """Test the pair groupoid route agrees and reversal inverts."""
        model, path, samples = first_path(runner_for(name))
        demo = pair_groupoid_demo(model, path, samples)
        assert demo.deviation <= 1e-9
        assert demo.reversal <= 1e-8
        assert reversal_defect(model, path, samples) <= 1e-8


class TestRuns:
    """Test whole runs through the scenario runner."""

    @pytest.mark.parametrize("name", LIE_PAIRS + FOLIATIONS)
    def test_all_passes(self, name):
        """Test every applicable command passes on every built-in."""
        report = run_scenario(builtin_scenario(name), "all", seed=0)
        failed = [c.name for c in report.checks if not c.passed]
        assert report.passed, (failed, report.errors)

    def test_deterministic_report(self):
        """Test two runs of 'all' with seed 0 render identical JSON."""
        first = render_json(run_scenario(builtin_scenario("sl2_borel"), "all", seed=0))
        second = render_json(run_scenario(builtin_scenario("sl2_borel"), "all", seed=0))
        assert first == second
