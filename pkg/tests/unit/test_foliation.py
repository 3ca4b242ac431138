"""
Unit tests for foliation models, leafwise paths, slices and holonomy transport.
"""

import math

import numpy as np
import pytest

from holab.config import DEFAULT_TOLERANCES
from holab.exceptions import DomainEscapeError, TransversalityError
from holab.holonomy.foliation import (
    GraphFoliation,
    LeafwisePath,
    SpannedFoliation,
    TransverseSlice,
    bott_transport_check,
    concatenation_defect,
    holonomy_transport,
    is_trivial,
    linear_holonomy_variational,
    pair_groupoid_demo,
    reversal_defect,
)

SAMPLES = [[-0.3], [-0.15], [0.15], [0.3]]


@pytest.fixture(scope="module")
def linear():
    return GraphFoliation([[-1.0, 2.0], [-5.0, 5.0]], ["y"], name="linear")


@pytest.fixture(scope="module")
def sheet():
    return SpannedFoliation([[-1.0, 1.0]] * 3, [["1", "0", "0"], ["0", "1", "y2"]], name="sheet")


class TestGraphFoliation:
    """Test y' = f(x, y) models."""

    @pytest.mark.parametrize(
        "box,message",
        [
            ([1.0, 2.0], "pairs"),
            ([[0.0, 1.0], [2.0, 2.0]], "low < high"),
        ],
    )
    def test_bad_box(self, box, message):
        """Test malformed boxes are rejected."""
        with pytest.raises(ValueError, match=message):
            GraphFoliation(box, ["y"])

    def test_needs_two_dimensions(self):
        """Test graphs need at least one dependent variable."""
        with pytest.raises(ValueError, match="n ≥ 2"):
            GraphFoliation([[0.0, 1.0]], [])

    def test_rhs_count(self):
        """Test one right-hand side per dependent variable."""
        with pytest.raises(ValueError, match="Expected 2 right-hand sides"):
            GraphFoliation([[0.0, 1.0]] * 3, ["y1"])

    def test_flow(self, linear):
        """Test y' = y carries 1 to e over [0, 1]."""
        np.testing.assert_allclose(linear.flow(0.0, 1.0, [1.0]), [math.e], rtol=1e-9)

    def test_flow_backwards(self, linear):
        """Test flowing back over [1, 0] divides by e."""
        np.testing.assert_allclose(linear.flow(1.0, 0.0, [1.0]), [1 / math.e], rtol=1e-9)

    def test_variational(self):
        """Test V' = sin(x)·V over [0, π] gives e²."""
        model = GraphFoliation([[-1.0, 4.0], [-10.0, 10.0]], ["sin(x)*y"])
        y, v = model.variational(0.0, math.pi, [0.0])
        np.testing.assert_allclose(y, [0.0], atol=1e-12)
        np.testing.assert_allclose(v, [[math.e**2]], rtol=1e-7)

    def test_symbolic_and_callable_agree(self):
        """Test a callable rhs falls back to finite differences for ∂f/∂y."""
        box = [[-1.0, 2.0], [-0.9, 0.9]]
        symbolic = GraphFoliation(box, ["y^2 + x"])
        numeric = GraphFoliation(box, lambda x, y: y**2 + x)
        assert symbolic.symbolic and not numeric.symbolic
        np.testing.assert_allclose(numeric.rhs_jacobian(0.5, [0.3]), symbolic.rhs_jacobian(0.5, [0.3]), atol=1e-8)

    def test_domain_escape(self):
        """Test a trajectory leaving the box stops with its location."""
        model = GraphFoliation([[-1.0, 2.0], [-5.0, 5.0]], ["y"])
        with pytest.raises(DomainEscapeError, match="left the domain box") as info:
            model.flow(0.0, 1.0, [4.9])
        assert info.value.location[1] == pytest.approx(5.0, abs=1e-6)

    def test_interval_outside_box(self, linear):
        """Test base intervals must stay inside the box."""
        with pytest.raises(DomainEscapeError, match="base interval"):
            linear.flow(0.0, 3.0, [0.0])

    def test_start_outside_box(self, linear):
        """Test starting points must be inside the box."""
        with pytest.raises(DomainEscapeError, match="start point"):
            linear.flow(0.0, 1.0, [7.0])


class TestSpannedFoliation:
    """Test involutive distributions spanned by vector fields."""

    def test_dimensions(self, sheet):
        """Test leaf dimension and codimension."""
        assert (sheet.dim, sheet.leaf_dim, sheet.codim) == (3, 2, 1)
        assert sheet.involutivity_residual <= 1e-12

    def test_bracket(self, sheet):
        """Test [∂x, ∂y1 + y2∂y2] = 0."""
        np.testing.assert_allclose(sheet.bracket(0, 1, [0.2, 0.1, 0.3]), [0.0, 0.0, 0.0], atol=1e-14)

    def test_not_involutive(self):
        """Test ∂x and ∂y1 + x∂y2 are rejected."""
        with pytest.raises(ValueError, match="not involutive"):
            SpannedFoliation([[-1.0, 1.0]] * 3, [["1", "0", "0"], ["0", "1", "x"]])

    def test_rank_loss(self):
        """Test fields that become parallel are rejected."""
        with pytest.raises(ValueError, match="rank"):
            SpannedFoliation([[-1.0, 1.0]] * 3, [["1", "0", "0"], ["x", "0", "0"]])

    def test_too_many_fields(self):
        """Test n fields on R^n leave no transversal."""
        with pytest.raises(ValueError, match="no transverse direction"):
            SpannedFoliation([[-1.0, 1.0]] * 2, [["1", "0"], ["0", "1"]])

    def test_flow_with_jacobian(self, sheet):
        """Test the flow of ∂y1 + y2∂y2 scales y2 by e^t."""
        point, jac = sheet.flow_with_jacobian(1, 0.5, [0.1, 0.0, 0.2])
        np.testing.assert_allclose(point, [0.1, 0.5, 0.2 * math.exp(0.5)], rtol=1e-9)
        np.testing.assert_allclose(jac, np.diag([1.0, 1.0, math.exp(0.5)]), rtol=1e-9, atol=1e-12)


class TestLeafwisePath:
    """Test paths, reversal and concatenation."""

    def test_interval_must_match_start(self):
        """Test the interval starts at start[0]."""
        with pytest.raises(ValueError, match="interval starts"):
            LeafwisePath(start=[0.5, 0.0], interval=(0.0, 1.0))

    def test_word_or_interval(self):
        """Test a path cannot carry both a word and an interval."""
        with pytest.raises(ValueError, match="not both"):
            LeafwisePath(start=[0.0, 0.0], steps=((0, 1.0),), interval=(0.0, 1.0))

    def test_endpoint(self, linear, sheet):
        """Test endpoints of an interval and of a flow word."""
        np.testing.assert_allclose(LeafwisePath.base_interval(0.0, 1.0, [1.0]).endpoint(linear), [1.0, math.e], rtol=1e-9)
        word = LeafwisePath.flow_word([0.0, 0.0, 0.0], [(0, 0.2), (1, 0.3)])
        np.testing.assert_allclose(word.endpoint(sheet), [0.2, 0.3, 0.0], atol=1e-12)

    def test_wrong_model(self, linear, sheet):
        """Test intervals belong to graph models and words to spanned ones."""
        with pytest.raises(ValueError, match="Graph models take base intervals"):
            LeafwisePath.flow_word([0.0, 0.0], [(0, 1.0)]).endpoint(linear)
        with pytest.raises(ValueError, match="field 2"):
            LeafwisePath.flow_word([0.0, 0.0, 0.0], [(2, 1.0)]).endpoint(sheet)

    def test_reverse(self, linear):
        """Test the reversed path returns to the start."""
        path = LeafwisePath.base_interval(0.0, 1.0, [1.0])
        back = path.reverse(linear)
        assert back.interval == (1.0, 0.0)
        np.testing.assert_allclose(back.endpoint(linear), path.start, rtol=1e-9)

    def test_concatenate(self, sheet):
        """Test words concatenate when endpoints meet."""
        first = LeafwisePath.flow_word([0.0, 0.0, 0.0], [(0, 0.2)])
        second = LeafwisePath.flow_word(first.endpoint(sheet), [(1, 0.3)])
        assert first.concatenate(second, sheet).steps == ((0, 0.2), (1, 0.3))

    def test_concatenate_gap(self, linear):
        """Test paths that do not meet cannot be concatenated."""
        first = LeafwisePath.base_interval(0.0, 0.5, [1.0])
        second = LeafwisePath.base_interval(0.5, 1.0, [1.0])
        with pytest.raises(ValueError, match="endpoint gap"):
            first.concatenate(second, linear)


class TestTransverseSlice:
    """Test slices."""

    def test_coordinates(self):
        """Test point and coordinates are inverse."""
        s = TransverseSlice(np.array([1.0, 2.0, 0.0]), np.array([[0.0], [0.0], [2.0]]))
        np.testing.assert_allclose(s.coordinates(s.point([0.25])), [0.25])
        np.testing.assert_allclose(s.point([0.25]), [1.0, 2.0, 0.5])

    def test_dependent_directions(self):
        """Test repeated directions are rejected."""
        with pytest.raises(TransversalityError):
            TransverseSlice(np.zeros(3), np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]]))

    def test_tangent_slice(self, sheet):
        """Test a slice along the leaf is not transverse."""
        with pytest.raises(TransversalityError):
            TransverseSlice(np.zeros(3), np.array([[1.0], [0.0], [0.0]])).check_transverse(sheet)

    def test_normal_slice(self, sheet):
        """Test the normal slice of the flat sheet is the y2 axis."""
        s = TransverseSlice.normal_to(sheet, [0.0, 0.0, 0.0])
        np.testing.assert_allclose(np.abs(s.directions[:, 0]), [0.0, 0.0, 1.0], atol=1e-14)
        s.check_transverse(sheet)

    def test_vertical(self, linear):
        """Test vertical slices are x = const."""
        s = TransverseSlice.vertical(linear, [0.5, 0.0])
        assert s.is_vertical
        assert s.dim == 1


class TestTransport:
    """Test holonomy transport against closed forms."""

    def test_linear_graph(self, linear):
        """Test transport of y' = y over [0, 1] multiplies by e."""
        holonomy = holonomy_transport(linear, LeafwisePath.base_interval(0.0, 1.0), samples=SAMPLES)
        for c_in, c_out in holonomy.samples:
            np.testing.assert_allclose(c_out, math.e * c_in, atol=1e-8)
        assert holonomy.linear_part.matrix[0, 0] == pytest.approx(math.e, abs=1e-6)

    def test_riccati(self):
        """Test y' = y² over [0, 1] is y ↦ y/(1 - y)."""
        model = GraphFoliation([[-1.0, 2.0], [-0.9, 0.9]], ["y^2"])
        holonomy = holonomy_transport(model, LeafwisePath.base_interval(0.0, 1.0), samples=SAMPLES)
        for c_in, c_out in holonomy.samples:
            np.testing.assert_allclose(c_out, c_in / (1 - c_in), atol=1e-8)

    def test_riccati_escape_is_recorded(self):
        """Test samples that blow up are recorded as failures, not fatal."""
        model = GraphFoliation([[-1.0, 2.0], [-0.9, 0.9]], ["y^2"])
        holonomy = holonomy_transport(model, LeafwisePath.base_interval(0.0, 1.0), samples=[[0.1], [0.8]])
        assert [list(c) for c, _ in holonomy.failures] == [[0.8]]
        assert "domain box" in holonomy.failures[0][1]

    def test_spanned_sheet(self, sheet):
        """Test flowing ∂y1 + y2∂y2 for 0.5 scales the normal slice by e^0.5."""
        path = LeafwisePath.flow_word([0.0, 0.0, 0.0], [(1, 0.5)])
        holonomy = holonomy_transport(sheet, path, samples=[[-0.05], [0.05]])
        for c_in, c_out in holonomy.samples:
            np.testing.assert_allclose(c_out, math.exp(0.5) * c_in, atol=1e-8)

    def test_homotopic_words(self, sheet):
        """Test two words with the same endpoint give the same holonomy."""
        a = LeafwisePath.flow_word([0.0, 0.0, 0.0], [(0, 0.2), (1, 0.3)])
        b = LeafwisePath.flow_word([0.0, 0.0, 0.0], [(1, 0.3), (0, 0.2)])
        samples = [[-0.05], [0.05]]
        assert holonomy_transport(sheet, a, samples=samples).deviation_from(
            holonomy_transport(sheet, b, samples=samples)
        ) <= 1e-8

    def test_path_must_start_at_slice(self, linear):
        """Test the source slice must sit on the path start."""
        slice0 = TransverseSlice.vertical(linear, [0.0, 1.0])
        with pytest.raises(ValueError, match="source slice base"):
            holonomy_transport(linear, LeafwisePath.base_interval(0.0, 1.0), slice0=slice0)

    def test_graph_needs_vertical_slices(self, linear):
        """Test tilted slices are rejected for graph models."""
        tilted = TransverseSlice(np.array([0.0, 0.0]), np.array([[0.5], [1.0]]))
        with pytest.raises(ValueError, match="vertical"):
            holonomy_transport(linear, LeafwisePath.base_interval(0.0, 1.0), slice0=tilted)


class TestVariationalAndLaws:
    """Test the variational route, reversal, concatenation and triviality."""

    def test_variational_graph(self):
        """Test the variational linear part of y' = sin(x) y over [0, π]."""
        model = GraphFoliation([[-1.0, 4.0], [-10.0, 10.0]], ["sin(x)*y"])
        linear = linear_holonomy_variational(model, LeafwisePath.base_interval(0.0, math.pi))
        assert linear.matrix[0, 0] == pytest.approx(math.e**2, rel=1e-7)

    def test_variational_spanned(self, sheet):
        """Test the variational linear part of the sheet."""
        path = LeafwisePath.flow_word([0.0, 0.0, 0.0], [(1, 0.5)])
        assert linear_holonomy_variational(sheet, path).matrix[0, 0] == pytest.approx(math.exp(0.5), rel=1e-8)

    @pytest.mark.parametrize("rhs", [["y"], ["sin(x)*y"], ["0"]])
    def test_bott_transport(self, rhs):
        """Test the jet of the transport equals the variational solution."""
        model = GraphFoliation([[-1.0, 2.0], [-5.0, 5.0]], rhs)
        assert bott_transport_check(model, LeafwisePath.base_interval(0.0, 1.0)) <= 1e-6

    @pytest.mark.parametrize("rhs,end", [(["y"], 1.0), (["sin(x)*y"], math.pi)])
    def test_bott_transport_tightens_with_rtol(self, rhs, end):
        """Test halving the ODE rtol twice never raises the transport residual above its floor."""
        residuals = []
        for rtol in (1e-10, 5e-11, 2.5e-11):
            tolerances = DEFAULT_TOLERANCES.with_overrides({"ode_rtol": rtol})
            model = GraphFoliation([[-1.0, 4.0], [-10.0, 10.0]], rhs, tolerances=tolerances)
            residuals.append(bott_transport_check(model, LeafwisePath.base_interval(0.0, end)))
        assert residuals[0] <= 1e-6
        for earlier, later in zip(residuals, residuals[1:]):
            assert later <= max(earlier, 1e-10)

    def test_reversal(self, linear, sheet):
        """Test the reversed path inverts the holonomy."""
        assert reversal_defect(linear, LeafwisePath.base_interval(0.0, 1.0), SAMPLES) <= 1e-8
        word = LeafwisePath.flow_word([0.0, 0.0, 0.0], [(0, 0.2), (1, 0.3)])
        assert reversal_defect(sheet, word, [[-0.05], [0.05]]) <= 1e-8

    def test_concatenation(self, linear):
        """Test hol(γ1·γ2) = hol(γ2)∘hol(γ1)."""
        first = LeafwisePath.base_interval(0.0, 0.5)
        second = LeafwisePath.base_interval(0.5, 1.0)
        assert concatenation_defect(linear, first, second, SAMPLES) <= 1e-8

    def test_trivial(self):
        """Test the horizontal foliation has trivial holonomy and y' = y does not."""
        flat = GraphFoliation([[-1.0, 2.0], [-1.0, 1.0]], ["0"])
        path = LeafwisePath.base_interval(0.0, 1.0)
        assert is_trivial(holonomy_transport(flat, path, samples=SAMPLES))
        linear = GraphFoliation([[-1.0, 2.0], [-5.0, 5.0]], ["y"])
        assert not is_trivial(holonomy_transport(linear, path, samples=SAMPLES))


class TestPairGroupoidDemo:
    """Test holonomy through the source fiber of M × M."""

    def test_agrees_with_transport(self, linear):
        """Test the lifted route reproduces direct transport."""
        report = pair_groupoid_demo(linear, LeafwisePath.base_interval(0.0, 1.0), SAMPLES)
        assert report.source_drift == 0.0
        assert report.deviation <= 1e-9
        assert report.passed()

    def test_callable_model(self):
        """Test lifting a model given by a callable."""
        model = GraphFoliation([[-1.0, 2.0], [-5.0, 5.0]], lambda x, y: np.sin(x) * y)
        report = pair_groupoid_demo(model, LeafwisePath.base_interval(0.0, 1.0), SAMPLES)
        assert report.deviation <= 1e-9

    def test_needs_graph_model(self, sheet):
        """Test spanned models are rejected."""
        with pytest.raises(ValueError, match="graph foliation"):
            pair_groupoid_demo(sheet, LeafwisePath.flow_word([0.0, 0.0, 0.0], [(1, 0.5)]))
