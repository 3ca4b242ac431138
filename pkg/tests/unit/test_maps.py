"""
Unit tests for sampled holonomy maps and sample grids.
"""

import numpy as np
import pytest

from holab.exceptions import ChartError
from holab.holonomy.maps import (
    build_map,
    evaluate_grid,
    lattice,
    linearize,
    random_cloud,
    stencil,
    with_jet_stencil,
)

JET = 1e-5


def _linear_samples(matrix, points):
    return [(p, matrix @ p) for p in points]


class TestGrids:
    """Test stencils, lattices and random clouds."""

    def test_stencil(self):
        """Test the axis stencil has 2·dim + 1 points starting at 0."""
        points = stencil(2, 0.1)
        assert len(points) == 5
        np.testing.assert_array_equal(points[0], [0.0, 0.0])
        assert {tuple(p) for p in points[1:]} == {(0.1, 0.0), (-0.1, 0.0), (0.0, 0.1), (0.0, -0.1)}

    @pytest.mark.parametrize("dim,expected", [(1, 9), (2, 9), (3, 27)])
    def test_lattice_size(self, dim, expected):
        """Test about nine points per lattice, three per axis at least."""
        assert len(lattice(dim, 0.5)) == expected

    def test_lattice_contains_origin(self):
        """Test odd point counts keep 0 on the grid."""
        assert any(not np.any(p) for p in lattice(2, 0.5, count=16))

    def test_lattice_zero_dim(self):
        """Test the 0-dimensional lattice is a single empty point."""
        points = lattice(0, 1.0)
        assert len(points) == 1 and points[0].shape == (0,)

    def test_random_cloud_in_ball(self):
        """Test random points stay in the ball and are reproducible."""
        a = random_cloud(3, 0.2, 50, np.random.default_rng(7))
        b = random_cloud(3, 0.2, 50, np.random.default_rng(7))
        assert all(np.linalg.norm(p) <= 0.2 for p in a)
        np.testing.assert_array_equal(np.stack(a), np.stack(b))

    def test_with_jet_stencil_deduplicates(self):
        """Test the origin appears once when requested and stencil points overlap."""
        points = with_jet_stencil([[0.0], [0.3]], 1, 0.1, JET)
        keys = [tuple(p) for p in points]
        assert keys == [(0.0,), (0.3,), (JET,), (-JET,)]

    def test_with_jet_stencil_rejects_wrong_dim(self):
        """Test sample points must match the slice dimension."""
        with pytest.raises(ValueError, match="slice dimension"):
            with_jet_stencil([[0.0, 1.0]], 1, 0.1, JET)


class TestHolonomyMap:
    """Test the sampled map."""

    def test_linear_part_of_linear_map(self):
        """Test the jet of c ↦ Ac is A."""
        a = np.array([[2.0, 1.0], [0.0, -1.0]])
        holonomy = build_map(_linear_samples(a, with_jet_stencil(None, 2, 0.1, JET)), [], 2, JET)
        np.testing.assert_allclose(holonomy.linear_part.matrix, a, atol=1e-9)
        np.testing.assert_allclose(linearize(holonomy, step=0.1).matrix, a, atol=1e-12)

    def test_missing_stencil(self):
        """Test a table without the symmetric stencil cannot be linearized."""
        with pytest.raises(ValueError, match="Insufficient stencil"):
            build_map([(np.zeros(1), np.zeros(1))], [], 1, JET)

    def test_lookup_and_deviation(self):
        """Test lookup by input and pointwise deviation on shared inputs."""
        points = with_jet_stencil(None, 1, 0.1, JET)
        identity = build_map(_linear_samples(np.eye(1), points), [], 1, JET)
        doubled = build_map(_linear_samples(2 * np.eye(1), points), [], 1, JET)
        np.testing.assert_array_equal(doubled.lookup([0.1]), [0.2])
        assert doubled.lookup([0.5]) is None
        assert identity.deviation_from(doubled) == pytest.approx(0.1)
        assert identity.displacement() == 0.0
        assert doubled.displacement() == pytest.approx(0.1)

    def test_metadata_is_copied(self):
        """Test metadata is stored as a fresh dict."""
        meta = {"route": "test"}
        holonomy = build_map(_linear_samples(np.eye(1), stencil(1, JET)), [], 1, JET, metadata=meta)
        meta["route"] = "changed"
        assert holonomy.metadata["route"] == "test"


class TestEvaluateGrid:
    """Test grid evaluation with failures."""

    def test_failure_away_from_stencil_is_recorded(self):
        """Test a failing sample is skipped and reported."""

        def evaluate(c):
            if c[0] > 0.2:
                raise ChartError("log chart exceeded")
            return 3 * c

        points = with_jet_stencil([[0.1], [0.5]], 1, 0.1, JET)
        samples, failures = evaluate_grid(evaluate, points, 1, JET)
        assert len(samples) == len(points) - 1
        assert len(failures) == 1
        np.testing.assert_array_equal(failures[0][0], [0.5])
        assert "log chart" in failures[0][1]

    def test_failure_on_stencil_is_raised(self):
        """Test a failing jet point aborts the evaluation."""

        def evaluate(c):
            raise ChartError("slide failed: shrink radius")

        with pytest.raises(ChartError):
            evaluate_grid(evaluate, stencil(1, JET), 1, JET)

    def test_fixed_base(self):
        """Test the origin is not evaluated with fixed_base."""
        seen = []

        def evaluate(c):
            seen.append(c.copy())
            return c + 1.0

        samples, _ = evaluate_grid(evaluate, stencil(1, JET), 1, JET, fixed_base=True)
        assert all(np.any(c) for c in seen)
        np.testing.assert_array_equal(samples[0][1], [0.0])
