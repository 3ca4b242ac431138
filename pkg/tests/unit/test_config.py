"""
Unit tests for tolerances and environment settings.
"""

import threading

import pytest

from holab.config import DEFAULT_TOLERANCES, Settings, Tolerances, parallel_map


class TestTolerances:
    """Test defaults, scaling and overrides."""

    def test_defaults(self):
        """Test the documented default thresholds."""
        tol = Tolerances()
        assert tol.closure == 1e-9
        assert tol.newton == 1e-12
        assert tol.newton_max_iter == 25
        assert (tol.ratio_low, tol.ratio_high) == (3.5, 4.5)
        assert (tol.ode_rtol, tol.ode_atol) == (1e-10, 1e-14)
        assert tol == DEFAULT_TOLERANCES

    def test_scaled_thresholds(self):
        """Test acceptance thresholds are multiplied."""
        tol = DEFAULT_TOLERANCES.scaled(10.0)
        assert tol.flatness == pytest.approx(1e-9)
        assert tol.agreement == pytest.approx(1e-9)
        assert tol.linearization == pytest.approx(1e-5)

    @pytest.mark.parametrize(
        "name", ["newton", "newton_max_iter", "ode_rtol", "ode_atol", "ratio_low", "ratio_high", "closure"]
    )
    def test_scaled_leaves_solver_settings(self, name):
        """Test solver settings and the ratio window do not scale."""
        assert getattr(DEFAULT_TOLERANCES.scaled(100.0), name) == getattr(DEFAULT_TOLERANCES, name)

    @pytest.mark.parametrize("factor", [0.0, -1.0])
    def test_scaled_rejects_non_positive(self, factor):
        """Test the factor must be positive."""
        with pytest.raises(ValueError, match="positive"):
            DEFAULT_TOLERANCES.scaled(factor)

    def test_with_overrides(self):
        """Test named entries are replaced and the original is untouched."""
        tol = DEFAULT_TOLERANCES.with_overrides({"agreement": 1e-6, "newton_max_iter": 40.0})
        assert tol.agreement == 1e-6
        assert tol.newton_max_iter == 40
        assert isinstance(tol.newton_max_iter, int)
        assert DEFAULT_TOLERANCES.agreement == 1e-10

    def test_unknown_override(self):
        """Test unknown keys are listed in the error."""
        with pytest.raises(ValueError, match=r"Unknown tolerance keys: \['bogus'\]"):
            DEFAULT_TOLERANCES.with_overrides({"bogus": 1.0})

    def test_as_dict(self):
        """Test every field appears once."""
        data = DEFAULT_TOLERANCES.as_dict()
        assert data["pair_demo"] == 1e-9
        assert len(data) == len(set(data))

    def test_frozen(self):
        """Test tolerances are immutable."""
        with pytest.raises(AttributeError):
            DEFAULT_TOLERANCES.closure = 1.0  # type: ignore[misc]


class TestSettings:
    """Test HOLAB_THREADS handling."""

    def test_default(self, monkeypatch):
        """Test one thread when unset."""
        monkeypatch.delenv("HOLAB_THREADS", raising=False)
        assert Settings.from_env().threads == 1

    def test_from_env(self, monkeypatch):
        """Test a positive integer is read."""
        monkeypatch.setenv("HOLAB_THREADS", "4")
        assert Settings.from_env().threads == 4

    @pytest.mark.parametrize("raw", ["0", "-2", "abc", "1.5"])
    def test_invalid(self, monkeypatch, raw):
        """Test bad values are rejected with the variable name."""
        monkeypatch.setenv("HOLAB_THREADS", raw)
        with pytest.raises(ValueError, match="HOLAB_THREADS must be a positive integer"):
            Settings.from_env()


class TestParallelMap:
    """Test the order-preserving map."""

    @pytest.mark.parametrize("threads", ["1", "3"])
    def test_preserves_order(self, monkeypatch, threads):
        """Test results come back in input order."""
        monkeypatch.setenv("HOLAB_THREADS", threads)
        items = list(range(25))
        assert parallel_map(lambda x: x * x, items) == [x * x for x in items]

    def test_uses_threads(self, monkeypatch):
        """Test work is spread over a pool when HOLAB_THREADS > 1."""
        monkeypatch.setenv("HOLAB_THREADS", "2")
        seen = set()

        def record(x):
            seen.add(threading.get_ident())
            return x

        assert parallel_map(record, [1, 2, 3]) == [1, 2, 3]
        assert threading.get_ident() not in seen

    def test_empty(self, monkeypatch):
        """Test an empty input gives an empty list."""
        monkeypatch.setenv("HOLAB_THREADS", "8")
        assert parallel_map(str, []) == []
