"""
Error hierarchy for holab.

Argument validation raises plain ``ValueError``; the classes below cover the
failures a caller may want to tell apart (numerical breakdown versus bad
input) and carry the diagnostic values that go into reports.
"""

from typing import Optional, Sequence


class HolabError(Exception):
    """Base class for all holab errors."""


class NumericalError(HolabError, RuntimeError):
    """A computation was well-posed but did not produce a trustworthy result."""


class ConvergenceError(NumericalError):
    """Newton iteration failed to reach its tolerance."""

    def __init__(self, message: str, residual_norm: float, iterations: int):
        super().__init__(f"{message} (residual {residual_norm:.3e} after {iterations} iterations)")
        self.residual_norm = residual_norm
        self.iterations = iterations


class ChartError(NumericalError):
    """A point left the region where the logarithm chart is valid."""


class DomainEscapeError(NumericalError):
    """An integral curve left the domain box of a foliation model."""

    def __init__(self, message: str, location: Sequence[float]):
        super().__init__(f"{message} at {list(location)}")
        self.location = list(location)


class NotSubalgebraError(HolabError, ValueError):
    """A basis is not closed under the bracket."""

    def __init__(self, residual: float, tolerance: float):
        super().__init__(f"not a subalgebra: closure residual {residual:.3e} > {tolerance:.1e}")
        self.residual = residual
        self.tolerance = tolerance


class TransversalityError(HolabError, ValueError):
    """A complement or slice fails the direct-sum rank check."""


class ExpressionError(HolabError, ValueError):
    """Syntax error or unknown identifier in an expression."""

    def __init__(self, message: str, source: str, offset: int, length: int = 1):
        line = source.count("\n", 0, offset) + 1
        column = offset - (source.rfind("\n", 0, offset) + 1) + 1
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column
        self.span = (offset, offset + length)


class ScenarioError(HolabError, ValueError):
    """A scenario file violates the schema or is internally inconsistent."""

    def __init__(self, message: str, pointer: Optional[str] = None):
        where = pointer if pointer else "/"
        super().__init__(f"{message} (at {where})")
        self.pointer = where
