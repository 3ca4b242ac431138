"""
holab - a numerical lab for holonomy of wide Lie subalgebroids.

Two regimes are covered: a Lie algebra g with a subalgebra h (holonomy of
the subgroup H acting on slices of the group G), and a foliation of a box in
R^n (holonomy of leafwise paths between transverse slices). Both produce
sampled holonomy maps whose linearizations are checked against the Bott
connection.
"""

from holab.config import DEFAULT_TOLERANCES, Settings, Tolerances
from holab.exceptions import (
    ChartError,
    ConvergenceError,
    DomainEscapeError,
    ExpressionError,
    HolabError,
    NotSubalgebraError,
    NumericalError,
    ScenarioError,
    TransversalityError,
)
from holab.expression import parse_expression
from holab.holonomy import (
    GraphFoliation,
    GroupElement,
    HolonomyMap,
    LeafwisePath,
    SliceChart,
    SpannedFoliation,
    TransformationGroupoid,
    TransverseSlice,
    chi_conj,
    chi_via_bisection,
    holonomy_transport,
    linear_holonomy_variational,
)
from holab.lie import LieAlgebraBasis, LiePair, QuotientEndo, StructureConstants, Subspace, bott
from holab.scenario import Scenario, load_scenario, run_scenario

__version__ = "0.1.0"

__all__ = [
    # Configuration
    "DEFAULT_TOLERANCES", "Settings", "Tolerances",
    # Errors
    "HolabError", "NumericalError", "ConvergenceError", "ChartError", "DomainEscapeError",
    "NotSubalgebraError", "TransversalityError", "ExpressionError", "ScenarioError",
    # Lie algebras and pairs
    "LieAlgebraBasis", "StructureConstants", "Subspace", "LiePair", "QuotientEndo", "bott",
    # Holonomy
    "GroupElement", "SliceChart", "HolonomyMap", "chi_conj", "chi_via_bisection",
    "TransformationGroupoid",
    "GraphFoliation", "SpannedFoliation", "LeafwisePath", "TransverseSlice",
    "holonomy_transport", "linear_holonomy_variational",
    # Expressions and scenarios
    "parse_expression", "Scenario", "load_scenario", "run_scenario",
]
