"""
Lie algebras, subalgebras and the Bott connection.

- matrices: bracket, matrix exponential and logarithm
- algebra: bases, structure constants, subspaces and complements
- newton: the Newton solver used by every slide
- catalog: sl(2, R), Heisenberg, so(3), so(3) + R
- pair: a subalgebra with a complement, the Bott connection and Ad on the quotient
"""

from holab.lie.algebra import LieAlgebraBasis, StructureConstants, Subspace, complement, structure_constants
from holab.lie.catalog import named_basis
from holab.lie.matrices import bracket, jacobi_residual, mexp, mlog
from holab.lie.newton import newton_solve
from holab.lie.pair import (
    IdealReport,
    LiePair,
    QuotientEndo,
    adjoint_action,
    bott,
    bott_flatness_residual,
    differentiate_rep,
    exp_ad_rep,
    is_ideal,
)

__all__ = [
    "bracket", "jacobi_residual", "mexp", "mlog",
    "LieAlgebraBasis", "StructureConstants", "Subspace", "complement", "structure_constants",
    "newton_solve", "named_basis",
    "LiePair", "QuotientEndo", "IdealReport",
    "bott", "bott_flatness_residual", "adjoint_action", "exp_ad_rep", "differentiate_rep", "is_ideal",
]
