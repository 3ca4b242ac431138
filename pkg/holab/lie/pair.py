"""
Lie pairs (g, h) over a point and the Bott connection on g/h.

The quotient g/h is realized on a complement C with g = h ⊕ C, so every
endomorphism of g/h becomes a square matrix in the chosen basis of C
(:class:`QuotientEndo`). The splitting matrix P = [S_h | S_C] turns ambient
coordinates into (h-part, C-part) via P⁻¹.

Three layers of the same structure are computed here:
    - bott(b):             ā ↦ [b, a] mod h            (Lie algebra representation)
    - exp_ad_rep(b, ε):    ā ↦ Ad(exp εb) a mod h      (Lie group representation)
    - differentiate_rep:   d/dε of the latter at 0     (should give back bott)
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from holab.exceptions import NotSubalgebraError
from holab.lie.algebra import (
    TOL_CLOSURE,
    AmbientAlgebra,
    LieAlgebraBasis,
    StructureConstants,
    Subspace,
    ambient_gram,
    complement,
    structure_constants,
)
from holab.lie.matrices import mexp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuotientEndo:
    """An endomorphism of g/h, as a matrix in the basis of C."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"Quotient endomorphism must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("Quotient endomorphism has non-finite entries")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "QuotientEndo":
        return cls(np.eye(dim))

    @classmethod
    def zero(cls, dim: int) -> "QuotientEndo":
        return cls(np.zeros((dim, dim)))

    def norm(self) -> float:
        """Operator (spectral) norm; 0 on the zero-dimensional quotient."""
        if self.dim == 0:
            return 0.0
        return float(np.linalg.norm(self.matrix, 2))

    def distance(self, other: "QuotientEndo") -> float:
        return (self - other).norm()

    def __add__(self, other: "QuotientEndo") -> "QuotientEndo":
        return QuotientEndo(self.matrix + other.matrix)

    def __sub__(self, other: "QuotientEndo") -> "QuotientEndo":
        return QuotientEndo(self.matrix - other.matrix)

    def __matmul__(self, other: "QuotientEndo") -> "QuotientEndo":
        return QuotientEndo(self.matrix @ other.matrix)

    def __mul__(self, scalar: float) -> "QuotientEndo":
        return QuotientEndo(self.matrix * float(scalar))

    __rmul__ = __mul__

    def commutator(self, other: "QuotientEndo") -> "QuotientEndo":
        return self @ other - other @ self


class LiePair:
    """
    A Lie algebra g with a subalgebra h and a complement C.

    ``ambient`` is either a matrix basis of g (the usual case) or bare
    structure constants. ``sub`` and ``comp`` are subspaces in ambient
    coordinates; ``comp`` defaults to the Frobenius-orthogonal complement.

    Raises:
        NotSubalgebraError: If h is not bracket-closed
        TransversalityError: If a supplied complement is not transverse
    """

    def __init__(
        self,
        ambient: AmbientAlgebra,
        sub: Subspace,
        comp: Optional[Subspace] = None,
        name: str = "",
        tol_closure: float = TOL_CLOSURE,
    ):
        if isinstance(ambient, LieAlgebraBasis):
            self.realization: Optional[LieAlgebraBasis] = ambient
            self.constants = structure_constants(ambient, tol_closure)
        elif isinstance(ambient, StructureConstants):
            self.realization = None
            self.constants = ambient
        else:
            raise ValueError(f"Unsupported ambient algebra type {type(ambient).__name__}")
        if sub.ambient_dim != self.constants.dim:
            raise ValueError(
                f"Subalgebra lives in dimension {sub.ambient_dim}, ambient has {self.constants.dim}"
            )

        self.name = name
        self.tol_closure = tol_closure
        self.sub = sub
        self.comp = complement(ambient, sub, comp)
        self.gram = ambient_gram(ambient)
        self.splitting = np.hstack([sub.coefficients, self.comp.coefficients])
        self.splitting_inv = np.linalg.inv(self.splitting)

        residual = self.sub_closure_residual()
        if residual > tol_closure:
            raise NotSubalgebraError(residual, tol_closure)

    @classmethod
    def from_matrices(
        cls,
        ambient: LieAlgebraBasis,
        sub_matrices,
        complement_matrices=None,
        name: str = "",
        tol_closure: float = TOL_CLOSURE,
    ) -> "LiePair":
        """
        Build a pair from matrices spanning h (and optionally C) inside g.

        Raises:
            ValueError: If a matrix is not in the span of the ambient basis
        """

        def to_subspace(matrices) -> Subspace:
            columns = []
            for i, m in enumerate(matrices):
                coords, residual = ambient.coordinates_with_residual(m)
                if residual > tol_closure * max(1.0, float(np.linalg.norm(m))):
                    raise ValueError(f"Matrix {i} is not in the ambient algebra (residual {residual:.3e})")
                columns.append(coords)
            if not columns:
                return Subspace.zero(ambient.dim)
            return Subspace(np.stack(columns, axis=1))

        sub = to_subspace(sub_matrices)
        comp = to_subspace(complement_matrices) if complement_matrices is not None else None
        return cls(ambient, sub, comp, name=name, tol_closure=tol_closure)

    # -- dimensions and projections ---------------------------------------

    @property
    def dim(self) -> int:
        return self.constants.dim

    @property
    def sub_dim(self) -> int:
        return self.sub.dim

    @property
    def quotient_dim(self) -> int:
        return self.comp.dim

    def split(self, x) -> Tuple[np.ndarray, np.ndarray]:
        """(h-coordinates, C-coordinates) of an ambient coordinate vector."""
        v = self.splitting_inv @ np.asarray(x, dtype=float)
        return v[: self.sub_dim], v[self.sub_dim:]

    def project_sub(self, x) -> np.ndarray:
        return self.split(x)[0]

    def project_comp(self, x) -> np.ndarray:
        return self.split(x)[1]

    def sub_vector(self, coords) -> np.ndarray:
        """Ambient coordinates of Σ coords_j h_j."""
        return self.sub.coefficients @ np.asarray(coords, dtype=float)

    def comp_vector(self, coords) -> np.ndarray:
        """Ambient coordinates of Σ coords_j c_j."""
        return self.comp.coefficients @ np.asarray(coords, dtype=float)

    def norm(self, x) -> float:
        """Frobenius norm (Euclidean for abstract algebras) of an ambient vector."""
        v = np.asarray(x, dtype=float)
        return float(np.sqrt(max(v @ self.gram @ v, 0.0)))

    def require_sub(self, b) -> np.ndarray:
        """
        Validate that ``b`` (ambient coordinates) lies in h.

        Raises:
            ValueError: If b has the wrong size or a C-component above tolerance
        """
        v = np.asarray(b, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(f"Expected {self.dim} ambient coordinates, got shape {v.shape}")
        leak = self.norm(self.comp_vector(self.project_comp(v)))
        if leak > self.tol_closure * max(1.0, self.norm(v)):
            raise ValueError(f"Element is not in the subalgebra (C-component {leak:.3e})")
        return v

    def sub_closure_residual(self) -> float:
        worst = 0.0
        columns = self.sub.coefficients.T
        for i in range(len(columns)):
            for j in range(i + 1, len(columns)):
                value = self.constants.bracket(columns[i], columns[j])
                scale = self.norm(columns[i]) * self.norm(columns[j])
                leak = self.norm(self.comp_vector(self.project_comp(value)))
                worst = max(worst, leak / scale)
        return worst

    def matrix(self, x) -> np.ndarray:
        """The matrix of an ambient coordinate vector."""
        if self.realization is None:
            raise ValueError(f"Pair {self.name!r} has no matrix realization")
        return self.realization.element(x)

    def restrict_to_quotient(self, operator: np.ndarray) -> QuotientEndo:
        """The map c ↦ Π_C(operator · c) on C, for an operator on ambient coordinates."""
        return QuotientEndo(self.splitting_inv[self.sub_dim:] @ operator @ self.comp.coefficients)

    def __repr__(self) -> str:
        return f"LiePair(name={self.name!r}, dim={self.dim}, sub_dim={self.sub_dim})"


def bott(pair: LiePair, b) -> QuotientEndo:
    """
    The Bott connection ∇_b ā = [b, a] mod h, as a matrix on C.

    Raises:
        ValueError: If b is not in h

    Example:
        >>> pair = LiePair.from_matrices(sl2_basis(), [H, E])
        >>> bott(pair, [1.0, 0.0, 0.0]).matrix
        array([[-2.]])
    """
    v = pair.require_sub(b)
    return pair.restrict_to_quotient(pair.constants.ad(v))


def bott_flatness_residual(pair: LiePair, b1, b2) -> float:
    """‖∇_[b1,b2] - [∇_b1, ∇_b2]‖ in operator norm."""
    v1 = pair.require_sub(b1)
    v2 = pair.require_sub(b2)
    lhs = bott(pair, pair.constants.bracket(v1, v2))
    rhs = bott(pair, v1).commutator(bott(pair, v2))
    return lhs.distance(rhs)


def adjoint_action(pair: LiePair, b, eps: float = 1.0) -> np.ndarray:
    """
    Ad(exp(εb)) on ambient coordinates.

    With a matrix realization this is group conjugation X ↦ gXg⁻¹ read back in
    coordinates; for abstract algebras it is exp(ε ad_b).
    """
    v = np.asarray(b, dtype=float)
    if pair.realization is None:
        return mexp(eps * pair.constants.ad(v))
    g = mexp(eps * pair.realization.element(v))
    g_inv = mexp(-eps * pair.realization.element(v))
    return np.stack(
        [pair.realization.coordinates(g @ x @ g_inv) for x in pair.realization.basis],
        axis=1,
    )


def exp_ad_rep(pair: LiePair, b, eps: float) -> QuotientEndo:
    """
    The representation of exp(εb) ∈ H on g/h induced by Ad.

    Ad(exp(εb)) is formed on g (by conjugation when the pair has a matrix
    realization, as exp(ε ad_b) otherwise) and pushed to the complement:
    c ↦ Π_C(Ad(exp(εb)) c). The result is well defined on the quotient
    because h is Ad(exp h)-invariant, and ε ↦ exp_ad_rep(b, ε) is a
    one-parameter subgroup of GL(g/h).

    Args:
        pair: The Lie pair (g, h, C)
        b: Element of h in ambient coordinates
        eps: Time parameter ε; negative values give the inverse

    Returns:
        QuotientEndo on C of size quotient_dim

    Raises:
        ValueError: If b is not in h

    Example:
        >>> pair = LiePair.from_matrices(sl2_basis(), [H, E])
        >>> exp_ad_rep(pair, [1.0, 0.0, 0.0], 0.5).matrix   # e^{-2·0.5} on F
        array([[0.36787944]])
    """
    v = pair.require_sub(b)
    return pair.restrict_to_quotient(adjoint_action(pair, v, eps))


def ad_series_rep(pair: LiePair, b, eps: float, terms: int = 40) -> QuotientEndo:
    """Truncated series Σ_j (ε ad_b)^j / j! pushed to g/h; an oracle for exp_ad_rep."""
    v = pair.require_sub(b)
    ad = eps * pair.constants.ad(v)
    total = np.eye(pair.dim)
    term = np.eye(pair.dim)
    for j in range(1, terms):
        term = term @ ad / j
        total = total + term
    return pair.restrict_to_quotient(total)


def differentiate_rep(pair: LiePair, b, eps: float = 1e-4, richardson: bool = False) -> QuotientEndo:
    """
    Central difference (exp_ad_rep(b, ε) - exp_ad_rep(b, -ε)) / 2ε.

    Converges to bott(b) with error O(ε²); with ``richardson`` the estimates
    at ε and ε/2 are combined to cancel the ε² term.

    Raises:
        ValueError: If ε is not positive
    """
    if eps <= 0:
        raise ValueError("Step must be positive")

    def central(step: float) -> QuotientEndo:
        return (exp_ad_rep(pair, b, step) - exp_ad_rep(pair, b, -step)) * (1.0 / (2.0 * step))

    if not richardson:
        return central(eps)
    return (central(eps / 2) * 4.0 - central(eps)) * (1.0 / 3.0)


@dataclass(frozen=True)
class IdealReport:
    """Outcome of the ideal test; ``witness`` is the worst (g-index, h-index) pair."""

    is_ideal: bool
    residual: float
    witness: Optional[Tuple[int, int]] = None

    def __bool__(self) -> bool:
        return self.is_ideal


def is_ideal(pair: LiePair, tol: Optional[float] = None) -> IdealReport:
    """
    Whether h is an ideal: max over basis pairs of ‖Π_C [g_i, h_j]‖ ≤ tol.

    Norms are relative to ‖g_i‖‖h_j‖; the residual is always reported.
    """
    tol = pair.tol_closure if tol is None else tol
    worst = 0.0
    witness = None
    identity = np.eye(pair.dim)
    for i in range(pair.dim):
        for j, h in enumerate(pair.sub.coefficients.T):
            value = pair.constants.bracket(identity[i], h)
            leak = pair.norm(pair.comp_vector(pair.project_comp(value)))
            leak /= pair.norm(identity[i]) * pair.norm(h)
            if leak > worst:
                worst, witness = leak, (i, j)
    ideal = worst <= tol
    logger.debug("is_ideal(%s): residual %.3e", pair.name, worst)
    return IdealReport(ideal, worst, None if ideal else witness)


def change_of_complement(pair: LiePair, other: LiePair) -> np.ndarray:
    """
    The map C → C′ induced on g/h: c ↦ Π_C′(c) along h.

    Both pairs must share g and h. For linear parts L on C and L′ on C′,
    L′ = T L T⁻¹ with T the returned matrix.
    """
    if pair.dim != other.dim or pair.sub_dim != other.sub_dim:
        raise ValueError("Pairs do not share ambient and subalgebra dimensions")
    return other.splitting_inv[other.sub_dim:] @ pair.comp.coefficients
