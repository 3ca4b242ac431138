"""
Finite-dimensional matrix Lie algebras.

A :class:`LieAlgebraBasis` is an ordered list of linearly independent n×n
matrices spanning a bracket-closed subspace. Elements are handled in
coordinates with respect to that basis; :class:`StructureConstants` is the
bracket in those coordinates and :class:`Subspace` a column-span of
coordinate vectors.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from holab.exceptions import NotSubalgebraError, TransversalityError
from holab.lie.matrices import as_matrix, bracket

logger = logging.getLogger(__name__)

TOL_CLOSURE = 1e-9
TOL_JACOBI = 1e-9
_RANK_TOL = 1e-10


def _vectorize(matrices: Sequence[np.ndarray]) -> np.ndarray:
    """Stack matrices as columns of an (n², k) array."""
    if not matrices:
        return np.zeros((0, 0))
    return np.stack([m.reshape(-1) for m in matrices], axis=1)


class LieAlgebraBasis:
    """
    A basis of a matrix Lie algebra.

    Validates linear independence (rank of the vectorized basis equals k) and
    bracket closure (distance of every [b_i, b_j] from the span, measured on
    the unit-normalized basis, at most ``tol_closure``).

    Example:
        >>> h = np.diag([1.0, -1.0])
        >>> e = np.array([[0.0, 1.0], [0.0, 0.0]])
        >>> borel = LieAlgebraBasis([h, e], name="borel")
        >>> borel.dim
        2

    Raises:
        ValueError: If the basis is empty, ragged or linearly dependent
        NotSubalgebraError: If the span is not bracket-closed
    """

    def __init__(self, basis: Sequence, name: str = "", tol_closure: float = TOL_CLOSURE):
        if len(basis) == 0:
            raise ValueError("A Lie algebra basis needs at least one element")
        matrices = tuple(as_matrix(b, f"basis[{i}]") for i, b in enumerate(basis))
        n = matrices[0].shape[0]
        for i, m in enumerate(matrices):
            if m.shape != (n, n):
                raise ValueError(f"basis[{i}] has shape {m.shape}, expected {(n, n)}")

        self.basis: Tuple[np.ndarray, ...] = matrices
        self.name = name
        self.ambient_dim = n
        self.tol_closure = tol_closure
        self._columns = _vectorize(matrices)

        rank = np.linalg.matrix_rank(self._columns, tol=_RANK_TOL * max(1.0, np.abs(self._columns).max()))
        if rank != len(matrices):
            raise ValueError(f"Basis is linearly dependent: rank {rank} < {len(matrices)}")

        self.closure_residual = self._closure_residual()
        if self.closure_residual > tol_closure:
            raise NotSubalgebraError(self.closure_residual, tol_closure)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def _closure_residual(self) -> float:
        worst = 0.0
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                scale = np.linalg.norm(self.basis[i]) * np.linalg.norm(self.basis[j])
                _, residual = self.coordinates_with_residual(bracket(self.basis[i], self.basis[j]))
                worst = max(worst, residual / scale)
        return worst

    def element(self, coords) -> np.ndarray:
        """The matrix Σ coords_i b_i."""
        c = np.asarray(coords, dtype=float)
        if c.shape != (self.dim,):
            raise ValueError(f"Expected {self.dim} coordinates, got shape {c.shape}")
        return np.tensordot(c, np.stack(self.basis), axes=1)

    def coordinates_with_residual(self, x) -> Tuple[np.ndarray, float]:
        """Least-squares coordinates of a matrix and the distance to the span."""
        m = as_matrix(x, "X")
        if m.shape != (self.ambient_dim, self.ambient_dim):
            raise ValueError(f"Dimension mismatch: {m.shape} vs {(self.ambient_dim,) * 2}")
        target = m.reshape(-1)
        coords, *_ = np.linalg.lstsq(self._columns, target, rcond=None)
        residual = float(np.linalg.norm(self._columns @ coords - target))
        return coords, residual

    def coordinates(self, x) -> np.ndarray:
        coords, _ = self.coordinates_with_residual(x)
        return coords

    def gram(self) -> np.ndarray:
        """Frobenius inner products ⟨b_i, b_j⟩ = tr(b_iᵀ b_j)."""
        return self._columns.T @ self._columns

    @classmethod
    def from_structure_constants(cls, constants: "StructureConstants", name: str = "") -> "LieAlgebraBasis":
        """
        Adjoint realization b_i ↦ ad(b_i).

        Only faithful when the algebra has trivial center; otherwise the
        basis is linearly dependent and ``ValueError`` is raised.
        """
        return cls([constants.ad(np.eye(constants.dim)[i]) for i in range(constants.dim)], name=name)

    def __repr__(self) -> str:
        return f"LieAlgebraBasis(name={self.name!r}, dim={self.dim}, ambient_dim={self.ambient_dim})"


@dataclass(frozen=True)
class StructureConstants:
    """
    The bracket in coordinates: [b_i, b_j] = Σ_m tensor[i, j, m] b_m.

    ``closure_residual`` is the worst normalized least-squares residual seen
    when the tensor was computed (0 for supplied tensors).
    """

    tensor: np.ndarray
    closure_residual: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=float)
        if t.ndim != 3 or not (t.shape[0] == t.shape[1] == t.shape[2]):
            raise ValueError(f"Structure constants must have shape (k, k, k), got {t.shape}")
        if not np.all(np.isfinite(t)):
            raise ValueError("Structure constants have non-finite entries")
        if t.size and np.max(np.abs(t + t.transpose(1, 0, 2))) > TOL_CLOSURE:
            raise ValueError("Structure constants are not antisymmetric in (i, j)")
        object.__setattr__(self, "tensor", t)

    @property
    def dim(self) -> int:
        return self.tensor.shape[0]

    def bracket(self, x, y) -> np.ndarray:
        """Coordinates of [x, y] for coordinate vectors x, y."""
        return np.einsum("i,j,ijm->m", np.asarray(x, float), np.asarray(y, float), self.tensor)

    def ad(self, x) -> np.ndarray:
        """Matrix of ad_x = [x, ·] acting on coordinate columns."""
        return np.einsum("i,ijm->mj", np.asarray(x, float), self.tensor)

    def jacobi_residual(self) -> float:
        """Max |[b_i,[b_j,b_l]] + [b_j,[b_l,b_i]] + [b_l,[b_i,b_j]]| over all triples."""
        if self.dim == 0:
            return 0.0
        c = self.tensor
        total = (
            np.einsum("jlm,imp->ijlp", c, c) +
            np.einsum("lim,jmp->ijlp", c, c) +
            np.einsum("ijm,lmp->ijlp", c, c)
        )
        return float(np.max(np.abs(total)))


def structure_constants(basis: LieAlgebraBasis, tol_closure: float = TOL_CLOSURE) -> StructureConstants:
    """
    Least-squares structure constants of a matrix basis.

    Only i < j is solved for; the tensor is filled antisymmetrically, so
    antisymmetry holds exactly.

    Raises:
        NotSubalgebraError: If some bracket is farther than ``tol_closure``
            from the span (normalized by the norms of the two factors)

    Example:
        >>> c = structure_constants(sl2_basis())
        >>> c.tensor[0, 1]   # [H, E] = 2E
        array([0., 2., 0.])
    """
    k = basis.dim
    tensor = np.zeros((k, k, k))
    worst = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            coords, residual = basis.coordinates_with_residual(bracket(basis.basis[i], basis.basis[j]))
            scale = np.linalg.norm(basis.basis[i]) * np.linalg.norm(basis.basis[j])
            worst = max(worst, residual / scale)
            tensor[i, j] = coords
            tensor[j, i] = -coords
    if worst > tol_closure:
        raise NotSubalgebraError(worst, tol_closure)
    return StructureConstants(tensor, closure_residual=worst)


class Subspace:
    """
    A subspace of an ambient algebra of dimension n, spanned by the columns of
    an (n, k) coefficient matrix of ambient coordinates.

    Raises:
        ValueError: If the coefficient matrix is not of full column rank
    """

    def __init__(self, coefficients, ambient_dim: Optional[int] = None):
        c = np.asarray(coefficients, dtype=float)
        if c.ndim == 1:
            c = c.reshape(-1, 1)
        if c.ndim != 2:
            raise ValueError(f"Coefficient matrix must be 2-dimensional, got shape {c.shape}")
        if ambient_dim is not None and c.shape[0] != ambient_dim:
            if c.size == 0:
                c = np.zeros((ambient_dim, 0))
            else:
                raise ValueError(f"Coefficients have {c.shape[0]} rows, ambient dimension is {ambient_dim}")
        if not np.all(np.isfinite(c)):
            raise ValueError("Coefficient matrix has non-finite entries")
        if c.shape[1] and np.linalg.matrix_rank(c, tol=_RANK_TOL) != c.shape[1]:
            raise ValueError("Subspace coefficients are not of full column rank")
        self.coefficients = c

    @property
    def ambient_dim(self) -> int:
        return self.coefficients.shape[0]

    @property
    def dim(self) -> int:
        return self.coefficients.shape[1]

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0)))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(np.eye(ambient_dim))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


AmbientAlgebra = Union[LieAlgebraBasis, StructureConstants]


def ambient_gram(ambient: AmbientAlgebra) -> np.ndarray:
    """Frobenius Gram matrix for matrix bases, Euclidean for abstract algebras."""
    if isinstance(ambient, LieAlgebraBasis):
        return ambient.gram()
    return np.eye(ambient.dim)


def _gram_schmidt(candidates: np.ndarray, gram: np.ndarray, wanted: int) -> np.ndarray:
    """Orthonormalize columns in order under ⟨x, y⟩ = xᵀ G y, skipping null directions."""
    n = gram.shape[0]
    kept = []
    for col in candidates.T:
        v = col.copy()
        for q in kept:
            v = v - (q @ gram @ v) * q
        norm = float(np.sqrt(max(v @ gram @ v, 0.0)))
        if norm > 1e-10:
            kept.append(v / norm)
        if len(kept) == wanted:
            break
    if len(kept) != wanted:
        raise TransversalityError(f"Could only find {len(kept)} of {wanted} complement directions")
    return np.stack(kept, axis=1) if kept else np.zeros((n, 0))


def complement(ambient: AmbientAlgebra, sub: Subspace, supplied: Optional[Subspace] = None) -> Subspace:
    """
    A complement C with ambient = sub ⊕ C.

    By default the orthogonal complement of ``sub`` under the Frobenius inner
    product (Euclidean for abstract algebras): the ambient basis vectors are
    projected onto sub^⊥ and orthonormalized in order, so the result is
    reproducible. A ``supplied`` complement is returned if it passes the
    direct-sum rank check.

    Raises:
        TransversalityError: If ``supplied`` is not transverse to ``sub``
    """
    n = ambient.dim
    if sub.ambient_dim != n:
        raise ValueError(f"Subspace lives in dimension {sub.ambient_dim}, ambient has {n}")
    wanted = n - sub.dim

    if supplied is not None:
        if supplied.ambient_dim != n:
            raise ValueError(f"Complement lives in dimension {supplied.ambient_dim}, ambient has {n}")
        stacked = np.hstack([sub.coefficients, supplied.coefficients])
        if supplied.dim != wanted or np.linalg.matrix_rank(stacked, tol=_RANK_TOL) != n:
            raise TransversalityError(
                f"Supplied complement (dim {supplied.dim}) is not transverse to the subspace (dim {sub.dim})"
            )
        return supplied

    gram = ambient_gram(ambient)
    if sub.dim == 0:
        perp = np.eye(n)
    else:
        s = sub.coefficients
        projector = s @ np.linalg.solve(s.T @ gram @ s, s.T @ gram)
        perp = np.eye(n) - projector
    result = Subspace(_gram_schmidt(perp, gram, wanted), ambient_dim=n)
    logger.debug("complement of dim %d in ambient dim %d", result.dim, n)
    return result
