"""
Newton's method for square nonlinear systems.

Used for the sliding identification: projecting a point onto a slice along
the local leaves, in both the group and the foliation regimes.
"""

import logging
from typing import Callable, Optional

import numpy as np

from holab.exceptions import ConvergenceError

logger = logging.getLogger(__name__)

Residual = Callable[[np.ndarray], np.ndarray]
Jacobian = Callable[[np.ndarray], np.ndarray]

NEWTON_TOL = 1e-12
MAX_ITER = 25
_SINGULAR_COND = 1e13


def finite_difference_jacobian(residual: Residual, x: np.ndarray, step: float = 1e-7) -> np.ndarray:
    """Central-difference Jacobian, step scaled by max(1, |x_i|)."""
    x = np.asarray(x, dtype=float)
    columns = []
    for i in range(x.size):
        h = step * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        columns.append((np.asarray(residual(x + e)) - np.asarray(residual(x - e))) / (2 * h))
    return np.stack(columns, axis=1) if columns else np.zeros((0, 0))


def newton_solve(
    residual: Residual,
    x0,
    jacobian: Optional[Jacobian] = None,
    tol: float = NEWTON_TOL,
    max_iter: int = MAX_ITER,
) -> np.ndarray:
    """
    Solve residual(x) = 0 for x ∈ R^m starting from ``x0``.

    The Jacobian is ``jacobian(x)`` if supplied, central differences otherwise.

    Returns:
        x with ‖residual(x)‖ ≤ tol

    Raises:
        ConvergenceError: After ``max_iter`` iterations, or as soon as the
            Jacobian is singular; carries the last residual norm

    Example:
        >>> newton_solve(lambda x: x**2 - 2.0, np.array([1.0]))
        array([1.41421356])
    """
    x = np.array(x0, dtype=float).reshape(-1)
    if x.size == 0:
        return x
    jac = jacobian if jacobian is not None else (lambda z: finite_difference_jacobian(residual, z))

    r = np.asarray(residual(x), dtype=float).reshape(-1)
    if r.shape != x.shape:
        raise ValueError(f"Residual has shape {r.shape}, expected {x.shape}")
    norm = float(np.linalg.norm(r))
    for iteration in range(max_iter):
        if not np.isfinite(norm):
            raise ConvergenceError("Newton produced a non-finite residual", norm, iteration)
        if norm <= tol:
            logger.debug("newton converged in %d iterations, residual %.3e", iteration, norm)
            return x
        j = np.asarray(jac(x), dtype=float)
        if not np.all(np.isfinite(j)) or np.linalg.cond(j) > _SINGULAR_COND:
            raise ConvergenceError("Newton stopped at a singular Jacobian", norm, iteration)
        x = x - np.linalg.solve(j, r)
        r = np.asarray(residual(x), dtype=float).reshape(-1)
        norm = float(np.linalg.norm(r))
        logger.debug("newton iteration %d: residual %.3e", iteration + 1, norm)

    if norm <= tol:
        return x
    raise ConvergenceError("Newton did not converge", norm, max_iter)
