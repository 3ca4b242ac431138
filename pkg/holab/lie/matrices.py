"""
Dense real matrix kernel: commutator, exponential and principal logarithm.

The exponential uses scaling and squaring around a truncated Taylor core;
the logarithm uses inverse scaling and squaring (repeated Denman-Beavers
square roots) around an atanh series. Both work on float64 numpy arrays.
"""

import logging
import math

import numpy as np

from holab.exceptions import ChartError

logger = logging.getLogger(__name__)

# Scaled norm bound for the Taylor core of mexp.
_EXP_SCALED_NORM = 0.5
_EXP_TAYLOR_DEGREE = 18
# ‖X - I‖ bound before the log series is applied.
_LOG_SCALED_NORM = 0.25
_LOG_SERIES_TERMS = 20
_MAX_SQRT = 60


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """
    Validate and convert ``x`` to a finite 2-D float64 array.

    Raises:
        ValueError: If ``x`` is not rectangular 2-D or has non-finite entries
    """
    a = np.asarray(x, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must have positive rows and columns, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def _as_square(x, name: str) -> np.ndarray:
    a = as_matrix(x, name)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def bracket(x, y) -> np.ndarray:
    """
    Matrix commutator [X, Y] = XY - YX.

    Raises:
        ValueError: On non-square input or a dimension mismatch

    Example:
        >>> h = np.diag([1.0, -1.0]); e = np.array([[0.0, 1.0], [0.0, 0.0]])
        >>> bracket(h, e)
        array([[0., 2.],
               [0., 0.]])
    """
    a = _as_square(x, "X")
    b = _as_square(y, "Y")
    if a.shape != b.shape:
        raise ValueError(f"Dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def jacobi_residual(x, y, z) -> float:
    """Frobenius norm of [X,[Y,Z]] + [Y,[Z,X]] + [Z,[X,Y]]."""
    total = bracket(x, bracket(y, z)) + bracket(y, bracket(z, x)) + bracket(z, bracket(x, y))
    return float(np.linalg.norm(total))


def mexp(x) -> np.ndarray:
    """
    Matrix exponential by scaling and squaring.

    X is scaled by 2^-s so that its 1-norm is below 0.5, the exponential of
    the scaled matrix is summed as a degree-18 Taylor polynomial (Horner), and
    the result is squared s times.
    """
    a = _as_square(x, "X")
    n = a.shape[0]
    norm = float(np.linalg.norm(a, 1))
    squarings = 0
    if norm > _EXP_SCALED_NORM:
        squarings = int(math.ceil(math.log2(norm / _EXP_SCALED_NORM)))
    scaled = a / (2.0 ** squarings)

    identity = np.eye(n)
    result = identity.copy()
    for k in range(_EXP_TAYLOR_DEGREE, 0, -1):
        result = identity + (scaled @ result) / k

    for _ in range(squarings):
        result = result @ result
    return result


def _sqrtm_denman_beavers(a: np.ndarray, tol: float = 1e-14, max_iter: int = 60) -> np.ndarray:
    y = a.copy()
    z = np.eye(a.shape[0])
    for _ in range(max_iter):
        y_next = 0.5 * (y + np.linalg.inv(z))
        z_next = 0.5 * (z + np.linalg.inv(y))
        delta = np.linalg.norm(y_next - y, 1)
        y, z = y_next, z_next
        if delta <= tol * max(1.0, np.linalg.norm(y, 1)):
            break
    return y


def in_log_chart(g) -> bool:
    """
    True when the principal logarithm chart covers ``g``.

    The chart is the set of invertible matrices whose eigenvalues λ satisfy
    |λ - 1| ≤ 1, i.e. spectral radius of G - I at most one with G invertible.
    """
    a = _as_square(g, "G")
    eigenvalues = np.linalg.eigvals(a)
    if np.min(np.abs(eigenvalues)) <= 1e-12:
        return False
    return bool(np.max(np.abs(eigenvalues - 1.0)) <= 1.0 + 1e-12)


def mlog(g) -> np.ndarray:
    """
    Principal matrix logarithm by inverse scaling and squaring.

    Square roots are taken until ‖G^(1/2^k) - I‖ < 0.25, then
    log(Y) = 2 atanh((Y - I)(Y + I)^-1) is summed as an odd power series and
    multiplied by 2^k.

    Raises:
        ChartError: "log chart exceeded" when G is outside the principal chart
    """
    a = _as_square(g, "G")
    n = a.shape[0]
    identity = np.eye(n)
    if not in_log_chart(a):
        raise ChartError("log chart exceeded: an eigenvalue of G lies outside |λ - 1| ≤ 1")

    y = a
    roots = 0
    while np.linalg.norm(y - identity, 1) > _LOG_SCALED_NORM:
        if roots >= _MAX_SQRT:
            raise ChartError("log chart exceeded: square-root iteration did not settle")
        y = _sqrtm_denman_beavers(y)
        roots += 1

    w = np.linalg.solve((y + identity).T, (y - identity).T).T
    w2 = w @ w
    term = w.copy()
    series = w.copy()
    for k in range(1, _LOG_SERIES_TERMS):
        term = term @ w2
        series = series + term / (2 * k + 1)
    logger.debug("mlog used %d square roots", roots)
    return (2.0 ** (roots + 1)) * series
