"""Standard matrix Lie algebras used by the built-in scenarios and tests."""

import numpy as np

from holab.lie.algebra import LieAlgebraBasis


def _unit(n: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((n, n))
    m[i, j] = 1.0
    return m


def sl2_basis() -> LieAlgebraBasis:
    """sl(2, R) with H = diag(1, -1), E = e_12, F = e_21."""
    h = np.diag([1.0, -1.0])
    return LieAlgebraBasis([h, _unit(2, 0, 1), _unit(2, 1, 0)], name="sl2")


def heisenberg_basis() -> LieAlgebraBasis:
    """Strictly upper-triangular 3×3 matrices X = e_12, Y = e_23, Z = e_13; [X, Y] = Z."""
    return LieAlgebraBasis([_unit(3, 0, 1), _unit(3, 1, 2), _unit(3, 0, 2)], name="heisenberg")


def so3_basis() -> LieAlgebraBasis:
    """Infinitesimal rotations L_x, L_y, L_z with [L_x, L_y] = L_z (cyclic)."""
    lx = _unit(3, 2, 1) - _unit(3, 1, 2)
    ly = _unit(3, 0, 2) - _unit(3, 2, 0)
    lz = _unit(3, 1, 0) - _unit(3, 0, 1)
    return LieAlgebraBasis([lx, ly, lz], name="so3")


def so3_plus_r_basis() -> LieAlgebraBasis:
    """so(3) ⊕ R as 4×4 block matrices: rotations in the upper 3×3 block, R on e_44."""
    blocks = []
    for m in so3_basis().basis:
        b = np.zeros((4, 4))
        b[:3, :3] = m
        blocks.append(b)
    blocks.append(_unit(4, 3, 3))
    return LieAlgebraBasis(blocks, name="so3+r")


def abelian_diagonal_basis(n: int) -> LieAlgebraBasis:
    """Diagonal n×n matrices."""
    if n < 1:
        raise ValueError("Dimension must be positive")
    return LieAlgebraBasis([_unit(n, i, i) for i in range(n)], name=f"diag{n}")


CATALOG = {
    "sl2": sl2_basis,
    "heisenberg": heisenberg_basis,
    "so3": so3_basis,
    "so3+r": so3_plus_r_basis,
}


def named_basis(name: str) -> LieAlgebraBasis:
    """
    Look up a catalog algebra by name.

    Raises:
        ValueError: If the name is unknown
    """
    try:
        return CATALOG[name]()
    except KeyError:
        raise ValueError(f"Unknown algebra {name!r}; known: {sorted(CATALOG)}")
