"""
Group abstract base class.

A Group is a Groupoid with a single object: every pair of arrows composes,
and there is one unit.

Mathematical definition:
    A group (G, •, e, ⁻¹) satisfies:
    - Associativity: (a • b) • c = a • (b • c)
    - Identity: e • a = a • e = a
    - Inverse: a • a⁻¹ = a⁻¹ • a = e
"""

from abc import abstractmethod
from typing import Generic, Sequence, TypeVar

import numpy as np

from holab.abstract.groupoid import Groupoid

T = TypeVar("T")


class Group(Groupoid[T, None], Generic[T]):
    """
    Abstract base class for Group, seen as a groupoid over one point.

    Subclasses must implement:
        - combine(a, b): the group operation
        - identity: property returning the unit element
        - inverse(a): the inverse
        - distance(a, b): metric used by the law checks
    """

    @property
    @abstractmethod
    def identity(self) -> T:
        pass

    @abstractmethod
    def combine(self, a: T, b: T) -> T:
        pass

    def source(self, a: T) -> None:
        return None

    def target(self, a: T) -> None:
        return None

    def object_distance(self, x: None, y: None) -> float:
        return 0.0

    def unit(self, x: None = None) -> T:
        return self.identity

    def compose(self, a: T, b: T) -> T:
        return self.combine(a, b)

    def combine_all(self, elements: Sequence[T]) -> T:
        """
        Left-to-right product of ``elements``; the identity for an empty list.

        Example:
            >>> g = MatrixGroup(2)
            >>> g.combine_all([])
            array([[1., 0.],
                   [0., 1.]])
        """
        result = self.identity
        for element in elements:
            result = self.combine(result, element)
        return result

    def conjugate(self, a: T, x: T) -> T:
        """Return a • x • a⁻¹."""
        return self.combine(self.combine(a, x), self.inverse(a))

    def verify_group_laws(self, a: T, b: T, c: T, epsilon: float = 1e-12) -> bool:
        return self.verify_groupoid_laws(a, b, c, epsilon)


class MatrixGroup(Group[np.ndarray]):
    """
    The group GL(n, R) of invertible n×n matrices under multiplication.

    Subgroups (the H and G of a Lie pair) use the same operations; membership
    is carried by how elements are built, not checked here.

    Example:
        >>> g = MatrixGroup(2)
        >>> a = np.array([[1.0, 2.0], [0.0, 1.0]])
        >>> g.combine(a, g.inverse(a))
        array([[1., 0.],
               [0., 1.]])
    """

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ValueError("Matrix dimension must be positive")
        self.dimension = dimension

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.dimension)

    def combine(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if a.shape != (self.dimension, self.dimension) or b.shape != a.shape:
            raise ValueError(
                f"Expected {self.dimension}x{self.dimension} matrices, got {a.shape} and {b.shape}"
            )
        return a @ b

    def inverse(self, a: np.ndarray) -> np.ndarray:
        return np.linalg.inv(a)

    def distance(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.max(np.abs(a - b))) if a.size else 0.0

    def __repr__(self) -> str:
        return f"MatrixGroup({self.dimension})"
