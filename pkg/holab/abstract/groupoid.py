"""
Groupoid abstract base class.

A Groupoid is a small category in which every arrow is invertible.

Mathematical definition:
    A groupoid (G ⇉ M, s, t, •, 1, ⁻¹) satisfies:
    - Composability: a • b is defined iff s(a) = t(b), and then
      s(a • b) = s(b), t(a • b) = t(a)
    - Associativity: (a • b) • c = a • (b • c) whenever defined
    - Units: 1_{t(a)} • a = a = a • 1_{s(a)}
    - Inverses: a⁻¹ • a = 1_{s(a)}, a • a⁻¹ = 1_{t(a)}

Arrows here carry floating-point data, so every law is checked up to a
tolerance measured by :meth:`Groupoid.distance`.
"""

from abc import ABC, abstractmethod
from typing import Callable, Generic, Sequence, TypeVar

A = TypeVar("A")  # arrows
O = TypeVar("O")  # objects


class Groupoid(ABC, Generic[A, O]):
    """
    Abstract base class for Groupoid.

    Subclasses must implement:
        - source(a) / target(a): the objects an arrow goes between
        - compose(a, b): the arrow a • b (b first), defined when s(a) = t(b)
        - unit(x): the identity arrow at x
        - inverse(a): the inverse arrow
        - distance(a, b): a metric on arrows used by the law checks
        - object_distance(x, y): a metric on objects used for composability
    """

    composability_tolerance: float = 1e-12

    @abstractmethod
    def source(self, a: A) -> O:
        pass

    @abstractmethod
    def target(self, a: A) -> O:
        pass

    @abstractmethod
    def compose(self, a: A, b: A) -> A:
        """
        Compose two arrows, ``b`` first.

        Implementations should call :meth:`require_composable` first.
        """
        pass

    @abstractmethod
    def unit(self, x: O) -> A:
        pass

    @abstractmethod
    def inverse(self, a: A) -> A:
        pass

    @abstractmethod
    def distance(self, a: A, b: A) -> float:
        pass

    @abstractmethod
    def object_distance(self, x: O, y: O) -> float:
        pass

    def composable(self, a: A, b: A) -> bool:
        """True iff s(a) = t(b) within :attr:`composability_tolerance`."""
        return self.object_distance(self.source(a), self.target(b)) <= self.composability_tolerance

    def require_composable(self, a: A, b: A) -> None:
        gap = self.object_distance(self.source(a), self.target(b))
        if gap > self.composability_tolerance:
            raise ValueError(
                f"Arrows are not composable: source/target mismatch {gap:.3e}"
            )

    def compose_all(self, arrows: Sequence[A]) -> A:
        """
        Compose a non-empty chain ``[a_n, ..., a_1]`` into a_n • ... • a_1.

        Raises:
            ValueError: If the chain is empty or not composable
        """
        if not arrows:
            raise ValueError("Cannot compose an empty chain of arrows")
        result = arrows[-1]
        for arrow in reversed(arrows[:-1]):
            result = self.compose(arrow, result)
        return result

    def verify_associativity(self, a: A, b: A, c: A, epsilon: float = 1e-12) -> bool:
        """Check (a • b) • c = a • (b • c) for a composable triple."""
        left = self.compose(self.compose(a, b), c)
        right = self.compose(a, self.compose(b, c))
        return self.distance(left, right) <= epsilon

    def verify_identity(self, a: A, epsilon: float = 1e-12) -> bool:
        """Check 1_{t(a)} • a = a = a • 1_{s(a)}."""
        left = self.compose(self.unit(self.target(a)), a)
        right = self.compose(a, self.unit(self.source(a)))
        return self.distance(left, a) <= epsilon and self.distance(right, a) <= epsilon

    def verify_inverse(self, a: A, epsilon: float = 1e-12) -> bool:
        """Check a⁻¹ • a = 1_{s(a)} and a • a⁻¹ = 1_{t(a)}."""
        inv = self.inverse(a)
        left = self.compose(inv, a)
        right = self.compose(a, inv)
        return (
            self.distance(left, self.unit(self.source(a))) <= epsilon and
            self.distance(right, self.unit(self.target(a))) <= epsilon
        )

    def verify_groupoid_laws(self, a: A, b: A, c: A, epsilon: float = 1e-12) -> bool:
        """
        Verify all groupoid laws on a composable triple (a • b • c defined).

        Checks:
            1. Associativity
            2. Units on both sides of each arrow
            3. Inverses of each arrow
        """
        return (
            self.verify_associativity(a, b, c, epsilon) and
            all(self.verify_identity(x, epsilon) for x in (a, b, c)) and
            all(self.verify_inverse(x, epsilon) for x in (a, b, c))
        )

    def morphism_defect(
        self,
        functor: Callable[[A], object],
        codomain: "Groupoid",
        a: A,
        b: A,
    ) -> float:
        """
        Distance between F(a • b) and F(a) • F(b) in ``codomain``.

        Zero (up to rounding) for a groupoid morphism F.
        """
        image = functor(self.compose(a, b))
        product = codomain.compose(functor(a), functor(b))
        return codomain.distance(image, product)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}()"
