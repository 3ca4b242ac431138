"""
The transformation groupoid H ⋉ G ⇉ G of a Lie pair over a point.

Arrows are pairs (h, g) with source g and target Φ(h)·g, where Φ: H → G is
the inclusion. Multiplication is (h2, Φ(h1)g)·(h1, g) = (h2·h1, g). The
projection π(h, g) = h and Φ are groupoid morphisms onto H viewed as a
group.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from holab.abstract.group import MatrixGroup
from holab.abstract.groupoid import Groupoid
from holab.holonomy.group import GroupElement, SliceChart, chi_conj, slide_to_slice
from holab.lie.matrices import mexp
from holab.lie.pair import LiePair

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ActionGroupoidElement:
    """An arrow (h, g): from g to Φ(h)·g."""

    h: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        g = np.asarray(self.g, dtype=float)
        if h.ndim != 2 or h.shape != g.shape or h.shape[0] != h.shape[1]:
            raise ValueError(f"Arrow components must be square matrices of one size, got {h.shape} and {g.shape}")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)

    @property
    def source(self) -> np.ndarray:
        return self.g

    @property
    def target(self) -> np.ndarray:
        return self.h @ self.g


class TransformationGroupoid(Groupoid[ActionGroupoidElement, np.ndarray]):
    """
    H ⋉ G for the matrix realization of a Lie pair.

    Example:
        >>> groupoid = TransformationGroupoid(pair)
        >>> e = ActionGroupoidElement(h, g)
        >>> groupoid.compose(groupoid.inverse(e), e).h
        array([[1., 0.],
               [0., 1.]])
    """

    def __init__(self, pair: LiePair, composability_tolerance: float = 1e-12):
        if pair.realization is None:
            raise ValueError(f"Pair {pair.name!r} needs a matrix realization")
        self.pair = pair
        self.group = MatrixGroup(pair.realization.ambient_dim)
        self.composability_tolerance = composability_tolerance

    def source(self, a: ActionGroupoidElement) -> np.ndarray:
        return a.source

    def target(self, a: ActionGroupoidElement) -> np.ndarray:
        return a.target

    def compose(self, a: ActionGroupoidElement, b: ActionGroupoidElement) -> ActionGroupoidElement:
        """(h2, Φ(h1)g) • (h1, g) = (h2·h1, g)."""
        self.require_composable(a, b)
        return ActionGroupoidElement(self.group.combine(a.h, b.h), b.g)

    def unit(self, x: np.ndarray) -> ActionGroupoidElement:
        return ActionGroupoidElement(self.group.identity, x)

    def inverse(self, a: ActionGroupoidElement) -> ActionGroupoidElement:
        return ActionGroupoidElement(self.group.inverse(a.h), a.target)

    def distance(self, a: ActionGroupoidElement, b: ActionGroupoidElement) -> float:
        return max(self.group.distance(a.h, b.h), self.group.distance(a.g, b.g))

    def object_distance(self, x: np.ndarray, y: np.ndarray) -> float:
        return self.group.distance(x, y)

    def random_element(self, rng: np.random.Generator, scale: float = 0.5, base=None) -> ActionGroupoidElement:
        """exp(b) with b ∈ h of norm ≤ ``scale``, at a random base exp(x) unless ``base`` is given."""
        pair = self.pair
        h = mexp(pair.matrix(pair.sub_vector(rng.uniform(-scale, scale, pair.sub_dim))))
        if base is None:
            base = mexp(pair.matrix(rng.uniform(-scale, scale, pair.dim)))
        return ActionGroupoidElement(h, base)

    def random_chain(self, rng: np.random.Generator, length: int = 3, scale: float = 0.5) -> List[ActionGroupoidElement]:
        """A composable chain [a_n, ..., a_1], each arrow starting where the previous one ends."""
        chain = [self.random_element(rng, scale)]
        for _ in range(length - 1):
            chain.append(self.random_element(rng, scale, base=chain[-1].target))
        return list(reversed(chain))

    def __repr__(self) -> str:
        return f"TransformationGroupoid(pair={self.pair.name!r})"


def compose(e2: ActionGroupoidElement, e1: ActionGroupoidElement, tol: float = 1e-12) -> ActionGroupoidElement:
    """
    Multiply two arrows of H ⋉ G.

    Raises:
        ValueError: If source(e2) ≠ target(e1) beyond ``tol``
    """
    gap = float(np.max(np.abs(e2.source - e1.target))) if e1.g.size else 0.0
    if gap > tol:
        raise ValueError(f"Arrows are not composable: source/target mismatch {gap:.3e}")
    return ActionGroupoidElement(e2.h @ e1.h, e1.g)


def project_pi(e: ActionGroupoidElement) -> np.ndarray:
    """π(h, g) = h."""
    return e.h


def phi(h: np.ndarray) -> np.ndarray:
    """Φ: H → G, the inclusion of matrix groups."""
    return h


def verify_morphism(
    groupoid: TransformationGroupoid,
    pairs: Sequence[Sequence[ActionGroupoidElement]],
    functor=project_pi,
) -> float:
    """Max morphism defect |F(a•b) - F(a)•F(b)| over composable (a, b) pairs."""
    worst = 0.0
    for a, b in pairs:
        worst = max(worst, groupoid.morphism_defect(functor, groupoid.group, a, b))
    return worst


def act_through_groupoid(pair: LiePair, h: GroupElement, q: np.ndarray) -> ActionGroupoidElement:
    """
    The arrow (h, q), assembled by composing one arrow per half-step of h.

    Each factor exp(b_i) of ``h.word`` is applied as two arrows
    (exp(b_i/2), ·) chained with :func:`compose`, so the target is the
    groupoid's own product rather than ``h.matrix @ q``. Elements without a
    word are applied as a single arrow.
    """
    q = np.asarray(q, dtype=float)
    steps = [mexp(pair.matrix(0.5 * v)) for v in reversed(h.word) for _ in range(2)]
    if not steps:
        return ActionGroupoidElement(h.matrix, q)
    arrow = ActionGroupoidElement(steps[0], q)
    for step in steps[1:]:
        arrow = compose(ActionGroupoidElement(step, arrow.target), arrow)
    return arrow


def right_invariance_check(
    chart: SliceChart,
    h: GroupElement,
    g: GroupElement,
    samples: Optional[Sequence] = None,
) -> float:
    """
    Compare the holonomy of (h, e) with that of (h, g) pulled back by R_g.

    At base g the slice is S_e·g. A point q = exp(c)·g moves along its
    leaf to h·q through the groupoid product, and is slid onto S_e·(h·g)
    after translating back by the numerically formed (h·g)⁻¹. Reading
    slice coordinates there must reproduce χ(h)(c).

    Args:
        chart: Validated slice chart at the identity
        h: Element of H to transport by
        g: Base point in G
        samples: Slice coordinates; defaults to the chart's stencil

    Returns:
        max pointwise discrepancy over the sample grid

    Raises:
        ChartError: If a right-translated sample leaves the logarithm chart
    """
    at_identity = chi_conj(chart, h, samples)
    # at g = e the transform is chi_conj itself, evaluated the same way
    trivial_base = np.array_equal(g.matrix, np.eye(g.matrix.shape[0]))
    h_inv = np.linalg.inv(h.matrix)
    base_inv = np.linalg.inv(act_through_groupoid(chart.pair, h, g.matrix).target)
    worst = 0.0
    for c_in, c_out in at_identity.samples:
        if not np.any(c_in):
            continue
        q = chart.exp_comp(c_in) @ g.matrix
        if trivial_base:
            translated = h.matrix @ q @ h_inv
        else:
            translated = act_through_groupoid(chart.pair, h, q).target @ base_inv
        _, c_moved = slide_to_slice(chart, translated)
        worst = max(worst, float(np.max(np.abs(c_moved - c_out))))
    logger.debug("right invariance residual %.3e", worst)
    return worst
