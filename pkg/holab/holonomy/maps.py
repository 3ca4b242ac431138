"""
Sampled germs of diffeomorphisms between slices.

A germ is infinite data; a :class:`HolonomyMap` keeps what can be checked:
a table of (input, output) slice coordinates and the degree-1 jet (linear
part) at the base point, obtained from a symmetric central-difference
stencil that is always part of the table.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from holab.config import parallel_map
from holab.exceptions import NumericalError
from holab.lie.pair import QuotientEndo

logger = logging.getLogger(__name__)

Sample = Tuple[np.ndarray, np.ndarray]


def stencil(dim: int, step: float) -> List[np.ndarray]:
    """The base point 0 and ±step along each axis: 2·dim + 1 points."""
    points = [np.zeros(dim)]
    for i in range(dim):
        for sign in (1.0, -1.0):
            p = np.zeros(dim)
            p[i] = sign * step
            points.append(p)
    return points


def lattice(dim: int, half_width: float, count: int = 9) -> List[np.ndarray]:
    """
    A symmetric product grid with about ``count`` points in [-w, w]^dim.

    Uses an odd number of points per axis (at least 3), so 0 is included.
    """
    if dim == 0:
        return [np.zeros(0)]
    per_axis = max(3, int(round(count ** (1.0 / dim))))
    if per_axis % 2 == 0:
        per_axis += 1
    axis = np.linspace(-half_width, half_width, per_axis)
    return [np.array(p, dtype=float) for p in itertools.product(axis, repeat=dim)]


def random_cloud(dim: int, radius: float, count: int, rng: np.random.Generator) -> List[np.ndarray]:
    """``count`` points drawn uniformly from the ball of the given radius."""
    points = []
    for _ in range(count):
        direction = rng.normal(size=dim)
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            points.append(np.zeros(dim))
            continue
        points.append(direction / norm * radius * rng.uniform() ** (1.0 / dim))
    return points


def _key(point: np.ndarray) -> Tuple[float, ...]:
    return tuple(float(x) for x in point)


@dataclass(frozen=True)
class HolonomyMap:
    """
    A holonomy germ between two slices, sampled.

    Attributes:
        samples: (c_in, c_out) pairs in slice coordinates
        linear_part: derivative at the base point, from the jet stencil
        jet_step: step of the central-difference stencil included in samples
        failures: inputs whose evaluation failed, with the error message
        metadata: what produced the map (group element, bisection, path, ...)
    """

    samples: Tuple[Sample, ...]
    linear_part: QuotientEndo
    jet_step: float
    failures: Tuple[Tuple[np.ndarray, str], ...] = ()
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.linear_part.dim

    def lookup(self, point) -> Optional[np.ndarray]:
        """The recorded output for an input point, or None if not sampled."""
        wanted = _key(np.asarray(point, dtype=float))
        for c_in, c_out in self.samples:
            if _key(c_in) == wanted:
                return c_out
        return None

    def inputs(self) -> List[np.ndarray]:
        return [c_in for c_in, _ in self.samples]

    def outputs(self) -> List[np.ndarray]:
        return [c_out for _, c_out in self.samples]

    def deviation_from(self, other: "HolonomyMap") -> float:
        """Max pointwise distance over inputs sampled by both maps."""
        worst = 0.0
        for c_in, c_out in self.samples:
            theirs = other.lookup(c_in)
            if theirs is not None and c_out.size:
                worst = max(worst, float(np.max(np.abs(c_out - theirs))))
        return worst

    def displacement(self) -> float:
        """Max ‖c_out - c_in‖ over the table; 0 for an identity map."""
        worst = 0.0
        for c_in, c_out in self.samples:
            if c_in.size:
                worst = max(worst, float(np.linalg.norm(c_out - c_in)))
        return worst


def jet_from_table(table: Dict[Tuple[float, ...], np.ndarray], dim: int, step: float) -> QuotientEndo:
    """
    Central-difference Jacobian at 0 from a table keyed by input coordinates.

    Raises:
        ValueError: If a stencil point ±step·e_i is missing
    """
    columns = []
    for i in range(dim):
        plus = np.zeros(dim)
        plus[i] = step
        minus = -plus
        try:
            forward = table[_key(plus)]
            backward = table[_key(minus)]
        except KeyError:
            raise ValueError(f"Insufficient stencil: missing ±{step:g} along axis {i}")
        columns.append((forward - backward) / (2.0 * step))
    if not columns:
        return QuotientEndo.zero(0)
    return QuotientEndo(np.stack(columns, axis=1))


def build_map(
    samples: Sequence[Sample],
    failures: Sequence[Tuple[np.ndarray, str]],
    dim: int,
    jet_step: float,
    metadata: Optional[Dict[str, Any]] = None,
) -> HolonomyMap:
    """Assemble a HolonomyMap and compute its linear part from the stencil."""
    table = {_key(c_in): c_out for c_in, c_out in samples}
    linear = jet_from_table(table, dim, jet_step)
    return HolonomyMap(
        samples=tuple(samples),
        linear_part=linear,
        jet_step=jet_step,
        failures=tuple(failures),
        metadata=dict(metadata or {}),
    )


def linearize(holonomy: HolonomyMap, step: Optional[float] = None) -> QuotientEndo:
    """
    Derivative of the holonomy germ at the base point (its 1-jet).

    Recomputed from the sample table by central differences at ``step``
    (default: the map's jet step).

    Raises:
        ValueError: If the table lacks the symmetric stencil at that step
    """
    table = {_key(c_in): c_out for c_in, c_out in holonomy.samples}
    return jet_from_table(table, holonomy.dim, holonomy.jet_step if step is None else step)


def with_jet_stencil(points: Optional[Sequence], dim: int, default_step: float, jet_step: float) -> List[np.ndarray]:
    """
    Requested sample points (default: the axis stencil at ``default_step``)
    followed by the jet stencil at ``jet_step``, without repeats.

    Raises:
        ValueError: If a point does not have ``dim`` coordinates
    """
    base = stencil(dim, default_step) if points is None else [np.asarray(p, dtype=float) for p in points]
    merged: List[np.ndarray] = []
    seen = set()
    for p in list(base) + stencil(dim, jet_step):
        if p.shape != (dim,):
            raise ValueError(f"Sample point has shape {p.shape}, slice dimension is {dim}")
        if _key(p) not in seen:
            seen.add(_key(p))
            merged.append(p)
    return merged


def evaluate_grid(
    evaluate: Callable[[np.ndarray], np.ndarray],
    points: Sequence[np.ndarray],
    dim: int,
    jet_step: float,
    fixed_base: bool = False,
) -> Tuple[List[Sample], List[Tuple[np.ndarray, str]]]:
    """
    Evaluate a slice map on every point, in parallel.

    Failures (NumericalError) away from the jet stencil are recorded and
    skipped; a failure on the jet stencil is re-raised, since the linear
    part could not be formed. With ``fixed_base`` the origin maps to itself
    without evaluation.
    """

    def guarded(c: np.ndarray):
        if fixed_base and not np.any(c):
            return c, np.zeros(dim), None
        try:
            return c, np.asarray(evaluate(c), dtype=float), None
        except NumericalError as exc:
            return c, None, exc

    jet_keys = {_key(p) for p in stencil(dim, jet_step)}
    samples: List[Sample] = []
    failures: List[Tuple[np.ndarray, str]] = []
    for c, out, error in parallel_map(guarded, list(points)):
        if error is None:
            samples.append((c, out))
            continue
        if _key(c) in jet_keys:
            raise error
        logger.warning("sample %s failed: %s", c, error)
        failures.append((c, str(error)))
    return samples, failures
