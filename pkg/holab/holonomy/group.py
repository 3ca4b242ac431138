"""
Holonomy of a Lie subgroup H ⊂ G acting on a slice through the identity.

For a Lie pair (g, h) with matrix realization, the slice is
S_e = {exp(c) : c ∈ C, |c| < r}. The leaves of the right-invariant
distribution of h are the cosets H·g, so a nearby point p is identified
with the point of S_e on its local leaf by solving exp(b)·p ∈ S_e for b ∈ h
("sliding"). Holonomy of h ∈ H is conjugation by h followed by that slide;
the bisection route σ(g) = ε(g)·h must give the same germ.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from holab.abstract.group import MatrixGroup
from holab.exceptions import ChartError, ConvergenceError
from holab.holonomy.maps import (
    HolonomyMap,
    build_map,
    evaluate_grid,
    lattice,
    random_cloud,
    stencil,
    with_jet_stencil,
)
from holab.lie.matrices import mexp, mlog
from holab.lie.newton import MAX_ITER, NEWTON_TOL, newton_solve
from holab.lie.pair import IdealReport, LiePair, QuotientEndo, change_of_complement, is_ideal

logger = logging.getLogger(__name__)

DEFAULT_RADIUS = 0.1
RADIUS_FLOOR = 1e-3
_VALIDATION_SAMPLES = 8


@dataclass(frozen=True)
class GroupElement:
    """
    An invertible matrix, optionally remembered as a word of exponentials.

    ``word`` holds the ambient coordinates of b_1, ..., b_m with
    matrix = exp(b_1)···exp(b_m); ``log`` is set for single exponentials.
    """

    matrix: np.ndarray
    log: Optional[np.ndarray] = None
    word: Tuple[np.ndarray, ...] = ()

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"Group element must be a square matrix, got shape {m.shape}")
        if not np.isfinite(np.linalg.cond(m)):
            raise ValueError("Group element is not invertible")
        object.__setattr__(self, "matrix", m)

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.matrix))

    @classmethod
    def identity(cls, n: int) -> "GroupElement":
        return cls(np.eye(n), log=None, word=())

    @classmethod
    def exp(cls, pair: LiePair, b, eps: float = 1.0) -> "GroupElement":
        """exp(εb) for b in ambient coordinates."""
        v = eps * np.asarray(b, dtype=float)
        return cls(mexp(pair.matrix(v)), log=v, word=(v,))

    @classmethod
    def from_word(cls, pair: LiePair, word: Sequence) -> "GroupElement":
        """exp(b_1)···exp(b_m); every b_i must lie in h for the result to be in H."""
        vectors = tuple(pair.require_sub(b) for b in word)
        matrix = np.eye(pair.realization.ambient_dim if pair.realization else 0)
        for v in vectors:
            matrix = matrix @ mexp(pair.matrix(v))
        log = vectors[0] if len(vectors) == 1 else None
        return cls(matrix, log=log, word=vectors)

    def inverse(self) -> "GroupElement":
        word = tuple(-v for v in reversed(self.word))
        log = -self.log if self.log is not None else None
        return GroupElement(np.linalg.inv(self.matrix), log=log, word=word)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.matrix @ other.matrix, log=None, word=self.word + other.word)


class SliceChart:
    """
    The exponential-chart slice S_e = exp(C-ball of radius r) for a Lie pair.

    Construction validates the radius by sampling products
    exp(h-ball)·exp(C-ball) and sliding them; use :meth:`build` to halve the
    radius automatically until validation passes.

    Raises:
        ValueError: If the pair has no matrix realization or r ≤ 0
        ChartError: If validation fails at this radius
    """

    def __init__(
        self,
        pair: LiePair,
        radius: float = DEFAULT_RADIUS,
        validate: bool = True,
        seed: int = 0,
        newton_tol: float = NEWTON_TOL,
        max_iter: int = MAX_ITER,
    ):
        if pair.realization is None:
            raise ValueError(f"Pair {pair.name!r} needs a matrix realization for group holonomy")
        if radius <= 0:
            raise ValueError("Slice radius must be positive")
        self.pair = pair
        self.radius = float(radius)
        self.newton_tol = newton_tol
        self.max_iter = max_iter
        self.group = MatrixGroup(pair.realization.ambient_dim)
        if validate:
            self._validate(seed)

    @classmethod
    def build(
        cls,
        pair: LiePair,
        radius: float = DEFAULT_RADIUS,
        floor: float = RADIUS_FLOOR,
        seed: int = 0,
        **kwargs,
    ) -> "SliceChart":
        """Construct a chart, halving the radius on failure down to ``floor``."""
        r = radius
        while True:
            try:
                return cls(pair, r, validate=True, seed=seed, **kwargs)
            except (ChartError, ConvergenceError) as exc:
                if r / 2 < floor:
                    raise ChartError(f"slide failed: shrink radius (radius floor {floor:g} reached: {exc})")
                logger.info("slice radius %.3g failed validation (%s); halving", r, exc)
                r /= 2

    def _validate(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        for _ in range(_VALIDATION_SAMPLES):
            b = random_cloud(self.pair.sub_dim, self.radius, 1, rng)[0]
            c = random_cloud(self.pair.quotient_dim, self.radius, 1, rng)[0]
            p = self.exp_sub(b) @ self.exp_comp(c)
            mlog(p)
            slide_to_slice(self, p)

    # -- coordinates -------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.pair.quotient_dim

    @property
    def jet_step(self) -> float:
        return 1e-4 * self.radius

    def exp_comp(self, c) -> np.ndarray:
        """The slice point exp(Σ c_i C_i)."""
        return mexp(self.pair.matrix(self.pair.comp_vector(c)))

    def exp_sub(self, beta) -> np.ndarray:
        """exp(Σ β_j h_j) ∈ H."""
        return mexp(self.pair.matrix(self.pair.sub_vector(beta)))

    def log_coords(self, p: np.ndarray) -> np.ndarray:
        """Ambient coordinates of mlog(p)."""
        return self.pair.realization.coordinates(mlog(p))

    def stencil(self) -> List[np.ndarray]:
        """Axis stencil of 2·dim + 1 points at radius r/10."""
        return stencil(self.dim, self.radius / 10)

    def lattice(self, count: int = 9) -> List[np.ndarray]:
        """Product grid of about ``count`` points within r/2."""
        return lattice(self.dim, self.radius / 2, count)

    def sample_points(self, samples: Optional[Sequence] = None) -> List[np.ndarray]:
        """Requested samples (default: the stencil at r/10) plus the jet stencil."""
        return with_jet_stencil(samples, self.dim, self.radius / 10, self.jet_step)

    def __repr__(self) -> str:
        return f"SliceChart(pair={self.pair.name!r}, radius={self.radius:g})"


def slide_to_slice(chart: SliceChart, p) -> Tuple[np.ndarray, np.ndarray]:
    """
    Slide a point near the identity onto S_e along its local leaf H·p.

    Solves Π_h(mlog(exp(b)·p)) = 0 for b ∈ h by Newton, so that
    exp(b)·p = exp(c′) with c′ ∈ C. The Newton start is b = -Π_h(mlog p),
    which is exact to first order; pairs with h = 0 skip the solve.

    Args:
        chart: Slice chart supplying the Newton tolerance and iteration cap
        p: Invertible matrix in the logarithm chart around the identity

    Returns:
        (b in ambient coordinates, c′ in C-coordinates)

    Raises:
        ChartError: "slide failed: shrink radius" on non-convergence or when
            a product leaves the logarithm chart

    Example:
        >>> chart = SliceChart.build(borel)
        >>> p = mexp(borel.matrix([0.1, 0.2, 0.05]))
        >>> b, c = slide_to_slice(chart, p)
        >>> borel.project_sub(chart.log_coords(chart.exp_sub(b) @ p))   # ≈ 0
    """
    pair = chart.pair
    p = np.asarray(p, dtype=float)
    if pair.sub_dim == 0:
        return np.zeros(pair.dim), pair.project_comp(chart.log_coords(p))

    def residual(beta: np.ndarray) -> np.ndarray:
        return pair.project_sub(chart.log_coords(chart.exp_sub(beta) @ p))

    try:
        beta0 = -pair.project_sub(chart.log_coords(p))
        beta = newton_solve(residual, beta0, tol=chart.newton_tol, max_iter=chart.max_iter)
        c_out = pair.project_comp(chart.log_coords(chart.exp_sub(beta) @ p))
    except (ConvergenceError, ChartError) as exc:
        raise ChartError(f"slide failed: shrink radius ({exc})") from exc
    return pair.sub_vector(beta), c_out


def chi_conj(chart: SliceChart, h: GroupElement, samples: Optional[Sequence] = None) -> HolonomyMap:
    """
    Holonomy of h by conjugation: c ↦ slide(h·exp(c)·h⁻¹).

    The base point maps to itself exactly. ``samples`` adds input points to
    the default stencil; the jet stencil is always included. Points whose
    slide fails are recorded in ``failures`` instead of raising.

    Args:
        chart: Validated slice chart S_e
        h: Element of H
        samples: Extra slice coordinates to evaluate

    Returns:
        HolonomyMap whose ``linear_part`` is the central-difference jet at
        the base point; it equals exp_ad_rep on g/h

    Example:
        >>> chart = SliceChart.build(borel)
        >>> chi_conj(chart, GroupElement.exp(borel, [0.3, 0.0, 0.0])).linear_part.matrix
        array([[0.54881164]])
    """
    h_inv = np.linalg.inv(h.matrix)

    def evaluate(c: np.ndarray) -> np.ndarray:
        p = h.matrix @ chart.exp_comp(c) @ h_inv
        return slide_to_slice(chart, p)[1]

    points = chart.sample_points(samples)
    table, failures = evaluate_grid(evaluate, points, chart.dim, chart.jet_step, fixed_base=True)
    return build_map(
        table, failures, chart.dim, chart.jet_step,
        metadata={"route": "conjugation", "h": h.matrix},
    )


def chi_via_bisection(chart: SliceChart, h: GroupElement, samples: Optional[Sequence] = None) -> HolonomyMap:
    """
    Holonomy of h through the bisection σ(g) = ε(g)·h: g ↦ σ(g)·g·h⁻¹.

    ε(g) ∈ H is the element near e with ε(g)·h·g·h⁻¹ ∈ S_e; the bisection
    values are kept in ``metadata["sigma"]`` in sample order.
    """
    h_inv = np.linalg.inv(h.matrix)
    pair = chart.pair
    sigmas = {}

    def evaluate(c: np.ndarray) -> np.ndarray:
        g = chart.exp_comp(c)
        b, _ = slide_to_slice(chart, h.matrix @ g @ h_inv)
        sigma = mexp(pair.matrix(b)) @ h.matrix
        sigmas[tuple(float(x) for x in c)] = sigma
        moved = sigma @ g @ h_inv
        return pair.project_comp(chart.log_coords(moved))

    points = chart.sample_points(samples)
    table, failures = evaluate_grid(evaluate, points, chart.dim, chart.jet_step, fixed_base=True)
    sigma_list = [sigmas.get(tuple(float(x) for x in c), h.matrix) for c, _ in table]
    return build_map(
        table, failures, chart.dim, chart.jet_step,
        metadata={"route": "bisection", "h": h.matrix, "sigma": sigma_list},
    )


def composition_defect(
    chart: SliceChart,
    h1: GroupElement,
    h2: GroupElement,
    samples: Optional[Sequence] = None,
) -> float:
    """Max over samples of |χ(h2·h1)(c) - χ(h2)(χ(h1)(c))|."""
    first = chi_conj(chart, h1, samples)
    second = chi_conj(chart, h2, samples=first.outputs())
    product = chi_conj(chart, h2 @ h1, samples=first.inputs())
    worst = 0.0
    for c_in, c_mid in first.samples:
        composed = second.lookup(c_mid)
        direct = product.lookup(c_in)
        if composed is None or direct is None or not c_in.size:
            continue
        worst = max(worst, float(np.max(np.abs(composed - direct))))
    return worst


def differentiate_holonomy(chart: SliceChart, b, eps: float, central: bool = True) -> QuotientEndo:
    """
    Finite-difference derivative of ε ↦ Ψ(exp(εb)) at 0.

    Forward: (Ψ(exp εb) - I)/ε, error O(ε); central: error O(ε²).
    """
    b = chart.pair.require_sub(b)
    forward = chi_conj(chart, GroupElement.exp(chart.pair, b, eps)).linear_part
    if not central:
        return (forward - QuotientEndo.identity(chart.dim)) * (1.0 / eps)
    backward = chi_conj(chart, GroupElement.exp(chart.pair, b, -eps)).linear_part
    return (forward - backward) * (1.0 / (2.0 * eps))


def slice_independence_residual(chart: SliceChart, other: SliceChart, h: GroupElement) -> float:
    """
    ‖L′ - T L T⁻¹‖ for the linear parts of χ(h) on two slices.

    T: C → C′ is the change of complement along h; the 1-jets of holonomy on
    different slices must be conjugate by it.
    """
    linear = chi_conj(chart, h).linear_part.matrix
    linear_other = chi_conj(other, h).linear_part.matrix
    if linear.size == 0:
        return 0.0
    t = change_of_complement(chart.pair, other.pair)
    return float(np.linalg.norm(linear_other - t @ linear @ np.linalg.inv(t), 2))


@dataclass(frozen=True)
class ProbeReport:
    """Whether χ and Φ separate two elements of H."""

    chi_collision: bool
    phi_equal: bool
    chi_deviation: float
    phi_distance: float

    @property
    def pair_injective(self) -> bool:
        """(χ, Φ) separates the two elements, or they are the same element."""
        return not (self.chi_collision and self.phi_equal) or self.phi_distance == 0.0


def chi_phi_probe(
    chart: SliceChart,
    h1: GroupElement,
    h2: GroupElement,
    tol: float = 1e-8,
) -> ProbeReport:
    """
    Compare χ(h1), χ(h2) on the sample grid and Φ(h1), Φ(h2) as matrices.

    A χ-collision with Φ(h1) ≠ Φ(h2) shows that χ alone is not injective
    while (χ, Φ) still tells the elements apart.
    """
    m1 = chi_conj(chart, h1)
    m2 = chi_conj(chart, h2)
    chi_deviation = max(m1.deviation_from(m2), m1.linear_part.distance(m2.linear_part))
    phi_distance = chart.group.distance(h1.matrix, h2.matrix)
    return ProbeReport(
        chi_collision=chi_deviation <= tol,
        phi_equal=phi_distance <= 1e-12,
        chi_deviation=chi_deviation,
        phi_distance=phi_distance,
    )


@dataclass(frozen=True)
class NormalityReport:
    """
    Ideal test against empirical triviality of χ.

    ``witness`` is (b, c, deviation) for the worst sampled h = exp(b) and
    grid point c; ``bracket_witness`` the worst (g-index, h-index) pair.
    """

    ideal: IdealReport
    chi_trivial: bool
    max_deviation: float
    witness: Optional[Tuple[np.ndarray, np.ndarray, float]] = None
    bracket_witness: Optional[Tuple[int, int]] = None
    samples: int = field(default=0)

    @property
    def consistent(self) -> bool:
        return self.ideal.is_ideal == self.chi_trivial

    def as_pair(self) -> Tuple[bool, bool]:
        return self.ideal.is_ideal, self.chi_trivial


def normality_equivalence(
    chart: SliceChart,
    sample_count: int = 8,
    seed: int = 0,
    scale: float = 0.3,
    tol: float = 1e-8,
) -> NormalityReport:
    """
    Check "h is an ideal" ⟺ "χ(h) = id for every h ∈ H" on samples.

    Elements h = exp(b) are drawn with |b| = ``scale``: ± each h-basis
    direction plus ``sample_count`` random directions; χ(h) is evaluated on
    the chart lattice.
    """
    pair = chart.pair
    ideal = is_ideal(pair)
    if chart.dim == 0 or pair.sub_dim == 0:
        return NormalityReport(ideal, True, 0.0, None, ideal.witness, 0)

    rng = np.random.default_rng(seed)
    directions = []
    for j in range(pair.sub_dim):
        e = np.zeros(pair.sub_dim)
        e[j] = 1.0
        directions.extend([e, -e])
    directions.extend(rng.normal(size=pair.sub_dim) for _ in range(sample_count))

    worst = 0.0
    witness = None
    grid = chart.lattice()
    for d in directions:
        b = pair.sub_vector(d)
        b = b * (scale / pair.norm(b))
        holonomy = chi_conj(chart, GroupElement.exp(pair, b), samples=grid)
        for c_in, c_out in holonomy.samples:
            deviation = float(np.linalg.norm(c_out - c_in))
            if deviation > worst:
                worst, witness = deviation, (b, c_in, deviation)
    trivial = worst <= tol
    report = NormalityReport(
        ideal=ideal,
        chi_trivial=trivial,
        max_deviation=worst,
        witness=None if trivial else witness,
        bracket_witness=ideal.witness,
        samples=len(directions),
    )
    if not report.consistent:
        logger.warning("normality mismatch on %s: ideal=%s, chi_trivial=%s", pair.name, ideal.is_ideal, trivial)
    return report
