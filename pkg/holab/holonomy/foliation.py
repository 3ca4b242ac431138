"""
Holonomy of regular foliations on boxes in R^n.

Two kinds of model:

    - spanned (:class:`SpannedFoliation`): k vector fields X_1..X_k whose
      span is an involutive rank-k distribution; leafwise paths are flow
      words [(i, t), ...] and points are brought onto the target slice by a
      plaque slide along the same flows.
    - ode_graph (:class:`GraphFoliation`): leaves are the graphs of
      solutions of y' = f(x, y); leafwise paths are base intervals [x0, x1]
      and slices are vertical.

Holonomy maps are computed pointwise on slice grids, linearized by central
differences, and compared against the variational (Bott-transport) route.
Integration uses scipy's DOP853 with box-escape events.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import null_space

from holab.config import DEFAULT_TOLERANCES, Tolerances
from holab.exceptions import ChartError, ConvergenceError, DomainEscapeError, NumericalError, TransversalityError
from holab.expression import Expression, Num, derivative, evaluate, parse_expression
from holab.holonomy.maps import HolonomyMap, build_map, evaluate_grid, with_jet_stencil
from holab.lie.newton import newton_solve
from holab.lie.pair import QuotientEndo

logger = logging.getLogger(__name__)

FieldSpec = Union[str, Expression]
FD_STEP = 1e-6
DEFAULT_SLICE_RADIUS = 0.1
ENDPOINT_TOL = 1e-8
_RANK_TOL = 1e-8


def _as_expression(spec: FieldSpec, dim: int) -> Expression:
    return parse_expression(spec, dim) if isinstance(spec, str) else spec


def _names(dim: int) -> List[str]:
    return ["x"] + [f"y{i}" for i in range(1, dim)]


def _env(point: np.ndarray) -> dict:
    return dict(zip(_names(len(point)), (float(v) for v in point)))


def _fd_jacobian(fn: Callable[[np.ndarray], np.ndarray], point: np.ndarray) -> np.ndarray:
    """Central differences with step 1e-6·max(1, |p_i|)."""
    columns = []
    for i in range(point.size):
        h = FD_STEP * max(1.0, abs(point[i]))
        e = np.zeros_like(point)
        e[i] = h
        columns.append((np.asarray(fn(point + e)) - np.asarray(fn(point - e))) / (2.0 * h))
    return np.stack(columns, axis=1)


# -- models --------------------------------------------------------------------


class FoliationModel(ABC):
    """
    A regular foliation of an open box in R^n.

    Subclasses provide the tangent frame of the leaves; integration of leafwise
    flows goes through :meth:`integrate`, which stops with
    :class:`DomainEscapeError` when a trajectory reaches the box boundary.
    """

    kind: str = ""

    def __init__(self, box, name: str = "", tolerances: Tolerances = DEFAULT_TOLERANCES):
        b = np.asarray(box, dtype=float)
        if b.ndim != 2 or b.shape[1] != 2 or b.shape[0] < 1:
            raise ValueError(f"Domain box must be a list of [low, high] pairs, got shape {b.shape}")
        if np.any(b[:, 0] >= b[:, 1]):
            raise ValueError("Every box interval must have low < high")
        self.box = b
        self.name = name
        self.tolerances = tolerances

    @property
    def dim(self) -> int:
        return self.box.shape[0]

    @property
    @abstractmethod
    def leaf_dim(self) -> int:
        pass

    @property
    def codim(self) -> int:
        return self.dim - self.leaf_dim

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.box[:, 1] - self.box[:, 0]))

    @property
    @abstractmethod
    def symbolic(self) -> bool:
        """Whether derivatives come from expression trees rather than finite differences."""

    @abstractmethod
    def tangent_frame(self, point) -> np.ndarray:
        """An (n, k) matrix whose columns span the leaf tangent at ``point``."""

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(p > self.box[:, 0]) and np.all(p < self.box[:, 1]))

    def validation_grid(self, per_axis: int = 5) -> List[np.ndarray]:
        """Interior grid points, ``per_axis`` per coordinate."""
        axes = [np.linspace(lo, hi, per_axis + 2)[1:-1] for lo, hi in self.box]
        mesh = np.meshgrid(*axes, indexing="ij")
        return [np.array(p) for p in np.stack([m.reshape(-1) for m in mesh], axis=1)]

    def integrate(
        self,
        rhs: Callable[[float, np.ndarray], np.ndarray],
        t_span: Tuple[float, float],
        state0: np.ndarray,
        tracked: Sequence[Tuple[int, int]],
        locate: Callable[[float, np.ndarray], np.ndarray],
    ) -> np.ndarray:
        """
        Integrate ``rhs`` over ``t_span``, watching box coordinates.

        Args:
            rhs: Right-hand side f(t, state)
            t_span: (t0, t1); t1 < t0 integrates backwards
            state0: Initial state
            tracked: (state index, box row) pairs that must stay inside the box
            locate: Maps (t, state) to the point of R^n reported on escape

        Returns:
            The state at t1

        Raises:
            DomainEscapeError: If a tracked coordinate reaches the boundary
            NumericalError: If the integrator fails
        """
        t0, t1 = float(t_span[0]), float(t_span[1])
        state0 = np.asarray(state0, dtype=float)
        start = locate(t0, state0)
        if not self.contains(start):
            raise DomainEscapeError("start point outside the domain box", start)
        if t0 == t1:
            return state0.copy()

        events = []
        for index, row in tracked:
            lo, hi = self.box[row]
            for bound, sign in ((lo, 1.0), (hi, -1.0)):
                def hit(t, s, index=index, bound=bound, sign=sign):
                    return sign * (s[index] - bound)
                hit.terminal = True
                events.append(hit)

        sol = solve_ivp(
            rhs,
            (t0, t1),
            state0,
            method="DOP853",
            rtol=self.tolerances.ode_rtol,
            atol=self.tolerances.ode_atol,
            max_step=self.diameter / 100,
            events=events,
        )
        if sol.status == 1:
            raise DomainEscapeError("integration left the domain box", locate(sol.t[-1], sol.y[:, -1]))
        if not sol.success:
            raise NumericalError(f"integration failed: {sol.message}")
        logger.debug("integrated %s over [%g, %g] in %d evaluations", self.name, t0, t1, sol.nfev)
        return sol.y[:, -1]


class GraphFoliation(FoliationModel):
    """
    Leaves are graphs of solutions of y' = f(x, y), y ∈ R^{n-1}.

    ``rhs`` is either a list of n-1 expressions (strings or parsed trees in
    x, y1..y{n-1}, alias y when n = 2) or a callable f(x, y) -> array, in
    which case ∂f/∂y falls back to central differences.

    Example:
        >>> model = GraphFoliation([[-1, 2], [-5, 5]], ["y"])
        >>> model.flow(0.0, 1.0, np.array([1.0]))
        array([2.71828183])

    Raises:
        ValueError: If the rhs has the wrong size or is not finite on the box
    """

    kind = "ode_graph"

    def __init__(
        self,
        box,
        rhs: Union[Sequence[FieldSpec], Callable[[float, np.ndarray], np.ndarray]],
        name: str = "",
        tolerances: Tolerances = DEFAULT_TOLERANCES,
        validate: bool = True,
    ):
        super().__init__(box, name, tolerances)
        if self.dim < 2:
            raise ValueError("A graph foliation needs n ≥ 2")
        if callable(rhs):
            self.expressions: Optional[Tuple[Expression, ...]] = None
            self._callable = rhs
            self._partials = None
        else:
            exprs = tuple(_as_expression(e, self.dim) for e in rhs)
            if len(exprs) != self.dim - 1:
                raise ValueError(f"Expected {self.dim - 1} right-hand sides, got {len(exprs)}")
            self.expressions = exprs
            self._callable = None
            self._partials = [
                [derivative(e, f"y{j}") for j in range(1, self.dim)] for e in exprs
            ]
        if validate:
            self._validate()

    @property
    def leaf_dim(self) -> int:
        return 1

    @property
    def symbolic(self) -> bool:
        return self.expressions is not None

    def rhs(self, x: float, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self._callable is not None:
            return np.asarray(self._callable(x, y), dtype=float).reshape(self.dim - 1)
        env = _env(np.concatenate([[x], y]))
        return np.array([float(evaluate(e, env)) for e in self.expressions])

    def rhs_jacobian(self, x: float, y) -> np.ndarray:
        """∂f/∂y at (x, y), symbolic where available."""
        y = np.asarray(y, dtype=float)
        numeric = None
        env = _env(np.concatenate([[x], y]))
        jac = np.zeros((self.dim - 1, self.dim - 1))
        for i in range(self.dim - 1):
            for j in range(self.dim - 1):
                partial = self._partials[i][j] if self._partials is not None else None
                if partial is not None:
                    jac[i, j] = float(evaluate(partial, env))
                    continue
                if numeric is None:
                    numeric = _fd_jacobian(lambda z: self.rhs(x, z), y)
                jac[i, j] = numeric[i, j]
        return jac

    def tangent_frame(self, point) -> np.ndarray:
        p = np.asarray(point, dtype=float)
        return np.concatenate([[1.0], self.rhs(p[0], p[1:])]).reshape(-1, 1)

    def _validate(self) -> None:
        for p in self.validation_grid():
            value = self.rhs(p[0], p[1:])
            jac = _fd_jacobian(lambda z: self.rhs(z[0], z[1:]), p)
            if not (np.all(np.isfinite(value)) and np.all(np.isfinite(jac))):
                raise ValueError(f"Right-hand side is not finite and differentiable at {list(p)}")

    def _tracked(self) -> List[Tuple[int, int]]:
        return [(i, i + 1) for i in range(self.dim - 1)]

    def _check_interval(self, x0: float, x1: float) -> None:
        lo, hi = self.box[0]
        for x in (x0, x1):
            if not lo < x < hi:
                raise DomainEscapeError("base interval leaves the domain box", [x])

    def flow(self, x0: float, x1: float, y0) -> np.ndarray:
        """y(x1) for the solution through (x0, y0)."""
        self._check_interval(x0, x1)
        return self.integrate(
            lambda x, y: self.rhs(x, y),
            (x0, x1),
            np.asarray(y0, dtype=float),
            self._tracked(),
            lambda x, y: np.concatenate([[x], y]),
        )

    def variational(self, x0: float, x1: float, y0) -> Tuple[np.ndarray, np.ndarray]:
        """
        (y(x1), V(x1)) for V' = ∂f/∂y(x, y(x))·V, V(x0) = I.

        V is the derivative of the flow map y0 ↦ y(x1).
        """
        self._check_interval(x0, x1)
        m = self.dim - 1

        def rhs(x, state):
            y, v = state[:m], state[m:].reshape(m, m)
            return np.concatenate([self.rhs(x, y), (self.rhs_jacobian(x, y) @ v).reshape(-1)])

        state0 = np.concatenate([np.asarray(y0, dtype=float), np.eye(m).reshape(-1)])
        final = self.integrate(rhs, (x0, x1), state0, self._tracked(), lambda x, s: np.concatenate([[x], s[:m]]))
        return final[:m], final[m:].reshape(m, m)

    def __repr__(self) -> str:
        return f"GraphFoliation(name={self.name!r}, dim={self.dim})"


class SpannedFoliation(FoliationModel):
    """
    The foliation tangent to k vector fields on a box in R^n.

    Each field is a list of n component expressions (or a callable p -> R^n).
    Construction rejects fields that drop rank or fail involutivity
    (the bracket [X_i, X_j] must lie in span{X_m} at every validation point).

    Raises:
        ValueError: On rank deficiency or an involutivity residual above
            ``tolerances.involutivity``
    """

    kind = "spanned"

    def __init__(
        self,
        box,
        fields: Sequence[Union[Sequence[FieldSpec], Callable[[np.ndarray], np.ndarray]]],
        name: str = "",
        tolerances: Tolerances = DEFAULT_TOLERANCES,
        validate: bool = True,
    ):
        super().__init__(box, name, tolerances)
        if not fields:
            raise ValueError("A spanned foliation needs at least one vector field")
        if len(fields) >= self.dim:
            raise ValueError(f"{len(fields)} fields on R^{self.dim} leave no transverse direction")
        self._fields: List[Union[Tuple[Expression, ...], Callable]] = []
        self._jacobians: List[Optional[List[List[Optional[Expression]]]]] = []
        for i, spec in enumerate(fields):
            if callable(spec):
                self._fields.append(spec)
                self._jacobians.append(None)
                continue
            components = tuple(_as_expression(c, self.dim) for c in spec)
            if len(components) != self.dim:
                raise ValueError(f"Field {i} has {len(components)} components, expected {self.dim}")
            self._fields.append(components)
            self._jacobians.append(
                [[derivative(c, name) for name in _names(self.dim)] for c in components]
            )
        self.involutivity_residual = 0.0
        if validate:
            self._validate()

    @property
    def leaf_dim(self) -> int:
        return len(self._fields)

    @property
    def symbolic(self) -> bool:
        return all(not callable(f) for f in self._fields)

    def field(self, i: int, point) -> np.ndarray:
        p = np.asarray(point, dtype=float)
        spec = self._fields[i]
        if callable(spec):
            return np.asarray(spec(p), dtype=float).reshape(self.dim)
        env = _env(p)
        return np.array([float(evaluate(c, env)) for c in spec])

    def field_jacobian(self, i: int, point) -> np.ndarray:
        """D X_i at ``point``; entries without a symbolic derivative use central differences."""
        p = np.asarray(point, dtype=float)
        table = self._jacobians[i]
        numeric = None
        if table is None or any(d is None for row in table for d in row):
            numeric = _fd_jacobian(lambda z: self.field(i, z), p)
            if table is None:
                return numeric
        env = _env(p)
        jac = np.zeros((self.dim, self.dim))
        for r, row in enumerate(table):
            for c, partial in enumerate(row):
                jac[r, c] = float(evaluate(partial, env)) if partial is not None else numeric[r, c]
        return jac

    def bracket(self, i: int, j: int, point) -> np.ndarray:
        """[X_i, X_j](p) = DX_j·X_i - DX_i·X_j."""
        p = np.asarray(point, dtype=float)
        return self.field_jacobian(j, p) @ self.field(i, p) - self.field_jacobian(i, p) @ self.field(j, p)

    def tangent_frame(self, point) -> np.ndarray:
        return np.stack([self.field(i, point) for i in range(self.leaf_dim)], axis=1)

    def _validate(self) -> None:
        worst = 0.0
        for p in self.validation_grid():
            frame = self.tangent_frame(p)
            if not np.all(np.isfinite(frame)):
                raise ValueError(f"Vector fields are not finite at {list(p)}")
            rank = np.linalg.matrix_rank(frame, tol=_RANK_TOL * max(1.0, np.abs(frame).max()))
            if rank != self.leaf_dim:
                raise ValueError(f"Vector fields have rank {rank} < {self.leaf_dim} at {list(p)}")
            for i in range(self.leaf_dim):
                for j in range(i + 1, self.leaf_dim):
                    value = self.bracket(i, j, p)
                    coeffs, *_ = np.linalg.lstsq(frame, value, rcond=None)
                    worst = max(worst, float(np.linalg.norm(frame @ coeffs - value)))
        self.involutivity_residual = worst
        if worst > self.tolerances.involutivity:
            raise ValueError(
                f"Vector fields are not involutive: bracket leaves the span by {worst:.3e}"
            )

    def _locate(self, t: float, state: np.ndarray) -> np.ndarray:
        return state[: self.dim]

    def flow(self, i: int, t: float, point) -> np.ndarray:
        """The time-t flow of X_i applied to ``point``."""
        tracked = [(r, r) for r in range(self.dim)]
        return self.integrate(lambda _, p: self.field(i, p), (0.0, t), np.asarray(point, dtype=float), tracked, self._locate)

    def flow_with_jacobian(self, i: int, t: float, point) -> Tuple[np.ndarray, np.ndarray]:
        """The flow of X_i and its derivative, from J' = DX_i(p)·J."""
        n = self.dim

        def rhs(_, state):
            p, jac = state[:n], state[n:].reshape(n, n)
            return np.concatenate([self.field(i, p), (self.field_jacobian(i, p) @ jac).reshape(-1)])

        tracked = [(r, r) for r in range(n)]
        state0 = np.concatenate([np.asarray(point, dtype=float), np.eye(n).reshape(-1)])
        final = self.integrate(rhs, (0.0, t), state0, tracked, self._locate)
        return final[:n], final[n:].reshape(n, n)

    def __repr__(self) -> str:
        return f"SpannedFoliation(name={self.name!r}, dim={self.dim}, leaf_dim={self.leaf_dim})"


# -- paths and slices ----------------------------------------------------------


@dataclass(frozen=True)
class LeafwisePath:
    """
    A path inside one leaf, starting at ``start`` ∈ R^n.

    For spanned models it is a flow word ``steps`` = ((i, t), ...) applied
    left to right; for graph models a base interval (x0, x1) with
    start[0] = x0.
    """

    start: np.ndarray
    steps: Tuple[Tuple[int, float], ...] = ()
    interval: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        object.__setattr__(self, "start", np.asarray(self.start, dtype=float))
        object.__setattr__(self, "steps", tuple((int(i), float(t)) for i, t in self.steps))
        if self.interval is not None:
            x0, x1 = (float(v) for v in self.interval)
            if self.steps:
                raise ValueError("A path is either a flow word or a base interval, not both")
            if self.start[0] != x0:
                raise ValueError(f"Path starts at x = {self.start[0]}, interval starts at {x0}")
            object.__setattr__(self, "interval", (x0, x1))

    @classmethod
    def flow_word(cls, start, steps: Sequence[Tuple[int, float]]) -> "LeafwisePath":
        return cls(start=start, steps=tuple(steps))

    @classmethod
    def base_interval(cls, x0: float, x1: float, y0=None, dim: int = 2) -> "LeafwisePath":
        y = np.zeros(dim - 1) if y0 is None else np.asarray(y0, dtype=float).reshape(-1)
        return cls(start=np.concatenate([[x0], y]), interval=(x0, x1))

    @property
    def is_interval(self) -> bool:
        return self.interval is not None

    def _check_model(self, model: FoliationModel) -> None:
        if self.start.shape != (model.dim,):
            raise ValueError(f"Path start has {self.start.size} coordinates, model has {model.dim}")
        if self.is_interval != isinstance(model, GraphFoliation):
            raise ValueError("Graph models take base intervals, spanned models take flow words")
        for i, _ in self.steps:
            if not 0 <= i < model.leaf_dim:
                raise ValueError(f"Flow word uses field {i}, model has {model.leaf_dim}")

    def endpoint(self, model: FoliationModel) -> np.ndarray:
        """Where the path ends."""
        self._check_model(model)
        if self.is_interval:
            x0, x1 = self.interval
            return np.concatenate([[x1], model.flow(x0, x1, self.start[1:])])
        point = self.start
        for i, t in self.steps:
            point = model.flow(i, t, point)
        return point

    def reverse(self, model: FoliationModel) -> "LeafwisePath":
        """The same path traversed backwards, starting at its endpoint."""
        end = self.endpoint(model)
        if self.is_interval:
            return LeafwisePath(start=end, interval=(self.interval[1], self.interval[0]))
        return LeafwisePath(start=end, steps=tuple((i, -t) for i, t in reversed(self.steps)))

    def concatenate(self, other: "LeafwisePath", model: FoliationModel) -> "LeafwisePath":
        """
        This path followed by ``other``.

        Raises:
            ValueError: If ``other`` does not start where this path ends
        """
        end = self.endpoint(model)
        gap = float(np.max(np.abs(end - other.start)))
        if gap > ENDPOINT_TOL:
            raise ValueError(f"Paths do not concatenate: endpoint gap {gap:.3e}")
        if self.is_interval and other.is_interval:
            return LeafwisePath(start=self.start, interval=(self.interval[0], other.interval[1]))
        if not self.is_interval and not other.is_interval:
            return LeafwisePath(start=self.start, steps=self.steps + other.steps)
        raise ValueError("Cannot concatenate a flow word with a base interval")


@dataclass(frozen=True)
class TransverseSlice:
    """
    An affine transversal base + span(directions), directions as columns.

    Slice coordinates s map to base + directions·s.
    """

    base: np.ndarray
    directions: np.ndarray
    _pinv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        d = np.asarray(self.directions, dtype=float)
        if d.ndim != 2 or d.shape[0] != base.size:
            raise ValueError(f"Directions must be an ({base.size}, q) matrix, got shape {d.shape}")
        if d.shape[1] and np.linalg.matrix_rank(d) != d.shape[1]:
            raise TransversalityError("Slice directions are linearly dependent")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "_pinv", np.linalg.pinv(d))

    @classmethod
    def normal_to(cls, model: FoliationModel, point) -> "TransverseSlice":
        """Orthonormal directions normal to the leaf through ``point``."""
        p = np.asarray(point, dtype=float)
        return cls(p, null_space(model.tangent_frame(p).T))

    @classmethod
    def vertical(cls, model: FoliationModel, point) -> "TransverseSlice":
        """The slice x = const through ``point``, coordinates = y-displacement."""
        p = np.asarray(point, dtype=float)
        return cls(p, np.eye(model.dim)[:, 1:])

    @property
    def dim(self) -> int:
        return self.directions.shape[1]

    @property
    def is_vertical(self) -> bool:
        return bool(np.all(self.directions[0] == 0.0))

    def check_transverse(self, model: FoliationModel) -> None:
        """
        Raises:
            TransversalityError: If tangent and slice do not span R^n at the base
        """
        frame = model.tangent_frame(self.base)
        stacked = np.hstack([frame, self.directions])
        if self.dim != model.codim or np.linalg.matrix_rank(stacked, tol=_RANK_TOL) != model.dim:
            raise TransversalityError(f"Slice at {list(self.base)} is not transverse to the foliation")

    def point(self, s) -> np.ndarray:
        return self.base + self.directions @ np.asarray(s, dtype=float)

    def coordinates(self, q) -> np.ndarray:
        return self._pinv @ (np.asarray(q, dtype=float) - self.base)

    def normal_equations(self) -> np.ndarray:
        """An (n, k) basis N with q on the slice iff Nᵀ(q - base) = 0."""
        return null_space(self.directions.T)


def default_slices(model: FoliationModel, path: LeafwisePath) -> Tuple[TransverseSlice, TransverseSlice]:
    """Vertical slices for graph models, normal slices for spanned ones."""
    end = path.endpoint(model)
    make = TransverseSlice.vertical if isinstance(model, GraphFoliation) else TransverseSlice.normal_to
    return make(model, path.start), make(model, end)


def _prepare(
    model: FoliationModel,
    path: LeafwisePath,
    slice0: Optional[TransverseSlice],
    slice1: Optional[TransverseSlice],
) -> Tuple[TransverseSlice, TransverseSlice, np.ndarray]:
    path._check_model(model)
    if slice0 is None or slice1 is None:
        d0, d1 = default_slices(model, path)
        slice0 = slice0 or d0
        slice1 = slice1 or d1
    for s in (slice0, slice1):
        s.check_transverse(model)
    if isinstance(model, GraphFoliation) and not (slice0.is_vertical and slice1.is_vertical):
        raise ValueError("Graph foliations transport between vertical slices")
    gap = float(np.max(np.abs(slice0.base - path.start)))
    if gap > ENDPOINT_TOL:
        raise ValueError(f"Path does not start at the source slice base (gap {gap:.3e})")
    end = path.endpoint(model)
    gap = float(np.max(np.abs(end - slice1.base)))
    if gap > ENDPOINT_TOL:
        raise ValueError(f"Path does not end at the target slice base (gap {gap:.3e})")
    return slice0, slice1, end


def _plaque_slide(model: SpannedFoliation, point: np.ndarray, target: TransverseSlice) -> np.ndarray:
    """Move ``point`` along the leaf flows until it lies on ``target``."""
    normals = target.normal_equations()

    def plaque(times: np.ndarray) -> np.ndarray:
        q = point
        for i, t in enumerate(times):
            q = model.flow(i, t, q)
        return q

    def residual(times: np.ndarray) -> np.ndarray:
        return normals.T @ (plaque(times) - target.base)

    try:
        times = newton_solve(residual, np.zeros(model.leaf_dim), tol=model.tolerances.foliation_newton)
    except ConvergenceError as exc:
        raise ChartError(f"plaque slide failed: shrink the slice radius ({exc})") from exc
    return plaque(times)


def holonomy_transport(
    model: FoliationModel,
    path: LeafwisePath,
    slice0: Optional[TransverseSlice] = None,
    slice1: Optional[TransverseSlice] = None,
    samples: Optional[Sequence] = None,
    radius: float = DEFAULT_SLICE_RADIUS,
) -> HolonomyMap:
    """
    The holonomy map of a leafwise path between two transverse slices.

    Graph models integrate y' = f(x, y) from each sample on the vertical
    slice; spanned models push each sample through the flow word and slide it
    onto ``slice1`` along the local plaque.

    Args:
        model: The foliation
        path: Leafwise path from slice0's base to slice1's base
        slice0, slice1: Transversals; default vertical/normal slices at the ends
        samples: Slice coordinates to evaluate (default: stencil at radius/10);
            the jet stencil at 1e-4·radius is always added
        radius: Slice radius used for the default grids

    Returns:
        HolonomyMap from slice0 to slice1 coordinates. Samples whose
        trajectory leaves the box are listed in ``failures``; the linear part
        is the central-difference jet at the base point.

    Raises:
        ValueError: If the path endpoints miss the slice bases by more than 1e-8
        DomainEscapeError: If the base-point neighborhood leaves the box

    Example:
        >>> model = GraphFoliation([[-1, 2], [-0.9, 0.9]], ["y^2"])
        >>> hol = holonomy_transport(model, LeafwisePath.base_interval(0.0, 1.0), samples=[[0.2]])
        >>> hol.lookup([0.2])   # 0.2 / (1 - 0.2)
        array([0.25])
    """
    slice0, slice1, end = _prepare(model, path, slice0, slice1)
    jet_step = 1e-4 * radius

    if isinstance(model, GraphFoliation):
        x0, x1 = path.interval

        def evaluate_point(s: np.ndarray) -> np.ndarray:
            start = slice0.point(s)
            return slice1.coordinates(np.concatenate([[x1], model.flow(x0, x1, start[1:])]))

    else:

        def evaluate_point(s: np.ndarray) -> np.ndarray:
            q = slice0.point(s)
            for i, t in path.steps:
                q = model.flow(i, t, q)
            return slice1.coordinates(_plaque_slide(model, q, slice1))

    points = with_jet_stencil(samples, slice0.dim, radius / 10, jet_step)
    table, failures = evaluate_grid(evaluate_point, points, slice0.dim, jet_step)
    return build_map(
        table, failures, slice0.dim, jet_step,
        metadata={"route": "transport", "model": model.name, "start": path.start, "end": end},
    )


def linear_holonomy_variational(
    model: FoliationModel,
    path: LeafwisePath,
    slice0: Optional[TransverseSlice] = None,
    slice1: Optional[TransverseSlice] = None,
) -> QuotientEndo:
    """
    Linear holonomy from the variational equation along the base leaf.

    Graph models integrate V' = ∂f/∂y·V; spanned models compose the flow
    Jacobians J of the word and read J·(slice0 directions) modulo the leaf
    tangent at the endpoint, in slice1 coordinates.
    """
    slice0, slice1, end = _prepare(model, path, slice0, slice1)
    if isinstance(model, GraphFoliation):
        x0, x1 = path.interval
        _, v = model.variational(x0, x1, path.start[1:])
        d0 = slice0.directions[1:]
        d1 = slice1.directions[1:]
        return QuotientEndo(np.linalg.pinv(d1) @ v @ d0)

    jac = np.eye(model.dim)
    point = path.start
    for i, t in path.steps:
        point, step_jac = model.flow_with_jacobian(i, t, point)
        jac = step_jac @ jac
    system = np.hstack([slice1.directions, model.tangent_frame(end)])
    solution = np.linalg.solve(system, jac @ slice0.directions)
    return QuotientEndo(solution[: slice1.dim])


def bott_transport_check(
    model: FoliationModel,
    path: LeafwisePath,
    slice0: Optional[TransverseSlice] = None,
    slice1: Optional[TransverseSlice] = None,
    radius: float = DEFAULT_SLICE_RADIUS,
) -> float:
    """‖linearized holonomy - variational transport‖ in operator norm."""
    transported = holonomy_transport(model, path, slice0, slice1, radius=radius).linear_part
    variational = linear_holonomy_variational(model, path, slice0, slice1)
    return transported.distance(variational)


def concatenation_defect(
    model: FoliationModel,
    first: LeafwisePath,
    second: LeafwisePath,
    samples: Optional[Sequence] = None,
    radius: float = DEFAULT_SLICE_RADIUS,
) -> float:
    """Max |hol(first·second)(s) - hol(second)(hol(first)(s))| over the grid."""
    whole = first.concatenate(second, model)
    s0, s_mid = default_slices(model, first)
    _, s1 = default_slices(model, second)
    m1 = holonomy_transport(model, first, s0, s_mid, samples, radius)
    m2 = holonomy_transport(model, second, s_mid, s1, m1.outputs(), radius)
    m12 = holonomy_transport(model, whole, s0, s1, m1.inputs(), radius)
    worst = 0.0
    for c_in, c_mid in m1.samples:
        composed, direct = m2.lookup(c_mid), m12.lookup(c_in)
        if composed is not None and direct is not None:
            worst = max(worst, float(np.max(np.abs(composed - direct))))
    return worst


def reversal_defect(
    model: FoliationModel,
    path: LeafwisePath,
    samples: Optional[Sequence] = None,
    radius: float = DEFAULT_SLICE_RADIUS,
) -> float:
    """Max |hol(reverse)(hol(path)(s)) - s|: the reversed path inverts the holonomy."""
    s0, s1 = default_slices(model, path)
    forward = holonomy_transport(model, path, s0, s1, samples, radius)
    backward = holonomy_transport(model, path.reverse(model), s1, s0, forward.outputs(), radius)
    worst = 0.0
    for c_in, c_out in forward.samples:
        back = backward.lookup(c_out)
        if back is not None and c_in.size:
            worst = max(worst, float(np.max(np.abs(back - c_in))))
    return worst


def is_trivial(holonomy: HolonomyMap, tol: float = 1e-8) -> bool:
    """Identity linear part and no displacement on the grid, within ``tol``."""
    identity = QuotientEndo.identity(holonomy.dim)
    return holonomy.linear_part.distance(identity) <= tol and holonomy.displacement() <= tol


@dataclass(frozen=True)
class PairGroupoidReport:
    """
    The pair-groupoid picture of a graph foliation, compared with direct transport.

    ``deviation`` is the max pointwise gap between the two routes,
    ``source_drift`` how far the lifted flow moved the second factor, and
    ``reversal`` the defect of composing with the reversed path.
    """

    deviation: float
    source_drift: float
    reversal: float
    forward: HolonomyMap
    lifted: HolonomyMap

    def passed(self, tol: float = 1e-9, reversal_tol: float = 1e-8) -> bool:
        return self.deviation <= tol and self.source_drift <= tol and self.reversal <= reversal_tol


def _lift(model: GraphFoliation) -> GraphFoliation:
    """The foliation F × {points} of M × M, as a graph model of dimension 2n."""
    n = model.dim
    box = np.vstack([model.box, model.box])
    tolerances = model.tolerances
    if model.expressions is not None:
        rhs: Union[List[Expression], Callable] = list(model.expressions) + [Num(0.0)] * n
    else:
        def rhs(x, y):
            return np.concatenate([model.rhs(x, y[: n - 1]), np.zeros(n)])
    return GraphFoliation(box, rhs, name=f"{model.name}×M", tolerances=tolerances, validate=False)


def pair_groupoid_demo(
    model: GraphFoliation,
    path: LeafwisePath,
    samples: Optional[Sequence] = None,
    radius: float = DEFAULT_SLICE_RADIUS,
) -> PairGroupoidReport:
    """
    Holonomy through the source fiber of the pair groupoid M × M.

    The source fiber over the path start p is M × {p}; the lifted foliation
    F × {0} restricted to it is F again. Each slice sample (q, p) is carried
    along the lifted leaves to the target fiber point (q′, p), right-translated
    by the arrow (end, p) to (q′, end), and projected to the first factor.
    The result must agree with :func:`holonomy_transport` pointwise.

    Raises:
        ValueError: If the model is not a graph foliation
    """
    if not isinstance(model, GraphFoliation):
        raise ValueError("The pair groupoid demo needs a graph foliation")
    slice0, slice1 = default_slices(model, path)
    forward = holonomy_transport(model, path, slice0, slice1, samples, radius)
    lifted_model = _lift(model)
    x0, x1 = path.interval
    unit = path.start
    end = slice1.base
    n = model.dim
    drift = [0.0]

    def through_source_fiber(s: np.ndarray) -> np.ndarray:
        lifted_start = np.concatenate([slice0.point(s), unit])
        carried = lifted_model.flow(x0, x1, lifted_start[1:])
        first, second = np.concatenate([[x1], carried[: n - 1]]), carried[n - 1:]
        drift[0] = max(drift[0], float(np.max(np.abs(second - unit))))
        # Right translation by the arrow (end, unit): (q, unit) ↦ (q, end).
        translated = np.concatenate([first, end])
        return slice1.coordinates(translated[:n])

    points = forward.inputs()
    table, failures = evaluate_grid(through_source_fiber, points, slice0.dim, forward.jet_step)
    lifted = build_map(table, failures, slice0.dim, forward.jet_step, metadata={"route": "pair_groupoid"})
    reversal = reversal_defect(model, path, samples, radius)
    return PairGroupoidReport(
        deviation=forward.deviation_from(lifted),
        source_drift=drift[0],
        reversal=reversal,
        forward=forward,
        lifted=lifted,
    )

