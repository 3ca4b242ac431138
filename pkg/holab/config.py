"""
Tolerances and runtime settings.

Every threshold used by the checks lives in :class:`Tolerances`; scenario
files and the ``--tol-scale`` flag derive new instances from the defaults.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Any, Callable, Dict, List, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

# Solver settings; everything else is an acceptance threshold.
_UNSCALED = frozenset({
    "newton", "newton_max_iter", "ode_rtol", "ode_atol", "foliation_newton",
    "ratio_low", "ratio_high", "closure", "jacobi", "involutivity",
})


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances for solvers and checks."""

    closure: float = 1e-9
    jacobi: float = 1e-9
    newton: float = 1e-12
    newton_max_iter: int = 25
    flatness: float = 1e-10
    linearity: float = 1e-12
    differentiation: float = 1e-7
    ratio_low: float = 3.5
    ratio_high: float = 4.5
    agreement: float = 1e-10
    morphism: float = 1e-9
    right_invariance: float = 1e-9
    linearization: float = 1e-6
    slice_independence: float = 1e-8
    triviality: float = 1e-8
    witness: float = 1e-3
    groupoid: float = 1e-12
    ode_rtol: float = 1e-10
    ode_atol: float = 1e-14
    foliation_newton: float = 1e-10
    closed_form: float = 1e-8
    variational: float = 1e-7
    bott_transport: float = 1e-6
    pair_demo: float = 1e-9
    reversal: float = 1e-8
    concatenation: float = 1e-8
    involutivity: float = 1e-8

    def scaled(self, factor: float) -> "Tolerances":
        """Return a copy with every acceptance threshold multiplied by ``factor``."""
        if factor <= 0:
            raise ValueError("Tolerance scale must be positive")
        changes = {
            f.name: getattr(self, f.name) * factor
            for f in fields(self)
            if f.name not in _UNSCALED
        }
        return replace(self, **changes)

    def with_overrides(self, overrides: Dict[str, Any]) -> "Tolerances":
        """Return a copy with named entries replaced."""
        known = {f.name for f in fields(self)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ValueError(f"Unknown tolerance keys: {unknown}")
        if "newton_max_iter" in overrides:
            overrides = {**overrides, "newton_max_iter": int(overrides["newton_max_iter"])}
        return replace(self, **overrides)

    def as_dict(self) -> Dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class Settings:
    """Process-level settings read from the environment."""

    threads: int = 1

    @classmethod
    def from_env(cls) -> "Settings":
        raw = os.environ.get("HOLAB_THREADS", "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"HOLAB_THREADS must be a positive integer, got {raw!r}")
        if threads < 1:
            raise ValueError(f"HOLAB_THREADS must be a positive integer, got {raw!r}")
        return cls(threads=threads)


def parallel_map(fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
    """
    Apply ``fn`` to independent items, in a thread pool capped by HOLAB_THREADS.

    Results come back in input order, so output is identical to the serial map.
    """
    threads = Settings.from_env().threads
    if threads == 1 or len(items) < 2:
        return [fn(item) for item in items]
    logger.debug("parallel_map over %d items with %d threads", len(items), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
