"""Built-in scenarios with known closed-form answers."""

import copy
import math
from typing import Any, Dict, List

from holab.scenario.schema import Scenario

_E = math.e

BUILTINS: Dict[str, Dict[str, Any]] = {
    "sl2_borel": {
        "name": "sl2_borel",
        "description": "Borel subalgebra span(H, E) of sl(2, R); quotient spanned by F.",
        "kind": "lie_pair",
        "lie_pair": {
            "algebra": {"catalog": "sl2"},
            "subalgebra": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            "alt_complement": [[0.0, 0.3, 1.0]],
            "radius": 0.1,
            "elements": {
                "h": [[0.1, 0.0, 0.0], [0.3, 0.0, 0.0], [0.2, 0.1, 0.0], [-0.15, 0.25, 0.0]],
                "g": [[0.0, 0.0, 0.1], [0.05, -0.05, 0.08]],
            },
            "probe": [[0.1, 0.0, 0.0], [0.2, 0.0, 0.0]],
            "expected": {
                "bott": [
                    {"b": [1.0, 0.0, 0.0], "matrix": [[-2.0]]},
                    {"b": [0.0, 1.0, 0.0], "matrix": [[0.0]]},
                ],
                "linear_parts": [
                    {"h": [0.1, 0.0, 0.0], "matrix": [[math.exp(-0.2)]]},
                    {"h": [0.3, 0.0, 0.0], "matrix": [[math.exp(-0.6)]]},
                ],
                "ideal": False,
            },
        },
    },
    "heisenberg_center": {
        "name": "heisenberg_center",
        "description": "Center span(Z) of the Heisenberg algebra; an ideal, so holonomy is trivial.",
        "kind": "lie_pair",
        "lie_pair": {
            "algebra": {"catalog": "heisenberg"},
            "subalgebra": [[0.0, 0.0, 1.0]],
            "radius": 0.1,
            "elements": {
                "h": [[0.0, 0.0, 1.0], [0.0, 0.0, 2.0], [0.0, 0.0, -0.3]],
                "g": [[0.1, 0.05, 0.0], [0.0, 0.1, 0.1]],
            },
            "probe": [[0.0, 0.0, 1.0], [0.0, 0.0, 2.0]],
            "expected": {
                "bott": [{"b": [0.0, 0.0, 1.0], "matrix": [[0.0, 0.0], [0.0, 0.0]]}],
                "linear_parts": [
                    {"h": [0.0, 0.0, 1.0], "matrix": [[1.0, 0.0], [0.0, 1.0]]},
                ],
                "ideal": True,
            },
        },
    },
    "so3_in_so3_plus_r": {
        "name": "so3_in_so3_plus_r",
        "description": "so(3) as an ideal of so(3) ⊕ R; one-dimensional quotient.",
        "kind": "lie_pair",
        "lie_pair": {
            "algebra": {"catalog": "so3+r"},
            "subalgebra": [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]],
            "radius": 0.1,
            "elements": {
                "h": [[0.3, 0.0, 0.0, 0.0], [0.0, 0.2, 0.1, 0.0]],
                "g": [[0.1, 0.0, 0.0, 0.1], [0.0, 0.05, 0.05, -0.1]],
            },
            "expected": {
                "bott": [{"b": [1.0, 0.0, 0.0, 0.0], "matrix": [[0.0]]}],
                "ideal": True,
            },
        },
    },
    "so3_axis": {
        "name": "so3_axis",
        "description": "Rotations about the z axis inside so(3); holonomy rotates the slice.",
        "kind": "lie_pair",
        "lie_pair": {
            "algebra": {"catalog": "so3"},
            "subalgebra": [[0.0, 0.0, 1.0]],
            "radius": 0.1,
            "elements": {
                "h": [[0.0, 0.0, 0.3], [0.0, 0.0, -0.5]],
                "g": [[0.1, 0.05, 0.0]],
            },
            "expected": {
                "bott": [{"b": [0.0, 0.0, 1.0], "matrix": [[0.0, -1.0], [1.0, 0.0]]}],
                "ideal": False,
            },
        },
    },
    "fol_linear": {
        "name": "fol_linear",
        "description": "Graphs of y' = y; holonomy over [0, 1] is multiplication by e.",
        "kind": "foliation",
        "foliation": {
            "model": "ode_graph",
            "box": [[-1.0, 2.0], [-5.0, 5.0]],
            "rhs": ["y"],
            "samples": [[-0.3], [-0.15], [0.15], [0.3]],
            "paths": [
                {
                    "start": [0.0, 0.0],
                    "interval": [0.0, 1.0],
                    "expected": {
                        "linear_part": [[_E]],
                        "variational": [[_E]],
                        "closed_form": "exp(1)*y",
                    },
                }
            ],
        },
    },
    "fol_riccati": {
        "name": "fol_riccati",
        "description": "Graphs of y' = y^2; holonomy over [0, 1] is y ↦ y/(1 - y).",
        "kind": "foliation",
        "foliation": {
            "model": "ode_graph",
            "box": [[-1.0, 2.0], [-0.9, 0.9]],
            "rhs": ["y^2"],
            "samples": [[-0.3], [-0.15], [0.15], [0.3]],
            "paths": [
                {
                    "start": [0.0, 0.0],
                    "interval": [0.0, 1.0],
                    "expected": {
                        "linear_part": [[1.0]],
                        "variational": [[1.0]],
                        "closed_form": "y/(1-y)",
                    },
                }
            ],
        },
    },
    "fol_sin": {
        "name": "fol_sin",
        "description": "Graphs of y' = sin(x) y; transport over [0, π] multiplies by e^2.",
        "kind": "foliation",
        "foliation": {
            "model": "ode_graph",
            "box": [[-1.0, 4.0], [-10.0, 10.0]],
            "rhs": ["sin(x)*y"],
            "samples": [[-0.3], [0.3]],
            "paths": [
                {
                    "start": [0.0, 0.0],
                    "interval": [0.0, math.pi],
                    "expected": {
                        "linear_part": [[_E**2]],
                        "variational": [[_E**2]],
                        "closed_form": "exp(2)*y",
                    },
                }
            ],
        },
    },
    "fol_trivial": {
        "name": "fol_trivial",
        "description": "Horizontal foliation y' = 0; every holonomy is the identity.",
        "kind": "foliation",
        "foliation": {
            "model": "ode_graph",
            "box": [[-1.0, 2.0], [-1.0, 1.0]],
            "rhs": ["0"],
            "samples": [[-0.3], [0.3]],
            "paths": [
                {
                    "start": [0.0, 0.0],
                    "interval": [0.0, 1.0],
                    "expected": {
                        "linear_part": [[1.0]],
                        "variational": [[1.0]],
                        "closed_form": "y",
                        "trivial": True,
                    },
                }
            ],
        },
    },
    "fol_exp_sheet": {
        "name": "fol_exp_sheet",
        "description": "Leaves y2 = C·exp(y1) in R^3, spanned by ∂x and ∂y1 + y2 ∂y2.",
        "kind": "foliation",
        "foliation": {
            "model": "spanned",
            "box": [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]],
            "fields": [["1", "0", "0"], ["0", "1", "y2"]],
            "samples": [[-0.05], [0.05]],
            "paths": [
                {
                    "start": [0.0, 0.0, 0.0],
                    "word": [[1, 0.5]],
                    "expected": {
                        "linear_part": [[math.exp(0.5)]],
                        "variational": [[math.exp(0.5)]],
                        "closed_form": "exp(0.5)*y",
                    },
                },
                {"start": [0.0, 0.0, 0.0], "word": [[0, 0.2], [1, 0.3]]},
                {"start": [0.0, 0.0, 0.0], "word": [[1, 0.3], [0, 0.2]]},
            ],
            "homotopic": [[1, 2]],
        },
    },
}


def builtin_names() -> List[str]:
    return sorted(BUILTINS)


def builtin_scenario(name: str) -> Scenario:
    """
    A built-in scenario by name.

    Raises:
        ValueError: If the name is unknown
    """
    if name not in BUILTINS:
        raise ValueError(f"Unknown built-in scenario {name!r}; known: {builtin_names()}")
    return Scenario.from_dict(copy.deepcopy(BUILTINS[name]))
