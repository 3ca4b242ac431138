"""
Holonomy maps in the two regimes.

Group holonomy acts on slices exp(C-ball) of the identity in G; foliation
holonomy transports transverse slices along leafwise paths. Both return a
:class:`HolonomyMap`, a sample table plus its linear part.
"""

from holab.holonomy.foliation import (
    GraphFoliation,
    LeafwisePath,
    SpannedFoliation,
    TransverseSlice,
    holonomy_transport,
    linear_holonomy_variational,
    pair_groupoid_demo,
)
from holab.holonomy.group import (
    GroupElement,
    SliceChart,
    chi_conj,
    chi_via_bisection,
    normality_equivalence,
    slide_to_slice,
)
from holab.holonomy.groupoid import (
    ActionGroupoidElement,
    TransformationGroupoid,
    act_through_groupoid,
    right_invariance_check,
)
from holab.holonomy.maps import HolonomyMap, linearize

__all__ = [
    "HolonomyMap", "linearize",
    "GroupElement", "SliceChart", "slide_to_slice", "chi_conj", "chi_via_bisection",
    "normality_equivalence",
    "ActionGroupoidElement", "TransformationGroupoid", "act_through_groupoid", "right_invariance_check",
    "GraphFoliation", "SpannedFoliation", "LeafwisePath", "TransverseSlice",
    "holonomy_transport", "linear_holonomy_variational", "pair_groupoid_demo",
]
