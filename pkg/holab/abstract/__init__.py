"""
Abstract base classes for the algebraic structures holonomy lives in.

- Groupoid: invertible arrows between objects, with law checks
- Group: a groupoid over one object
- MatrixGroup: GL(n, R) as a concrete Group
"""

from holab.abstract.groupoid import Groupoid
from holab.abstract.group import Group, MatrixGroup

__all__ = [
    "Groupoid",
    "Group",
    "MatrixGroup",
]
