"""Generalized connections on finite graphs.

Path groupoids of embedded graphs, group-valued functors on them (holonomies),
gauge and automorphism actions, refinements with their restriction maps, and
product Haar integration of cylindrical functions.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BrokenPathError,
    BudgetExceededError,
    GenconnError,
    GraphMismatchError,
    IncompatibleGroupError,
    NoGeometryError,
    NonComposableError,
    NotClosedError,
    ParseError,
    UnknownGeneratorError,
    UnsupportedExactError,
    UnsupportedGroupError,
)
from .group import GroupDescriptor, GroupElement, cyclic, su2, symmetric  # noqa: F401
from .groupoid import EmbeddedGraph, OrientedEdge, PathWord, SignedEdge, Vertex  # noqa: F401
from .connection import GeneralizedConnection, SmoothConnectionSpec, Polynomial, holonomy  # noqa: F401
from .symmetry import GaugeTransformation, GroupoidAutomorphism  # noqa: F401
from .projective import Refinement  # noqa: F401
from .measure import CylindricalFunction, IntegralResult, integrate  # noqa: F401
