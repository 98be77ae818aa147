"""Generalized connections: functors from the path groupoid of a graph to G.

A connection stores one group element per generator edge.  Every other path
value follows from functoriality, with the later segment multiplied on the
left: ``hol(p2 p1) = hol(p2) * hol(p1)``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import group as grp
from .errors import GraphMismatchError, IncompatibleGroupError, NoGeometryError, ParseError, UnsupportedGroupError
from .group import GroupDescriptor, GroupElement
from .groupoid import FORWARD, EmbeddedGraph, PathWord
from .jsonio import load_json

U1_ONEFORM = "u1_oneform"
SU2_ONEFORM = "su2_oneform"
MAX_DEGREE = 6
MIN_QUADRATURE_POINTS = 16


@dataclass(frozen=True, eq=False)
class GeneralizedConnection:
    graph: EmbeddedGraph
    descriptor: GroupDescriptor
    assignment: Mapping[str, GroupElement]

    def __post_init__(self):
        assignment = dict(self.assignment)
        missing = [e for e in self.graph.edges if e not in assignment]
        extra = [e for e in assignment if e not in self.graph.edges]
        if missing or extra:
            raise ValueError(f"assignment must cover exactly the graph edges (missing {missing}, unknown {extra})")
        for e, g in assignment.items():
            if g.descriptor != self.descriptor:
                raise IncompatibleGroupError(f"edge {e!r} carries an element of {g.descriptor}, expected {self.descriptor}")
        ordered = {e: assignment[e] for e in self.graph.edges}
        object.__setattr__(self, "assignment", MappingProxyType(ordered))

    def __eq__(self, other):
        if not isinstance(other, GeneralizedConnection):
            return NotImplemented
        return (
            self.graph == other.graph
            and self.descriptor == other.descriptor
            and dict(self.assignment) == dict(other.assignment)
        )

    def __getitem__(self, edge_id: str) -> GroupElement:
        return self.assignment[edge_id]

    def __call__(self, p: PathWord) -> GroupElement:
        return holonomy(self, p)


def random_connection(graph: EmbeddedGraph, descriptor: GroupDescriptor, rng: np.random.Generator) -> GeneralizedConnection:
    """Independent Haar draw on every edge, in graph edge order."""
    return GeneralizedConnection(graph, descriptor, {e: grp.haar_sample(descriptor, rng) for e in graph.edges})


def constant_connection(graph: EmbeddedGraph, value: GroupElement) -> GeneralizedConnection:
    return GeneralizedConnection(graph, value.descriptor, {e: value for e in graph.edges})


def all_connections(graph: EmbeddedGraph, descriptor: GroupDescriptor) -> Iterator[GeneralizedConnection]:
    """Every connection of a finite group on the graph, in lexicographic edge order."""
    edges = list(graph.edges)
    group_elements = list(grp.elements(descriptor))
    for values in itertools.product(group_elements, repeat=len(edges)):
        yield GeneralizedConnection(graph, descriptor, dict(zip(edges, values)))


def holonomy(conn: GeneralizedConnection, p: PathWord) -> GroupElement:
    if p.graph != conn.graph:
        raise GraphMismatchError(f"path on {p.graph.name!r} evaluated by a connection on {conn.graph.name!r}")
    result = None
    for letter in p.letters:
        g = conn.assignment[letter.edge]
        if letter.sign != FORWARD:
            g = grp.inverse(g)
        result = g if result is None else grp.multiply(g, result)
    return grp.identity(conn.descriptor) if result is None else result


def separates(
    conn_a: GeneralizedConnection, conn_b: GeneralizedConnection, candidate_paths: Sequence[PathWord]
) -> PathWord | None:
    """First candidate on which the two connections disagree, if any."""
    if conn_a.graph != conn_b.graph:
        raise GraphMismatchError("connections live on different graphs")
    if conn_a.descriptor != conn_b.descriptor:
        raise IncompatibleGroupError(f"{conn_a.descriptor} vs {conn_b.descriptor}")
    for p in candidate_paths:
        if not grp.equal(holonomy(conn_a, p), holonomy(conn_b, p)):
            return p
    return None


# -- smooth connections -----------------------------------------------------

@dataclass(frozen=True)
class Polynomial:
    """Sum of ``coeff * prod(x_i ** k_i)`` over ``(coeff, (k_1, ..., k_d))`` terms."""

    terms: tuple[tuple[float, tuple[int, ...]], ...]

    def __post_init__(self):
        terms = tuple((float(c), tuple(int(k) for k in exps)) for c, exps in self.terms)
        for _, exps in terms:
            if any(k < 0 for k in exps):
                raise ValueError("exponents must be nonnegative")
        if len({len(exps) for _, exps in terms}) > 1:
            raise ValueError("all monomials need the same number of variables")
        object.__setattr__(self, "terms", terms)

    @property
    def degree(self) -> int:
        return max((sum(exps) for c, exps in self.terms if c != 0.0), default=0)

    @property
    def dim(self) -> int | None:
        return len(self.terms[0][1]) if self.terms else None

    def __call__(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(points.shape[0])
        for c, exps in self.terms:
            out += c * np.prod(points[:, : len(exps)] ** np.asarray(exps), axis=1)
        return out

    @classmethod
    def constant(cls, value: float, dim: int) -> "Polynomial":
        return cls(((value, (0,) * dim),))

    @classmethod
    def zero(cls, dim: int) -> "Polynomial":
        return cls(((0.0, (0,) * dim),))


@dataclass(frozen=True)
class SmoothConnectionSpec:
    """Polynomial connection one-form in a fixed trivialization.

    For ``u1_oneform`` ``components[i]`` is the ``dx^i`` coefficient.  For
    ``su2_oneform`` ``components[i]`` is a triple, the ``dx^i`` coefficients
    along the quaternion units i, j, k.
    """

    kind: str
    components: tuple
    quadrature_points: int = MIN_QUADRATURE_POINTS

    def __post_init__(self):
        if self.kind not in (U1_ONEFORM, SU2_ONEFORM):
            raise ValueError(f"unknown one-form kind {self.kind!r}")
        if self.quadrature_points < MIN_QUADRATURE_POINTS:
            raise ValueError(f"quadrature_points must be at least {MIN_QUADRATURE_POINTS}")
        comps = tuple(tuple(c) if self.kind == SU2_ONEFORM else c for c in self.components)
        flat = [p for c in comps for p in (c if self.kind == SU2_ONEFORM else (c,))]
        if self.kind == SU2_ONEFORM and any(len(c) != 3 for c in comps):
            raise ValueError("su2 one-form components must be triples")
        for p in flat:
            if p.degree > MAX_DEGREE:
                raise ValueError(f"polynomial degree {p.degree} exceeds {MAX_DEGREE}")
            if p.dim is not None and p.dim > len(comps):
                raise ValueError("polynomial uses more variables than the ambient dimension")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return len(self.components)

    def with_quadrature_points(self, n: int) -> "SmoothConnectionSpec":
        return SmoothConnectionSpec(self.kind, self.components, n)


def _u1_phase(spec: SmoothConnectionSpec, polyline: np.ndarray) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(spec.quadrature_points)
    t = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    phase = 0.0
    for a, b in zip(polyline[:-1], polyline[1:]):
        delta = b - a
        pts = a + t[:, None] * delta
        for i, poly in enumerate(spec.components):
            if delta[i] != 0.0:
                phase += float(w @ poly(pts)) * delta[i]
    return phase


def _quat_exp(v: np.ndarray) -> tuple[float, float, float, float]:
    angle = math.sqrt(float(v @ v))
    if angle == 0.0:
        return (1.0, 0.0, 0.0, 0.0)
    s = math.sin(angle) / angle
    return (math.cos(angle), s * v[0], s * v[1], s * v[2])


def _su2_transport(spec: SmoothConnectionSpec, polyline: np.ndarray, d: GroupDescriptor) -> GroupElement:
    m = spec.quadrature_points
    mids = (np.arange(m) + 0.5) / m
    result = grp.identity(d)
    for a, b in zip(polyline[:-1], polyline[1:]):
        step = (b - a) / m
        pts = a + mids[:, None] * (b - a)
        # su(2)-valued increment per substep: sum_i A_i(x) dx^i
        incr = np.zeros((m, 3))
        for i, triple in enumerate(spec.components):
            if step[i] != 0.0:
                for axis, poly in enumerate(triple):
                    incr[:, axis] += poly(pts) * step[i]
        for k in range(m):
            result = grp.multiply(GroupElement(d, _quat_exp(incr[k])), result)
    return result


def discretize_smooth(
    spec: SmoothConnectionSpec, graph: EmbeddedGraph, descriptor: GroupDescriptor | None = None
) -> GeneralizedConnection:
    """Holonomies of a smooth connection on every graph edge.

    u1 phases are line integrals by Gauss-Legendre quadrature, stored as
    ``(cos t, sin t, 0, 0)``.  su2 transports are path-ordered products of
    midpoint exponentials, ``quadrature_points`` substeps per polyline segment.
    """
    descriptor = descriptor or grp.su2()
    if descriptor.kind != grp.SU2:
        raise UnsupportedGroupError(f"smooth connections need su2 elements, not {descriptor}")
    assignment = {}
    for e in graph.edges.values():
        if e.geometry is None:
            raise NoGeometryError(f"edge {e.id!r} has no polyline")
        polyline = np.asarray(e.geometry, dtype=float)
        if polyline.shape[1] != spec.dim:
            raise ValueError(f"edge {e.id!r} lives in dimension {polyline.shape[1]}, one-form in {spec.dim}")
        if spec.kind == U1_ONEFORM:
            theta = _u1_phase(spec, polyline)
            assignment[e.id] = GroupElement(descriptor, (math.cos(theta), math.sin(theta), 0.0, 0.0))
        else:
            assignment[e.id] = _su2_transport(spec, polyline, descriptor)
    return GeneralizedConnection(graph, descriptor, assignment)


def u1_phase(element: GroupElement) -> float:
    """Angle of a u1 holonomy stored as ``(cos t, sin t, 0, 0)``."""
    w, x, _, _ = element.payload
    return math.atan2(x, w)


# -- files ------------------------------------------------------------------

def connection_to_dict(conn: GeneralizedConnection) -> dict:
    return {
        "graph": conn.graph.name,
        "descriptor": str(conn.descriptor),
        "assignment": {e: grp.format_element(g) for e, g in conn.assignment.items()},
    }


def connection_from_dict(data: dict, graph: EmbeddedGraph, source: str | None = None) -> GeneralizedConnection:
    try:
        if data["graph"] != graph.name:
            raise ParseError(f"connection is for graph {data['graph']!r}, not {graph.name!r}", source)
        d = grp.parse_descriptor(data["descriptor"])
        assignment = {str(e): grp.parse_element(text, d) for e, text in data["assignment"].items()}
        return GeneralizedConnection(graph, d, assignment)
    except ParseError as exc:
        raise ParseError(exc.message, source) from None
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        raise ParseError(f"invalid connection: {exc}", source) from None


def load_connection(path, graph: EmbeddedGraph) -> GeneralizedConnection:
    return connection_from_dict(load_json(path, "connection file"), graph, str(path))


def dump_connection(conn: GeneralizedConnection, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(connection_to_dict(conn), fh, indent=2)
        fh.write("\n")


def _poly_from_json(terms) -> Polynomial:
    return Polynomial(tuple((t["coeff"], tuple(t["exponents"])) for t in terms))


def _poly_to_json(p: Polynomial) -> list:
    return [{"coeff": c, "exponents": list(exps)} for c, exps in p.terms]


def smooth_spec_from_dict(data: dict, source: str | None = None) -> SmoothConnectionSpec:
    try:
        kind = data["kind"]
        if kind == U1_ONEFORM:
            comps = tuple(_poly_from_json(c) for c in data["components"])
        else:
            comps = tuple(tuple(_poly_from_json(p) for p in c) for c in data["components"])
        return SmoothConnectionSpec(kind, comps, int(data.get("quadrature_points", MIN_QUADRATURE_POINTS)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid smooth connection spec: {exc}", source) from None


def smooth_spec_to_dict(spec: SmoothConnectionSpec) -> dict:
    if spec.kind == U1_ONEFORM:
        comps = [_poly_to_json(p) for p in spec.components]
    else:
        comps = [[_poly_to_json(p) for p in c] for c in spec.components]
    return {"kind": spec.kind, "quadrature_points": spec.quadrature_points, "components": comps}


def load_smooth_spec(path) -> SmoothConnectionSpec:
    return smooth_spec_from_dict(load_json(path, "smooth connection file"), str(path))
