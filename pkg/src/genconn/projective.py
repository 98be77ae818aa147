"""Graph refinements and the restriction maps between connection spaces.

A refinement sends every coarse edge to a path of the fine graph.  Restriction
pulls a fine connection back by evaluating those paths; restricting and then
evaluating a coarse path must agree with evaluating its expansion directly.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from . import group as grp
from .connection import GeneralizedConnection, all_connections, holonomy
from .errors import GraphMismatchError, ParseError
from .group import GroupDescriptor
from .groupoid import (
    FORWARD,
    EmbeddedGraph,
    OrientedEdge,
    PathWord,
    Vertex,
    compose,
    format_path,
    identity_path,
    inverse_path,
    parse_path,
    reduce,
)
from .jsonio import load_json


@dataclass(frozen=True, eq=False)
class Refinement:
    coarse: EmbeddedGraph
    fine: EmbeddedGraph
    expansion: Mapping[str, PathWord]
    vertex_inclusion: Mapping[str, str]

    def __post_init__(self):
        inc = dict(self.vertex_inclusion)
        if set(inc) != set(self.coarse.vertices):
            raise ValueError("vertex_inclusion must cover every coarse vertex")
        if len(set(inc.values())) != len(inc) or not set(inc.values()) <= set(self.fine.vertices):
            raise ValueError("vertex_inclusion must be injective into the fine vertices")
        exp = dict(self.expansion)
        if set(exp) != set(self.coarse.edges):
            raise ValueError("expansion must cover every coarse edge")
        for e_id, p in exp.items():
            e = self.coarse.edges[e_id]
            if p.graph != self.fine:
                raise GraphMismatchError(f"expansion of {e_id!r} is not a path on the fine graph")
            if p.is_identity:
                raise ValueError(f"expansion of {e_id!r} is an identity path")
            if (p.source, p.target) != (inc[e.source], inc[e.target]):
                raise ValueError(f"expansion of {e_id!r} has the wrong endpoints")
        object.__setattr__(self, "expansion", MappingProxyType({e: exp[e] for e in self.coarse.edges}))
        object.__setattr__(self, "vertex_inclusion", MappingProxyType({v: inc[v] for v in self.coarse.vertices}))

    def __eq__(self, other):
        if not isinstance(other, Refinement):
            return NotImplemented
        return (
            self.coarse == other.coarse
            and self.fine == other.fine
            and dict(self.expansion) == dict(other.expansion)
            and dict(self.vertex_inclusion) == dict(other.vertex_inclusion)
        )

    __hash__ = None


def identity_refinement(graph: EmbeddedGraph) -> Refinement:
    return Refinement(
        graph,
        graph,
        {e: reduce(graph, [(e, FORWARD)]) for e in graph.edges},
        {v: v for v in graph.vertices},
    )


def _split_polyline(points, fraction: float):
    """Split at ``fraction`` of arc length; returns (head, tail, split point)."""
    lengths = [math.dist(a, b) for a, b in zip(points, points[1:])]
    total = sum(lengths)
    goal = fraction * total
    run = 0.0
    for k, seg in enumerate(lengths):
        if run + seg >= goal or k == len(lengths) - 1:
            t = 0.0 if seg == 0.0 else min(max((goal - run) / seg, 0.0), 1.0)
            a, b = points[k], points[k + 1]
            m = tuple(x + t * (y - x) for x, y in zip(a, b))
            head = tuple(points[: k + 1]) + (m,)
            tail = (m,) + tuple(points[k + 1 :])
            return head, tail, m
        run += seg
    raise AssertionError("unreachable")


def _fraction_of(points, position) -> float:
    """Arc-length fraction of a point lying on the polyline."""
    lengths = [math.dist(a, b) for a, b in zip(points, points[1:])]
    total = sum(lengths)
    run = 0.0
    scale = max(1.0, total)
    for a, b, seg in zip(points, points[1:], lengths):
        if seg > 0.0:
            t = sum((p - x) * (y - x) for p, x, y in zip(position, a, b)) / (seg * seg)
            t = min(max(t, 0.0), 1.0)
            foot = tuple(x + t * (y - x) for x, y in zip(a, b))
            if math.dist(foot, position) <= 1e-12 * scale:
                return (run + t * seg) / total
        run += seg
    raise ValueError(f"point {position} does not lie on the edge polyline")


def subdivide_edge(
    graph: EmbeddedGraph,
    edge_id: str,
    vertex_id: str | None = None,
    *,
    position: Sequence[float] | None = None,
    fraction: float = 0.5,
    names: tuple[str, str] | None = None,
) -> tuple[EmbeddedGraph, Refinement]:
    """Replace ``e: x -> y`` by ``e_a: x -> m`` and ``e_b: m -> y``.

    With edge geometry the new vertex sits at ``position`` (which must lie on
    the polyline) or at ``fraction`` of the arc length.
    """
    e = graph.edge(edge_id)
    m = vertex_id or f"{edge_id}_m"
    a_id, b_id = names or (f"{edge_id}_a", f"{edge_id}_b")
    if m in graph.vertices:
        raise ValueError(f"vertex {m!r} already exists")
    for new in (a_id, b_id):
        if new in graph.edges:
            raise ValueError(f"edge {new!r} already exists")
    head = tail = None
    if e.geometry is not None:
        if position is not None:
            fraction = _fraction_of(e.geometry, tuple(float(c) for c in position))
        if not 0.0 < fraction < 1.0:
            raise ValueError("subdivision point must be interior to the edge")
        head, tail, position = _split_polyline(e.geometry, fraction)
    vertices = list(graph.vertices.values()) + [
        Vertex(m, tuple(float(c) for c in position) if position is not None else None)
    ]
    edges = []
    for f in graph.edges.values():
        if f.id == edge_id:
            edges.append(OrientedEdge(a_id, e.source, m, head))
            edges.append(OrientedEdge(b_id, m, e.target, tail))
        else:
            edges.append(f)
    fine = EmbeddedGraph(vertices, edges, f"{graph.name}+{edge_id}")
    expansion = {
        f: reduce(fine, [(a_id, FORWARD), (b_id, FORWARD)]) if f == edge_id else reduce(fine, [(f, FORWARD)])
        for f in graph.edges
    }
    return fine, Refinement(graph, fine, expansion, {v: v for v in graph.vertices})


def add_edge(
    graph: EmbeddedGraph, edge: OrientedEdge, new_vertices: Sequence[Vertex] = ()
) -> tuple[EmbeddedGraph, Refinement]:
    """Enlarge the graph by one edge (and optionally new vertices); old edges expand to themselves."""
    fine = EmbeddedGraph(
        list(graph.vertices.values()) + list(new_vertices),
        list(graph.edges.values()) + [edge],
        f"{graph.name}+{edge.id}",
    )
    expansion = {f: reduce(fine, [(f, FORWARD)]) for f in graph.edges}
    return fine, Refinement(graph, fine, expansion, {v: v for v in graph.vertices})


def expand_path(ref: Refinement, p: PathWord) -> PathWord:
    """Image of a coarse path in the fine groupoid."""
    if p.graph != ref.coarse:
        raise GraphMismatchError("path does not live on the coarse graph")
    out = identity_path(ref.fine, ref.vertex_inclusion[p.base])
    for letter in p.letters:
        piece = ref.expansion[letter.edge]
        if letter.sign != FORWARD:
            piece = inverse_path(piece)
        out = compose(piece, out)
    return out


def compose_refinements(outer: Refinement, inner: Refinement) -> Refinement:
    """Chain ``inner: A -> B`` with ``outer: B -> C`` into ``A -> C``."""
    if inner.fine != outer.coarse:
        raise GraphMismatchError("refinements do not chain")
    expansion = {e: expand_path(outer, p) for e, p in inner.expansion.items()}
    inclusion = {v: outer.vertex_inclusion[w] for v, w in inner.vertex_inclusion.items()}
    return Refinement(inner.coarse, outer.fine, expansion, inclusion)


def restrict(ref: Refinement, fine_conn: GeneralizedConnection) -> GeneralizedConnection:
    if fine_conn.graph != ref.fine:
        raise GraphMismatchError("connection does not live on the fine graph")
    return GeneralizedConnection(
        ref.coarse,
        fine_conn.descriptor,
        {e: holonomy(fine_conn, p) for e, p in ref.expansion.items()},
    )


def lift(ref: Refinement, coarse_conn: GeneralizedConnection, rng: np.random.Generator) -> GeneralizedConnection:
    """A fine connection restricting to ``coarse_conn``; free edges are Haar sampled.

    Each expansion word must contain a fine edge not fixed by earlier words
    (true for subdivisions, edge additions and their composites); the last
    such occurrence is solved for, the others are sampled.
    """
    if coarse_conn.graph != ref.coarse:
        raise GraphMismatchError("connection does not live on the coarse graph")
    d = coarse_conn.descriptor
    values: dict[str, grp.GroupElement] = {}
    for e_id, word in ref.expansion.items():
        counts = Counter(x.edge for x in word.letters)
        free = [k for k, x in enumerate(word.letters) if x.edge not in values and counts[x.edge] == 1]
        if not free:
            raise ValueError(f"expansion of {e_id!r} leaves no free fine edge to solve for")
        pivot = free[-1]
        for x in word.letters:
            if x.edge not in values and x.edge != word.letters[pivot].edge:
                values[x.edge] = grp.haar_sample(d, rng)

        def hol(letters):
            out = grp.identity(d)
            for x in letters:
                g = values[x.edge] if x.sign == FORWARD else grp.inverse(values[x.edge])
                out = grp.multiply(g, out)
            return out

        # coarse = after * g * before, with g the pivot letter's value
        before = hol(word.letters[:pivot])
        after = hol(word.letters[pivot + 1 :])
        g = grp.multiply(grp.multiply(grp.inverse(after), coarse_conn[e_id]), grp.inverse(before))
        x = word.letters[pivot]
        values[x.edge] = g if x.sign == FORWARD else grp.inverse(g)
    for f in ref.fine.edges:
        if f not in values:
            values[f] = grp.haar_sample(d, rng)
    return GeneralizedConnection(ref.fine, d, values)


@dataclass
class ConsistencyReport:
    paths: int = 0
    max_deviation: float = 0.0
    failures: list[tuple[str, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def check_consistency(
    ref: Refinement, fine_conn: GeneralizedConnection, sample_paths: Sequence[PathWord]
) -> ConsistencyReport:
    """Compare coarse evaluation after restriction with fine evaluation of the expansion."""
    report = ConsistencyReport()
    if not sample_paths:
        return report
    coarse_conn = restrict(ref, fine_conn)
    for p in sample_paths:
        lhs = holonomy(coarse_conn, p)
        rhs = holonomy(fine_conn, expand_path(ref, p))
        dev = grp.distance(lhs, rhs)
        report.paths += 1
        report.max_deviation = max(report.max_deviation, dev)
        if not grp.equal(lhs, rhs):
            report.failures.append((format_path(p), dev))
    return report


def restriction_fibers(ref: Refinement, d: GroupDescriptor) -> Counter:
    """Number of fine connections over each coarse connection (finite groups).

    Keys are tuples of coarse edge payloads in coarse edge order.
    """
    fibers: Counter = Counter()
    for conn in all_connections(ref.fine, d):
        coarse = restrict(ref, conn)
        fibers[tuple(g.payload for g in coarse.assignment.values())] += 1
    return fibers


# -- files ------------------------------------------------------------------

def refinement_to_dict(ref: Refinement) -> dict:
    return {
        "coarse": ref.coarse.name,
        "fine": ref.fine.name,
        "expansion": {e: format_path(p) for e, p in ref.expansion.items()},
        "vertex_inclusion": [[v, w] for v, w in ref.vertex_inclusion.items()],
    }


def refinement_from_dict(data: dict, coarse: EmbeddedGraph, fine: EmbeddedGraph, source: str | None = None) -> Refinement:
    try:
        if data["coarse"] != coarse.name or data["fine"] != fine.name:
            raise ValueError(f"refinement is {data['coarse']!r} -> {data['fine']!r}")
        expansion = {str(e): parse_path(fine, text) for e, text in data["expansion"].items()}
        inclusion = {str(v): str(w) for v, w in data["vertex_inclusion"]}
        return Refinement(coarse, fine, expansion, inclusion)
    except (KeyError, TypeError, ValueError) as exc:
        msg = exc.message if isinstance(exc, ParseError) else f"invalid refinement: {exc}"
        raise ParseError(msg, source) from None


def load_refinement(path, coarse: EmbeddedGraph, fine: EmbeddedGraph) -> Refinement:
    return refinement_from_dict(load_json(path, "refinement file"), coarse, fine, str(path))
