"""Gauge transformations and groupoid automorphisms acting on connections.

Gauge: ``A_g(p) = g(target p) * A(p) * g(source p)^-1``.
Automorphism: ``(F A)(p) = A(F^-1 p)``.

Both actions are defined on generator edges; path-level identities then follow
from functoriality and are checked by the test suites.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterator, Mapping

import numpy as np

from . import group as grp
from .connection import GeneralizedConnection, holonomy
from .errors import GraphMismatchError, IncompatibleGroupError, NotClosedError, ParseError
from .group import GroupDescriptor, GroupElement
from .groupoid import FORWARD, REVERSE, EmbeddedGraph, PathWord, SignedEdge, identity_path, parse_letter, reduce
from .jsonio import load_json


@dataclass(frozen=True, eq=False)
class GaugeTransformation:
    graph: EmbeddedGraph
    descriptor: GroupDescriptor
    values: Mapping[str, GroupElement]

    def __post_init__(self):
        values = dict(self.values)
        if set(values) != set(self.graph.vertices):
            raise ValueError("gauge transformation needs exactly one value per vertex")
        for v, g in values.items():
            if g.descriptor != self.descriptor:
                raise IncompatibleGroupError(f"vertex {v!r} carries an element of {g.descriptor}")
        object.__setattr__(self, "values", MappingProxyType({v: values[v] for v in self.graph.vertices}))

    def __eq__(self, other):
        if not isinstance(other, GaugeTransformation):
            return NotImplemented
        return self.graph == other.graph and self.descriptor == other.descriptor and dict(self.values) == dict(other.values)

    def __getitem__(self, vertex: str) -> GroupElement:
        return self.values[vertex]


def identity_gauge(graph: EmbeddedGraph, d: GroupDescriptor) -> GaugeTransformation:
    return GaugeTransformation(graph, d, {v: grp.identity(d) for v in graph.vertices})


def random_gauge(graph: EmbeddedGraph, d: GroupDescriptor, rng: np.random.Generator) -> GaugeTransformation:
    return GaugeTransformation(graph, d, {v: grp.haar_sample(d, rng) for v in graph.vertices})


def _check_gauge(g: GaugeTransformation, conn: GeneralizedConnection) -> None:
    if g.graph != conn.graph:
        raise GraphMismatchError("gauge transformation and connection live on different graphs")
    if g.descriptor != conn.descriptor:
        raise IncompatibleGroupError(f"gauge group {g.descriptor} vs connection group {conn.descriptor}")


def gauge_act(g: GaugeTransformation, conn: GeneralizedConnection) -> GeneralizedConnection:
    _check_gauge(g, conn)
    out = {}
    for e in conn.graph.edges.values():
        out[e.id] = grp.multiply(grp.multiply(g[e.target], conn[e.id]), grp.inverse(g[e.source]))
    return GeneralizedConnection(conn.graph, conn.descriptor, out)


def compose_gauge(g2: GaugeTransformation, g1: GaugeTransformation) -> GaugeTransformation:
    """Pointwise product ``g2(x) g1(x)``; acting with it equals acting with g1 then g2."""
    if g1.graph != g2.graph:
        raise GraphMismatchError("gauge transformations live on different graphs")
    if g1.descriptor != g2.descriptor:
        raise IncompatibleGroupError(f"{g2.descriptor} vs {g1.descriptor}")
    return GaugeTransformation(g1.graph, g1.descriptor, {v: grp.multiply(g2[v], g1[v]) for v in g1.graph.vertices})


def inverse_gauge(g: GaugeTransformation) -> GaugeTransformation:
    return GaugeTransformation(g.graph, g.descriptor, {v: grp.inverse(x) for v, x in g.values.items()})


def wilson_loop(conn: GeneralizedConnection, p: PathWord) -> float:
    """Class-function trace of the holonomy around a closed path (see :func:`group.trace`)."""
    if not p.is_closed:
        raise NotClosedError(f"path {p} runs from {p.source!r} to {p.target!r}")
    return grp.trace(holonomy(conn, p))


# -- automorphisms ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GroupoidAutomorphism:
    """Graph symmetry: vertex bijection plus edge map onto signed edges."""

    graph: EmbeddedGraph
    vertex_map: Mapping[str, str]
    edge_map: Mapping[str, SignedEdge]

    def __post_init__(self):
        graph = self.graph
        vmap = dict(self.vertex_map)
        emap = {e: parse_letter(s) if isinstance(s, str) else s for e, s in self.edge_map.items()}
        if set(vmap) != set(graph.vertices) or set(vmap.values()) != set(graph.vertices):
            raise ValueError("vertex_map must be a bijection of the graph vertices")
        if set(emap) != set(graph.edges) or sorted(s.edge for s in emap.values()) != sorted(graph.edges):
            raise ValueError("edge_map must be a bijection of the graph edges")
        for e_id, image in emap.items():
            e = graph.edges[e_id]
            want = (vmap[e.source], vmap[e.target])
            if image.start(graph) != want[0] or image.end(graph) != want[1]:
                raise ValueError(f"edge {e_id!r} -> {image} does not respect endpoints")
        object.__setattr__(self, "vertex_map", MappingProxyType({v: vmap[v] for v in graph.vertices}))
        object.__setattr__(self, "edge_map", MappingProxyType({e: emap[e] for e in graph.edges}))

    def __eq__(self, other):
        if not isinstance(other, GroupoidAutomorphism):
            return NotImplemented
        return (
            self.graph == other.graph
            and dict(self.vertex_map) == dict(other.vertex_map)
            and dict(self.edge_map) == dict(other.edge_map)
        )

    def __hash__(self):
        return hash((self.graph, tuple(self.vertex_map.items()), tuple(self.edge_map.items())))


def identity_automorphism(graph: EmbeddedGraph) -> GroupoidAutomorphism:
    return GroupoidAutomorphism(graph, {v: v for v in graph.vertices}, {e: SignedEdge(e) for e in graph.edges})


def inverse_automorphism(F: GroupoidAutomorphism) -> GroupoidAutomorphism:
    vmap = {y: x for x, y in F.vertex_map.items()}
    emap = {s.edge: SignedEdge(e, s.sign) for e, s in F.edge_map.items()}
    return GroupoidAutomorphism(F.graph, vmap, emap)


def compose_auto(F2: GroupoidAutomorphism, F1: GroupoidAutomorphism) -> GroupoidAutomorphism:
    """``F2 F1``: apply F1 first."""
    if F1.graph != F2.graph:
        raise GraphMismatchError("automorphisms of different graphs")
    vmap = {v: F2.vertex_map[F1.vertex_map[v]] for v in F1.graph.vertices}
    emap = {}
    for e, s in F1.edge_map.items():
        t = F2.edge_map[s.edge]
        emap[e] = SignedEdge(t.edge, s.sign * t.sign)
    return GroupoidAutomorphism(F1.graph, vmap, emap)


def apply_to_path(F: GroupoidAutomorphism, p: PathWord) -> PathWord:
    if p.graph != F.graph:
        raise GraphMismatchError("path and automorphism live on different graphs")
    if p.is_identity:
        return identity_path(F.graph, F.vertex_map[p.base])
    letters = []
    for x in p.letters:
        image = F.edge_map[x.edge]
        letters.append(SignedEdge(image.edge, image.sign * x.sign))
    return reduce(F.graph, letters)


def automorphism_act(F: GroupoidAutomorphism, conn: GeneralizedConnection) -> GeneralizedConnection:
    if F.graph != conn.graph:
        raise GraphMismatchError("automorphism and connection live on different graphs")
    F_inv = inverse_automorphism(F)
    out = {}
    for e in conn.graph.edges:
        x = F_inv.edge_map[e]
        g = conn[x.edge]
        out[e] = g if x.sign == FORWARD else grp.inverse(g)
    return GeneralizedConnection(conn.graph, conn.descriptor, out)


def graph_automorphisms(graph: EmbeddedGraph, limit: int | None = None) -> Iterator[GroupoidAutomorphism]:
    """Enumerate graph symmetries, orientation-reversing edge images included.

    Backtracking over edges: each edge picks an unused signed image whose
    endpoints agree with the vertex assignments made so far.  Isolated
    vertices are permuted freely at the end.
    """
    edges = list(graph.edges.values())
    degree = {v: 0 for v in graph.vertices}
    loops = {v: 0 for v in graph.vertices}
    for e in edges:
        degree[e.source] += 1
        degree[e.target] += 1
        if e.source == e.target:
            loops[e.source] += 1
    count = 0
    vmap: dict[str, str] = {}
    used_v: set[str] = set()
    used_e: set[str] = set()
    emap: dict[str, SignedEdge] = {}

    def assign(x, y, trail):
        if x in vmap:
            return vmap[x] == y
        if y in used_v or degree[x] != degree[y] or loops[x] != loops[y]:
            return False
        vmap[x] = y
        used_v.add(y)
        trail.append(x)
        return True

    def isolated_perms():
        free = [v for v in graph.vertices if v not in vmap]
        targets = [v for v in graph.vertices if v not in used_v]
        for perm in itertools.permutations(targets):
            yield dict(zip(free, perm))

    def search(k):
        nonlocal count
        if limit is not None and count >= limit:
            return
        if k == len(edges):
            for extra in isolated_perms():
                if limit is not None and count >= limit:
                    return
                count += 1
                yield GroupoidAutomorphism(graph, {**vmap, **extra}, dict(emap))
            return
        e = edges[k]
        for f in edges:
            if f.id in used_e:
                continue
            for sign in (FORWARD, REVERSE):
                a, b = (f.source, f.target) if sign == FORWARD else (f.target, f.source)
                trail: list[str] = []
                if assign(e.source, a, trail) and assign(e.target, b, trail):
                    used_e.add(f.id)
                    emap[e.id] = SignedEdge(f.id, sign)
                    yield from search(k + 1)
                    del emap[e.id]
                    used_e.discard(f.id)
                for x in trail:
                    used_v.discard(vmap.pop(x))

    yield from search(0)


# -- files ------------------------------------------------------------------

def gauge_to_dict(g: GaugeTransformation) -> dict:
    return {
        "graph": g.graph.name,
        "descriptor": str(g.descriptor),
        "values": {v: grp.format_element(x) for v, x in g.values.items()},
    }


def gauge_from_dict(data: dict, graph: EmbeddedGraph, source: str | None = None) -> GaugeTransformation:
    try:
        if data["graph"] != graph.name:
            raise ValueError(f"gauge transformation is for graph {data['graph']!r}, not {graph.name!r}")
        d = grp.parse_descriptor(data["descriptor"])
        return GaugeTransformation(graph, d, {str(v): grp.parse_element(t, d) for v, t in data["values"].items()})
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        msg = exc.message if isinstance(exc, ParseError) else f"invalid gauge transformation: {exc}"
        raise ParseError(msg, source) from None


def automorphism_to_dict(F: GroupoidAutomorphism) -> dict:
    return {
        "graph": F.graph.name,
        "vertex_map": [[x, y] for x, y in F.vertex_map.items()],
        "edge_map": {e: str(s) for e, s in F.edge_map.items()},
    }


def automorphism_from_dict(data: dict, graph: EmbeddedGraph, source: str | None = None) -> GroupoidAutomorphism:
    try:
        if data["graph"] != graph.name:
            raise ValueError(f"automorphism is for graph {data['graph']!r}, not {graph.name!r}")
        vmap = {str(x): str(y) for x, y in data["vertex_map"]}
        emap = {str(e): parse_letter(s) for e, s in data["edge_map"].items()}
        return GroupoidAutomorphism(graph, vmap, emap)
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        msg = exc.message if isinstance(exc, ParseError) else f"invalid automorphism: {exc}"
        raise ParseError(msg, source) from None


def load_gauge(path, graph: EmbeddedGraph) -> GaugeTransformation:
    return gauge_from_dict(load_json(path, "gauge file"), graph, str(path))


def load_automorphism(path, graph: EmbeddedGraph) -> GroupoidAutomorphism:
    return automorphism_from_dict(load_json(path, "automorphism file"), graph, str(path))


def dump_json(data: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")
