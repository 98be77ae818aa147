"""Path groupoid generated by the edges of a finite embedded graph.

A path is a reduced word of signed edges.  Parametrizations never appear, so
reparametrization invariance holds by construction; the only equivalence left
to compute is cancellation of retracings ``e^-1 e`` and ``e e^-1``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

from .errors import (
    BrokenPathError,
    GraphMismatchError,
    NonComposableError,
    ParseError,
    UnknownGeneratorError,
)
from .jsonio import load_json

FORWARD = 1
REVERSE = -1


@dataclass(frozen=True)
class Vertex:
    id: str
    position: tuple[float, ...] | None = None


@dataclass(frozen=True)
class OrientedEdge:
    id: str
    source: str
    target: str
    geometry: tuple[tuple[float, ...], ...] | None = None

    def length(self) -> float:
        if self.geometry is None:
            raise ValueError(f"edge {self.id} has no geometry")
        return sum(math.dist(a, b) for a, b in zip(self.geometry, self.geometry[1:]))


class EmbeddedGraph:
    """Finite set of vertices and oriented edges; immutable once built."""

    def __init__(self, vertices: Iterable[Vertex], edges: Iterable[OrientedEdge], name: str = "graph"):
        self.name = name
        self.vertices: dict[str, Vertex] = {}
        self.edges: dict[str, OrientedEdge] = {}
        for v in vertices:
            if v.id in self.vertices:
                raise ValueError(f"duplicate vertex id {v.id!r}")
            self.vertices[v.id] = v
        for e in edges:
            if e.id in self.edges:
                raise ValueError(f"duplicate edge id {e.id!r}")
            for end in (e.source, e.target):
                if end not in self.vertices:
                    raise ValueError(f"edge {e.id!r} references unknown vertex {end!r}")
            if e.geometry is not None:
                _check_geometry(e, self.vertices)
            self.edges[e.id] = e
        self._key = (name, tuple(self.vertices.values()), tuple(self.edges.values()))
        self._hash = hash(self._key)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, EmbeddedGraph):
            return NotImplemented
        return self._hash == other._hash and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"EmbeddedGraph({self.name!r}, {len(self.vertices)} vertices, {len(self.edges)} edges)"

    def edge(self, edge_id: str) -> OrientedEdge:
        try:
            return self.edges[edge_id]
        except KeyError:
            raise UnknownGeneratorError(f"edge {edge_id!r} is not a generator of {self.name!r}") from None

    def incident(self, vertex: str) -> list["SignedEdge"]:
        """Letters that can start at ``vertex``."""
        out = []
        for e in self.edges.values():
            if e.source == vertex:
                out.append(SignedEdge(e.id, FORWARD))
            if e.target == vertex:
                out.append(SignedEdge(e.id, REVERSE))
        return out


def _check_geometry(e: OrientedEdge, vertices: dict[str, Vertex]) -> None:
    if len(e.geometry) < 2:
        raise ValueError(f"edge {e.id!r} polyline needs at least two points")
    for point, end in ((e.geometry[0], e.source), (e.geometry[-1], e.target)):
        pos = vertices[end].position
        if pos is None:
            continue
        if len(pos) != len(point) or math.dist(pos, point) > 1e-12 * max(1.0, math.hypot(*pos)):
            raise ValueError(f"edge {e.id!r} polyline does not end at vertex {end!r}")


@dataclass(frozen=True)
class SignedEdge:
    edge: str
    sign: int = FORWARD

    def __post_init__(self):
        if self.sign not in (FORWARD, REVERSE):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")

    def inverse(self) -> "SignedEdge":
        return SignedEdge(self.edge, -self.sign)

    def start(self, graph: EmbeddedGraph) -> str:
        e = graph.edge(self.edge)
        return e.source if self.sign == FORWARD else e.target

    def end(self, graph: EmbeddedGraph) -> str:
        e = graph.edge(self.edge)
        return e.target if self.sign == FORWARD else e.source

    def __str__(self):
        return self.edge if self.sign == FORWARD else f"{self.edge}^-1"


@dataclass(frozen=True)
class PathWord:
    """Reduced, chained word; the empty word at ``base`` is the identity 1_base.

    Build instances with :func:`reduce` or :func:`identity_path`.
    """

    graph: EmbeddedGraph = field(repr=False)
    letters: tuple[SignedEdge, ...]
    base: str

    @property
    def source(self) -> str:
        return self.base

    @property
    def target(self) -> str:
        return self.letters[-1].end(self.graph) if self.letters else self.base

    @property
    def is_identity(self) -> bool:
        return not self.letters

    @property
    def is_closed(self) -> bool:
        return self.source == self.target

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return format_path(self)


def _as_letter(item) -> SignedEdge:
    if isinstance(item, SignedEdge):
        return item
    if isinstance(item, str):
        return parse_letter(item)
    edge, sign = item
    return SignedEdge(edge, sign)


def reduce(graph: EmbeddedGraph, letters: Iterable, base: str | None = None) -> PathWord:
    """Cancel adjacent inverse pairs until none remain.

    ``letters`` may hold :class:`SignedEdge` values, ``(edge, sign)`` pairs or
    literals such as ``"e2^-1"``.  ``base`` is required for the empty word and
    must otherwise match the start of the first letter.
    """
    raw = [_as_letter(x) for x in letters]
    for letter in raw:
        graph.edge(letter.edge)
    if not raw:
        if base is None:
            raise BrokenPathError("empty word needs a base vertex")
        if base not in graph.vertices:
            raise UnknownGeneratorError(f"vertex {base!r} is not in {graph.name!r}")
        return PathWord(graph, (), base)
    start = raw[0].start(graph)
    if base is not None and base != start:
        raise BrokenPathError(f"base {base!r} does not match first letter {raw[0]} starting at {start!r}")
    for k, (a, b) in enumerate(zip(raw, raw[1:])):
        if a.end(graph) != b.start(graph):
            raise BrokenPathError(
                f"letter {k} ({a}) ends at {a.end(graph)!r} but letter {k + 1} ({b}) starts at {b.start(graph)!r}"
            )
    stack: list[SignedEdge] = []
    for letter in raw:
        if stack and stack[-1].edge == letter.edge and stack[-1].sign == -letter.sign:
            stack.pop()
        else:
            stack.append(letter)
    return PathWord(graph, tuple(stack), start)


def identity_path(graph: EmbeddedGraph, vertex: str) -> PathWord:
    return reduce(graph, (), vertex)


def edge_path(graph: EmbeddedGraph, edge_id: str, sign: int = FORWARD) -> PathWord:
    return reduce(graph, [SignedEdge(edge_id, sign)])


def compose(p2: PathWord, p1: PathWord) -> PathWord:
    """``p2 p1``: traverse ``p1`` first, then ``p2``."""
    if p1.graph != p2.graph:
        raise GraphMismatchError(f"paths live on different graphs ({p1.graph.name!r}, {p2.graph.name!r})")
    if p1.target != p2.source:
        raise NonComposableError(f"target {p1.target!r} of first path differs from source {p2.source!r} of second")
    return reduce(p1.graph, p1.letters + p2.letters, p1.source)


def inverse_path(p: PathWord) -> PathWord:
    return PathWord(p.graph, tuple(x.inverse() for x in reversed(p.letters)), p.target)


def source(p: PathWord) -> str:
    return p.source


def target(p: PathWord) -> str:
    return p.target


# -- literals ---------------------------------------------------------------

def parse_letter(text: str) -> SignedEdge:
    text = text.strip()
    if text.endswith("^-1"):
        name, sign = text[:-3].strip(), REVERSE
    elif text.endswith("^1"):
        name, sign = text[:-2].strip(), FORWARD
    else:
        name, sign = text, FORWARD
    if not name or any(c in name for c in ",@^ "):
        raise ParseError(f"bad path letter {text!r}")
    return SignedEdge(name, sign)


def parse_path(graph: EmbeddedGraph, text: str) -> PathWord:
    """Parse ``e1,e2^-1,e3`` or ``@x`` and reduce the result."""
    text = text.strip()
    if text.startswith("@"):
        return identity_path(graph, text[1:].strip())
    if not text:
        raise ParseError("empty path literal; write @vertex for an identity")
    return reduce(graph, [parse_letter(t) for t in text.split(",")])


def format_path(p: PathWord) -> str:
    if p.is_identity:
        return f"@{p.base}"
    return ",".join(str(x) for x in p.letters)


# -- graph files ------------------------------------------------------------

def graph_to_dict(graph: EmbeddedGraph) -> dict:
    vertices = []
    for v in graph.vertices.values():
        item = {"id": v.id}
        if v.position is not None:
            item["position"] = list(v.position)
        vertices.append(item)
    edges = []
    for e in graph.edges.values():
        item = {"id": e.id, "source": e.source, "target": e.target}
        if e.geometry is not None:
            item["geometry"] = [list(p) for p in e.geometry]
        edges.append(item)
    return {"id": graph.name, "vertices": vertices, "edges": edges}


def graph_from_dict(data: dict, source: str | None = None) -> EmbeddedGraph:
    try:
        vertices = [
            Vertex(str(v["id"]), tuple(float(c) for c in v["position"]) if v.get("position") is not None else None)
            for v in data["vertices"]
        ]
        edges = []
        for e in data["edges"]:
            geometry = e.get("geometry")
            if geometry is not None:
                geometry = tuple(tuple(float(c) for c in p) for p in geometry)
            edges.append(OrientedEdge(str(e["id"]), str(e["source"]), str(e["target"]), geometry))
        return EmbeddedGraph(vertices, edges, str(data.get("id", "graph")))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid graph: {exc}", source) from None


def load_graph(path) -> EmbeddedGraph:
    return graph_from_dict(load_json(path, "graph file"), str(path))


def dump_graph(graph: EmbeddedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_dict(graph), fh, indent=2)
        fh.write("\n")


# -- standard graphs --------------------------------------------------------

def grid_graph(nx: int, ny: int, spacing: float = 1.0, name: str | None = None) -> EmbeddedGraph:
    """Planar ``nx`` by ``ny`` vertex grid with straight edges pointing +x and +y."""
    vertices = [Vertex(f"v{i}_{j}", (i * spacing, j * spacing)) for j in range(ny) for i in range(nx)]
    pos = {v.id: v.position for v in vertices}
    edges = []
    for j in range(ny):
        for i in range(nx):
            here = f"v{i}_{j}"
            if i + 1 < nx:
                there = f"v{i + 1}_{j}"
                edges.append(OrientedEdge(f"h{i}_{j}", here, there, (pos[here], pos[there])))
            if j + 1 < ny:
                there = f"v{i}_{j + 1}"
                edges.append(OrientedEdge(f"u{i}_{j}", here, there, (pos[here], pos[there])))
    return EmbeddedGraph(vertices, edges, name or f"grid{nx}x{ny}")


def cycle_graph(n: int, name: str | None = None) -> EmbeddedGraph:
    """``n`` vertices on a circle joined by edges ``c_k: v_k -> v_{k+1}``."""
    vertices = [Vertex(f"v{k}") for k in range(n)]
    edges = [OrientedEdge(f"c{k}", f"v{k}", f"v{(k + 1) % n}") for k in range(n)]
    return EmbeddedGraph(vertices, edges, name or f"cycle{n}")


def bouquet_graph(n: int, name: str | None = None) -> EmbeddedGraph:
    """One vertex carrying ``n`` loops."""
    return EmbeddedGraph([Vertex("o")], [OrientedEdge(f"l{k}", "o", "o") for k in range(n)], name or f"bouquet{n}")


def segment_graph(length: float = 1.0, dim: int = 1, name: str = "segment") -> EmbeddedGraph:
    """Single straight edge ``e: x -> y`` along the first axis."""
    a = (0.0,) * dim
    b = (length,) + (0.0,) * (dim - 1)
    return EmbeddedGraph([Vertex("x", a), Vertex("y", b)], [OrientedEdge("e", "x", "y", (a, b))], name)

