"""Random graphs, words and paths for property suites."""
from __future__ import annotations

import numpy as np

from .groupoid import EmbeddedGraph, OrientedEdge, PathWord, SignedEdge, Vertex, reduce


def random_graph(rng: np.random.Generator, n_vertices: int, n_edges: int, name: str = "random") -> EmbeddedGraph:
    """Multigraph with uniformly random endpoints; loops and parallel edges allowed."""
    vertices = [Vertex(f"v{k}") for k in range(n_vertices)]
    edges = []
    for k in range(n_edges):
        s, t = rng.integers(n_vertices, size=2)
        edges.append(OrientedEdge(f"e{k}", f"v{s}", f"v{t}"))
    return EmbeddedGraph(vertices, edges, name)


def random_walk(graph: EmbeddedGraph, rng: np.random.Generator, length: int, start: str | None = None) -> list[SignedEdge]:
    """Chained raw word of at most ``length`` letters; retracings are not avoided."""
    if start is None:
        start = list(graph.vertices)[rng.integers(len(graph.vertices))]
    letters: list[SignedEdge] = []
    here = start
    for _ in range(length):
        options = graph.incident(here)
        if not options:
            break
        step = options[rng.integers(len(options))]
        letters.append(step)
        here = step.end(graph)
    return letters


def insert_retracings(graph: EmbeddedGraph, letters: list[SignedEdge], rng: np.random.Generator, k: int, start: str) -> list[SignedEdge]:
    """Insert ``k`` pairs ``x x^-1`` at random positions, keeping the word chained."""
    word = list(letters)
    for _ in range(k):
        pos = int(rng.integers(len(word) + 1))
        here = start if pos == 0 else word[pos - 1].end(graph)
        options = graph.incident(here)
        if not options:
            continue
        x = options[rng.integers(len(options))]
        word[pos:pos] = [x, x.inverse()]
    return word


def random_path(graph: EmbeddedGraph, rng: np.random.Generator, max_length: int = 8, start: str | None = None) -> PathWord:
    if start is None:
        start = list(graph.vertices)[rng.integers(len(graph.vertices))]
    length = int(rng.integers(max_length + 1))
    return reduce(graph, random_walk(graph, rng, length, start), start)


def _route(graph: EmbeddedGraph, a: str, b: str) -> list[SignedEdge] | None:
    """Shortest chained word from ``a`` to ``b`` (breadth first), or None."""
    prev: dict[str, tuple[str, SignedEdge] | None] = {a: None}
    frontier = [a]
    while frontier and b not in prev:
        nxt = []
        for here in frontier:
            for x in graph.incident(here):
                there = x.end(graph)
                if there not in prev:
                    prev[there] = (here, x)
                    nxt.append(there)
        frontier = nxt
    if b not in prev:
        return None
    route = []
    while prev[b] is not None:
        b, x = prev[b]
        route.append(x)
    return route[::-1]


def random_loop(graph: EmbeddedGraph, rng: np.random.Generator, max_length: int = 8, start: str | None = None) -> PathWord:
    """Closed path at ``start``: a random walk closed by the shortest route home."""
    if start is None:
        start = list(graph.vertices)[rng.integers(len(graph.vertices))]
    out = random_walk(graph, rng, int(rng.integers(1, max_length + 1)), start)
    here = out[-1].end(graph) if out else start
    return reduce(graph, out + _route(graph, here, start), start)


def composable_pair(graph: EmbeddedGraph, rng: np.random.Generator, max_length: int = 8) -> tuple[PathWord, PathWord]:
    """``(p2, p1)`` with ``source(p2) == target(p1)``."""
    p1 = random_path(graph, rng, max_length)
    p2 = random_path(graph, rng, max_length, start=p1.target)
    return p2, p1
