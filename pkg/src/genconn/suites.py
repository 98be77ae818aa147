"""Property suites run by ``genconn suite``.

Each suite takes a parsed :class:`SuiteConfig` and a seed and returns a list of
:class:`PropertyResult`; a suite passes when every property does.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field

import numpy as np

from . import group as grp
from .connection import all_connections, holonomy, load_connection, random_connection
from .errors import ParseError
from .group import GroupDescriptor
from .groupoid import (
    EmbeddedGraph,
    bouquet_graph,
    compose,
    cycle_graph,
    grid_graph,
    identity_path,
    inverse_path,
    load_graph,
    OrientedEdge,
    reduce,
)
from .jsonio import load_json
from .measure import (
    integrate,
    make_integrand,
    verify_automorphism_invariance,
    verify_gauge_invariance,
    verify_refinement_consistency,
)
from .projective import (
    add_edge,
    check_consistency,
    compose_refinements,
    restrict,
    restriction_fibers,
    subdivide_edge,
)
from .sampling import composable_pair, insert_retracings, random_graph, random_loop, random_path, random_walk
from .symmetry import (
    apply_to_path,
    automorphism_act,
    compose_auto,
    compose_gauge,
    gauge_act,
    graph_automorphisms,
    identity_automorphism,
    identity_gauge,
    inverse_automorphism,
    random_gauge,
    wilson_loop,
    GaugeTransformation,
)

SUITES = ("groupoid-axioms", "functoriality", "gauge", "automorphism", "projective", "measure")

DEFAULT_GRAPHS = {
    "groupoid-axioms": {"random": {"vertices": 6, "edges": 8}},
    "functoriality": {"random": {"vertices": 6, "edges": 8}},
    "gauge": {"random": {"vertices": 4, "edges": 6}},
    "automorphism": {"builtin": "cycle", "n": 5},
    "projective": {"builtin": "grid", "nx": 2, "ny": 2},
    "measure": {"builtin": "bouquet", "n": 2},
}
EXHAUSTIVE_LIMIT = 200_000


@dataclass
class PropertyResult:
    name: str
    samples: int = 0
    max_deviation: float = 0.0
    threshold: float = 0.0
    passed: bool = True

    def record(self, deviation: float) -> None:
        self.samples += 1
        self.max_deviation = max(self.max_deviation, float(deviation))
        if deviation > self.threshold:
            self.passed = False


@dataclass
class SuiteConfig:
    descriptors: list[GroupDescriptor] = field(default_factory=lambda: [grp.cyclic(3), grp.su2()])
    samples: int = 200
    graph: object = None
    max_word_length: int = 40
    exhaustive: bool = True
    mc_samples: int = 20_000
    connection: str | None = None
    base_dir: str = "."

    @classmethod
    def from_dict(cls, data: dict, base_dir: str = ".", source: str | None = None) -> "SuiteConfig":
        known = {"descriptors", "samples", "graph", "max_word_length", "exhaustive", "mc_samples", "connection"}
        unknown = set(data) - known
        if unknown:
            raise ParseError(f"unknown config keys: {sorted(unknown)}", source)
        cfg = cls(base_dir=base_dir)
        try:
            if "descriptors" in data:
                cfg.descriptors = [grp.parse_descriptor(t) for t in data["descriptors"]]
            for key in ("samples", "max_word_length", "mc_samples"):
                if key in data:
                    value = int(data[key])
                    if value < 1:
                        raise ValueError(f"{key} must be positive")
                    setattr(cfg, key, value)
            cfg.exhaustive = bool(data.get("exhaustive", True))
            cfg.graph = data.get("graph")
            cfg.connection = data.get("connection")
        except ParseError as exc:
            raise ParseError(exc.message, source) from None
        except (TypeError, ValueError) as exc:
            raise ParseError(f"invalid config: {exc}", source) from None
        return cfg

    def path(self, name: str) -> str:
        return name if os.path.isabs(name) else os.path.join(self.base_dir, name)


def load_config(path) -> SuiteConfig:
    path = str(path)
    return SuiteConfig.from_dict(load_json(path, "config file"), os.path.dirname(path) or ".", path)


def build_graph(spec, rng: np.random.Generator, cfg: SuiteConfig) -> EmbeddedGraph:
    try:
        if isinstance(spec, str):
            return load_graph(cfg.path(spec))
        if "random" in spec:
            r = spec["random"]
            return random_graph(rng, int(r["vertices"]), int(r["edges"]))
        kind = spec["builtin"]
        if kind == "cycle":
            return cycle_graph(int(spec["n"]))
        if kind == "bouquet":
            return bouquet_graph(int(spec["n"]))
        if kind == "grid":
            return grid_graph(int(spec["nx"]), int(spec["ny"]))
        raise ValueError(f"unknown builtin graph {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"invalid graph spec {spec!r}: {exc}") from None


def _threshold(d: GroupDescriptor) -> float:
    return 0.0 if d.is_finite else 10 * d.tolerance


def _dev(a, b) -> float:
    return grp.distance(a, b)


def _fixed_connection(cfg: SuiteConfig, graph: EmbeddedGraph):
    return load_connection(cfg.path(cfg.connection), graph) if cfg.connection else None


# -- suites -----------------------------------------------------------------

def suite_groupoid_axioms(cfg: SuiteConfig, rng: np.random.Generator, graph: EmbeddedGraph) -> list[PropertyResult]:
    normal = PropertyResult("retracing-insensitive normal form")
    idem = PropertyResult("reduce is idempotent")
    assoc = PropertyResult("associativity")
    ident = PropertyResult("left/right identity")
    inv = PropertyResult("inverse laws")
    for _ in range(cfg.samples):
        start = list(graph.vertices)[rng.integers(len(graph.vertices))]
        raw = random_walk(graph, rng, int(rng.integers(cfg.max_word_length + 1)), start)
        padded = insert_retracings(graph, raw, rng, int(rng.integers(11)), start)
        w = reduce(graph, raw, start)
        normal.record(0.0 if reduce(graph, padded, start) == w else 1.0)
        idem.record(0.0 if reduce(graph, w.letters, w.base) == w else 1.0)
        p2, p1 = composable_pair(graph, rng)
        p3 = random_path(graph, rng, start=p2.target)
        assoc.record(0.0 if compose(compose(p3, p2), p1) == compose(p3, compose(p2, p1)) else 1.0)
        ok = compose(w, identity_path(graph, w.source)) == w and compose(identity_path(graph, w.target), w) == w
        ident.record(0.0 if ok else 1.0)
        ok = compose(inverse_path(w), w) == identity_path(graph, w.source) and compose(w, inverse_path(w)) == identity_path(
            graph, w.target
        )
        inv.record(0.0 if ok else 1.0)
    return [normal, idem, assoc, ident, inv]


def suite_functoriality(cfg: SuiteConfig, rng: np.random.Generator, graph: EmbeddedGraph) -> list[PropertyResult]:
    results = []
    fixed = _fixed_connection(cfg, graph)
    for d in cfg.descriptors:
        tol = _threshold(d)
        mult = PropertyResult(f"{d}: hol(p2 p1) = hol(p2) hol(p1)", threshold=tol)
        inv = PropertyResult(f"{d}: hol(p^-1) = hol(p)^-1", threshold=tol)
        ident = PropertyResult(f"{d}: hol(1_x) = e", threshold=tol)
        retr = PropertyResult(f"{d}: retracings do not change holonomy", threshold=tol)
        for k in range(cfg.samples):
            conn = fixed if fixed is not None and fixed.descriptor == d and k == 0 else random_connection(graph, d, rng)
            p2, p1 = composable_pair(graph, rng)
            mult.record(_dev(holonomy(conn, compose(p2, p1)), grp.multiply(holonomy(conn, p2), holonomy(conn, p1))))
            inv.record(_dev(holonomy(conn, inverse_path(p1)), grp.inverse(holonomy(conn, p1))))
            ident.record(_dev(holonomy(conn, identity_path(graph, p1.source)), grp.identity(d)))
            padded = insert_retracings(graph, list(p1.letters), rng, 3, p1.source)
            retr.record(_dev(holonomy(conn, reduce(graph, padded, p1.source)), holonomy(conn, p1)))
        results += [mult, inv, ident, retr]
    return results


def _gauge_draws(cfg, rng, graph, d):
    """Exhaustive (connection, gauge) pairs for small finite cases, random otherwise."""
    if d.is_finite and cfg.exhaustive and d.order ** (len(graph.edges) + len(graph.vertices)) <= EXHAUSTIVE_LIMIT:
        gauges = [
            GaugeTransformation(graph, d, dict(zip(graph.vertices, vals)))
            for vals in itertools.product(list(grp.elements(d)), repeat=len(graph.vertices))
        ]
        for conn in all_connections(graph, d):
            for g in gauges:
                yield conn, g
    else:
        for _ in range(cfg.samples):
            yield random_connection(graph, d, rng), random_gauge(graph, d, rng)


def suite_gauge(cfg: SuiteConfig, rng: np.random.Generator, graph: EmbeddedGraph) -> list[PropertyResult]:
    results = []
    for d in cfg.descriptors:
        tol = _threshold(d)
        cov = PropertyResult(f"{d}: path-level covariance g(r) hol(p) g(s)^-1", threshold=tol)
        wil = PropertyResult(f"{d}: Wilson loops gauge invariant", threshold=2 * tol)
        act = PropertyResult(f"{d}: action axioms", threshold=tol)
        for conn, g in _gauge_draws(cfg, rng, graph, d):
            moved = gauge_act(g, conn)
            p = random_path(graph, rng)
            want = grp.multiply(grp.multiply(g[p.target], holonomy(conn, p)), grp.inverse(g[p.source]))
            cov.record(_dev(holonomy(moved, p), want))
            loop = random_loop(graph, rng)
            wil.record(abs(wilson_loop(moved, loop) - wilson_loop(conn, loop)))
            g2 = random_gauge(graph, d, rng)
            both = gauge_act(compose_gauge(g2, g), conn)
            step = gauge_act(g2, moved)
            dev = max(_dev(both[e], step[e]) for e in graph.edges) if graph.edges else 0.0
            unit = gauge_act(identity_gauge(graph, d), conn)
            dev = max([dev] + [_dev(unit[e], conn[e]) for e in graph.edges])
            act.record(dev)
        results += [cov, wil, act]
    return results


def suite_automorphism(cfg: SuiteConfig, rng: np.random.Generator, graph: EmbeddedGraph) -> list[PropertyResult]:
    autos = list(graph_automorphisms(graph, limit=5000))
    results = [PropertyResult(f"graph has {len(autos)} automorphisms", samples=1, passed=bool(autos))]
    paths = PropertyResult("F(p2 p1) = F(p2) F(p1) and F(1_x) = 1_F(x)")
    for _ in range(cfg.samples):
        F = autos[rng.integers(len(autos))]
        p2, p1 = composable_pair(graph, rng)
        ok = apply_to_path(F, compose(p2, p1)) == compose(apply_to_path(F, p2), apply_to_path(F, p1))
        x = p1.source
        ok = ok and apply_to_path(F, identity_path(graph, x)) == identity_path(graph, F.vertex_map[x])
        paths.record(0.0 if ok else 1.0)
    results.append(paths)
    for d in cfg.descriptors:
        tol = _threshold(d)
        ev = PropertyResult(f"{d}: pi_p(F A) = pi_(F^-1 p)(A)", threshold=tol)
        act = PropertyResult(f"{d}: (F2 F1) A = F2 (F1 A), identity acts trivially", threshold=tol)
        for _ in range(cfg.samples):
            F = autos[rng.integers(len(autos))]
            F2 = autos[rng.integers(len(autos))]
            conn = random_connection(graph, d, rng)
            p = random_path(graph, rng)
            ev.record(_dev(holonomy(automorphism_act(F, conn), p), holonomy(conn, apply_to_path(inverse_automorphism(F), p))))
            lhs = automorphism_act(compose_auto(F2, F), conn)
            rhs = automorphism_act(F2, automorphism_act(F, conn))
            unit = automorphism_act(identity_automorphism(graph), conn)
            devs = [_dev(lhs[e], rhs[e]) for e in graph.edges] + [_dev(unit[e], conn[e]) for e in graph.edges]
            act.record(max(devs, default=0.0))
        results += [ev, act]
    return results


def _refinement_chain(graph: EmbeddedGraph):
    """Subdivide the first edge, subdivide one half again, then add an edge."""
    first = next(iter(graph.edges))
    mid, r1 = subdivide_edge(graph, first)
    fine, r2 = subdivide_edge(mid, f"{first}_a")
    v = next(iter(graph.vertices))
    extra = OrientedEdge("added", f"{first}_a_m", v)
    finest, r3 = add_edge(fine, extra)
    return r1, r2, r3


def suite_projective(cfg: SuiteConfig, rng: np.random.Generator, graph: EmbeddedGraph) -> list[PropertyResult]:
    r1, r2, r3 = _refinement_chain(graph)
    composite = compose_refinements(r3, compose_refinements(r2, r1))
    results = []
    for d in cfg.descriptors:
        tol = _threshold(d)
        comm = PropertyResult(f"{d}: restriction commutes with evaluation", threshold=tol)
        func = PropertyResult(f"{d}: restriction along composite = composed restrictions", threshold=tol)
        for _ in range(cfg.samples):
            conn = random_connection(composite.fine, d, rng)
            sample = [random_path(graph, rng) for _ in range(4)]
            report = check_consistency(composite, conn, sample)
            comm.record(report.max_deviation)
            direct = restrict(composite, conn)
            chained = restrict(r1, restrict(r2, restrict(r3, conn)))
            func.record(max((_dev(direct[e], chained[e]) for e in graph.edges), default=0.0))
        results += [comm, func]
        if d.is_finite and cfg.exhaustive and d.order ** len(r1.fine.edges) <= EXHAUSTIVE_LIMIT:
            fibers = restriction_fibers(r1, d)
            sizes = set(fibers.values())
            ok = sizes == {d.order} and len(fibers) == d.order ** len(graph.edges)
            results.append(PropertyResult(f"{d}: single subdivision fibers have size |G|", len(fibers), 0.0 if ok else 1.0, 0.0, ok))
    return results


def suite_measure(cfg: SuiteConfig, rng: np.random.Generator, graph: EmbeddedGraph) -> list[PropertyResult]:
    results = []
    seed = int(rng.integers(2**63))
    loop = random_loop(graph, rng)
    while loop.is_identity:
        loop = random_loop(graph, rng)
    autos = list(graph_automorphisms(graph, limit=5000))
    for d in cfg.descriptors:
        mode = "exact" if d.is_finite and d.order ** (len(graph.edges) + 1) <= 10**6 else "mc"
        one = integrate(make_integrand("constant", graph, d), mode, cfg.mc_samples, seed)
        results.append(PropertyResult(f"{d}: integral of 1 is 1 ({mode})", max(one.samples, 1), abs(float(one.value) - 1.0), 0.0, one.value == 1))
        f = make_integrand("wilson", graph, d, [loop])
        g = random_gauge(graph, d, rng)
        F = autos[rng.integers(len(autos))]
        fine, ref = subdivide_edge(graph, loop.letters[0].edge)
        checks = [
            ("gauge pushforward invariance", verify_gauge_invariance(f, g, mode, cfg.mc_samples, seed)),
            ("automorphism pushforward invariance", verify_automorphism_invariance(f, F, mode, cfg.mc_samples, seed)),
            ("refinement consistency", verify_refinement_consistency(f, ref, mode, cfg.mc_samples, seed)),
        ]
        for name, rep in checks:
            results.append(
                PropertyResult(f"{d}: {name} ({mode})", max(rep.lhs.samples, 1), abs(float(rep.delta)), rep.bound, rep.passed)
            )
    return results


RUNNERS = {
    "groupoid-axioms": suite_groupoid_axioms,
    "functoriality": suite_functoriality,
    "gauge": suite_gauge,
    "automorphism": suite_automorphism,
    "projective": suite_projective,
    "measure": suite_measure,
}


def run_suite(name: str, cfg: SuiteConfig, seed: int) -> tuple[EmbeddedGraph, list[PropertyResult]]:
    if name not in RUNNERS:
        raise ValueError(f"unknown suite {name!r}")
    rng = np.random.default_rng(seed)
    graph = build_graph(cfg.graph if cfg.graph is not None else DEFAULT_GRAPHS[name], rng, cfg)
    if not graph.edges:
        raise ParseError("suite graph has no edges")
    return graph, RUNNERS[name](cfg, rng, graph)
