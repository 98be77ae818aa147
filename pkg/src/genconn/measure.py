"""Product Haar measure over the edges of a graph, and invariance checks.

Finite groups are integrated exactly by enumerating every edge assignment.
SU(2) uses Monte Carlo over independent Haar draws.  Every comparison between
two integrals uses paired samples: sample ``i`` of both sides is computed from
the same draw, and the standard error is that of the per-sample differences.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Sequence

import numpy as np

from . import group as grp
from .connection import GeneralizedConnection, all_connections, holonomy, random_connection
from .errors import BudgetExceededError, GraphMismatchError, UnsupportedExactError
from .group import GroupDescriptor, GroupElement
from .groupoid import EmbeddedGraph, PathWord
from .projective import Refinement, restrict
from .symmetry import GaugeTransformation, GroupoidAutomorphism, automorphism_act, gauge_act

EXACT = "exact"
MONTE_CARLO = "mc"
MAX_ENUMERATION = 10**7


@dataclass(frozen=True)
class CylindricalFunction:
    """Function of the holonomies along ``probe_paths``.

    ``evaluator`` receives one group element per probe path.  ``bound`` is the
    declared sup-norm; it is not checked.
    """

    graph: EmbeddedGraph
    descriptor: GroupDescriptor
    probe_paths: tuple[PathWord, ...]
    evaluator: Callable[[Sequence[GroupElement]], float]
    bound: float | None = None
    name: str = "f"

    def __post_init__(self):
        object.__setattr__(self, "probe_paths", tuple(self.probe_paths))
        for p in self.probe_paths:
            if p.graph != self.graph:
                raise GraphMismatchError(f"probe path {p} is not on graph {self.graph.name!r}")

    def __call__(self, conn: GeneralizedConnection):
        return self.evaluator([holonomy(conn, p) for p in self.probe_paths])


@dataclass(frozen=True)
class IntegralResult:
    value: float | Fraction
    mode: str
    samples: int = 0
    std_error: float = 0.0


@dataclass(frozen=True)
class InvarianceReport:
    lhs: IntegralResult
    rhs: IntegralResult
    delta: float | Fraction
    sigma: float
    bound: float
    passed: bool

    @property
    def mode(self) -> str:
        return self.lhs.mode


def _exact_mean(values) -> float | Fraction:
    if not values:
        raise ValueError("no values to average")
    if all(isinstance(v, (bool, Rational)) for v in values):
        return Fraction(sum(Fraction(v) for v in values), len(values))
    total = sum((Fraction(float(v)) for v in values), Fraction(0))
    return float(total / len(values))


def _std_error(values, mean) -> float:
    n = len(values)
    if n < 2:
        return 0.0
    m = float(mean)
    var = math.fsum((float(v) - m) ** 2 for v in values) / (n - 1)
    return math.sqrt(var / n)


def _check_exact(graph: EmbeddedGraph, d: GroupDescriptor) -> None:
    if not d.is_finite:
        raise UnsupportedExactError(f"exact integration needs a finite group, not {d}")
    size = d.order ** len(graph.edges)
    if size > MAX_ENUMERATION:
        raise BudgetExceededError(f"{d.order}^{len(graph.edges)} = {size} assignments exceeds {MAX_ENUMERATION}")


def _worker_chunks(samples: int, workers: int) -> list[int]:
    base, extra = divmod(samples, workers)
    return [base + (1 if k < extra else 0) for k in range(workers)]


def _paired_draws(
    samples: int,
    seed: int,
    workers: int,
    draw: Callable[[np.random.Generator], tuple],
) -> list[tuple]:
    """Run ``draw`` ``samples`` times over per-worker streams; results in worker order."""
    if samples < 1:
        raise ValueError("Monte Carlo needs at least one sample")
    workers = max(1, min(workers, samples))
    seeds = np.random.SeedSequence(seed).spawn(workers)
    chunks = _worker_chunks(samples, workers)

    def run(k):
        rng = np.random.default_rng(seeds[k])
        return [draw(rng) for _ in range(chunks[k])]

    if workers == 1:
        parts = [run(0)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(workers)))
    return [item for part in parts for item in part]


def _resolve_mode(mode: str | None, d: GroupDescriptor) -> str:
    if mode is None:
        return EXACT if d.is_finite else MONTE_CARLO
    if mode not in (EXACT, MONTE_CARLO):
        raise ValueError(f"mode must be {EXACT!r} or {MONTE_CARLO!r}")
    return mode


def integrate(
    f: CylindricalFunction,
    mode: str | None = None,
    samples: int = 10_000,
    seed: int = 0,
    workers: int = 1,
) -> IntegralResult:
    """Integral of ``f`` against product Haar measure on ``f.graph``.

    ``mode`` defaults to exact for finite groups and Monte Carlo for su2.
    """
    mode = _resolve_mode(mode, f.descriptor)
    if mode == EXACT:
        _check_exact(f.graph, f.descriptor)
        values = [f(c) for c in all_connections(f.graph, f.descriptor)]
        return IntegralResult(_exact_mean(values), EXACT)
    draws = _paired_draws(samples, seed, workers, lambda rng: (f(random_connection(f.graph, f.descriptor, rng)),))
    values = [v for (v,) in draws]
    mean = _exact_mean([float(v) for v in values])
    return IntegralResult(mean, MONTE_CARLO, len(values), _std_error(values, mean))


def _compare(
    graph_a: EmbeddedGraph,
    graph_b: EmbeddedGraph,
    d: GroupDescriptor,
    fa: Callable[[GeneralizedConnection], float],
    fb: Callable[[GeneralizedConnection], float],
    mode: str | None,
    samples: int,
    seed: int,
    workers: int,
) -> InvarianceReport:
    mode = _resolve_mode(mode, d)
    if mode == EXACT:
        _check_exact(graph_a, d)
        _check_exact(graph_b, d)
        lhs = _exact_mean([fa(c) for c in all_connections(graph_a, d)])
        rhs = _exact_mean([fb(c) for c in all_connections(graph_b, d)])
        delta = rhs - lhs
        return InvarianceReport(IntegralResult(lhs, EXACT), IntegralResult(rhs, EXACT), delta, 0.0, 0.0, delta == 0)

    if graph_a == graph_b:
        def draw(rng):
            c = random_connection(graph_a, d, rng)
            return float(fa(c)), float(fb(c))
    else:
        def draw(rng):
            return float(fa(random_connection(graph_a, d, rng))), float(fb(random_connection(graph_b, d, rng)))

    pairs = _paired_draws(samples, seed, workers, draw)
    a = [x for x, _ in pairs]
    b = [y for _, y in pairs]
    diffs = [y - x for x, y in pairs]
    mean_a, mean_b, mean_d = _exact_mean(a), _exact_mean(b), _exact_mean(diffs)
    sigma = _std_error(diffs, mean_d)
    # rounding-level slack so that exactly invariant integrands with sigma == 0 pass
    slack = 1e-12 * max(1.0, max((abs(v) for v in a + b), default=0.0))
    bound = 3.0 * sigma + slack
    n = len(pairs)
    return InvarianceReport(
        IntegralResult(mean_a, MONTE_CARLO, n, _std_error(a, mean_a)),
        IntegralResult(mean_b, MONTE_CARLO, n, _std_error(b, mean_b)),
        mean_d,
        sigma,
        bound,
        abs(mean_d) <= bound,
    )


def verify_gauge_invariance(
    f: CylindricalFunction, g: GaugeTransformation, mode: str | None = None, samples: int = 10_000, seed: int = 0, workers: int = 1
) -> InvarianceReport:
    """Compare the integral of ``f`` with that of ``f`` after the gauge action."""
    return _compare(f.graph, f.graph, f.descriptor, f, lambda c: f(gauge_act(g, c)), mode, samples, seed, workers)


def verify_automorphism_invariance(
    f: CylindricalFunction, F: GroupoidAutomorphism, mode: str | None = None, samples: int = 10_000, seed: int = 0, workers: int = 1
) -> InvarianceReport:
    return _compare(f.graph, f.graph, f.descriptor, f, lambda c: f(automorphism_act(F, c)), mode, samples, seed, workers)


def verify_refinement_consistency(
    f_coarse: CylindricalFunction, ref: Refinement, mode: str | None = None, samples: int = 10_000, seed: int = 0, workers: int = 1
) -> InvarianceReport:
    """Integral of a coarse function versus the integral of its pullback to the fine graph.

    The two Monte Carlo sides live on different graphs, so each pair holds
    independent draws; the paired standard error stays valid.
    """
    if f_coarse.graph != ref.coarse:
        raise GraphMismatchError("integrand does not live on the coarse graph")
    return _compare(
        ref.coarse, ref.fine, f_coarse.descriptor, f_coarse, lambda c: f_coarse(restrict(ref, c)), mode, samples, seed, workers
    )


# -- built-in integrands ----------------------------------------------------

INTEGRANDS = ("wilson", "wilson2", "indicator-identity", "character-product", "constant")


def _trace_bound(d: GroupDescriptor) -> float:
    if d.kind == grp.SU2:
        return 2.0
    if d.kind == grp.CYCLIC:
        return 1.0
    return float(d.n)


def make_integrand(
    name: str,
    graph: EmbeddedGraph,
    d: GroupDescriptor,
    paths: Sequence[PathWord] = (),
    value: float | Fraction = 1,
) -> CylindricalFunction:
    """Named integrand from the CLI registry.

    wilson / wilson2: trace (squared) around one closed path.  indicator-identity:
    1 when the holonomy of one path is the identity.  character-product: product
    of traces around several closed paths.  constant: ``value`` everywhere.
    """
    paths = tuple(paths)
    if name == "constant":
        return CylindricalFunction(graph, d, (), lambda hs: value, abs(float(value)), name)
    if not paths:
        raise ValueError(f"integrand {name!r} needs at least one path")
    if name in ("wilson", "wilson2", "character-product"):
        for p in paths:
            if not p.is_closed:
                raise ValueError(f"integrand {name!r} needs closed paths; {p} is open")
    tb = _trace_bound(d)
    if name == "wilson":
        return CylindricalFunction(graph, d, paths[:1], lambda hs: grp.trace(hs[0]), tb, name)
    if name == "wilson2":
        return CylindricalFunction(graph, d, paths[:1], lambda hs: grp.trace(hs[0]) ** 2, tb * tb, name)
    if name == "indicator-identity":
        ident = grp.identity(d)
        return CylindricalFunction(graph, d, paths[:1], lambda hs: int(grp.equal(hs[0], ident)), 1.0, name)
    if name == "character-product":
        return CylindricalFunction(graph, d, paths, lambda hs: math.prod(grp.trace(h) for h in hs), tb ** len(paths), name)
    raise ValueError(f"unknown integrand {name!r}; choose from {', '.join(INTEGRANDS)}")
