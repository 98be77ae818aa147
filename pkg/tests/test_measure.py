from fractions import Fraction

import numpy as np
import pytest

from genconn import group as grp
from genconn import groupoid as gpd
from genconn.errors import BudgetExceededError, GraphMismatchError, UnsupportedExactError
from genconn.groupoid import EmbeddedGraph, OrientedEdge, SignedEdge, Vertex, reduce
from genconn.measure import (
    CylindricalFunction,
    integrate,
    make_integrand,
    verify_automorphism_invariance,
    verify_gauge_invariance,
    verify_refinement_consistency,
)
from genconn.projective import add_edge, compose_refinements, subdivide_edge
from genconn.sampling import random_graph, random_loop, random_path
from genconn.symmetry import GroupoidAutomorphism, graph_automorphisms, identity_automorphism, identity_gauge, random_gauge

from oracles import s3_average

Z3 = grp.cyclic(3)
SU2 = grp.su2()


def loop_graph():
    return gpd.bouquet_graph(1)


def one_edge():
    return EmbeddedGraph([Vertex("x"), Vertex("y")], [OrientedEdge("e", "x", "y")], "seg")


def test_indicator_one_edge_exact():
    g = one_edge()
    f = make_integrand("indicator-identity", g, Z3, [reduce(g, ["e"])])
    res = integrate(f)
    assert res.value == Fraction(1, 3)
    assert res.mode == "exact" and res.samples == 0 and res.std_error == 0.0


@pytest.mark.parametrize("d", [Z3, grp.symmetric(3), SU2], ids=str)
def test_normalization(d):
    g = gpd.cycle_graph(3)
    one = make_integrand("constant", g, d, value=1)
    modes = ["mc"] if not d.is_finite else ["exact", "mc"]
    for mode in modes:
        res = integrate(one, mode=mode, samples=500)
        assert res.value == 1 and res.std_error == 0.0


def test_constant_in_both_modes():
    g = gpd.cycle_graph(2)
    f = make_integrand("constant", g, Z3, value=Fraction(7, 2))
    assert integrate(f, mode="exact").value == Fraction(7, 2)
    assert integrate(f, mode="mc", samples=200).value == 3.5
    assert integrate(make_integrand("constant", g, SU2, value=-0.25), samples=200).value == -0.25


def test_su2_trace_moments_match_sphere_oracle():
    first = s3_average(lambda w, x, y, z: 2 * w)
    second = s3_average(lambda w, x, y, z: 4 * w * w)
    g = loop_graph()
    loop = reduce(g, ["l0"])
    tr = integrate(make_integrand("wilson", g, SU2, [loop]), samples=100_000, seed=3)
    tr2 = integrate(make_integrand("wilson2", g, SU2, [loop]), samples=100_000, seed=4)
    assert tr.samples == 100_000 and tr.std_error > 0
    assert abs(tr.value - first) <= 3 * tr.std_error
    assert abs(tr2.value - second) <= 3 * tr2.std_error
    assert abs(second - 1.0) < 1e-8


def test_finite_wilson_orthogonality_exact():
    # for S3 the trace is the permutation character 1 + std, so <chi, chi> = 2
    g = loop_graph()
    loop = reduce(g, ["l0"])
    assert integrate(make_integrand("wilson", g, grp.symmetric(3), [loop])).value == 1
    assert integrate(make_integrand("wilson2", g, grp.symmetric(3), [loop])).value == 2


def test_exact_errors():
    g = loop_graph()
    f = make_integrand("wilson", g, SU2, [reduce(g, ["l0"])])
    with pytest.raises(UnsupportedExactError):
        integrate(f, mode="exact")
    big = gpd.grid_graph(4, 4)
    with pytest.raises(BudgetExceededError):
        integrate(make_integrand("constant", big, Z3), mode="exact")
    with pytest.raises(ValueError):
        integrate(f, mode="bogus")


def test_integrand_registry_errors():
    g = one_edge()
    with pytest.raises(ValueError):
        make_integrand("wilson", g, Z3, [reduce(g, ["e"])])
    with pytest.raises(ValueError):
        make_integrand("nope", g, Z3, [reduce(g, ["e"])])
    with pytest.raises(ValueError):
        make_integrand("wilson", g, Z3, [])
    with pytest.raises(GraphMismatchError):
        CylindricalFunction(g, Z3, [reduce(loop_graph(), ["l0"])], lambda hs: 0.0)


# -- invariance ----------------------------------------------------------------

def table_function(graph, d, paths, rng, name="table"):
    """A random function of the holonomies: a lookup table per probe path, summed."""
    elems = list(grp.elements(d))
    tables = [{g.payload: int(v) for g, v in zip(elems, rng.integers(-5, 6, len(elems)))} for _ in paths]
    return CylindricalFunction(graph, d, paths, lambda hs: sum(t[h.payload] for t, h in zip(tables, hs)), 5.0 * len(paths), name)


@pytest.mark.parametrize("d", [Z3, grp.symmetric(3)], ids=str)
def test_gauge_invariance_exact(d):
    rng = np.random.default_rng(40)
    g = gpd.grid_graph(2, 2)
    for _ in range(5):
        f = table_function(g, d, [random_path(g, rng, 6) for _ in range(2)], rng)
        rep = verify_gauge_invariance(f, random_gauge(g, d, rng))
        assert rep.passed and rep.delta == 0 and rep.mode == "exact"


def test_identity_gauge_gives_zero_delta_mc():
    g = gpd.cycle_graph(2)
    f = make_integrand("wilson", g, SU2, [reduce(g, ["c0", "c1"])])
    rep = verify_gauge_invariance(f, identity_gauge(g, SU2), samples=2000)
    assert rep.passed and abs(rep.delta) <= 1e-12


def test_su2_gauge_invariance_paired():
    rng = np.random.default_rng(41)
    g = gpd.cycle_graph(2)
    f = make_integrand("wilson", g, SU2, [reduce(g, ["c0", "c1"])])
    rep = verify_gauge_invariance(f, random_gauge(g, SU2, rng), samples=20_000, seed=5)
    assert rep.passed and abs(rep.delta) <= rep.bound


def test_su2_gauge_open_path_integrand_paired():
    # not gauge invariant pointwise, but its integral is
    rng = np.random.default_rng(42)
    g = one_edge()
    f = CylindricalFunction(g, SU2, [reduce(g, ["e"])], lambda hs: hs[0].payload[1] + 0.5 * hs[0].payload[0], 1.5)
    rep = verify_gauge_invariance(f, random_gauge(g, SU2, rng), samples=20_000, seed=6)
    assert rep.sigma > 0 and rep.passed


@pytest.mark.parametrize("d", [Z3, grp.symmetric(3)], ids=str)
def test_automorphism_invariance_exact(d):
    rng = np.random.default_rng(43)
    g = EmbeddedGraph([Vertex("x"), Vertex("y")], [OrientedEdge("e1", "x", "y"), OrientedEdge("e2", "x", "y"), OrientedEdge("l", "x", "x")])
    swap = GroupoidAutomorphism(g, {"x": "x", "y": "y"}, {"e1": SignedEdge("e2"), "e2": SignedEdge("e1"), "l": SignedEdge("l", -1)})
    for F in (swap, identity_automorphism(g)):
        for _ in range(5):
            f = table_function(g, d, [random_path(g, rng, 5), random_path(g, rng, 5)], rng)
            rep = verify_automorphism_invariance(f, F)
            assert rep.passed and rep.delta == 0


def test_su2_orientation_reversing_automorphism():
    g = gpd.cycle_graph(3)
    F = next(F for F in graph_automorphisms(g) if any(s.sign == -1 for s in F.edge_map.values()))
    p = reduce(g, ["c0"])
    # x-component of an open holonomy, so the pushforward really moves the integrand
    f = CylindricalFunction(g, SU2, [p, reduce(g, ["c0", "c1"])], lambda hs: hs[0].payload[1] + hs[1].payload[0] * hs[0].payload[2], 2.0)
    rep = verify_automorphism_invariance(f, F, samples=20_000, seed=7)
    assert rep.sigma > 0 and rep.passed


@pytest.mark.parametrize("n", [2, 3, 5])
def test_refinement_indicator(n):
    d = grp.cyclic(n)
    g = one_edge()
    _, ref = subdivide_edge(g, "e")
    f = make_integrand("indicator-identity", g, d, [reduce(g, ["e"])])
    rep = verify_refinement_consistency(f, ref)
    assert rep.lhs.value == rep.rhs.value == Fraction(1, n) and rep.passed


def test_refinement_exact_random_functions():
    rng = np.random.default_rng(44)
    g = gpd.cycle_graph(3)
    _, r1 = subdivide_edge(g, "c0")
    _, r2 = add_edge(r1.fine, OrientedEdge("chord", "v0", "v2"))
    ref = compose_refinements(r2, r1)
    for _ in range(5):
        f = table_function(g, Z3, [random_path(g, rng, 6), random_loop(g, rng, 6)], rng)
        assert verify_refinement_consistency(f, ref).delta == 0


def test_refinement_constant_and_su2():
    g = gpd.cycle_graph(3)
    _, ref = subdivide_edge(g, "c1")
    const = make_integrand("constant", g, SU2, value=2.5)
    rep = verify_refinement_consistency(const, ref, samples=500)
    assert rep.lhs.value == rep.rhs.value == 2.5 and rep.passed
    f = make_integrand("wilson", g, SU2, [reduce(g, ["c0", "c1", "c2"])])
    rep = verify_refinement_consistency(f, ref, samples=20_000, seed=8)
    assert rep.passed
    with pytest.raises(GraphMismatchError):
        verify_refinement_consistency(make_integrand("constant", ref.fine, SU2), ref, samples=10)


def test_exact_and_mc_agree_on_random_functions():
    rng = np.random.default_rng(45)
    kinds = [grp.cyclic(2), Z3, grp.cyclic(4), grp.symmetric(3)]
    for k in range(20):
        d = kinds[k % len(kinds)]
        g = random_graph(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        f = table_function(g, d, [random_path(g, rng, 6) for _ in range(int(rng.integers(1, 3)))], rng)
        exact = integrate(f, mode="exact").value
        mc = integrate(f, mode="mc", samples=10_000, seed=k)
        assert abs(mc.value - float(exact)) <= 3 * mc.std_error or mc.std_error == 0 == mc.value - float(exact)


@pytest.mark.parametrize("workers", [1, 3])
def test_mc_reproducible_per_worker_count(workers):
    g = gpd.cycle_graph(2)
    f = make_integrand("wilson", g, SU2, [reduce(g, ["c0", "c1"])])
    a = integrate(f, samples=3000, seed=9, workers=workers)
    b = integrate(f, samples=3000, seed=9, workers=workers)
    assert a == b and a.samples == 3000


def test_std_error_formula():
    g = loop_graph()
    values = iter([0.0, 1.0, 2.0, 3.0])
    f = CylindricalFunction(g, SU2, [], lambda hs: next(values))
    res = integrate(f, samples=4)
    # sample sd of 0..3 is sqrt(5/3)
    assert res.value == 1.5
    assert res.std_error == pytest.approx((5 / 3) ** 0.5 / 2, rel=1e-15)
