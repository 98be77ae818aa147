import json
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as quad

from genconn import group as grp
from genconn import groupoid as gpd
from genconn.connection import (
    SU2_ONEFORM,
    U1_ONEFORM,
    GeneralizedConnection,
    Polynomial,
    SmoothConnectionSpec,
    connection_to_dict,
    discretize_smooth,
    dump_connection,
    holonomy,
    load_connection,
    load_smooth_spec,
    random_connection,
    separates,
    smooth_spec_to_dict,
    u1_phase,
)
from genconn.errors import GraphMismatchError, NoGeometryError, ParseError, UnsupportedGroupError
from genconn.groupoid import EmbeddedGraph, OrientedEdge, Vertex, compose, inverse_path, reduce
from genconn.projective import subdivide_edge
from genconn.sampling import composable_pair, insert_retracings, random_graph

from oracles import binomial_sigma


def two_edge_graph():
    return EmbeddedGraph(
        [Vertex("x"), Vertex("y"), Vertex("z")], [OrientedEdge("e1", "x", "y"), OrientedEdge("e2", "y", "z")], "two"
    )


def u1_spec(coeffs_per_axis, n=16):
    """coeffs_per_axis[i] = list of (coeff, exponents) for the dx^i component."""
    return SmoothConnectionSpec(U1_ONEFORM, tuple(Polynomial(tuple(c)) for c in coeffs_per_axis), n)


def test_empty_graph_connection(rng):
    g = EmbeddedGraph([Vertex("x")], [], "point")
    conn = random_connection(g, grp.cyclic(3), rng)
    assert dict(conn.assignment) == {}
    assert holonomy(conn, gpd.identity_path(g, "x")) == grp.identity(grp.cyclic(3))


def test_random_connection_reproducible():
    g = gpd.grid_graph(2, 2)
    for d in (grp.cyclic(5), grp.su2()):
        a = random_connection(g, d, np.random.default_rng(4))
        b = random_connection(g, d, np.random.default_rng(4))
        assert a == b


def test_random_connection_uniform_per_edge():
    g = EmbeddedGraph([Vertex("x")], [OrientedEdge(f"e{k}", "x", "x") for k in range(3)], "b3")
    d = grp.cyclic(2)
    n = 4096
    counts = {e: Counter() for e in g.edges}
    for seed in range(n):
        conn = random_connection(g, d, np.random.default_rng(seed))
        for e in g.edges:
            counts[e][conn[e].payload] += 1
    sigma = binomial_sigma(n, 0.5)
    for e in g.edges:
        assert abs(counts[e][1] / n - 0.5) <= 3 * sigma


def test_two_edge_cyclic_holonomy():
    g = two_edge_graph()
    d = grp.cyclic(2)
    conn = GeneralizedConnection(g, d, {"e1": grp.GroupElement(d, 1), "e2": grp.GroupElement(d, 1)})
    assert holonomy(conn, reduce(g, ["e1", "e2"])).payload == 0
    assert holonomy(conn, reduce(g, ["e1"])).payload == 1


def test_letter_values():
    g = two_edge_graph()
    d = grp.symmetric(3)
    a, b = grp.GroupElement(d, (1, 2, 0)), grp.GroupElement(d, (1, 0, 2))
    conn = GeneralizedConnection(g, d, {"e1": a, "e2": b})
    assert holonomy(conn, reduce(g, ["e1"])) == a
    assert holonomy(conn, reduce(g, ["e1^-1"])) == grp.inverse(a)
    # later letter multiplies on the left
    assert holonomy(conn, reduce(g, ["e1", "e2"])) == grp.multiply(b, a)
    assert holonomy(conn, gpd.identity_path(g, "y")) == grp.identity(d)


def test_holonomy_rejects_foreign_path(rng):
    conn = random_connection(two_edge_graph(), grp.cyclic(3), rng)
    other = gpd.cycle_graph(3)
    with pytest.raises(GraphMismatchError):
        holonomy(conn, gpd.identity_path(other, "v0"))


def test_connection_validation():
    g = two_edge_graph()
    d = grp.cyclic(3)
    with pytest.raises(ValueError):
        GeneralizedConnection(g, d, {"e1": grp.identity(d)})
    with pytest.raises(ValueError):
        GeneralizedConnection(g, d, {"e1": grp.identity(d), "e2": grp.identity(grp.cyclic(4))})


@pytest.mark.parametrize("d", [grp.cyclic(2), grp.cyclic(6), grp.symmetric(3), grp.symmetric(4), grp.su2()], ids=str)
def test_functoriality_sampled(d):
    rng = np.random.default_rng(2024)
    tol = 0.0 if d.is_finite else 1e-10
    for _ in range(30):
        graph = random_graph(rng, 5, 8)
        conn = random_connection(graph, d, rng)
        for _ in range(10):
            p2, p1 = composable_pair(graph, rng)
            lhs = holonomy(conn, compose(p2, p1))
            assert grp.distance(lhs, grp.multiply(holonomy(conn, p2), holonomy(conn, p1))) <= tol
            assert grp.distance(holonomy(conn, inverse_path(p1)), grp.inverse(holonomy(conn, p1))) <= tol
            padded = insert_retracings(graph, list(p1.letters), rng, 4, p1.source)
            assert grp.distance(holonomy(conn, reduce(graph, padded, p1.source)), holonomy(conn, p1)) <= tol


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([grp.cyclic(4), grp.symmetric(3)]))
def test_holonomy_of_composite_property(seed, d):
    rng = np.random.default_rng(seed)
    graph = random_graph(rng, 4, 6)
    conn = random_connection(graph, d, rng)
    p2, p1 = composable_pair(graph, rng)
    assert holonomy(conn, compose(p2, p1)) == grp.multiply(holonomy(conn, p2), holonomy(conn, p1))


# -- smooth connections -------------------------------------------------------

def test_constant_u1_form_on_straight_edge():
    a, L = 0.7, 2.5
    g = gpd.segment_graph(L, dim=2)
    spec = u1_spec([[(a, (0, 0))], [(0.0, (0, 0))]])
    conn = discretize_smooth(spec, g)
    w, x, y, z = conn["e"].payload
    assert (w, x) == pytest.approx((math.cos(a * L), math.sin(a * L)), abs=1e-14)
    assert (y, z) == (0.0, 0.0)


def test_zero_form_gives_identity():
    g = gpd.grid_graph(3, 3)
    zero = Polynomial.zero(2)
    for spec in (
        SmoothConnectionSpec(U1_ONEFORM, (zero, zero)),
        SmoothConnectionSpec(SU2_ONEFORM, ((zero, zero, zero), (zero, zero, zero))),
    ):
        conn = discretize_smooth(spec, g)
        assert all(h == grp.identity(grp.su2()) for h in conn.assignment.values())


def test_u1_phase_matches_adaptive_quadrature():
    # A = (x*y + 0.3 x^3) dx + (y^2 - 0.5) dy on a bent polyline
    spec = u1_spec([[(1.0, (1, 1)), (0.3, (3, 0))], [(1.0, (0, 2)), (-0.5, (0, 0))]])
    pts = [(0.0, 0.0), (1.0, 0.5), (1.5, -0.25), (2.0, 1.0)]
    g = EmbeddedGraph([Vertex("a", pts[0]), Vertex("b", pts[-1])], [OrientedEdge("e", "a", "b", tuple(pts))], "bent")
    expected = 0.0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        dx, dy = x1 - x0, y1 - y0

        def f(t):
            x, y = x0 + t * dx, y0 + t * dy
            return (x * y + 0.3 * x**3) * dx + (y * y - 0.5) * dy

        expected += quad.quad(f, 0.0, 1.0, epsabs=1e-14)[0]
    theta = u1_phase(discretize_smooth(spec, g)["e"])
    assert math.remainder(theta - expected, 2 * math.pi) == pytest.approx(0.0, abs=1e-12)


def test_midpoint_split_reproduces_edge_holonomy():
    spec = u1_spec([[(0.9, (2, 1)), (-0.4, (0, 3))], [(0.5, (1, 0)), (1.0, (3, 0))]])
    g = gpd.grid_graph(2, 2)
    whole = discretize_smooth(spec, g)
    for e in g.edges:
        fine, ref = subdivide_edge(g, e)
        split = discretize_smooth(spec, fine)
        composite = holonomy(split, ref.expansion[e])
        assert grp.distance(composite, whole[e]) <= 1e-9


def test_quadrature_doubling_is_stable():
    spec = u1_spec([[(1.0, (6, 0)), (-0.8, (2, 3))], [(0.6, (1, 5))]], n=16)
    g = gpd.grid_graph(3, 3)
    a = discretize_smooth(spec, g)
    b = discretize_smooth(spec.with_quadrature_points(32), g)
    for e in g.edges:
        assert abs(u1_phase(a[e]) - u1_phase(b[e])) < 1e-10


def test_su2_constant_field_is_exact():
    a = 1.3
    g = gpd.segment_graph(1.0, dim=1)
    comp = (Polynomial.constant(0.0, 1), Polynomial.constant(a, 1), Polynomial.constant(0.0, 1))
    h = discretize_smooth(SmoothConnectionSpec(SU2_ONEFORM, (comp,)), g)["e"]
    assert h.payload == pytest.approx((math.cos(a), 0.0, math.sin(a), 0.0), abs=1e-14)


def test_su2_path_ordering_on_bent_edge():
    # A = a i dx + b j dy along (0,0) -> (1,0) -> (1,1): transport exp(b j) exp(a i)
    a, b = 0.8, -1.1
    zero = Polynomial.zero(2)
    spec = SmoothConnectionSpec(
        SU2_ONEFORM, ((Polynomial.constant(a, 2), zero, zero), (zero, Polynomial.constant(b, 2), zero))
    )
    pts = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0))
    g = EmbeddedGraph([Vertex("p", pts[0]), Vertex("q", pts[-1])], [OrientedEdge("e", "p", "q", pts)], "L")
    d = grp.su2()
    first = grp.GroupElement(d, (math.cos(a), math.sin(a), 0.0, 0.0))
    second = grp.GroupElement(d, (math.cos(b), 0.0, math.sin(b), 0.0))
    h = discretize_smooth(spec, g)["e"]
    assert grp.distance(h, grp.multiply(second, first)) < 1e-13
    assert grp.distance(h, grp.multiply(first, second)) > 0.1


def test_su2_transport_converges_second_order():
    x = Polynomial(((1.0, (1, 0)),))
    y = Polynomial(((1.0, (0, 1)),))
    one = Polynomial.constant(0.5, 2)
    spec = SmoothConnectionSpec(SU2_ONEFORM, ((x, one, y), (y, x, one)), 16)
    pts = ((0.0, 0.0), (1.0, 0.7))
    g = EmbeddedGraph([Vertex("p", pts[0]), Vertex("q", pts[1])], [OrientedEdge("e", "p", "q", pts)], "s")
    ref = discretize_smooth(spec.with_quadrature_points(4096), g)["e"]
    errs = [grp.distance(discretize_smooth(spec.with_quadrature_points(n), g)["e"], ref) for n in (16, 32, 64)]
    assert errs[0] > errs[1] > errs[2]
    assert 3.0 < errs[0] / errs[1] < 5.0 and 3.0 < errs[1] / errs[2] < 5.0


def test_su2_abelian_direction_matches_u1():
    p = Polynomial(((0.4, (1, 0)), (0.2, (0, 0))))
    zero = Polynomial.zero(2)
    g = gpd.grid_graph(2, 2)
    u1 = discretize_smooth(SmoothConnectionSpec(U1_ONEFORM, (p, zero)), g)
    s = discretize_smooth(SmoothConnectionSpec(SU2_ONEFORM, ((p, zero, zero), (zero, zero, zero)), 256), g)
    for e in g.edges:
        assert grp.distance(u1[e], s[e]) < 1e-5


def test_discretize_errors():
    g = gpd.cycle_graph(3)
    spec = u1_spec([[(1.0, (0,))]])
    with pytest.raises(NoGeometryError):
        discretize_smooth(spec, g)
    with pytest.raises(UnsupportedGroupError):
        discretize_smooth(spec, gpd.segment_graph(), grp.cyclic(3))


def test_spec_validation():
    with pytest.raises(ValueError):
        u1_spec([[(1.0, (7, 0))], [(1.0, (0, 0))]])
    with pytest.raises(ValueError):
        u1_spec([[(1.0, (0,))]], n=8)


def test_separates():
    g = gpd.segment_graph(1.0)
    p = reduce(g, ["e"])
    c1 = discretize_smooth(u1_spec([[(1.0, (0,))]]), g)
    c2 = discretize_smooth(u1_spec([[(1.0 + 1e-3, (0,))]]), g)
    assert separates(c1, c1, [p]) is None
    assert separates(c1, c2, [gpd.identity_path(g, "x"), p]) == p


def test_separates_finite():
    g = two_edge_graph()
    d = grp.cyclic(3)
    base = {"e1": grp.GroupElement(d, 1), "e2": grp.GroupElement(d, 2)}
    a = GeneralizedConnection(g, d, base)
    b = GeneralizedConnection(g, d, {**base, "e2": grp.GroupElement(d, 0)})
    assert separates(a, b, [reduce(g, ["e1"])]) is None
    assert separates(a, b, [reduce(g, ["e2"])]) == reduce(g, ["e2"])


# -- files --------------------------------------------------------------------

def test_connection_file_round_trip(tmp_path, rng):
    g = gpd.grid_graph(2, 3)
    for d in (grp.cyclic(4), grp.symmetric(3), grp.su2()):
        conn = random_connection(g, d, rng)
        path = tmp_path / f"{d.kind}.json"
        dump_connection(conn, path)
        assert load_connection(path, g) == conn


def test_connection_file_errors(tmp_path, rng):
    g = two_edge_graph()
    conn = random_connection(g, grp.cyclic(3), rng)
    data = connection_to_dict(conn)
    path = tmp_path / "c.json"
    path.write_text(json.dumps({**data, "graph": "other"}))
    with pytest.raises(ParseError):
        load_connection(path, g)
    path.write_text(json.dumps({**data, "assignment": {"e1": "7", "e2": "0"}}))
    with pytest.raises(ParseError):
        load_connection(path, g)
    path.write_text(json.dumps(data)[:-3])
    with pytest.raises(ParseError) as info:
        load_connection(path, g)
    assert info.value.line == 1


def test_smooth_spec_file(tmp_path):
    spec = SmoothConnectionSpec(
        SU2_ONEFORM,
        ((Polynomial(((1.0, (1, 0)),)), Polynomial.zero(2), Polynomial.constant(2.0, 2)),) * 2,
        24,
    )
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(smooth_spec_to_dict(spec)))
    assert load_smooth_spec(path) == spec
