import random

import pytest
from hypothesis import given, settings, strategies as st

from cuspwork.cusped import build_cusped, build_horoball, cusped_from_pair, default_depth, hyperbolicity_profile
from cuspwork.errors import InputError, ModelingError
from cuspwork.graphcore import Graph, cycle_graph, grid_graph, path_graph, thin_triangle_delta
from cuspwork.grouppair import GroupPair, PeripheralCoset, cayley_ball, free_pair, peripheral_cosets

from oracles import adjacency, bfs, free_cosets_by_string

Z = {"generators": ["a"], "peripherals": [["a"]]}
Z2 = {"generators": ["a", "b"], "relators": ["abAB"]}


def test_single_edge_horoball_every_level():
    h = build_horoball(path_graph(2), 4)
    for m in range(5):
        assert h.graph.has_edge(h.vid(0, m), h.vid(1, m))


def test_path_horoball_rule():
    h = build_horoball(path_graph(9), 3, metric=lambda u, v: abs(u - v))
    assert h.graph.has_edge(h.vid(0, 2), h.vid(4, 2))
    assert not h.graph.has_edge(h.vid(0, 2), h.vid(5, 2))
    assert h.exact


def test_depth_zero_horoball_is_base():
    g = cycle_graph(5)
    h = build_horoball(g, 0)
    assert h.graph.edges == g.edges and not h.exact


def test_infinite_cyclic_single_horoball():
    c = cusped_from_pair(GroupPair.from_json(Z), 8, 3)
    assert len(c.horoballs) == 1 and len(c.horoballs[0].base_vertices) == 17
    assert c.n == 17 * 4


def test_truncated_horoball_distance_matches_bfs_oracle():
    c = cusped_from_pair(GroupPair.from_json(Z), 8, 3)
    t = c.truncate(2)
    x, y = t.index[((), -1, 0)], t.index[((1,) * 8, -1, 0)]
    assert bfs(adjacency(t.n, t.graph.edges), x)[y] == 6
    assert t.graph.distance(x, y) == 6


def test_truncate_extremes():
    c = cusped_from_pair(free_pair(2), 2, 2)
    assert c.truncate(2) is c
    base = c.truncate(0)
    assert base.graph.edges == c.ball.graph.edges
    with pytest.raises(InputError):
        c.truncate(3)


def test_depth_zero_cusp_is_ball():
    ball = cayley_ball(free_pair(2), 3)
    c = build_cusped(ball, None, 0)
    assert c.graph.edges == ball.graph.edges


def test_free_cosets_match_string_oracle():
    pair = free_pair(2)
    ball = cayley_ball(pair, 2)
    cos = peripheral_cosets(ball, pair)
    words = [pair.presentation.format(w).replace("1", "") for w in ball.words]
    oracle = free_cosets_by_string(words, "a")
    assert sorted(len(c) for c in oracle) == sorted(len(c.vertices) for c in cos)
    # every coset meeting the ball gets a horoball, singletons included
    assert len(build_cusped(ball, cos, 1).horoballs) == len(oracle) == 9


def test_overlapping_cosets_rejected():
    ball = cayley_ball(free_pair(2), 1)
    bad = [PeripheralCoset(0, (0, 1), (), False, True, True), PeripheralCoset(0, (1, 2), (), False, True, True)]
    with pytest.raises(ModelingError):
        build_cusped(ball, bad, 1)


def test_census_totals():
    c = cusped_from_pair(free_pair(2), 2, 1)
    census = c.census()
    assert sum(v["vertices"] for v in census.values()) == c.n
    assert sum(v["verticalEdges"] + v["horizontalEdges"] for v in census.values()) == len(c.graph.edges)
    assert census["1"]["verticalEdges"] == 17
    assert c.to_dot().startswith("graph")


def test_default_depth():
    assert default_depth(4) == 4
    assert default_depth(1) == 2


def test_depth_one_lipschitz_and_key_translation():
    c = cusped_from_pair(free_pair(2), 3, 2)
    for u, v in c.graph.edges:
        assert abs(int(c.depth[u]) - int(c.depth[v])) <= 1
    for g in [(1,), (-2,), (2, 1)]:
        for u, v in c.graph.edges:
            a, b = c.translate(g, u), c.translate(g, v)
            if a is not None and b is not None:
                assert c.graph.has_edge(a, b)


@st.composite
def small_bases(draw):
    n = draw(st.integers(2, 10))
    kind = draw(st.sampled_from(["path", "cycle", "grid"]))
    if kind == "path":
        return path_graph(n)
    if kind == "cycle":
        return cycle_graph(max(n, 3))
    return grid_graph(2, n)


@settings(max_examples=40, deadline=None)
@given(small_bases(), st.integers(1, 4))
def test_horoball_invariants(base, D):
    h = build_horoball(base, D)
    n = base.n
    dist = h.graph.distance_matrix
    for m in range(D):
        for u in range(n):
            for v in range(u + 1, n):
                if h.graph.has_edge(h.vid(u, m), h.vid(v, m)):
                    assert h.graph.has_edge(h.vid(u, m + 1), h.vid(v, m + 1))
                assert dist[h.vid(u, m + 1), h.vid(v, m + 1)] <= dist[h.vid(u, m), h.vid(v, m)]
    for u, v in h.graph.edges:
        assert abs(h.depth(u) - h.depth(v)) <= 1


def test_profile_tree_with_point_horoball():
    tree = GroupPair.from_json({"generators": ["a", "b"], "peripherals": [["a"]]})
    c = cusped_from_pair(tree, 2, 2)
    assert hyperbolicity_profile(c, [0])[0].delta == 0


def test_profile_free_product_stable():
    # regression fixture: sampled delta of the cusped free group, seed 0
    c = cusped_from_pair(free_pair(2), 5, 3)
    rows = hyperbolicity_profile(c, [3, 4, 5], samples=5000, seed=0)
    assert [r.delta for r in rows] == [2, 2, 2]


def test_profile_abelian_grows():
    c = cusped_from_pair(GroupPair.from_json(Z2), 6, 0)
    rows = hyperbolicity_profile(c, [2, 4, 6], exhaustive_limit=10**6)
    values = [r.delta for r in rows]
    assert values[0] < values[1] < values[2]
    # box-shaped Z^2 windows of side 3, 4, 5 grow strictly too
    boxes = [thin_triangle_delta(grid_graph(n, n), exhaustive=True) for n in (3, 4, 5)]
    assert boxes[0] < boxes[1] < boxes[2]
