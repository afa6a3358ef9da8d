from fractions import Fraction
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cuspwork import _accel
from cuspwork.errors import DomainError, InputError
from cuspwork.graphcore import (
    Graph,
    bfs_distances,
    cycle_graph,
    edge_geodesic_fractions,
    geodesic_dag,
    geodesic_flow,
    grid_graph,
    path_graph,
    thin_triangle_delta,
)

from oracles import adjacency, edge_fractions_by_enumeration, thin_delta_by_enumeration


def random_tree(n, seed):
    rng = np.random.default_rng(seed)
    return Graph(n, [(i, int(rng.integers(0, i))) for i in range(1, n)])


@st.composite
def connected_graphs(draw, max_n=9):
    n = draw(st.integers(2, max_n))
    parents = [draw(st.integers(0, i - 1)) for i in range(1, n)]
    edges = {(p, i) for i, p in zip(range(1, n), parents)}
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=n))
    for u, v in extra:
        if u != v and (u, v) not in edges and (v, u) not in edges:
            edges.add((u, v))
    return Graph(n, sorted(edges))


def test_graph_rejects_loops_and_duplicates():
    with pytest.raises(InputError):
        Graph(2, [(0, 0)])
    with pytest.raises(InputError):
        Graph(2, [(0, 1), (1, 0)])


def test_adjacency_symmetric():
    g = grid_graph(3, 4)
    for v in range(g.n):
        for w in g.neighbors(v):
            assert v in g.neighbors(w)


def test_bfs_examples():
    assert bfs_distances(path_graph(3), 0) == {0: 0, 1: 1, 2: 2}
    assert bfs_distances(cycle_graph(4), 0)[2] == 2
    g = Graph(3, [(0, 1)])
    assert bfs_distances(g, 0) == {0: 0, 1: 1}
    with pytest.raises(InputError):
        bfs_distances(g, 7)


def test_numpy_and_numba_bfs_agree():
    g = grid_graph(6, 7)
    a = _accel.all_pairs_bfs_numpy(g.indptr, g.indices)
    if _accel.HAVE_NUMBA:
        b = _accel.all_pairs_bfs_numba(g.indptr, g.indices)
        assert np.array_equal(a, b)
    assert a[0, 41] == 11


def test_fractions_tree_unique_geodesic():
    g = random_tree(15, 3)
    fr = edge_geodesic_fractions(g, 4, 11)
    assert set(fr.values()) == {Fraction(1)}
    assert len(fr) == g.distance(4, 11)


def test_fractions_four_cycle():
    fr = edge_geodesic_fractions(cycle_graph(4), 0, 2)
    assert fr == {(0, 1): Fraction(1, 2), (1, 2): Fraction(1, 2), (0, 3): Fraction(1, 2), (3, 2): Fraction(1, 2)}


def test_fractions_grid_corners_match_enumeration():
    g = grid_graph(3, 3)
    expected = edge_fractions_by_enumeration(adjacency(g.n, g.edges), 0, 8)
    # frozen from the enumeration oracle: 6 monotone lattice paths, 3 leave via each first edge
    assert expected[(0, 1)] == Fraction(3, 6)
    assert expected[(0, 3)] == Fraction(3, 6)
    assert edge_geodesic_fractions(g, 0, 8) == expected
    assert geodesic_flow(g, 0, 8).total == 6


def test_disconnected_pair():
    with pytest.raises(DomainError):
        edge_geodesic_fractions(Graph(3, [(0, 1)]), 0, 2)


@settings(max_examples=60, deadline=None)
@given(connected_graphs(), st.data())
def test_fraction_invariants(g, data):
    x = data.draw(st.integers(0, g.n - 1))
    y = data.draw(st.integers(0, g.n - 1))
    flow = geodesic_flow(g, x, y)
    fr = flow.fractions()
    # layer sums equal one
    for k in range(flow.length):
        total = sum(c for (u, v), c in fr.items() if flow.dist_x[u] == k)
        assert total == 1
    # reversal symmetry
    back = edge_geodesic_fractions(g, y, x)
    assert back == {(v, u): c for (u, v), c in fr.items()}
    assert fr == edge_fractions_by_enumeration(adjacency(g.n, g.edges), x, y)


@settings(max_examples=40, deadline=None)
@given(connected_graphs(12))
def test_paths_from_recursion(g):
    dag = geodesic_dag(g, 0)
    assert dag.paths_from[0] == 1
    for v in range(1, g.n):
        assert dag.paths_from[v] == sum(dag.paths_from[u] for u in dag.predecessors(v))
    for t in range(g.n):
        pt = dag.paths_to(t)
        d = dag.dist[t]
        for k in range(d):
            crossing = sum(
                dag.paths_from[u] * pt[v]
                for u, v in dag.dag_edges
                if dag.dist[u] == k and v in pt and u in pt
            )
            assert crossing == dag.paths_from[t]


def test_thin_triangle_tree_zero():
    assert thin_triangle_delta(random_tree(12, 1), exhaustive=True) == 0


def test_thin_triangle_four_cycle():
    g = cycle_graph(4)
    oracle = thin_delta_by_enumeration(adjacency(4, g.edges), itertools.product(range(4), repeat=3))
    assert oracle == 1
    assert thin_triangle_delta(g, exhaustive=True) == 1


@pytest.mark.parametrize("n", [3, 4, 5])
def test_thin_triangle_grid_matches_oracle(n):
    g = grid_graph(n, n)
    oracle = thin_delta_by_enumeration(adjacency(g.n, g.edges), itertools.product(range(g.n), repeat=3))
    assert thin_triangle_delta(g, exhaustive=True) == oracle


def test_thin_triangle_grid_grows():
    # frozen from the enumeration oracle above
    values = [thin_triangle_delta(grid_graph(n, n), exhaustive=True) for n in (3, 4, 5)]
    assert values[0] < values[1] < values[2]


def test_thin_triangle_numpy_path_agrees():
    g = grid_graph(4, 4)
    dist = g.distance_matrix
    from cuspwork.graphcore import _canonical_paths

    triples = list(itertools.product(range(g.n), repeat=3))
    pair_id, paths, lengths = _canonical_paths(g, [(a, b) for a in range(g.n) for b in range(g.n)], dist)
    np_paths, np_lengths = _accel.lex_paths_numpy(
        g.indptr, g.indices, dist, np.array(sorted(pair_id), dtype=np.int64), paths.shape[1]
    )
    assert np.array_equal(np_paths, paths) and np.array_equal(np_lengths, lengths)
    ids = np.array([[pair_id[(x, y)], pair_id[(y, z)], pair_id[(z, x)]] for x, y, z in triples], dtype=np.int64)
    assert _accel.triangle_delta_numpy(dist, paths, lengths, ids) == thin_triangle_delta(g, exhaustive=True)


def test_thin_triangle_empty_sample():
    with pytest.raises(InputError):
        thin_triangle_delta(path_graph(3), samples=[])


def test_adjacency_text_roundtrip(tmp_path):
    g = grid_graph(2, 3)
    text = "# a comment\n" + g.to_adjacency_text()
    h = Graph.from_adjacency_text(text)
    assert h.edges == g.edges and h.n == g.n
    assert "--" in g.to_dot(depth=[0] * g.n)
