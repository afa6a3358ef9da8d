"""Finite simple graphs, exact geodesic counting and thin-triangle measurement."""
from __future__ import annotations

import itertools
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np

from . import _accel
from .errors import DomainError, InputError


class Graph:
    """Undirected simple graph on vertices ``0..n-1`` stored in CSR form.

    ``vertex_labels`` is an optional sequence of opaque tokens, and
    ``edge_labels`` maps a canonical edge ``(u, v)`` with ``u < v`` to a token.
    """

    def __init__(self, n: int, edges: Iterable[tuple[int, int]], vertex_labels=None, edge_labels=None):
        if n < 0:
            raise InputError("negative vertex count")
        canon = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise InputError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) outside vertex range 0..{n - 1}")
            e = (u, v) if u < v else (v, u)
            if e in canon:
                raise InputError(f"duplicate edge {e}")
            canon.add(e)
        self.n = n
        self.edges: list[tuple[int, int]] = sorted(canon)
        self.vertex_labels = list(vertex_labels) if vertex_labels is not None else None
        self.edge_labels = dict(edge_labels) if edge_labels else {}

        deg = np.zeros(n + 1, dtype=np.int64)
        for u, v in self.edges:
            deg[u + 1] += 1
            deg[v + 1] += 1
        self.indptr = np.cumsum(deg)
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        for row in nbrs:
            row.sort()
        self.indices = np.array([w for row in nbrs for w in row], dtype=np.int64)
        self._adj = [tuple(row) for row in nbrs]

    def __repr__(self):
        return f"Graph(n={self.n}, m={len(self.edges)})"

    def __len__(self):
        return self.n

    def __contains__(self, v):
        return isinstance(v, (int, np.integer)) and 0 <= v < self.n

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def check(self, v: int) -> None:
        if v not in self:
            raise InputError(f"unknown vertex id {v!r}")

    def subgraph(self, keep: Sequence[int]):
        """Full subgraph on ``keep``.  Returns ``(graph, old_to_new)``."""
        keep = sorted(set(int(v) for v in keep))
        index = {v: i for i, v in enumerate(keep)}
        edges = [(index[u], index[v]) for u, v in self.edges if u in index and v in index]
        labels = [self.vertex_labels[v] for v in keep] if self.vertex_labels else None
        elabels = {}
        for (u, v), lab in self.edge_labels.items():
            if u in index and v in index:
                a, b = index[u], index[v]
                elabels[(min(a, b), max(a, b))] = lab
        return Graph(len(keep), edges, labels, elabels), index

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        """All-pairs BFS distances, ``-1`` for unreachable pairs."""
        return _accel.all_pairs_bfs(self.indptr, self.indices)

    def bfs_array(self, sources) -> np.ndarray:
        return _accel.multi_source_bfs(self.indptr, self.indices, list(sources))

    def distance(self, u: int, v: int) -> int:
        if "distance_matrix" in self.__dict__:
            return int(self.distance_matrix[u, v])
        return int(self.bfs_array([u])[v])

    # -- interchange formats ------------------------------------------------

    def to_adjacency_text(self) -> str:
        lines = [f"# vertices {self.n}"]
        lines += [f"{u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_adjacency_text(cls, text: str) -> "Graph":
        edges = []
        n = 0
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "vertices":
                    n = max(n, int(parts[1]))
                continue
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise InputError(f"line {lineno}: expected 'u v', got {raw!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError as exc:
                raise InputError(f"line {lineno}: non-integer vertex id") from exc
            edges.append((u, v))
            n = max(n, u + 1, v + 1)
        return cls(n, edges)

    def to_dot(self, name="G", depth=None, labels=True) -> str:
        palette = ["black", "blue", "darkgreen", "orange", "red", "purple", "brown", "gray"]
        out = [f"graph {name} {{"]
        for v in range(self.n):
            attrs = []
            if labels and self.vertex_labels is not None:
                attrs.append(f'label="{_dot_escape(self.vertex_labels[v])}"')
            if depth is not None:
                d = int(depth[v])
                attrs.append(f'depth={d}')
                attrs.append(f'color="{palette[min(d, len(palette) - 1)]}"')
            out.append(f"  {v}" + (f" [{', '.join(attrs)}]" if attrs else "") + ";")
        for u, v in self.edges:
            lab = self.edge_labels.get((u, v))
            suffix = f' [label="{_dot_escape(lab)}"]' if lab is not None else ""
            out.append(f"  {u} -- {v}{suffix};")
        out.append("}")
        return "\n".join(out) + "\n"


def _dot_escape(token) -> str:
    return str(token).replace("\\", "\\\\").replace('"', '\\"')


def read_adjacency(path) -> Graph:
    return Graph.from_adjacency_text(Path(path).read_text(encoding="utf-8"))


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def grid_graph(rows: int, cols: int) -> Graph:
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return Graph(rows * cols, edges)


# --------------------------------------------------------------------------
# BFS and geodesic DAGs
# --------------------------------------------------------------------------

def bfs_distances(g: Graph, src: int) -> dict[int, int]:
    g.check(src)
    dist = g.bfs_array([src])
    return {v: int(d) for v, d in enumerate(dist) if d >= 0}


@dataclass
class GeodesicDag:
    """Geodesics out of ``source``: distance layers and exact path counts."""

    graph: Graph
    source: int
    dist: np.ndarray
    paths_from: dict[int, int] = field(repr=False)

    @property
    def dag_edges(self) -> list[tuple[int, int]]:
        d = self.dist
        return [
            (u, v)
            for a, b in self.graph.edges
            for u, v in ((a, b), (b, a))
            if d[u] >= 0 and d[v] == d[u] + 1
        ]

    def predecessors(self, v: int) -> list[int]:
        dv = self.dist[v]
        return [u for u in self.graph.neighbors(v) if self.dist[u] == dv - 1]

    def paths_to(self, target: int) -> dict[int, int]:
        """Number of geodesics from each vertex of the interval to ``target``."""
        interval, dt = _interval(self.graph, self.dist, target)
        return _count_paths(self.graph, interval, dt)


def geodesic_dag(g: Graph, src: int) -> GeodesicDag:
    g.check(src)
    dist = g.bfs_array([src])
    order = np.argsort(dist, kind="stable")
    counts: dict[int, int] = {}
    for v in order:
        v = int(v)
        dv = dist[v]
        if dv < 0:
            continue
        if dv == 0:
            counts[v] = 1
            continue
        counts[v] = sum(counts[u] for u in g.neighbors(v) if dist[u] == dv - 1)
    return GeodesicDag(g, src, dist, counts)


def _interval(g: Graph, dx: np.ndarray, y: int):
    dy = g.bfs_array([y])
    d = dx[y]
    interval = np.nonzero((dx >= 0) & (dx + dy == d))[0]
    return interval, dy


def _count_paths(g: Graph, interval, dist) -> dict[int, int]:
    """Path counts from the dist-0 vertex of ``interval`` along increasing ``dist``."""
    members = set(int(v) for v in interval)
    counts: dict[int, int] = {}
    for v in sorted(members, key=lambda v: dist[v]):
        dv = dist[v]
        if dv == 0:
            counts[v] = 1
        else:
            counts[v] = sum(counts[u] for u in g.neighbors(v) if u in members and dist[u] == dv - 1)
    return counts


@dataclass(frozen=True)
class GeodesicFlow:
    """Exact geodesic data between ``x`` and ``y``.

    ``through_edge[(u, v)]`` is the number of geodesics using the oriented
    edge ``u -> v``; ``total`` is the number of geodesics.
    """

    x: int
    y: int
    length: int
    total: int
    dist_x: dict[int, int]
    through_edge: dict[tuple[int, int], int]
    through_vertex: dict[int, int]

    def fractions(self) -> dict[tuple[int, int], Fraction]:
        return {e: Fraction(c, self.total) for e, c in self.through_edge.items()}


def geodesic_flow(g: Graph, x: int, y: int, dist_matrix: np.ndarray | None = None) -> GeodesicFlow:
    """Count geodesics through each vertex/edge of ``[x, y]`` by DAG dynamic programming."""
    g.check(x)
    g.check(y)
    if dist_matrix is not None:
        dx, dy = dist_matrix[x], dist_matrix[y]
    else:
        dx, dy = g.bfs_array([x]), g.bfs_array([y])
    d = int(dx[y])
    if d < 0:
        raise DomainError(f"vertices {x} and {y} lie in different components")
    interval = np.nonzero((dx >= 0) & (dy >= 0) & (dx + dy == d))[0]
    members = set(int(v) for v in interval)
    by_layer = sorted(members, key=lambda v: dx[v])
    pf: dict[int, int] = {}
    for v in by_layer:
        pf[v] = 1 if v == x else sum(pf[u] for u in g.neighbors(v) if u in members and dx[u] == dx[v] - 1)
    pt: dict[int, int] = {}
    for v in reversed(by_layer):
        pt[v] = 1 if v == y else sum(pt[w] for w in g.neighbors(v) if w in members and dx[w] == dx[v] + 1)
    through_edge = {}
    for u in by_layer:
        for w in g.neighbors(u):
            if w in members and dx[w] == dx[u] + 1:
                through_edge[(u, w)] = pf[u] * pt[w]
    through_vertex = {v: pf[v] * pt[v] for v in by_layer}
    return GeodesicFlow(x, y, d, pf[y], {v: int(dx[v]) for v in by_layer}, through_edge, through_vertex)


def edge_geodesic_fractions(g: Graph, x: int, y: int, dist_matrix=None) -> dict[tuple[int, int], Fraction]:
    """Fraction of ``x -> y`` geodesics through each oriented edge (exact)."""
    return geodesic_flow(g, x, y, dist_matrix).fractions()


def lex_least_geodesic(g: Graph, x: int, y: int, dist_to_y: np.ndarray | None = None) -> list[int]:
    if dist_to_y is None:
        dist_to_y = g.bfs_array([y])
    if dist_to_y[x] < 0:
        raise DomainError(f"vertices {x} and {y} lie in different components")
    path = [x]
    cur = x
    while cur != y:
        want = dist_to_y[cur] - 1
        cur = next(w for w in g.neighbors(cur) if dist_to_y[w] == want)
        path.append(cur)
    return path


# --------------------------------------------------------------------------
# thin triangles
# --------------------------------------------------------------------------

def _canonical_paths(g: Graph, pairs: Sequence[tuple[int, int]], dist: np.ndarray):
    """Lexicographically least geodesics for ``pairs``; returns ``(pair_id, paths, lengths)``."""
    pairs = sorted(set(pairs))
    pair_id = {p: i for i, p in enumerate(pairs)}
    arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    if len(pairs):
        d = dist[arr[:, 0], arr[:, 1]]
        if d.min() < 0:
            raise DomainError("sampled vertices are not pairwise connected")
        maxlen = int(d.max()) + 1
    else:
        maxlen = 1
    paths, lengths = _accel.lex_paths(g.indptr, g.indices, dist, arr, maxlen)
    return pair_id, paths, lengths


def thin_triangle_delta(g: Graph, samples=None, exhaustive: bool = False, vertices=None) -> Fraction:
    """Largest distance from a point of one canonical side to the other two sides.

    Sides are lexicographically least geodesics, so the value is deterministic.
    Pass ``samples`` as a list of vertex triples, or ``exhaustive=True`` to
    scan every ordered triple of ``vertices`` (default: all vertices).
    """
    if exhaustive:
        pool = list(range(g.n)) if vertices is None else sorted(set(vertices))
        if not pool:
            raise InputError("empty sample")
        triples = None
    else:
        if not samples:
            raise InputError("empty sample")
        triples = [tuple(int(v) for v in t) for t in samples]
        for t in triples:
            if len(t) != 3:
                raise InputError(f"triangle sample {t!r} is not a triple")
            for v in t:
                g.check(v)
        pool = sorted({v for t in triples for v in t})
    dist = g.distance_matrix
    if triples is None:
        triples = list(itertools.product(pool, repeat=3))
    pairs = {(a, b) for x, y, z in triples for a, b in ((x, y), (y, z), (z, x))}
    pair_id, paths, lengths = _canonical_paths(g, pairs, dist)
    arr = np.array(
        [[pair_id[(x, y)], pair_id[(y, z)], pair_id[(z, x)]] for x, y, z in triples], dtype=np.int64
    )
    return Fraction(_accel.triangle_delta(dist, paths, lengths, arr))
