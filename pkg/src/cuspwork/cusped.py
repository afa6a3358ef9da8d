"""Combinatorial horoballs glued onto Cayley balls, with depth bookkeeping.

Vertices of a cusped space carry symbolic keys ``(word, peripheral, level)``:
base vertices are ``(word, -1, 0)`` and the level-``m`` copy of ``word``
in the horoball over its ``P_i``-coset is ``(word, i, m)``.  Cosets of one
peripheral family are disjoint, so keys are unique and the group acts on
them by left multiplication of ``word``.
"""
from __future__ import annotations

import math
import random
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InputError, ModelingError
from .graphcore import Graph, thin_triangle_delta
from .grouppair import CayleyBall, GroupPair, PeripheralCoset, Word, cayley_ball, inverse, peripheral_cosets

Key = tuple[Word, int, int]


def horizontal_pairs(vertices: Sequence[int], metric: Callable[[int, int], int], D: int):
    """``{m: [(u, v), ...]}`` for levels ``1..D`` with ``metric(u, v) <= 2**m``."""
    out: dict[int, list[tuple[int, int]]] = {m: [] for m in range(1, D + 1)}
    vs = list(vertices)
    for a in range(len(vs)):
        for b in range(a + 1, len(vs)):
            d = metric(vs[a], vs[b])
            if d <= 0:
                raise ModelingError("coset metric must be positive between distinct vertices")
            first = max(1, math.ceil(math.log2(d))) if d > 1 else 1
            for m in range(first, D + 1):
                out[m].append((vs[a], vs[b]))
    return out


@dataclass
class Horoball:
    """Standalone horoball over a graph Γ; vertex ``(v, m)`` has id ``m * n + v``."""

    base: Graph
    max_depth: int
    graph: Graph
    exact: bool

    def vid(self, v: int, m: int) -> int:
        return m * self.base.n + v

    def depth(self, vid: int) -> int:
        return vid // self.base.n


def build_horoball(gamma: Graph, D: int, metric: Callable[[int, int], int] | None = None) -> Horoball:
    if D < 0:
        raise InputError("horoball depth must be non-negative")
    n = gamma.n
    exact = metric is not None
    if metric is None:
        dist = gamma.distance_matrix

        def metric(u, v):
            d = int(dist[u, v])
            return d if d >= 0 else 10**9

    edges = list(gamma.edges)
    tags = {e: "horizontal" for e in edges}
    for m in range(1, D + 1):
        for v in range(n):
            e = ((m - 1) * n + v, m * n + v)
            edges.append(e)
            tags[e] = "vertical"
    for m, pairs in horizontal_pairs(range(n), metric, D).items():
        for u, v in pairs:
            e = (m * n + u, m * n + v)
            edges.append(e)
            tags[e] = "horizontal"
    labels = [(v, m) for m in range(D + 1) for v in range(n)]
    return Horoball(gamma, D, Graph(n * (D + 1), edges, labels, tags), exact)


@dataclass
class HoroballInfo:
    peripheral: int
    base_vertices: tuple[int, ...]
    clipped: bool
    approximate: bool


@dataclass
class CuspedSpace:
    ball: CayleyBall
    max_depth: int
    graph: Graph
    keys: list[Key]
    depth: np.ndarray
    horoballs: list[HoroballInfo]
    edge_tags: dict[tuple[int, int], str]
    index: dict[Key, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {k: i for i, k in enumerate(self.keys)}

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def approximate(self) -> bool:
        return any(h.approximate for h in self.horoballs)

    @property
    def pair(self) -> GroupPair:
        return self.ball.pair

    def base_vertices(self) -> list[int]:
        return [v for v in range(self.n) if self.depth[v] == 0]

    def base_length(self, v: int) -> int:
        """Word length of the base point below ``v``."""
        return len(self.keys[v][0]) if self.pair.group.exact_metric() else self.ball.word_length(
            self.ball.index[self.keys[v][0]]
        )

    def translate(self, g: Word, v: int) -> int | None:
        w, i, m = self.keys[v]
        return self.index.get((self.pair.group.mul(g, w), i, m))

    def label(self, v: int) -> str:
        w, i, m = self.keys[v]
        word = self.pair.presentation.format(w)
        return word if i < 0 else f"{word}|P{i}|{m}"

    def census(self) -> dict:
        out: dict[int, dict[str, int]] = {
            m: {"vertices": 0, "verticalEdges": 0, "horizontalEdges": 0} for m in range(self.max_depth + 1)
        }
        for v in range(self.n):
            out[int(self.depth[v])]["vertices"] += 1
        for (u, v), tag in self.edge_tags.items():
            m = int(max(self.depth[u], self.depth[v]))
            out[m]["verticalEdges" if tag == "vertical" else "horizontalEdges"] += 1
        return {str(m): c for m, c in out.items()}

    def to_dot(self, name: str = "cusped") -> str:
        labelled = Graph(self.n, self.graph.edges, [self.label(v) for v in range(self.n)])
        return labelled.to_dot(name, depth=[int(d) for d in self.depth])

    def subspace(self, keep: Sequence[int], max_depth: int | None = None) -> "CuspedSpace":
        g, old_to_new = self.graph.subgraph(keep)
        order = sorted(old_to_new, key=old_to_new.get)
        keys = [self.keys[v] for v in order]
        depth = self.depth[order]
        tags = {}
        for (u, v), t in self.edge_tags.items():
            if u in old_to_new and v in old_to_new:
                a, b = old_to_new[u], old_to_new[v]
                tags[(min(a, b), max(a, b))] = t
        md = self.max_depth if max_depth is None else max_depth
        return CuspedSpace(self.ball, md, g, keys, depth, self.horoballs, tags)

    def truncate(self, R: int) -> "CuspedSpace":
        """Full subgraph on vertices of depth at most ``R``."""
        if not 0 <= R <= self.max_depth:
            raise InputError(f"truncation depth {R} outside 0..{self.max_depth}")
        if R == self.max_depth:
            return self
        return self.subspace([v for v in range(self.n) if self.depth[v] <= R], R)

    def sub_ball(self, r: int) -> "CuspedSpace":
        """Vertices whose base point has word length at most ``r``."""
        return self.subspace([v for v in range(self.n) if self.base_length(v) <= r])


def default_depth(ball_radius: int) -> int:
    diameter = 2 * ball_radius
    return (math.ceil(math.log2(diameter)) if diameter > 1 else 0) + 1


def coset_metric(pair: GroupPair, ball: CayleyBall):
    grp = pair.group
    if not grp.exact_metric():
        return None

    def metric(u, v):
        return len(grp.nf(inverse(ball.words[u]) + ball.words[v]))

    return metric


def build_cusped(
    ball: CayleyBall, cosets: list[PeripheralCoset] | None = None, D: int | None = None
) -> CuspedSpace:
    pair = ball.pair
    if cosets is None:
        cosets = peripheral_cosets(ball, pair)
    if D is None:
        D = default_depth(ball.radius)
    if D < 0:
        raise InputError("depth must be non-negative")
    seen: dict[int, set[int]] = {}
    for c in cosets:
        used = seen.setdefault(c.peripheral, set())
        if used & set(c.vertices):
            raise ModelingError(f"overlapping cosets in peripheral family {c.peripheral}")
        used |= set(c.vertices)
    keys: list[Key] = [(w, -1, 0) for w in ball.words]
    edges = list(ball.graph.edges)
    tags = {e: "horizontal" for e in edges}
    metric = coset_metric(pair, ball)
    infos = []
    for c in cosets:
        if metric is None:
            sub, old_to_new = ball.graph.subgraph(c.vertices)
            dist = sub.distance_matrix

            def cmetric(u, v, dist=dist, m=old_to_new):
                d = int(dist[m[u], m[v]])
                return d if d >= 0 else 10**9

            approx = c.clipped or not c.connected
        else:
            cmetric = metric
            approx = False
        infos.append(HoroballInfo(c.peripheral, c.vertices, c.clipped, approx))
        level_ids: dict[tuple[int, int], int] = {(v, 0): v for v in c.vertices}
        for m in range(1, D + 1):
            for v in c.vertices:
                level_ids[(v, m)] = len(keys)
                keys.append((ball.words[v], c.peripheral, m))
                e = (level_ids[(v, m - 1)], level_ids[(v, m)])
                edges.append(e)
                tags[e] = "vertical"
        for m, pairs in horizontal_pairs(c.vertices, cmetric, D).items():
            for u, v in pairs:
                a, b = level_ids[(u, m)], level_ids[(v, m)]
                edges.append((a, b))
                tags[(min(a, b), max(a, b))] = "horizontal"
    depth = np.array([k[2] for k in keys], dtype=np.int64)
    graph = Graph(len(keys), edges)
    tags = {(min(u, v), max(u, v)): t for (u, v), t in tags.items()}
    return CuspedSpace(ball, D, graph, keys, depth, infos, tags)


def cusped_from_pair(pair: GroupPair, ball_radius: int, D: int | None = None, truncate_at: int | None = None):
    ball = cayley_ball(pair, ball_radius)
    cusp = build_cusped(ball, None, D)
    return cusp if truncate_at is None else cusp.truncate(truncate_at)


@dataclass
class ProfileRow:
    radius: int
    vertices: int
    delta: Fraction
    triples: int
    exhaustive: bool


def hyperbolicity_profile(
    cusp: CuspedSpace, radii: Sequence[int], samples: int = 20000, seed: int = 0, exhaustive_limit: int = 300_000
) -> list[ProfileRow]:
    """Thin-triangle constant of nested sub-balls of a cusped space."""
    rows = []
    for r in radii:
        if not 0 <= r <= cusp.ball.radius:
            raise InputError(f"radius {r} outside the ball")
        sub = cusp.sub_ball(r)
        n = sub.n
        if n**3 <= exhaustive_limit:
            delta = thin_triangle_delta(sub.graph, exhaustive=True)
            rows.append(ProfileRow(r, n, delta, n**3, True))
        else:
            rng = random.Random(seed)
            triples = [tuple(rng.randrange(n) for _ in range(3)) for _ in range(samples)]
            delta = thin_triangle_delta(sub.graph, samples=triples)
            rows.append(ProfileRow(r, n, delta, len(triples), False))
    return rows
