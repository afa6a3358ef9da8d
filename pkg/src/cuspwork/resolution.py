"""Resolutions of the bicombing to quotient 2-complexes and the bound experiments.

A quotient complex is a :class:`TwoComplex` whose edges carry holonomy words:
the representative lift of edge ``e`` runs from the representative lift of
its tail to ``hol(e)`` times the representative lift of its head.  A vertex
map assigns a cusped-space key to each representative vertex lift, so the
map on the universal cover is equivariant by construction.
"""
from __future__ import annotations

import math
from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .bicombing import BicombingTable, Chain1
from .cusped import CuspedSpace, Key
from .errors import BallMarginError, BudgetExceeded, InputError, PropertyViolation
from .grouppair import Group, GroupPair, SubgroupRecord, Word, inverse
from .patterns import (
    Connector,
    Pattern,
    Segment,
    TwoComplex,
    _edge_index,
    place_singular,
    segments_meet,
    tracks,
    validate,
    weight_total,
)

# --------------------------------------------------------------------------
# quotient complexes
# --------------------------------------------------------------------------


@dataclass
class QuotientComplex:
    complex: TwoComplex
    vertex_info: list[tuple[int, int]]  # (vertex of the base complex, coset)
    index: int
    kind: str
    subgroup: SubgroupRecord | None = None

    @property
    def volume(self) -> int:
        return self.complex.volume


def presentation_complex(pair: GroupPair, kind: str = "wedge") -> QuotientComplex:
    """Simplicial model of the presentation complex.

    ``wedge`` subdivides each generator loop into a 4-cycle (holonomy on the
    last edge) and cones every relator cell from a new centre vertex;
    ``fins`` additionally glues a collapsible triangle onto every edge.
    For a free group ``wedge`` is the subdivided wedge of circles.
    """
    if kind not in ("wedge", "fins"):
        raise InputError(f"unknown complex kind {kind!r}")
    grp = pair.group
    k = grp.rank
    nv = 1
    edges: list[tuple[int, int]] = []
    hol: list[Word] = []
    loop_edges: list[list[int]] = []
    for i in range(1, k + 1):
        a, b, c = nv, nv + 1, nv + 2
        nv += 3
        ids = []
        for u, v, h in ((0, a, ()), (a, b, ()), (b, c, ()), (c, 0, (i,))):
            ids.append(len(edges))
            edges.append((u, v))
            hol.append(h)
        loop_edges.append(ids)
    triangles: list[tuple[int, int, int]] = []
    for r in pair.presentation.relators:
        walk: list[int] = []
        for x in r:
            ids = loop_edges[abs(x) - 1]
            walk += [t + 1 for t in ids] if x > 0 else [-(t + 1) for t in reversed(ids)]
        centre = nv
        nv += 1
        spokes = []
        prefix: Word = ()
        cx0 = TwoComplex(nv, edges, [], hol)
        for tok in walk:
            spokes.append(len(edges))
            edges.append((centre, cx0.tail(tok)))
            hol.append(grp.nf(prefix))
            cx0 = TwoComplex(nv, edges, [], hol)
            prefix = grp.nf(prefix + cx0.edge_holonomy(tok))
        if prefix != ():
            raise PropertyViolation("relator is not trivial in the group", witness=pair.presentation.format(r))
        n = len(walk)
        for j, tok in enumerate(walk):
            triangles.append((spokes[j] + 1, tok, -(spokes[(j + 1) % n] + 1)))
    if kind == "fins":
        for e in range(len(edges)):
            u, v = edges[e]
            apex = nv
            nv += 1
            e1 = len(edges)
            edges.append((u, apex))
            hol.append(())
            e2 = len(edges)
            edges.append((apex, v))
            hol.append(hol[e])
            triangles.append((e + 1, -(e2 + 1), -(e1 + 1)))
    cx = TwoComplex(nv, edges, triangles, hol, name=kind)
    bad = cx.check_holonomy(grp.nf)
    if bad:
        raise PropertyViolation("triangle holonomy is not trivial", witness=bad)
    return QuotientComplex(cx, [(v, 0) for v in range(nv)], 1, kind)


def cover_complex(base: QuotientComplex, H: SubgroupRecord, grp: Group) -> QuotientComplex:
    """The ``[G:H]``-fold cover of a base quotient complex, from a coset table."""
    cx = base.complex
    reps = [grp.nf(w) for w in H.coset_words()]
    n = H.index
    vid = {(v, c): v * n + c for v in range(cx.n_vertices) for c in range(n)}
    edges, hol = [], []
    eid: dict[tuple[int, int], int] = {}
    for e, (u, v) in enumerate(cx.edges):
        h = cx.holonomy[e] if cx.holonomy is not None else ()
        for c in range(n):
            c2 = H.trace(c, h)
            eid[(e, c)] = len(edges)
            edges.append((vid[(u, c)], vid[(v, c2)]))
            hol.append(grp.nf(reps[c] + h + inverse(reps[c2])))
    tris = []
    for tri in cx.triangles:
        for c in range(n):
            cur = c
            sides = []
            for tok in tri:
                h = cx.edge_holonomy(tok)
                nxt = H.trace(cur, h)
                e = _edge_index(tok)
                sides.append(eid[(e, cur)] + 1 if tok > 0 else -(eid[(e, nxt)] + 1))
                cur = nxt
            tris.append(tuple(sides))
    info = [(v, c) for v in range(cx.n_vertices) for c in range(n)]
    cover = TwoComplex(cx.n_vertices * n, edges, tris, hol, name=f"{cx.name}-cover{n}")
    if cover.check_holonomy(grp.nf):
        raise PropertyViolation("cover triangle holonomy is not trivial", witness=H.label)
    for e, w in enumerate(hol):
        if not H.contains(w):
            raise PropertyViolation("cover edge holonomy lies outside the subgroup", witness=e)
    return QuotientComplex(cover, info, n, base.kind, H)


# --------------------------------------------------------------------------
# vertex maps and the cusped context
# --------------------------------------------------------------------------


class CuspContext:
    """A cusped ball with its bicombing table and symbolic translations."""

    def __init__(self, cusp: CuspedSpace, table: BicombingTable | None = None):
        self.cusp = cusp
        self.table = table or BicombingTable(cusp.graph)
        self.group = cusp.pair.group

    @property
    def dist(self) -> np.ndarray:
        return self.table.dist

    def mulkey(self, g: Word, key: Key) -> Key:
        w, i, m = key
        return (self.group.mul(g, w), i, m)

    def locate(self, key: Key, what: str = "vertex") -> int:
        v = self.cusp.index.get(key)
        if v is None:
            need = len(key[0]) - self.cusp.ball.radius
            raise BallMarginError(f"{what} {key} lies outside the cusped ball; increase radius", required_margin=need)
        return v

    def edge_depth(self, f: tuple[int, int]) -> int:
        return int(max(self.cusp.depth[f[0]], self.cusp.depth[f[1]]))

    def tie_key(self, f: tuple[int, int]):
        return (self.edge_depth(f), min(f), max(f))


@dataclass
class VertexMap:
    images: list[Key]
    frozen: frozenset[int] = frozenset()

    def copy(self) -> "VertexMap":
        return VertexMap(list(self.images), self.frozen)


def initial_map(qc: QuotientComplex, grp: Group) -> VertexMap:
    """Every vertex ``(v, c)`` goes to the depth-0 vertex of its coset representative."""
    reps = qc.subgroup.coset_words() if qc.subgroup is not None else [()]
    return VertexMap([(grp.nf(reps[c]), -1, 0) for _, c in qc.vertex_info])


def edge_endpoints(cx: TwoComplex, phi: VertexMap, ctx: CuspContext, e: int) -> tuple[int, int]:
    u, v = cx.edges[e]
    hol = cx.holonomy[e] if cx.holonomy is not None else ()
    a = ctx.locate(phi.images[u], "edge tail")
    b = ctx.locate(ctx.mulkey(hol, phi.images[v]), "edge head")
    return a, b


def total_displacement(cx: TwoComplex, phi: VertexMap, ctx: CuspContext) -> int:
    total = 0
    for e in range(len(cx.edges)):
        a, b = edge_endpoints(cx, phi, ctx, e)
        d = int(ctx.dist[a, b])
        if d < 0:
            raise BallMarginError("edge endpoints are disconnected in the truncation")
        total += d
    return total


@dataclass
class MinimizeResult:
    phi: VertexMap
    certificate: bool
    sweeps: int
    displacement: int


def minimize_displacement(cx: TwoComplex, phi0: VertexMap, ctx: CuspContext, budget: int = 50) -> MinimizeResult:
    """Deterministic sweep moving images to strictly better cusped neighbours."""
    phi = phi0.copy()
    incident: dict[int, list[int]] = {v: [] for v in range(cx.n_vertices)}
    for e, (u, v) in enumerate(cx.edges):
        incident[u].append(e)
        if v != u:
            incident[v].append(e)

    def local_cost(v: int) -> int | None:
        cost = 0
        for e in incident[v]:
            try:
                a, b = edge_endpoints(cx, phi, ctx, e)
            except BallMarginError:
                return None
            d = int(ctx.dist[a, b])
            if d < 0:
                return None
            cost += d
        return cost

    current = total_displacement(cx, phi, ctx)
    sweeps = 0
    certificate = False
    while sweeps < budget:
        sweeps += 1
        changed = False
        for v in range(cx.n_vertices):
            if v in phi.frozen:
                continue
            here = local_cost(v)
            best, best_key = here, None
            home = ctx.locate(phi.images[v])
            original = phi.images[v]
            for w in ctx.cusp.graph.neighbors(home):
                phi.images[v] = ctx.cusp.keys[w]
                c = local_cost(v)
                if c is not None and c < best:
                    best, best_key = c, ctx.cusp.keys[w]
            phi.images[v] = original
            if best_key is not None:
                phi.images[v] = best_key
                current -= here - best
                changed = True
        if not changed:
            certificate = True
            break
    return MinimizeResult(phi, certificate, sweeps, current)


# --------------------------------------------------------------------------
# resolve
# --------------------------------------------------------------------------


@dataclass
class RegularInfo:
    edge: int
    f: tuple[int, int]  # oriented cusped edge (ids) in the edge's representative frame
    coefficient: Fraction
    key: int  # d(phi(e_-), f)


@dataclass
class Resolution:
    qc: QuotientComplex
    phi: VertexMap
    ctx: CuspContext
    pattern: Pattern
    per_edge: dict[int, list[int]]  # edge -> connector ids in order along the edge
    regular: dict[int, RegularInfo]
    singular_partner: dict[int, int]
    side_shift: dict[tuple[int, int], Word]  # (triangle, side) -> translation into the triangle frame
    endpoints: dict[int, tuple[int, int]]

    @property
    def complex(self) -> TwoComplex:
        return self.qc.complex

    def depth_of(self, cid: int) -> int:
        if cid in self.regular:
            return self.ctx.edge_depth(self.regular[cid].f)
        return self.depth_of(self.singular_partner[cid])

    def filtered(self, R: int) -> Pattern:
        """Connectors induced by cusped edges of depth at most ``R``."""
        keep = {c.id for c in self.pattern.connectors if self.depth_of(c.id) <= R}
        cons = [c for c in self.pattern.connectors if c.id in keep]
        segs = [s for s in self.pattern.segments if s.a in keep and s.b in keep]
        return Pattern(self.pattern.complex, cons, segs, reduced=True)

    def edge_keys(self, f: tuple[int, int]) -> tuple[Key, Key]:
        return self.ctx.cusp.keys[f[0]], self.ctx.cusp.keys[f[1]]


def _side_shifts(cx: TwoComplex, grp: Group) -> dict[tuple[int, int], Word]:
    out = {}
    for t, tri in enumerate(cx.triangles):
        prefix: Word = ()
        corner = []
        for tok in tri:
            corner.append(prefix)
            prefix = grp.nf(prefix + cx.edge_holonomy(tok))
        corner.append(prefix)
        for j, tok in enumerate(tri):
            out[(t, j)] = corner[j] if tok > 0 else corner[j + 1]
    return out


def edge_chain(cx: TwoComplex, phi: VertexMap, ctx: CuspContext, e: int) -> tuple[tuple[int, int], Chain1]:
    a, b = edge_endpoints(cx, phi, ctx, e)
    return (a, b), ctx.table.q(a, b)


def resolve(qc: QuotientComplex, phi: VertexMap, ctx: CuspContext, margin: int = 0) -> Resolution:
    """Connectors from supports of ``q(e)``, segments matched per triangle."""
    cx = qc.complex
    grp = ctx.group
    radius = ctx.cusp.ball.radius
    cons: list[Connector] = []
    per_edge: dict[int, list[int]] = {}
    regular: dict[int, RegularInfo] = {}
    endpoints = {}
    lookup: dict[tuple[int, tuple[int, int]], int] = {}
    for e in range(len(cx.edges)):
        (a, b), q = edge_chain(cx, phi, ctx, e)
        endpoints[e] = (a, b)
        touched = q.support_vertices() | {a, b}
        worst = max(ctx.cusp.base_length(v) for v in touched)
        if worst > radius - max(margin, 1):
            raise BallMarginError(
                f"support of q(e{e}) reaches the ball boundary; increase radius",
                required_margin=worst - radius + max(margin, 1),
            )
        da = ctx.dist[a]
        items = []
        for f, c in q.oriented_support():
            items.append((min(int(da[f[0]]), int(da[f[1]])), ctx.tie_key(f), f, c))
        items.sort(key=lambda it: (it[0], it[1]))
        ids = []
        for i, (key, _, f, c) in enumerate(items):
            cid = len(cons)
            cons.append(Connector(cid, "regular", c, edge=e, position=Fraction(i + 1, len(items) + 1),
                                  tag=(e, f[0], f[1], ctx.edge_depth(f))))
            regular[cid] = RegularInfo(e, f, c, key)
            lookup[(e, f)] = cid
            ids.append(cid)
        per_edge[e] = ids
    shifts = _side_shifts(cx, grp)
    segs: list[Segment] = []
    singular_partner: dict[int, int] = {}
    singular_plan: list[tuple[int, int, int]] = []  # (triangle, side, regular cid)
    for t, tri in enumerate(cx.triangles):
        occur: dict[frozenset, list[tuple[int, int, int]]] = {}
        for j, tok in enumerate(tri):
            e = _edge_index(tok)
            h = shifts[(t, j)]
            for cid in per_edge[e]:
                f = regular[cid].f
                ku, kv = ctx.mulkey(h, ctx.cusp.keys[f[0]]), ctx.mulkey(h, ctx.cusp.keys[f[1]])
                sign = 1 if tok > 0 else -1
                head = kv if sign > 0 else ku  # head of f along the side direction
                occur.setdefault(frozenset((ku, kv)), []).append((j, cid, head))
        for ent in occur.values():
            if len(ent) == 2 and ent[0][0] != ent[1][0] and ent[0][2] != ent[1][2]:
                (j1, c1, _), (j2, c2, _) = sorted(ent)
                segs.append(Segment(len(segs), c1, c2, t, (j1, j2)))
            else:
                for j, cid, _ in sorted(ent):
                    singular_plan.append((t, j, cid))
    eps = Fraction(1, 4)
    base_segments = list(segs)
    while True:
        extra, segs = [], list(base_segments)
        singular_partner = {}
        for t, j, cid in singular_plan:
            sid = len(cons) + len(extra)
            pt = place_singular(cx, t, j, cons[cid].position, eps)
            extra.append(Connector(sid, "singular", Fraction(0), triangle=t, point=pt))
            segs.append(Segment(len(segs), cid, sid, t, (j, None)))
            singular_partner[sid] = cid
        pattern = Pattern(cx, cons + extra, segs)
        report = validate(pattern)
        if report.valid:
            break
        if not report.conditions["2"]["ok"] and eps > Fraction(1, 2**40):
            eps /= 2
            continue
        raise PropertyViolation("resolution pattern is not valid", witness=report.failures())
    return Resolution(qc, phi, ctx, pattern, per_edge, regular, singular_partner, shifts, endpoints)


# --------------------------------------------------------------------------
# axiom checks
# --------------------------------------------------------------------------


@dataclass
class ResolutionReport:
    r1: bool
    r3_violations: list
    r3_delta: int
    r4: bool
    r5: bool
    pattern_valid: bool

    @property
    def exact_ok(self) -> bool:
        return self.r1 and self.r4 and self.r5 and self.pattern_valid


def check_resolution(res: Resolution, delta: int = 0) -> ResolutionReport:
    """R1/R4/R5 exactly (raising on failure) and R3 for key gaps above ``delta``."""
    cx, ctx = res.complex, res.ctx
    for e in range(len(cx.edges)):
        a, b = res.endpoints[e]
        back = ctx.table.compute(b, a)
        fwd = ctx.table.compute(a, b)
        if back != -fwd:
            raise PropertyViolation("q(-e) differs from -q(e)", witness=e)
        got = {res.regular[c].f for c in res.per_edge[e]}
        if {(y, x) for (x, y), _ in back.oriented_support()} != got:
            raise PropertyViolation("R1: connectors of -e do not match reversed support", witness=e)
        for cid in res.per_edge[e]:
            info = res.regular[cid]
            if res.pattern.connector(cid).weight != fwd.coefficient(*info.f):
                raise PropertyViolation("R4: connector weight differs from coefficient", witness=(e, cid))
    r3 = []
    for e, ids in res.per_edge.items():
        a, b = res.endpoints[e]
        for i in range(len(ids)):
            for j in range(len(ids)):
                ci, cj = res.regular[ids[i]], res.regular[ids[j]]
                pi, pj = res.pattern.connector(ids[i]).position, res.pattern.connector(ids[j]).position
                if ci.key < cj.key - delta and not pi < pj:
                    r3.append((e, ids[i], ids[j], "forward"))
                # the same edge read from its head
                ki = min(int(ctx.dist[b, ci.f[0]]), int(ctx.dist[b, ci.f[1]]))
                kj = min(int(ctx.dist[b, cj.f[0]]), int(ctx.dist[b, cj.f[1]]))
                if ki < kj - delta and not pi > pj:
                    r3.append((e, ids[i], ids[j], "backward"))
    _check_r5(res)
    return ResolutionReport(True, r3, delta, True, True, validate(res.pattern).valid)


def resolution_spread(res: Resolution) -> int:
    """Largest geodesic spread of ``q`` over the edge images; the R3 tolerance."""
    return max((res.ctx.table.geodesic_spread(a, b) for a, b in res.endpoints.values()), default=0)


def _check_r5(res: Resolution) -> None:
    cx, ctx = res.complex, res.ctx
    seg_pairs = {}
    for s in res.pattern.segments:
        if s.a in res.regular and s.b in res.regular:
            seg_pairs[(s.triangle, frozenset(((s.a, s.sides[0]), (s.b, s.sides[1]))))] = s
    for t, tri in enumerate(cx.triangles):
        supports = []
        for j, tok in enumerate(tri):
            a, b = res.endpoints[_edge_index(tok)]
            q = ctx.table.compute(a, b) if tok > 0 else ctx.table.compute(b, a)
            h = res.side_shift[(t, j)]
            sup = set()
            for f, _ in q.oriented_support():
                sup.add((ctx.mulkey(h, ctx.cusp.keys[f[0]]), ctx.mulkey(h, ctx.cusp.keys[f[1]])))
            supports.append(sup)
        ends = [(cid, j) for j, tok in enumerate(tri) for cid in res.per_edge[_edge_index(tok)]]
        for x in range(len(ends)):
            for y in range(x + 1, len(ends)):
                (c1, j1), (c2, j2) = ends[x], ends[y]
                if j1 == j2:
                    continue
                f1 = _side_oriented(res, t, j1, c1)
                f2 = _side_oriented(res, t, j2, c2)
                third = 3 - j1 - j2
                rev = (f1[1], f1[0])
                expected = f2 == rev and f1 not in supports[third] and rev not in supports[third] \
                    and f1 in supports[j1] and rev in supports[j2]
                actual = (t, frozenset(((c1, j1), (c2, j2)))) in seg_pairs
                if expected != actual:
                    raise PropertyViolation("R5 matching fails", witness={"triangle": t, "connectors": (c1, c2)})


def _side_oriented(res: Resolution, t: int, j: int, cid: int) -> tuple[Key, Key]:
    """Connector's cusped edge in the triangle frame, oriented along side ``j``."""
    ctx = res.ctx
    tok = res.complex.triangles[t][j]
    f = res.regular[cid].f
    h = res.side_shift[(t, j)]
    ku, kv = ctx.mulkey(h, ctx.cusp.keys[f[0]]), ctx.mulkey(h, ctx.cusp.keys[f[1]])
    return (ku, kv) if tok > 0 else (kv, ku)


@dataclass
class TrackReport:
    tracks: int
    t1: bool
    t2: bool
    t3_finite: bool
    t4: int
    t4_pairs: int
    t4_skipped: int
    developed_states: int


def track_checks(res: Resolution, budget: int = 100_000) -> TrackReport:
    """Develop each track into the universal cover and check T1-T4."""
    ctx, cx, p = res.ctx, res.complex, res.pattern
    grp = ctx.group
    by_conn: dict[int, list[Segment]] = {}
    for s in p.segments:
        by_conn.setdefault(s.a, []).append(s)
        by_conn.setdefault(s.b, []).append(s)
    trk = tracks(p)
    states = 0
    for tid, members in trk.items():
        start = next((c for c in members if c in res.regular), None)
        if start is None:
            continue
        f0 = res.regular[start].f
        target = frozenset(res.edge_keys(f0))
        seen = {(start, ())}
        on_edge: dict[tuple[int, Word], int] = {(res.regular[start].edge, ()): start}
        queue = deque([(start, ())])
        while queue:
            cid, g = queue.popleft()
            states += 1
            if states > budget:
                raise BudgetExceeded("track development exceeded its budget")
            for s in by_conn.get(cid, []):
                other, side_here, side_there = (s.b, s.sides[0], s.sides[1]) if s.a == cid else (s.a, s.sides[1], s.sides[0])
                if other not in res.regular:
                    continue
                hj = res.side_shift[(s.triangle, side_here)]
                hk = res.side_shift[(s.triangle, side_there)]
                g2 = grp.nf(g + inverse(hj) + hk)
                f = res.regular[other].f
                absolute = frozenset(ctx.mulkey(g2, k) for k in res.edge_keys(f))
                if absolute != target:
                    raise PropertyViolation("T2: track meets two different cusped edges", witness=(tid, other))
                slot = (res.regular[other].edge, g2)
                if on_edge.setdefault(slot, other) != other:
                    raise PropertyViolation("T1: track meets an edge lift twice", witness=(tid, slot))
                if (other, g2) not in seen:
                    seen.add((other, g2))
                    queue.append((other, g2))
    # T4: crossing regular segments
    best, pairs, skipped = 0, 0, 0
    by_tri: dict[int, list[Segment]] = {}
    for s in p.segments:
        if s.a in res.regular and s.b in res.regular:
            by_tri.setdefault(s.triangle, []).append(s)
    for t, segs in by_tri.items():
        for i in range(len(segs)):
            for j in range(i + 1, len(segs)):
                s1, s2 = segs[i], segs[j]
                if not segments_meet(p.endpoint_point(s1, 0), p.endpoint_point(s1, 1),
                                     p.endpoint_point(s2, 0), p.endpoint_point(s2, 1)):
                    continue
                pairs += 1
                e1 = [ctx.cusp.index.get(k) for k in _side_oriented(res, t, s1.sides[0], s1.a)]
                e2 = [ctx.cusp.index.get(k) for k in _side_oriented(res, t, s2.sides[0], s2.a)]
                if None in e1 or None in e2:
                    skipped += 1
                    continue
                d = min(int(ctx.dist[u, v]) for u in e1 for v in e2)
                best = max(best, d)
    return TrackReport(len(trk), True, True, True, best, pairs, skipped, states)


def scrambled_map(qc: QuotientComplex, ctx: CuspContext, radius: int, seed: int) -> VertexMap:
    """Seeded images among depth-0 vertices of word length at most ``radius`` (test fixtures)."""
    import random

    rng = random.Random(seed)
    pool = sorted(ctx.cusp.keys[v] for v in range(ctx.cusp.n) if ctx.cusp.depth[v] == 0 and ctx.cusp.base_length(v) <= radius)
    return VertexMap([rng.choice(pool) for _ in range(qc.complex.n_vertices)])


# --------------------------------------------------------------------------
# bound experiments
# --------------------------------------------------------------------------


def group_elements(grp: Group, max_length: int, keep=None) -> list[Word]:
    """Normal forms of length at most ``max_length`` in shortlex-BFS order."""
    from .grouppair import letters

    seen = {(): 0}
    order: list[Word] = [()]
    frontier: list[Word] = [()]
    for r in range(max_length):
        nxt = []
        for w in frontier:
            for s in letters(grp.rank):
                u = grp.mul(w, (s,))
                if u not in seen:
                    seen[u] = r + 1
                    order.append(u)
                    nxt.append(u)
        frontier = nxt
    return [w for w in order if keep is None or keep(w)]


@dataclass
class UpperBound:
    w: Fraction
    vol: int
    ratio: Fraction


def upper_bound_check(res: Resolution, R: int) -> UpperBound:
    w = weight_total(res.filtered(R))
    vol = res.qc.volume
    return UpperBound(w, vol, w / vol)


@dataclass
class LowerBound:
    balls: int
    heavy_tracks: int
    bound: Fraction
    w: Fraction
    alpha: int
    index_over_lambda_alpha: Fraction


def schreier_distances(H: SubgroupRecord) -> np.ndarray:
    from .grouppair import letters

    k = len(H.table[0]) if H.table else 0
    n = H.index
    out = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        out[s, s] = 0
        queue = deque([s])
        while queue:
            c = queue.popleft()
            for x in letters(k):
                d = H.act(c, x)
                if out[s, d] < 0:
                    out[s, d] = out[s, c] + 1
                    queue.append(d)
    return out


def lower_bound_certificate(res: Resolution, R0: int, rho: int, lam: Fraction | None) -> LowerBound:
    """Disjoint ``R0``-balls in the quotient, each certified by a distinct heavy track nearby."""
    H = res.qc.subgroup
    ctx = res.ctx
    grp = ctx.group
    filtered = res.filtered(R0)
    w = weight_total(filtered)
    alpha = len(group_elements(grp, 2 * R0))
    if H is None:
        raise InputError("lower bound needs a subgroup quotient")
    sd = schreier_distances(H)
    picked: list[int] = []
    for c in range(H.index):
        if all(sd[c, p] > 2 * R0 for p in picked):
            picked.append(c)
    if lam is None:
        return LowerBound(len(picked), 0, Fraction(0), w, alpha, Fraction(0))
    trk = tracks(filtered)
    owner = {cid: t for t, members in trk.items() for cid in members}
    heavy = sorted((owner[c.id], c.id) for c in filtered.connectors if c.regular and c.weight >= 1 / lam)
    used: set[int] = set()
    found = 0
    for c in picked:
        lifts = [v for v in range(ctx.cusp.n) if ctx.cusp.depth[v] == 0 and H.trace(0, ctx.cusp.keys[v][0]) == c]
        dist = ctx.cusp.graph.bfs_array(lifts)
        for t, cid in heavy:
            if t in used:
                continue
            f = res.regular[cid].f
            d = min(int(dist[f[0]]), int(dist[f[1]]))
            if 0 <= d <= R0 + rho:
                used.add(t)
                found += 1
                break
    bound = Fraction(found) / lam
    if bound > w:
        raise PropertyViolation("lower bound exceeds w(F<=R0)", witness={"found": found, "lambda": str(lam)})
    return LowerBound(len(picked), found, bound, w, alpha, Fraction(H.index) / (lam * alpha))


def coverage_radius(res: Resolution, margin: int, equivariant: bool = True) -> int | None:
    """Smallest R with every tested base vertex within R of an H-translate of an edge image."""
    ctx, cx = res.ctx, res.complex
    grp = ctx.group
    cusp = ctx.cusp
    radius = cusp.ball.radius
    tested = [v for v in range(cusp.n) if cusp.depth[v] == 0 and cusp.base_length(v) <= radius - margin]
    if not tested:
        raise InputError("margin leaves no tested vertices")
    images: set[int] = set()
    for e in range(len(cx.edges)):
        a, b = res.endpoints[e]
        images |= {a, b} | ctx.table.q(a, b).support_vertices()
    for key in res.phi.images:
        images.add(ctx.locate(key))
    sources = set(images)
    if equivariant:
        H = res.qc.subgroup
        longest = max(cusp.base_length(v) for v in images)
        hs = group_elements(grp, radius + longest, keep=(H.contains if H is not None else None))
        for h in hs:
            for v in images:
                t = cusp.index.get(ctx.mulkey(h, cusp.keys[v]))
                if t is not None:
                    sources.add(t)
    dist = cusp.graph.bfs_array(sorted(sources))
    vals = dist[tested]
    if (vals < 0).any():
        return None
    return int(vals.max())


def constant_map_coverage(ctx: CuspContext, margin: int = 0) -> int | None:
    """Coverage of the collapsed map sending a one-vertex complex to the identity, untranslated."""
    qc = QuotientComplex(TwoComplex(1, []), [(0, 0)], 1, "point")
    phi = VertexMap([((), -1, 0)])
    res = resolve(qc, phi, ctx)
    return coverage_radius(res, margin, equivariant=False)


# --------------------------------------------------------------------------
# survey
# --------------------------------------------------------------------------


@dataclass
class SurveyConfig:
    ball_radius: int = 4
    depth: int = 2
    R: int = 2
    R0: int = 1
    rho: int = 1
    lam: Fraction | None = Fraction(1)
    margin: int = 1
    kind: str = "wedge"
    max_index: int = 3
    budget: int = 50


@dataclass
class SurveyRow:
    label: str
    index: int
    vol: int | None = None
    w_leq_R: Fraction | None = None
    lower_bound: Fraction | None = None
    w_over_index: Fraction | None = None
    vol_over_index: Fraction | None = None
    coverage_R: int | None = None
    peripherals: int | None = None
    displacement: int | None = None
    certificate: bool | None = None
    reduced_weight: Fraction | None = None
    defect: Fraction | None = None
    flags: list[str] = field(default_factory=list)

    CSV_COLUMNS = ("label", "index", "vol", "w_leq_R", "lower_bound", "w_over_index", "vol_over_index",
                   "coverage_R", "peripherals", "displacement", "certificate", "flags")

    def csv_row(self) -> list[str]:
        from .bicombing import frac_str

        out = []
        for col in self.CSV_COLUMNS:
            v = getattr(self, col)
            if isinstance(v, Fraction):
                out.append(frac_str(v))
            elif v is None:
                out.append("")
            elif isinstance(v, list):
                out.append(";".join(v))
            else:
                out.append(str(v))
        return out


def survey_row(pair: GroupPair, H: SubgroupRecord, ctx: CuspContext, cfg: SurveyConfig) -> SurveyRow:
    from .errors import CuspworkError
    from .grouppair import induced_peripherals
    from .patterns import perfect_reduce

    row = SurveyRow(H.label, H.index)
    try:
        grp = pair.group
        row.peripherals = len(induced_peripherals(H, pair))
        qc = cover_complex(presentation_complex(pair, cfg.kind), H, grp)
        row.vol = qc.volume
        mres = minimize_displacement(qc.complex, initial_map(qc, grp), ctx, cfg.budget)
        row.displacement, row.certificate = mres.displacement, mres.certificate
        if not mres.certificate:
            row.flags.append("no-local-minimum-certificate")
        res = resolve(qc, mres.phi, ctx, cfg.margin)
        check_resolution(res)
        track_checks(res)
        ub = upper_bound_check(res, cfg.R)
        row.w_leq_R = ub.w
        red = perfect_reduce(res.filtered(cfg.R))
        row.reduced_weight, row.defect = red.weight_after, red.defect_before
        lb = lower_bound_certificate(res, cfg.R0, cfg.rho, cfg.lam)
        row.lower_bound = lb.bound
        if lb.bound > weight_total(res.filtered(cfg.R0)):
            row.flags.append("lower-bound-violation")
        row.w_over_index = ub.w / H.index
        row.vol_over_index = Fraction(qc.volume, H.index)
        row.coverage_R = coverage_radius(res, cfg.margin)
        if ctx.cusp.approximate:
            row.flags.append("approximate-horoballs")
    except CuspworkError as exc:
        row.flags.append(f"error:{type(exc).__name__}:{exc}")
    return row


@dataclass
class SurveySummary:
    rows: int
    min_w_over_index: Fraction | None
    max_w_over_index: Fraction | None
    band_ratio: Fraction | None
    vol_over_index_constant: bool
    errors: int


def summarize(rows: Sequence[SurveyRow]) -> SurveySummary:
    ratios = [r.w_over_index for r in rows if r.w_over_index is not None]
    vols = {r.vol_over_index for r in rows if r.vol_over_index is not None}
    lo = min(ratios) if ratios else None
    hi = max(ratios) if ratios else None
    band = (hi / lo) if ratios and lo else None
    errors = sum(any(f.startswith("error:") for f in r.flags) for r in rows)
    return SurveySummary(len(rows), lo, hi, band, len(vols) <= 1, errors)


def rigidity_survey(pair: GroupPair, cfg: SurveyConfig, ctx: CuspContext | None = None, subgroups=None):
    """One row per subgroup of index at most ``cfg.max_index``, plus a summary."""
    from .cusped import cusped_from_pair
    from .grouppair import enumerate_subgroups

    if ctx is None:
        ctx = CuspContext(cusped_from_pair(pair, cfg.ball_radius, cfg.depth))
    if subgroups is None:
        subgroups = enumerate_subgroups(pair, cfg.max_index)
    rows = [survey_row(pair, H, ctx, cfg) for H in subgroups]
    return rows, summarize(rows)
