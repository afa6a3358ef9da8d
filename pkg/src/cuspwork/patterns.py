"""Two-complexes, weighted singular patterns, tracks and perfect reduction.

Oriented edges are signed tokens: ``+(i + 1)`` runs along edge ``i`` from its
tail to its head, ``-(i + 1)`` runs backwards.  A regular connector sits on
an edge at a rational position in ``(0, 1)`` measured along the positive
orientation; a singular connector sits inside a triangle at a barycentric
point.  Triangles are drawn on the reference triangle (0,0), (1,0), (0,1)
with corners at the tails of their three sides, which is what the
non-crossing test for singular segments uses.
"""
from __future__ import annotations

import random
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction

from .errors import InputError, PropertyViolation

Point = tuple[Fraction, Fraction]
_CORNERS: tuple[Point, ...] = ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))


def _edge_index(token: int) -> int:
    if token == 0:
        raise InputError("edge token 0 is not an oriented edge")
    return abs(token) - 1


class TwoComplex:
    """Finite 2-complex with oriented edges and triangles given by boundary triples."""

    def __init__(self, n_vertices: int, edges: Sequence[tuple[int, int]], triangles: Sequence[Sequence[int]] = (),
                 holonomy: Sequence[tuple[int, ...]] | None = None, name: str = ""):
        self.n_vertices = n_vertices
        self.edges = [tuple(map(int, e)) for e in edges]
        self.triangles = [tuple(map(int, t)) for t in triangles]
        self.holonomy = [tuple(h) for h in holonomy] if holonomy is not None else None
        self.name = name
        for i, (u, v) in enumerate(self.edges):
            if not (0 <= u < n_vertices and 0 <= v < n_vertices):
                raise InputError(f"edge {i} has an endpoint outside 0..{n_vertices - 1}")
        if self.holonomy is not None and len(self.holonomy) != len(self.edges):
            raise InputError("one holonomy word per edge is required")
        for k, tri in enumerate(self.triangles):
            if len(tri) != 3:
                raise InputError(f"triangle {k} does not have three sides")
            for tok in tri:
                if not 0 <= _edge_index(tok) < len(self.edges):
                    raise InputError(f"triangle {k} uses unknown edge token {tok}")
            for j in range(3):
                if self.head(tri[j]) != self.tail(tri[(j + 1) % 3]):
                    raise InputError(f"boundary of triangle {k} does not close at side {j}")

    def tail(self, token: int) -> int:
        u, v = self.edges[_edge_index(token)]
        return u if token > 0 else v

    def head(self, token: int) -> int:
        u, v = self.edges[_edge_index(token)]
        return v if token > 0 else u

    def edge_holonomy(self, token: int) -> tuple[int, ...]:
        """Holonomy word of an oriented edge; reversal inverts it."""
        if self.holonomy is None:
            return ()
        h = self.holonomy[_edge_index(token)]
        return h if token > 0 else tuple(-x for x in reversed(h))

    def check_holonomy(self, nf: Callable[[tuple[int, ...]], tuple[int, ...]]) -> list[int]:
        """Triangles whose boundary holonomy is non-trivial under the normal form ``nf``."""
        bad = []
        for k, tri in enumerate(self.triangles):
            w: tuple[int, ...] = ()
            for tok in tri:
                w += self.edge_holonomy(tok)
            if nf(w):
                bad.append(k)
        return bad

    @property
    def volume(self) -> int:
        return self.n_vertices + len(self.edges) + len(self.triangles)

    def triangles_on_edge(self, edge: int) -> list[tuple[int, int]]:
        """``(triangle, side)`` occurrences of an unoriented edge."""
        return [(k, j) for k, tri in enumerate(self.triangles) for j, tok in enumerate(tri) if _edge_index(tok) == edge]

    def side_point(self, tri: int, side: int, position: Fraction) -> Point:
        """Reference-triangle coordinates of a point on side ``side`` of ``tri``."""
        tok = self.triangles[tri][side]
        t = position if tok > 0 else 1 - position
        (x0, y0), (x1, y1) = _CORNERS[side], _CORNERS[(side + 1) % 3]
        return (x0 + t * (x1 - x0), y0 + t * (y1 - y0))

    def to_json(self) -> dict:
        out = {"vertices": self.n_vertices, "edges": [list(e) for e in self.edges],
               "triangles": [list(t) for t in self.triangles]}
        if self.holonomy is not None:
            out["holonomy"] = [list(h) for h in self.holonomy]
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, data: dict) -> "TwoComplex":
        try:
            hol = data.get("holonomy")
            return cls(int(data["vertices"]), data["edges"], data.get("triangles", []),
                       [tuple(h) for h in hol] if hol is not None else None, data.get("name", ""))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed complex JSON: {exc}") from exc


@dataclass(frozen=True)
class Connector:
    id: int
    kind: str  # "regular" | "singular"
    weight: Fraction
    edge: int | None = None
    position: Fraction | None = None
    triangle: int | None = None
    point: tuple[Fraction, Fraction, Fraction] | None = None  # barycentric in the reference triangle
    tag: tuple | None = None

    @property
    def regular(self) -> bool:
        return self.kind == "regular"


@dataclass(frozen=True)
class Segment:
    id: int
    a: int
    b: int
    triangle: int
    sides: tuple[int | None, int | None]


@dataclass
class Pattern:
    complex: TwoComplex
    connectors: list[Connector]
    segments: list[Segment]
    reduced: bool = False
    _by_id: dict[int, Connector] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._by_id = {c.id: c for c in self.connectors}
        if len(self._by_id) != len(self.connectors):
            raise InputError("duplicate connector ids")

    def connector(self, cid: int) -> Connector:
        return self._by_id[cid]

    def weights(self) -> dict[int, Fraction]:
        return {c.id: c.weight for c in self.connectors}

    def segment_kind(self, s: Segment) -> str:
        return "regular" if self.connector(s.a).regular and self.connector(s.b).regular else "singular"

    def endpoint_point(self, s: Segment, which: int) -> Point:
        c = self.connector(s.a if which == 0 else s.b)
        if c.regular:
            return self.complex.side_point(s.triangle, s.sides[which], c.position)
        return _bary_to_xy(c.point)

    def with_weights(self, weights: dict[int, Fraction]) -> "Pattern":
        return Pattern(self.complex, [replace(c, weight=Fraction(weights[c.id])) for c in self.connectors],
                       list(self.segments), self.reduced)

    def scaled(self, s: Fraction) -> "Pattern":
        return self.with_weights({c.id: c.weight * s for c in self.connectors})

    def renormalized(self) -> "Pattern":
        """Equally spaced positions ``i/(n+1)`` per edge, order preserved."""
        by_edge: dict[int, list[Connector]] = {}
        for c in self.connectors:
            if c.regular:
                by_edge.setdefault(c.edge, []).append(c)
        newpos = {}
        for cs in by_edge.values():
            cs.sort(key=lambda c: c.position)
            for i, c in enumerate(cs):
                newpos[c.id] = Fraction(i + 1, len(cs) + 1)
        return Pattern(self.complex, [replace(c, position=newpos[c.id]) if c.regular else c for c in self.connectors],
                       list(self.segments), self.reduced)

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        def fr(x):
            x = Fraction(x)
            return [x.numerator, x.denominator]

        cons = []
        for c in self.connectors:
            d = {"id": c.id, "kind": c.kind, "weight": fr(c.weight)}
            if c.regular:
                d.update(edge=c.edge, position=fr(c.position))
            else:
                d.update(triangle=c.triangle, point=[fr(x) for x in c.point])
            if c.tag is not None:
                d["tag"] = list(c.tag)
            cons.append(d)
        segs = [{"id": s.id, "a": s.a, "b": s.b, "triangle": s.triangle, "sides": list(s.sides)} for s in self.segments]
        return {"complex": self.complex.to_json(), "connectors": cons, "segments": segs, "reduced": self.reduced}

    @classmethod
    def from_json(cls, data: dict) -> "Pattern":
        try:
            cx = TwoComplex.from_json(data["complex"])
            cons = []
            for d in data["connectors"]:
                w = Fraction(*d["weight"])
                if d["kind"] == "regular":
                    cons.append(Connector(d["id"], "regular", w, edge=d["edge"], position=Fraction(*d["position"]),
                                          tag=tuple(d["tag"]) if "tag" in d else None))
                elif d["kind"] == "singular":
                    cons.append(Connector(d["id"], "singular", w, triangle=d["triangle"],
                                          point=tuple(Fraction(*x) for x in d["point"]),
                                          tag=tuple(d["tag"]) if "tag" in d else None))
                else:
                    raise InputError(f"unknown connector kind {d['kind']!r}")
            segs = [Segment(d["id"], d["a"], d["b"], d["triangle"], tuple(d["sides"])) for d in data["segments"]]
            return cls(cx, cons, segs, bool(data.get("reduced", False)))
        except (KeyError, TypeError, ZeroDivisionError) as exc:
            raise InputError(f"malformed pattern JSON: {exc}") from exc

    def to_dot(self, name: str = "pattern") -> str:
        lines = [f"graph {name} {{"]
        for c in self.connectors:
            shape = "circle" if c.regular else "doublecircle"
            lines.append(f'  c{c.id} [shape={shape}, label="{c.id}:{c.weight}"];')
        for s in self.segments:
            style = "solid" if self.segment_kind(s) == "regular" else "dashed"
            lines.append(f'  c{s.a} -- c{s.b} [style={style}, label="T{s.triangle}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_svg(self, size: int = 160) -> str:
        """One reference triangle per 2-simplex with its segments."""
        pad = 10
        k = max(1, len(self.complex.triangles))
        width = k * (size + pad) + pad
        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{size + 2 * pad}">']

        def xy(p, t):
            return (pad + t * (size + pad) + float(p[0]) * size, pad + size - float(p[1]) * size)

        for t in range(len(self.complex.triangles)):
            pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in (xy(c, t) for c in _CORNERS))
            out.append(f'<polygon points="{pts}" fill="none" stroke="black"/>')
        for s in self.segments:
            (x1, y1), (x2, y2) = xy(self.endpoint_point(s, 0), s.triangle), xy(self.endpoint_point(s, 1), s.triangle)
            dash = "" if self.segment_kind(s) == "regular" else ' stroke-dasharray="3,2"'
            out.append(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" stroke="darkcyan"{dash}/>')
            for which in (0, 1):
                c = self.connector(s.a if which == 0 else s.b)
                x, y = xy(self.endpoint_point(s, which), s.triangle)
                fill = "darkcyan" if c.regular else "white"
                out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{fill}" stroke="darkcyan"/>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _bary_to_xy(b) -> Point:
    # corners (0,0), (1,0), (0,1)
    return (b[1], b[2])


def _orient(p: Point, q: Point, r: Point) -> int:
    v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    return (v > 0) - (v < 0)


def _on_segment(p: Point, q: Point, r: Point) -> bool:
    return min(p[0], r[0]) <= q[0] <= max(p[0], r[0]) and min(p[1], r[1]) <= q[1] <= max(p[1], r[1])


def segments_meet(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    """Closed segments ``[p1, p2]`` and ``[q1, q2]`` share a point (exact)."""
    o1, o2, o3, o4 = _orient(p1, p2, q1), _orient(p1, p2, q2), _orient(q1, q2, p1), _orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    return ((o1 == 0 and _on_segment(p1, q1, p2)) or (o2 == 0 and _on_segment(p1, q2, p2))
            or (o3 == 0 and _on_segment(q1, p1, q2)) or (o4 == 0 and _on_segment(q1, p2, q2)))


# --------------------------------------------------------------------------
# validation, tracks, functionals
# --------------------------------------------------------------------------

@dataclass
class ValidationReport:
    conditions: dict[str, dict]

    @property
    def valid(self) -> bool:
        return all(c["ok"] for c in self.conditions.values())

    def failures(self) -> dict[str, list]:
        return {k: v["witnesses"] for k, v in self.conditions.items() if not v["ok"]}


def validate(p: Pattern) -> ValidationReport:
    """Itemized check of the pattern conditions; never raises."""
    cx = p.complex
    w1: list = []
    w2: list = []
    w4: list = []
    ww: list = []
    seen_pos: dict[int, set] = {}
    seen_pts: dict[int, set] = {}
    for c in p.connectors:
        if c.regular:
            if c.edge is None or not 0 <= c.edge < len(cx.edges) or c.position is None or not 0 < c.position < 1:
                w1.append(("bad regular host", c.id))
                continue
            if c.position in seen_pos.setdefault(c.edge, set()):
                w1.append(("repeated position", c.id))
            seen_pos[c.edge].add(c.position)
        else:
            if c.triangle is None or not 0 <= c.triangle < len(cx.triangles) or c.point is None \
                    or sum(c.point) != 1 or min(c.point) <= 0:
                w1.append(("bad singular host", c.id))
                continue
            if c.point in seen_pts.setdefault(c.triangle, set()):
                w1.append(("repeated point", c.id))
            seen_pts[c.triangle].add(c.point)
            if c.weight != 0:
                ww.append(("singular weight", c.id))
        if c.weight < 0:
            ww.append(("negative weight", c.id))
    bad_hosts = {x[1] for x in w1 if x[0].startswith("bad")}
    geometric = []
    for s in p.segments:
        if s.a not in p._by_id or s.b not in p._by_id or s.a == s.b or not 0 <= s.triangle < len(cx.triangles):
            w2.append(("bad endpoints", s.id))
            continue
        if s.a in bad_hosts or s.b in bad_hosts:
            continue
        ok = True
        for which, cid in enumerate((s.a, s.b)):
            c = p.connector(cid)
            side = s.sides[which]
            if c.regular:
                if side is None or not 0 <= side < 3 or _edge_index(cx.triangles[s.triangle][side]) != c.edge:
                    w2.append(("regular endpoint off the triangle boundary", s.id, cid))
                    ok = False
            elif c.triangle != s.triangle or side is not None:
                w2.append(("singular endpoint in another triangle", s.id, cid))
                ok = False
        if not ok:
            continue
        ca, cb = p.connector(s.a), p.connector(s.b)
        if not ca.regular and not cb.regular:
            w2.append(("singular segment without regular endpoint", s.id))
            continue
        if ca.regular and cb.regular and s.sides[0] == s.sides[1]:
            w2.append(("segment along one side", s.id))
            continue
        geometric.append(s)
    by_tri: dict[int, list[Segment]] = {}
    for s in geometric:
        by_tri.setdefault(s.triangle, []).append(s)
    for segs in by_tri.values():
        for s in segs:
            if p.segment_kind(s) != "singular":
                continue
            a0, a1 = p.endpoint_point(s, 0), p.endpoint_point(s, 1)
            for t in segs:
                if t.id == s.id:
                    continue
                if segments_meet(a0, a1, p.endpoint_point(t, 0), p.endpoint_point(t, 1)):
                    w2.append(("singular segment meets another segment", s.id, t.id))
    # condition 4: one segment per (triangle, side occurrence) for each connector
    ends: dict[tuple, int] = {}
    for s in p.segments:
        for which, cid in enumerate((s.a, s.b)):
            key = (cid, s.triangle, s.sides[which] if which < len(s.sides) else None)
            ends[key] = ends.get(key, 0) + 1
    for c in p.connectors:
        if c.id in bad_hosts:
            continue
        slots = [(k, j) for k, j in cx.triangles_on_edge(c.edge)] if c.regular else [(c.triangle, None)]
        for k, j in slots:
            n = ends.get((c.id, k, j), 0)
            if n != 1 and not (p.reduced and n == 0):
                w4.append(("endpoint count", c.id, k, j, n))
    conds = {
        "1": {"ok": not w1, "witnesses": w1},
        "2": {"ok": not w2, "witnesses": w2},
        "3": {"ok": True, "witnesses": [], "connectors": len(p.connectors), "segments": len(p.segments)},
        "4": {"ok": not w4, "witnesses": w4, "relaxed": p.reduced},
        "weights": {"ok": not ww, "witnesses": ww},
    }
    return ValidationReport(conds)


def tracks(p: Pattern) -> dict[int, list[int]]:
    """Track id (least connector id) -> sorted connector ids."""
    parent = {c.id: c.id for c in p.connectors}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for s in p.segments:
        ra, rb = find(s.a), find(s.b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    out: dict[int, list[int]] = {}
    for cid in sorted(parent):
        out.setdefault(find(cid), []).append(cid)
    return {min(v): v for v in out.values()}


def weight_total(p: Pattern, weights: dict[int, Fraction] | None = None) -> Fraction:
    w = weights if weights is not None else p.weights()
    return sum((max(w[c] for c in members) for members in tracks(p).values()), Fraction(0))


def defect_total(p: Pattern, weights: dict[int, Fraction] | None = None) -> Fraction:
    w = weights if weights is not None else p.weights()
    return sum((abs(w[s.a] - w[s.b]) for s in p.segments), Fraction(0))


@dataclass
class Reduction:
    pattern: Pattern
    weights: dict[int, Fraction]
    weight_before: Fraction
    weight_after: Fraction
    defect_before: Fraction


def perfect_reduce(p: Pattern) -> Reduction:
    """Drop singular connectors and their segments, then level each track to its minimum weight.

    The subset, pointwise and total-weight inequalities are verified before
    returning; a failure raises PropertyViolation with the offending track.
    """
    keep = [c for c in p.connectors if c.regular]
    keep_ids = {c.id for c in keep}
    segs = [s for s in p.segments if s.a in keep_ids and s.b in keep_ids]
    skeleton = Pattern(p.complex, keep, segs, reduced=True)
    w = p.weights()
    w_new: dict[int, Fraction] = {}
    for members in tracks(skeleton).values():
        m = min(w[c] for c in members)
        for c in members:
            w_new[c] = m
    reduced = skeleton.with_weights(w_new)
    before, after, df = weight_total(p), weight_total(reduced), defect_total(p)
    if not keep_ids <= set(p._by_id) or not {s.id for s in segs} <= {s.id for s in p.segments}:
        raise PropertyViolation("reduced pattern is not a subpattern", witness=sorted(keep_ids - set(p._by_id)))
    for cid, val in w_new.items():
        if val > w[cid]:
            raise PropertyViolation("reduced weight exceeds original", witness=cid)
    if defect_total(reduced) != 0:
        raise PropertyViolation("reduced pattern has non-zero defect", witness=None)
    if before > after + df:
        trk = tracks(p)
        worst = max(trk, key=lambda t: max(w[c] for c in trk[t]))
        raise PropertyViolation("w(p) > w'(p') + df(p)", witness={"track": worst, "members": trk[worst]})
    return Reduction(reduced, w_new, before, after, df)


# --------------------------------------------------------------------------
# random instances
# --------------------------------------------------------------------------

def random_complex(rng: random.Random, max_triangles: int = 10) -> TwoComplex:
    nv = rng.randint(4, 7)
    triples = [(a, b, c) for a in range(nv) for b in range(a + 1, nv) for c in range(b + 1, nv)]
    chosen = sorted(rng.sample(triples, rng.randint(1, min(max_triangles, len(triples)))))
    edges: dict[tuple[int, int], int] = {}
    for a, b, c in chosen:
        for e in ((a, b), (b, c), (a, c)):
            edges.setdefault(e, len(edges))
    tris = [(edges[(a, b)] + 1, edges[(b, c)] + 1, -(edges[(a, c)] + 1)) for a, b, c in chosen]
    return TwoComplex(nv, list(edges), tris)


def place_singular(cx: TwoComplex, tri: int, side: int, position: Fraction, eps: Fraction):
    """Barycentric point at distance ``eps`` (in barycentric mix) from a side point toward the centroid."""
    x, y = cx.side_point(tri, side, position)
    bary = (1 - x - y, x, y)
    third = Fraction(1, 3)
    return tuple((1 - eps) * b + eps * third for b in bary)


def random_pattern(rng: random.Random, cx: TwoComplex | None = None, max_triangles: int = 10) -> Pattern:
    """A valid weighted singular pattern with weights in ``{0..9}/den``, ``den <= 8``."""
    cx = cx or random_complex(rng, max_triangles)
    cons: list[Connector] = []
    for e in range(len(cx.edges)):
        k = rng.randint(0, 3)
        for i in range(k):
            den = rng.randint(1, 8)
            cons.append(Connector(len(cons), "regular", Fraction(rng.randint(0, 9), den), edge=e,
                                  position=Fraction(i + 1, k + 1)))
    by_edge: dict[int, list[Connector]] = {}
    for c in cons:
        by_edge.setdefault(c.edge, []).append(c)
    plan = []  # (triangle, [(cid, side)...] pairs, leftovers)
    for t, tri in enumerate(cx.triangles):
        ends = [(c.id, j) for j, tok in enumerate(tri) for c in by_edge.get(_edge_index(tok), [])]
        rng.shuffle(ends)
        pairs, left = [], []
        while ends:
            a = ends.pop()
            partner = next((b for b in ends if b[1] != a[1]), None)
            if partner is None:
                left.append(a)
            else:
                ends.remove(partner)
                pairs.append((a, partner))
        plan.append((t, pairs, left))
    eps = Fraction(1, 4)
    while True:
        extra: list[Connector] = []
        segs: list[Segment] = []
        nid = len(cons)
        for t, pairs, left in plan:
            for (a, sa), (b, sb) in pairs:
                segs.append(Segment(len(segs), a, b, t, (sa, sb)))
            for a, sa in left:
                pt = place_singular(cx, t, sa, cons[a].position, eps)
                extra.append(Connector(nid, "singular", Fraction(0), triangle=t, point=pt))
                segs.append(Segment(len(segs), a, nid, t, (sa, None)))
                nid += 1
        p = Pattern(cx, cons + extra, segs)
        if validate(p).valid:
            return p
        eps /= 2
        if eps < Fraction(1, 2**40):
            raise PropertyViolation("could not place singular connectors", witness=validate(p).failures())
