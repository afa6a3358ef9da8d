import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cuspwork.errors import InputError
from cuspwork.patterns import (
    Connector,
    Pattern,
    Segment,
    TwoComplex,
    defect_total,
    perfect_reduce,
    random_pattern,
    segments_meet,
    tracks,
    validate,
    weight_total,
)

from oracles import pattern_totals_from_json

F = Fraction


def triangle():
    return TwoComplex(3, [(0, 1), (1, 2), (0, 2)], [(1, 2, -3)])


def book(pages=3):
    # ``pages`` triangles sharing the edge 0-1
    edges = [(0, 1)] + [(0, 2 + k) for k in range(pages)] + [(1, 2 + k) for k in range(pages)]
    tris = [(1, 2 + pages + k, -(2 + k)) for k in range(pages)]
    return TwoComplex(2 + pages, edges, tris)


def reg(cid, edge, pos, w):
    return Connector(cid, "regular", F(w), edge=edge, position=F(pos))


def test_complex_rejects_open_boundary():
    with pytest.raises(InputError):
        TwoComplex(3, [(0, 1), (1, 2), (0, 2)], [(1, 2, 3)])


def test_empty_pattern():
    p = Pattern(triangle(), [], [])
    assert validate(p).valid
    assert weight_total(p) == 0 and defect_total(p) == 0


def test_condition_four_counterexample():
    cx = book(3)
    cons = [reg(0, 0, F(1, 2), 1), reg(1, 1, F(1, 2), 1), reg(2, 4, F(1, 2), 1)]
    # segments in only two of the three pages
    segs = [Segment(0, 0, 1, 0, (0, 2)), Segment(1, 0, 2, 1, (0, 1))]
    rep = validate(Pattern(cx, cons, segs))
    assert not rep.conditions["4"]["ok"]
    assert any(w[1] == 0 and w[2] == 2 for w in rep.conditions["4"]["witnesses"])


def test_singular_segment_crossing_detected():
    cx = triangle()
    cons = [
        reg(0, 0, F(1, 2), 1),
        reg(1, 1, F(1, 2), 1),
        reg(2, 2, F(1, 2), 1),
        Connector(3, "singular", F(0), triangle=0, point=(F(1, 3), F(1, 3), F(1, 3))),
    ]
    # 0 -> 1 regular chord and a singular segment from the third side across it to the centroid
    segs = [Segment(0, 0, 1, 0, (0, 1)), Segment(1, 2, 3, 0, (2, None))]
    assert validate(Pattern(cx, cons, segs)).valid
    far = Connector(3, "singular", F(0), triangle=0, point=(F(1, 10), F(8, 10), F(1, 10)))
    rep = validate(Pattern(cx, cons[:3] + [far], segs))
    assert not rep.conditions["2"]["ok"]


def test_segments_meet_exact():
    o, a, b, c = (F(0), F(0)), (F(1), F(1)), (F(1), F(0)), (F(0), F(1))
    assert segments_meet(o, a, b, c)
    assert not segments_meet(o, b, c, a)
    assert segments_meet(o, b, b, a)


def test_tracks_examples():
    cx = triangle()
    p = Pattern(cx, [reg(0, 0, F(1, 3), 1), reg(1, 1, F(1, 3), 1), reg(2, 0, F(2, 3), 1), reg(3, 2, F(1, 3), 1)],
                [Segment(0, 0, 1, 0, (0, 1)), Segment(1, 2, 3, 0, (0, 2))])
    assert tracks(p) == {0: [0, 1], 2: [2, 3]}
    lone = Pattern(cx, [reg(0, 0, F(1, 2), 4)], [], reduced=True)
    assert tracks(lone) == {0: [0]}


def test_three_one_track():
    cx = triangle()
    p = Pattern(cx, [reg(0, 0, F(1, 2), 3), reg(1, 1, F(1, 2), 1)], [Segment(0, 0, 1, 0, (0, 1))], reduced=True)
    assert weight_total(p) == 3 and defect_total(p) == 2
    r = perfect_reduce(p)
    assert r.weights == {0: 1, 1: 1}
    assert r.weight_before <= r.weight_after + r.defect_before == 3


def test_perfect_pattern_is_fixed():
    cx = triangle()
    p = Pattern(cx, [reg(0, 0, F(1, 2), 2), reg(1, 1, F(1, 2), 2)], [Segment(0, 0, 1, 0, (0, 1))], reduced=True)
    r = perfect_reduce(p)
    assert r.weight_after == r.weight_before == 2 and r.defect_before == 0


def test_random_patterns_valid_and_reduction_inequality_holds():
    rng = random.Random(11)
    for _ in range(50):
        p = random_pattern(rng)
        assert validate(p).valid
        r = perfect_reduce(p)
        assert r.weight_before <= r.weight_after + r.defect_before
        w, df, ntracks = pattern_totals_from_json(p.to_json())
        assert (w, df, ntracks) == (weight_total(p), defect_total(p), len(tracks(p)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.fractions(min_value=F(1, 10), max_value=10))
def test_scaling_and_idempotence(seed, s):
    p = random_pattern(random.Random(seed))
    q = p.scaled(s)
    assert tracks(q) == tracks(p)
    assert weight_total(q) == s * weight_total(p) and defect_total(q) == s * defect_total(p)
    r1, rs = perfect_reduce(p), perfect_reduce(q)
    assert rs.weights == {c: s * v for c, v in r1.weights.items()}
    again = perfect_reduce(r1.pattern)
    assert again.weights == r1.weights and again.pattern.segments == r1.pattern.segments


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_additive_over_disjoint_union(s1, s2):
    p = random_pattern(random.Random(s1))
    q = random_pattern(random.Random(s2))
    n = len(p.complex.edges)
    shift = max(c.id for c in p.connectors) + 1 if p.connectors else 0
    tshift = len(p.complex.triangles)
    vshift = p.complex.n_vertices
    cx = TwoComplex(
        vshift + q.complex.n_vertices,
        p.complex.edges + [(u + vshift, v + vshift) for u, v in q.complex.edges],
        p.complex.triangles + [tuple(t + n if t > 0 else t - n for t in tri) for tri in q.complex.triangles],
    )
    from dataclasses import replace

    cons = list(p.connectors) + [
        replace(c, id=c.id + shift, edge=c.edge + n) if c.regular else replace(c, id=c.id + shift, triangle=c.triangle + tshift)
        for c in q.connectors
    ]
    segs = list(p.segments) + [
        Segment(s.id + len(p.segments), s.a + shift, s.b + shift, s.triangle + tshift, s.sides) for s in q.segments
    ]
    u = Pattern(cx, cons, segs)
    assert validate(u).valid
    assert weight_total(u) == weight_total(p) + weight_total(q)
    assert defect_total(u) == defect_total(p) + defect_total(q)


def test_zero_weight_track_removal():
    cx = triangle()
    base = [reg(0, 0, F(1, 3), 3), reg(1, 1, F(1, 3), 1)]
    zero = [reg(2, 0, F(2, 3), 0), reg(3, 2, F(1, 3), 0)]
    p = Pattern(cx, base, [Segment(0, 0, 1, 0, (0, 1))], reduced=True)
    q = Pattern(cx, base + zero, [Segment(0, 0, 1, 0, (0, 1)), Segment(1, 2, 3, 0, (0, 2))], reduced=True)
    assert weight_total(p) == weight_total(q)
    perfect_reduce(q)


def test_json_roundtrip_and_renders():
    p = random_pattern(random.Random(3))
    data = json.loads(json.dumps(p.to_json()))
    back = Pattern.from_json(data)
    assert back.to_json() == p.to_json()
    assert p.to_svg().startswith("<svg") and p.to_dot().startswith("graph")
    r = p.renormalized()
    assert [c.id for c in r.connectors] == [c.id for c in p.connectors]
    with pytest.raises(InputError):
        Pattern.from_json({"complex": {"vertices": 1}})
