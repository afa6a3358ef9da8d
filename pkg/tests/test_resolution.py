from __future__ import annotations

import dataclasses
import random
from fractions import Fraction

import pytest

from cuspwork.cusped import cusped_from_pair
from cuspwork.errors import BallMarginError, PropertyViolation
from cuspwork.grouppair import GroupPair, enumerate_subgroups, free_pair
from cuspwork.patterns import Pattern, TwoComplex, tracks, validate, weight_total
from cuspwork.resolution import (
    CuspContext,
    SurveyConfig,
    VertexMap,
    check_resolution,
    constant_map_coverage,
    cover_complex,
    coverage_radius,
    initial_map,
    lower_bound_certificate,
    minimize_displacement,
    presentation_complex,
    resolution_spread,
    resolve,
    rigidity_survey,
    scrambled_map,
    total_displacement,
    track_checks,
    upper_bound_check,
)

from oracles import pattern_totals_from_json

Z2 = {"generators": ["a", "b"], "relators": ["abAB"], "peripherals": [["a"]]}


@pytest.fixture(scope="module")
def f2():
    pair = free_pair(2)
    return pair, CuspContext(cusped_from_pair(pair, 4, 2))


@pytest.fixture(scope="module")
def z2():
    pair = GroupPair.from_json(Z2)
    return pair, CuspContext(cusped_from_pair(pair, 4, 2))


def minimized(pair, ctx, H, kind="wedge"):
    qc = cover_complex(presentation_complex(pair, kind), H, pair.group)
    m = minimize_displacement(qc.complex, initial_map(qc, pair.group), ctx)
    return qc, m, resolve(qc, m.phi, ctx)


def test_presentation_complex_sizes():
    f = free_pair(2)
    w = presentation_complex(f, "wedge").complex
    assert (w.n_vertices, len(w.edges), len(w.triangles), w.volume) == (7, 8, 0, 15)
    assert presentation_complex(f, "fins").volume == 47
    z = presentation_complex(GroupPair.from_json(Z2), "wedge").complex
    assert (z.n_vertices, len(z.edges), len(z.triangles)) == (8, 24, 16)


@pytest.mark.parametrize("kind", ["wedge", "fins"])
def test_cover_volume_scales_with_index(kind):
    pair = free_pair(2)
    base = presentation_complex(pair, kind)
    for H in enumerate_subgroups(pair, 3):
        qc = cover_complex(base, H, pair.group)
        assert qc.volume == H.index * base.volume
        assert qc.complex.check_holonomy(pair.group.nf) == []


def test_minimize_finds_tree_median():
    # on a tree the summed distance is convex, so the local optimum is the brute-force median
    pair = free_pair(2, peripherals=())
    ctx = CuspContext(cusped_from_pair(pair, 3, 1))
    cusp = ctx.cusp
    rng = random.Random(3)
    for _ in range(6):
        leaves = [cusp.keys[rng.randrange(cusp.n)] for _ in range(rng.randint(2, 5))]
        k = len(leaves)
        cx = TwoComplex(k + 1, [(0, i + 1) for i in range(k)], [])
        phi = VertexMap([((), -1, 0)] + leaves, frozenset(range(1, k + 1)))
        res = minimize_displacement(cx, phi, ctx, budget=100)
        ids = [cusp.index[x] for x in leaves]
        brute = min(sum(int(ctx.dist[c, v]) for v in ids) for c in range(cusp.n))
        assert res.certificate and res.displacement == brute
        assert res.displacement == total_displacement(cx, res.phi, ctx)


def test_minimize_budget_zero_has_no_certificate(f2):
    pair, ctx = f2
    H = enumerate_subgroups(pair, 2)[1]
    qc = cover_complex(presentation_complex(pair), H, pair.group)
    res = minimize_displacement(qc.complex, initial_map(qc, pair.group), ctx, budget=0)
    assert not res.certificate and res.sweeps == 0


def test_minimize_certificate_is_a_local_minimum(f2):
    pair, ctx = f2
    for H in enumerate_subgroups(pair, 2):
        qc, m, _ = minimized(pair, ctx, H)
        assert m.certificate
        for v in range(qc.complex.n_vertices):
            home = ctx.locate(m.phi.images[v])
            for w in ctx.cusp.graph.neighbors(home):
                trial = m.phi.copy()
                trial.images[v] = ctx.cusp.keys[w]
                try:
                    assert total_displacement(qc.complex, trial, ctx) >= m.displacement
                except BallMarginError:
                    pass


def scrambled_resolutions(pair, ctx, kind, seeds=range(4)):
    out = []
    for H in enumerate_subgroups(pair, 1):
        qc = cover_complex(presentation_complex(pair, kind), H, pair.group)
        for seed in seeds:
            try:
                out.append(resolve(qc, scrambled_map(qc, ctx, 1, seed), ctx))
            except BallMarginError:
                continue
    return out


def test_scrambled_torus_resolutions_are_exact(z2):
    pair, ctx = z2
    found = scrambled_resolutions(pair, ctx, "wedge")
    assert found
    for res in found:
        rep = check_resolution(res, resolution_spread(res))
        assert rep.exact_ok and rep.r3_violations == []
        tr = track_checks(res)
        assert tr.t1 and tr.t2


def test_removing_a_regular_segment_breaks_r5(z2):
    pair, ctx = z2
    res = next(r for r in scrambled_resolutions(pair, ctx, "wedge")
               if any(s.a in r.regular and s.b in r.regular for s in r.pattern.segments))
    p = res.pattern
    drop = next(s for s in p.segments if s.a in res.regular and s.b in res.regular)
    broken = Pattern(p.complex, p.connectors, [s for s in p.segments if s.id != drop.id], p.reduced)
    with pytest.raises(PropertyViolation):
        check_resolution(dataclasses.replace(res, pattern=broken))


def test_track_count_matches_flood_fill(z2):
    pair, ctx = z2
    for res in scrambled_resolutions(pair, ctx, "wedge"):
        total, defect, components = pattern_totals_from_json(res.pattern.to_json())
        assert components == len(tracks(res.pattern))
        assert total == weight_total(res.pattern)


def test_initial_torus_resolution(z2):
    pair, ctx = z2
    H = enumerate_subgroups(pair, 1)[0]
    qc = cover_complex(presentation_complex(pair), H, pair.group)
    res = resolve(qc, initial_map(qc, pair.group), ctx)
    assert validate(res.pattern).valid
    assert check_resolution(res).exact_ok
    assert weight_total(res.pattern) == 2


def test_depth_filter_is_monotone(z2):
    pair, ctx = z2
    for res in scrambled_resolutions(pair, ctx, "wedge"):
        ws = [weight_total(res.filtered(R)) for R in range(ctx.cusp.max_depth + 1)]
        assert ws == sorted(ws)
        assert ws[-1] == weight_total(res.pattern)


def test_resolve_rejects_small_ball():
    pair = free_pair(2)
    ctx = CuspContext(cusped_from_pair(pair, 1, 1))
    H = enumerate_subgroups(pair, 2)[1]
    qc = cover_complex(presentation_complex(pair), H, pair.group)
    with pytest.raises(BallMarginError):
        resolve(qc, initial_map(qc, pair.group), ctx, margin=1)


def test_bounds_on_free_covers(f2):
    pair, ctx = f2
    for H in enumerate_subgroups(pair, 2):
        qc, _, res = minimized(pair, ctx, H, "fins")
        ub = upper_bound_check(res, 2)
        assert ub.vol == qc.volume and ub.ratio == ub.w / ub.vol
        lb = lower_bound_certificate(res, 1, 1, Fraction(1))
        assert lb.bound <= lb.w
        assert lb.alpha == 17  # |B_2| in F2


def test_coverage_identity_and_constant(f2):
    pair, ctx = f2
    H = enumerate_subgroups(pair, 1)[0]
    _, _, res = minimized(pair, ctx, H)
    assert coverage_radius(res, 1) == 0
    assert constant_map_coverage(ctx) == ctx.cusp.ball.radius


def test_coverage_is_stable_under_ball_growth():
    pair = free_pair(2)
    values = []
    for radius in (3, 4):
        ctx = CuspContext(cusped_from_pair(pair, radius, 2))
        values.append([coverage_radius(minimized(pair, ctx, H)[2], 1) for H in enumerate_subgroups(pair, 2)])
    assert values[0] == values[1]
    assert all(v is not None for v in values[0])


def test_survey_rows_and_summary(f2):
    pair, ctx = f2
    rows, summ = rigidity_survey(pair, SurveyConfig(max_index=2), ctx)
    assert [r.index for r in rows] == [1, 2, 2, 2]
    assert summ.errors == 0 and summ.vol_over_index_constant
    for r in rows:
        assert r.lower_bound <= r.w_leq_R
        assert len(r.csv_row()) == len(r.CSV_COLUMNS)


def test_survey_isolates_row_errors():
    pair = free_pair(2)
    ctx = CuspContext(cusped_from_pair(pair, 1, 1))
    rows, summ = rigidity_survey(pair, SurveyConfig(max_index=2, margin=1), ctx)
    assert summ.errors == len(rows)
    assert all(r.flags[0].startswith("error:") for r in rows)


def test_tie_order_is_deterministic(z2):
    pair, ctx = z2
    a = [r.pattern.to_json() for r in scrambled_resolutions(pair, ctx, "wedge")]
    b = [r.pattern.to_json() for r in scrambled_resolutions(pair, ctx, "wedge")]
    assert a == b
