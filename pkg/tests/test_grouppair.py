import json

import pytest
from hypothesis import given, settings, strategies as st

from cuspwork.errors import BudgetExceeded, InputError, PresentationError
from cuspwork.grouppair import (
    GroupPair,
    cayley_ball,
    enumerate_subgroups,
    free_pair,
    free_reduce,
    induced_peripherals,
    inverse,
    load_pair,
    peripheral_cosets,
    stallings_fold,
    subgroup_from_generators,
)

from oracles import count_subgroups_free, count_sublattices_z2, free_word_length

Z2 = {"generators": ["a", "b"], "relators": ["abAB"], "peripherals": [["a"]]}
words = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=12).map(tuple)


def fmt(pair, ws):
    return [pair.presentation.format(w) for w in ws]


def test_parse_and_format():
    p = free_pair(2).presentation
    assert p.parse("a^2b^-1") == (1, 1, -2)
    assert p.parse("aA") == ()
    assert p.format(p.parse("abAB")) == "abAB"
    with pytest.raises(InputError):
        p.parse("ac")


def test_unsupported_presentation_rejected():
    with pytest.raises(PresentationError):
        GroupPair.from_json({"generators": ["a", "b"], "relators": ["aabbb"], "peripherals": [["a"]]})


def test_rewriting_presentation():
    # Z/2 * Z/2 ... as a^2 = 1 with rule aa -> 1
    pair = GroupPair.from_json(
        {"generators": ["a", "b"], "relators": ["aa"], "peripherals": [["b"]], "rewriting": [["aa", ""], ["A", "a"]]}
    )
    g = pair.group
    assert g.kind == "rewriting"
    assert g.nf((1, 1, 2)) == (2,)
    assert g.nf((-1, 2)) == (1, 2)


def test_free_ball_counts():
    b = cayley_ball(free_pair(2), 2)
    assert b.graph.n == 17 and b.sphere_sizes == [1, 4, 12]
    assert len(b.graph.edges) == 16


def test_infinite_cyclic_ball_is_path():
    pair = GroupPair.from_json({"generators": ["a"], "peripherals": [["a"]]})
    b = cayley_ball(pair, 5)
    assert b.graph.n == 11 and len(b.graph.edges) == 10
    assert max(b.graph.degree(v) for v in range(11)) == 2


def test_z2_ball_is_diamond():
    b = cayley_ball(GroupPair.from_json(Z2), 3)
    assert b.sphere_sizes == [1, 4, 8, 12]


@settings(max_examples=100, deadline=None)
@given(words, words)
def test_free_group_axioms(u, v):
    g = free_pair(2).group
    assert len(g.nf(u)) == free_word_length(u)
    assert g.mul(g.nf(u), g.inv(u)) == ()
    assert g.mul(u, v) == g.nf(g.nf(u) + g.nf(v))


@settings(max_examples=60, deadline=None)
@given(words, words)
def test_abelian_commutes(u, v):
    g = GroupPair.from_json(Z2).group
    assert g.mul(u, v) == g.mul(v, u)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_free_subgroup_counts_match_oracle(n):
    recs = [r for r in enumerate_subgroups(free_pair(2), n) if r.index == n]
    assert len(recs) == count_subgroups_free(n, 2)
    assert len({r.table for r in recs}) == len(recs)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 6])
def test_abelian_subgroup_counts(n):
    recs = [r for r in enumerate_subgroups(GroupPair.from_json(Z2), n) if r.index == n]
    assert len(recs) == count_sublattices_z2(n)


def test_stallings_rank_formula():
    for r in enumerate_subgroups(free_pair(2), 3):
        assert r.automaton["rank"] - 1 == r.index * (2 - 1)
        for w in r.schreier_generators():
            assert r.contains(w)


def test_stallings_infinite_index_graph():
    n, trans = stallings_fold([(1,)], 2)
    assert n == 1 and len(trans) == 1


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        enumerate_subgroups(free_pair(2), 4, budget=10)


def test_induced_peripherals_examples():
    pair = free_pair(2)
    H = subgroup_from_generators(pair, ["a", "b^2", "bab^-1"])
    ind = induced_peripherals(H, pair)
    assert [(pair.presentation.format(x.representative), fmt(pair, x.generators)) for x in ind] == [
        ("1", ["a"]),
        ("b", ["baB"]),
    ]
    H = subgroup_from_generators(pair, ["a^2", "ab", "b^2"])
    ind = induced_peripherals(H, pair)
    assert [(pair.presentation.format(x.representative), fmt(pair, x.generators)) for x in ind] == [("1", ["aa"])]


@pytest.mark.parametrize("n", [2, 3])
def test_induced_peripherals_partition_cosets(n):
    pair = free_pair(2)
    for H in enumerate_subgroups(pair, n):
        ind = induced_peripherals(H, pair)
        orbits = [c for x in ind for c in x.orbit]
        assert sorted(orbits) == list(range(H.index))
        for x in ind:
            for g in x.generators:
                assert H.contains(g)
                # conjugating back lands in <a>
                inner = pair.group.nf(inverse(x.representative) + g + x.representative)
                assert set(abs(t) for t in inner) == {1}


def test_peripheral_cosets_free_rank_two():
    pair = free_pair(2)
    ball = cayley_ball(pair, 2)
    cos = peripheral_cosets(ball, pair)
    sizes = sorted(len(c.vertices) for c in cos)
    # identity axis a^-2..a^2, two 3-vertex cosets b<a>, B<a>, and six singletons
    assert sizes == [1] * 6 + [3, 3, 5]
    assert all(c.connected for c in cos)
    assert sum(c.clipped for c in cos) == 9


def test_presentation_json_roundtrip(tmp_path):
    pair = GroupPair.from_json(Z2)
    f = tmp_path / "p.json"
    f.write_text(json.dumps(pair.to_json()))
    assert load_pair(f).to_json() == pair.to_json()
    f.write_text("{bad")
    with pytest.raises(InputError):
        load_pair(f)


def test_coset_table_csv():
    recs = enumerate_subgroups(free_pair(2), 2)
    text = recs[1].to_csv(["a", "b"])
    assert text.splitlines()[0] == "coset,a,b"
    assert len(text.splitlines()) == 3


@settings(max_examples=50, deadline=None)
@given(words)
def test_free_reduce_idempotent(w):
    assert free_reduce(free_reduce(w)) == free_reduce(w)
