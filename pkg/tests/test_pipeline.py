import random
from itertools import combinations, permutations, product

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import digraphs, graphs
from eppa import freeness as fr
from eppa.errors import GroupTooLarge, InvalidInstance, NotFree, StructureTooLarge
from eppa.pipeline import (
    MinSizeRule,
    enumerate_tournaments,
    extend_colored,
    extend_digraph,
    extend_graph,
    lift_colors,
    reduce_family,
)
from eppa.structures import (
    AllTuples,
    ColoredGraph,
    CriticalColoringSet,
    Digraph,
    Graph,
    Palette,
    PartialPermorphism,
    Tournament,
    as_colored,
)
from eppa.typerealize import extend_to_symmetries_colored, realize_types_inductive
from instances import random_graph_instance, random_partial_iso

EDGE = Graph(("0", "1"), frozenset({("0", "1")}))
K3 = Graph(("0", "1", "2"), frozenset({("0", "1"), ("1", "2"), ("0", "2")}))
P3 = Graph(("0", "1", "2"), frozenset({("0", "1"), ("1", "2")}))
ARC = Digraph(("0", "1"), frozenset({("0", "1")}))


def test_single_edge_example():
    r = extend_graph(EDGE, [{"0": "1"}], 3)
    assert r.certified
    f = r.maps[0]
    assert f["0"] == "1"
    assert fr.find_critical_clique(r.B, 3) is None


def test_clique_input_is_not_free():
    with pytest.raises(NotFree) as e:
        extend_graph(K3, [{"0": "1"}], 3)
    assert set(e.value.witness.vertices) == {"0", "1", "2"}


def test_bad_map_is_rejected():
    with pytest.raises(InvalidInstance):
        extend_graph(P3, [{"0": "1", "1": "0", "2": "0"}], 3)


def test_level_bookkeeping_on_path():
    r = extend_graph(P3, [{"0": "1", "1": "2"}], 3)
    assert r.certified
    assert [s["m"] for s in r.stats] == [3, 2, 1]
    # every lift adds one colour per point of that level's C
    for lower, upper in zip(r.stats, r.stats[1:]):
        assert upper["colors"] - lower["colors"] == lower["C"]
    assert all(rep.ok for _, rep in r.level_reports)


def test_projection_keeps_graph_and_old_colours():
    r = extend_graph(P3, [{"0": "1", "1": "2"}], 3)
    assert r.B.graph == r.B_full.graph
    assert r.B.palettes == ()


def _automorphisms(g):
    out = []
    for perm in permutations(g.vertices):
        f = dict(zip(g.vertices, perm))
        if all(g.adjacent(u, v) == g.adjacent(f[u], f[v]) for u, v in combinations(g.vertices, 2)):
            out.append(f)
    return out


@given(graphs(max_n=4), st.integers(0, 10 ** 6), st.sampled_from((3, 4)))
@settings(max_examples=25)
def test_total_maps_collapse_end_to_end(g, seed, m):
    if fr.find_critical_clique(g, m) is not None:
        return
    rng = random.Random(seed)
    autos = _automorphisms(g)
    maps = [rng.choice(autos) for _ in range(rng.randint(1, 2))]
    r = extend_graph(g, maps, m)
    assert r.certified
    assert len(r.B.vertices) == len(g.vertices)
    assert r.maps == [dict(p) for p in maps]


def test_caps_are_reported_with_level():
    with pytest.raises(GroupTooLarge) as e:
        extend_graph(P3, [{"0": "1", "1": "2"}], 3, cap_group=1)
    assert e.value.level == 3
    with pytest.raises(StructureTooLarge):
        extend_graph(P3, [{"0": "1", "1": "2"}], 3, cap_structure=4)
    with pytest.raises(StructureTooLarge):
        extend_graph(P3, [{"0": "1", "1": "2"}], 3, cap_incidences=3)


def test_results_are_deterministic():
    a = extend_graph(P3, [{"0": "1", "1": "2"}], 3)
    b = extend_graph(P3, [{"0": "1", "1": "2"}], 3)
    assert a.B == b.B and a.maps == b.maps


def test_strict_ledger_needs_pair_coverage():
    r = extend_graph(EDGE, [{"0": "1"}, {"1": "0"}], 3, strict_ledger=True)
    assert r.certified
    with pytest.raises(InvalidInstance):
        extend_graph(EDGE, [{"0": "1"}], 3, strict_ledger=True)


def test_one_vertex_base_level():
    A = ColoredGraph(Graph(("0",)), (Palette(1, ("V",)),), {"0": frozenset({"V"})})
    r = extend_colored(A, [{"0": "0"}], 1, CriticalColoringSet(frozenset()))
    assert r.certified and len(r.B.vertices) == 1


@given(st.integers(0, 10 ** 6))
@settings(max_examples=20)
def test_lift_colors_invariants(seed):
    rng = random.Random(seed)
    g, raw, m = random_graph_instance(rng, max_n=3, ms=(3,))
    if fr.find_critical_clique(g, m) is not None:
        return
    A = as_colored(g)
    maps = [PartialPermorphism(p) for p in raw]
    U = CriticalColoringSet.plain()
    tr = realize_types_inductive(A, m - 1, U, [p.chi for p in maps])
    ext = extend_to_symmetries_colored(tr, maps)
    lift = lift_colors(tr.C, ext, U, A, maps, level=1)
    C = tr.C
    col = lift.color_of
    assert set(lift.newPalette.colors) == set(col.values()) and len(col) == len(C.vertices)
    for a in A.vertices:
        for d in C.vertices:
            assert (col[d] in lift.A.colors(a)) == C.graph.adjacent(d, a)
    for p, chi in zip(maps, lift.newChis):
        assert lift.newCritical.is_invariant(chi)
        for a, b in p.map.items():
            assert chi(col[a]) == col[b]
    # with the plain base set every single new colour is critical
    for d in C.vertices:
        assert lift.newCritical.contains((col[d],))
    # the lifted A avoids critical K_{m-1}
    assert fr.find_critical_clique(lift.A, m - 1, lift.newCritical) is None
    for p in lift.maps:
        assert p.problems(lift.A) == []


def test_lift_of_lonely_vertex():
    A = as_colored(Graph(("0",)))
    tr = realize_types_inductive(A, 1, CriticalColoringSet.plain())
    ext = extend_to_symmetries_colored(tr, [])
    lift = lift_colors(tr.C, ext, CriticalColoringSet.plain(), A, [], level=1)
    assert len(lift.newPalette.colors) == len(tr.C.vertices) == 1
    assert lift.A.colors("0") == frozenset()


def test_digraph_single_arc_all_triangles_forbidden():
    forb = enumerate_tournaments(3)
    r = extend_digraph(ARC, [{"0": "1"}], forb)
    assert r.certified
    assert r.maps[0]["0"] == "1"
    for T in forb:
        assert fr.find_critical_tournament_copy(r.B, T, AllTuples(3)) is None


def test_digraph_total_maps_collapse():
    cyc = Digraph(("0", "1", "2"), frozenset({("0", "1"), ("1", "2"), ("2", "0")}))
    r = extend_digraph(cyc, [{"0": "1", "1": "2", "2": "0"}], [enumerate_tournaments(4)[0]])
    assert r.certified and len(r.B.vertices) == 3
    assert r.maps == [{"0": "1", "1": "2", "2": "0"}]


def test_digraph_not_free():
    cyc = Digraph(("0", "1", "2"), frozenset({("0", "1"), ("1", "2"), ("2", "0")}))
    with pytest.raises(NotFree):
        extend_digraph(cyc, [{}], enumerate_tournaments(3))


def test_digraph_size_one_tournament_forbids_points_with_colours():
    from eppa.structures import ColoredDigraph, ExplicitTuples

    T1 = Tournament(("t1",))
    U = ExplicitTuples(frozenset({(frozenset({"bad"}),)}), frozenset({"bad"}))
    A = ColoredDigraph(ARC, ("bad",), {})
    r = extend_digraph(A, [{"0": "1"}], [(T1, U), (enumerate_tournaments(3)[1], AllTuples(3))])
    assert r.certified
    assert all("bad" not in cs for cs in r.B.color_sets)


@pytest.mark.parametrize("k,count", [(1, 1), (2, 1), (3, 2), (4, 4), (5, 12)])
def test_enumerate_tournaments(k, count):
    ts = enumerate_tournaments(k)
    assert len(ts) == count
    assert all(not t.problems() and len(t.vertices) == k for t in ts)
    for s, t in combinations(ts, 2):
        assert not oracles.has_tournament_copy(s.vertices, s.arcs, t.vertices, t.arcs)
    assert ts == enumerate_tournaments(k)


def test_reduce_family_examples():
    F0 = reduce_family(MinSizeRule(3), 2)
    assert F0 == enumerate_tournaments(3)
    small = enumerate_tournaments(2)
    assert reduce_family(small, 2) == small + enumerate_tournaments(3)
    # members larger than the structure are dropped in favour of all tournaments one size up
    assert reduce_family(enumerate_tournaments(5)[:1], 3) == enumerate_tournaments(4)


@given(digraphs(max_n=4), st.integers(1, 4))
def test_reduced_family_is_sound(d, s):
    F0 = reduce_family(MinSizeRule(s), len(d.vertices))
    direct = oracles.contains_tournament_at_least(d.vertices, d.arcs, s)
    reduced = fr.check(d, fr.TournamentFree(tuple((t, AllTuples(len(t.vertices))) for t in F0))) is not None
    assert direct == reduced
