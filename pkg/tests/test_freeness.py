from itertools import combinations, permutations

import pytest
from hypothesis import given, strategies as st

import oracles
from conftest import colored_graphs, digraphs, graphs
from eppa import freeness as fr
from eppa.errors import BudgetExhausted
from eppa.pipeline import enumerate_tournaments
from eppa.structures import (
    AllTuples,
    ColoredDigraph,
    ColoredGraph,
    ColorPermutation,
    CriticalColoringSet,
    Digraph,
    ExplicitTuples,
    Graph,
    Palette,
    RelationalStructure,
    Tournament,
)

K3 = Graph(("0", "1", "2"), frozenset({("0", "1"), ("1", "2"), ("0", "2")}))
C5 = Graph(tuple("01234"), frozenset((str(i), str((i + 1) % 5)) for i in range(5)))
CYCLE3 = Tournament.from_matrix([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
TRANS3 = Tournament.from_matrix([[0, 1, 1], [0, 0, 1], [0, 0, 0]])


def test_clique_examples():
    assert fr.find_critical_clique(K3, 3).vertices == ("0", "1", "2")
    assert fr.find_critical_clique(C5, 3) is None
    one = ColoredGraph(Graph(("0",)), (Palette(1, ("V",)),), {"0": frozenset({"V"})})
    w = fr.find_critical_clique(one, 1, CriticalColoringSet(frozenset({("V",)})))
    assert w.vertices == ("0",) and w.coloring == ("V",)


@given(graphs(max_n=6), st.integers(1, 4))
def test_plain_clique_search_agrees_with_subsets(g, m):
    w = fr.find_critical_clique(g, m)
    assert (w is not None) == oracles.has_clique(g.vertices, g.edges, m)
    if w is not None:
        assert all(g.adjacent(u, v) for u, v in combinations(w.vertices, 2))


def _brute_critical(g: ColoredGraph, m, U):
    for sub in combinations(g.vertices, m):
        if all(g.graph.adjacent(u, v) for u, v in combinations(sub, 2)):
            for t in U.tuples:
                if all(set(t) <= g.colors(v) for v in sub):
                    return True
    return False


@given(colored_graphs(max_n=5), st.integers(1, 3), st.data())
def test_critical_clique_search_agrees_with_subsets(g, m, data):
    tuples = data.draw(st.sets(st.tuples(st.sampled_from(("c10", "c11")), st.sampled_from(("c20", "c21"))), min_size=1))
    U = CriticalColoringSet(frozenset(tuples))
    w = fr.find_critical_clique(g, m, U)
    assert (w is not None) == _brute_critical(g, m, U)
    if w is not None:
        assert w.coloring in U.tuples
        assert all(set(w.coloring) <= g.colors(v) for v in w.vertices)


def test_clique_budget_reports_exhaustion():
    big = Graph(tuple(map(str, range(8))), frozenset())
    with pytest.raises(BudgetExhausted):
        fr.find_critical_clique(big, 3, budget=3)


def test_realisable_edge_example():
    A = ColoredGraph(Graph(("a", "b"), frozenset({("a", "b")})), (Palette(1, ("V", "W")),),
                     {"a": frozenset({"V"}), "b": frozenset({"V"})})
    U = CriticalColoringSet(frozenset({("V",)}))
    assert not fr.is_realisable_graph(A, ["a", "b"], {"V", "W"}, 2, U)
    assert fr.is_realisable_graph(A, ["a", "b"], {"W"}, 2, U)
    assert fr.is_realisable_graph(A, [], {"V"}, 2, U)


@given(colored_graphs(max_n=4, palettes=1), st.integers(1, 3), st.data())
def test_realiser_agrees_with_predicate_and_is_monotone(g, m, data):
    U = CriticalColoringSet(frozenset(data.draw(st.sets(st.tuples(st.sampled_from(("c10", "c11"))), min_size=1))))
    ok = fr.graph_realiser(g, m, U)
    n = len(g.vertices)
    for U0 in (frozenset(), frozenset({"c10"}), frozenset({"c10", "c11"})):
        for mask in range(1 << n):
            A0 = [g.vertices[i] for i in range(n) if mask >> i & 1]
            r = fr.is_realisable_graph(g, A0, U0, m, U)
            assert ok(mask, U0) == r
            if r:
                for sub in range(mask + 1):
                    if sub & mask == sub:
                        assert ok(sub, U0)


@given(colored_graphs(max_n=4, palettes=1), st.integers(1, 3))
def test_realisability_transported_by_automorphisms(g, m):
    U = CriticalColoringSet(frozenset({("c10",), ("c11",)}))
    swap = ColorPermutation({"c10": "c11", "c11": "c10"})
    n = len(g.vertices)
    for perm in permutations(g.vertices):
        f = dict(zip(g.vertices, perm))
        if any(g.graph.adjacent(u, v) != g.graph.adjacent(f[u], f[v]) for u, v in combinations(g.vertices, 2)):
            continue
        if any(swap.image(g.colors(v)) != g.colors(f[v]) for v in g.vertices):
            continue
        for mask in range(1 << n):
            A0 = [g.vertices[i] for i in range(n) if mask >> i & 1]
            for U0 in (frozenset(), frozenset({"c10"}), frozenset({"c10", "c11"})):
                assert fr.is_realisable_graph(g, A0, U0, m, U) == fr.is_realisable_graph(
                    g, [f[a] for a in A0], swap.image(U0), m, U)


def test_tournament_copy_examples():
    cyc = Digraph(CYCLE3.vertices, CYCLE3.arcs)
    assert fr.find_critical_tournament_copy(cyc, CYCLE3, AllTuples(3)) is not None
    assert fr.find_critical_tournament_copy(Digraph(TRANS3.vertices, TRANS3.arcs), CYCLE3, AllTuples(3)) is None
    arc = Digraph(("0", "1"), frozenset({("0", "1")}))
    assert fr.find_critical_tournament_copy(arc, CYCLE3, AllTuples(3)) is None


@given(digraphs(max_n=5), st.integers(2, 4), st.data())
def test_tournament_copy_agrees_with_permutations(d, k, data):
    T = data.draw(st.sampled_from(enumerate_tournaments(k)))
    w = fr.find_critical_tournament_copy(d, T, AllTuples(k))
    assert (w is not None) == oracles.has_tournament_copy(d.vertices, d.arcs, T.vertices, T.arcs)


def test_critical_tuples_use_exact_sets():
    d = ColoredDigraph(Digraph(CYCLE3.vertices, CYCLE3.arcs), ("V", "W"),
                       {v: frozenset({"V"}) for v in CYCLE3.vertices})
    only_v = ExplicitTuples(frozenset({(frozenset({"V"}),) * 3}), frozenset({"V", "W"}))
    assert fr.find_critical_tournament_copy(d, CYCLE3, only_v) is not None
    vw = ExplicitTuples(frozenset({(frozenset({"V", "W"}),) * 3}), frozenset({"V", "W"}))
    assert fr.find_critical_tournament_copy(d, CYCLE3, vw) is None


def test_split_tournament_signs():
    rest, signs = fr.split_tournament(CYCLE3)
    assert rest.vertices == ("t2", "t3") and signs == ("+", "-")


def test_realisable_digraph_cycle_example():
    # t1 -> t2 -> t3 -> t1: a new point with out-neighbour a and in-neighbour b closes a
    # 3-cycle exactly when a -> b
    forb = [(CYCLE3, AllTuples(3))]
    A = ColoredDigraph(Digraph(("a", "b"), frozenset({("a", "b")})), (), {})
    assert not fr.is_realisable_digraph(A, ["a"], ["b"], (), forb)
    B = ColoredDigraph(Digraph(("a", "b"), frozenset({("b", "a")})), (), {})
    assert fr.is_realisable_digraph(B, ["a"], ["b"], (), forb)
    assert fr.is_realisable_digraph(A, [], [], (), forb)


def _copy_with_first(big: Digraph, T: Tournament, first: str) -> bool:
    others = [v for v in big.vertices if v != first]
    for img in permutations(others, len(T.vertices) - 1):
        f = dict(zip(T.vertices, (first,) + img))
        if all(((f[u], f[v]) in big.arcs) == ((u, v) in T.arcs) for u in T.vertices for v in T.vertices if u != v):
            return True
    return False


@given(digraphs(max_n=3), st.data())
def test_digraph_freeness_link(d, data):
    # a new point avoids playing the first vertex of a forbidden copy iff its type is realisable
    forb = [(T, AllTuples(3)) for T in enumerate_tournaments(3)]
    plus = data.draw(st.sets(st.sampled_from(d.vertices))) if d.vertices else set()
    rest = [v for v in d.vertices if v not in plus]
    minus = data.draw(st.sets(st.sampled_from(rest))) if rest else set()
    arcs = set(d.arcs) | {("x", a) for a in plus} | {(a, "x") for a in minus}
    big = Digraph(d.vertices + ("x",), frozenset(arcs))
    free = not any(_copy_with_first(big, T, "x") for T, _ in forb)
    A = ColoredDigraph(d, (), {})
    assert free == fr.is_realisable_digraph(A, plus, minus, (), forb)


def _edge_struct(n, edges):
    u = tuple(map(str, range(n)))
    pairs = {(a, b) for a, b in edges} | {(b, a) for a, b in edges}
    return RelationalStructure((("R", 2),), u, {"R": frozenset(pairs)})


def test_link_structures():
    assert fr.is_link_structure(RelationalStructure((("R", 2),), ("0",)))
    assert fr.is_link_structure(_edge_struct(2, [("0", "1")]))
    assert not fr.is_link_structure(RelationalStructure((("R", 2),), ("0", "1")))


def test_same_link_type_examples():
    a = _edge_struct(3, [("0", "1")])
    assert fr.same_link_type(a, a)
    assert not fr.same_link_type(a, _edge_struct(3, []))
    assert fr.same_link_type(a, _edge_struct(4, [("0", "1"), ("2", "3"), ("1", "2")]))


def test_weak_homomorphism_examples():
    k2 = fr.clique_structure(2)
    point = RelationalStructure((("R", 2),), ("v",))
    assert not fr.is_weak_homomorphism({"0": "v", "1": "v"}, k2, point)
    assert fr.is_weak_homomorphism({"0": "0", "1": "1"}, k2, k2)
    assert fr.weakhom_free(k2, []) is None
    assert fr.weakhom_free(fr.clique_structure(3), [fr.clique_structure(3)]) is not None


@given(graphs(max_n=6), st.sampled_from((3, 4)))
def test_weak_homomorphisms_from_cliques_are_embeddings(g, m):
    rs = RelationalStructure.from_graph(g)
    w = fr.weakhom_free(rs, [fr.clique_structure(m)])
    assert (w is None) == (fr.find_critical_clique(g, m) is None)
    if w is not None:
        assert len(set(w.vertices)) == m
