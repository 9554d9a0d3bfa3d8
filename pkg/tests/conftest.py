from itertools import combinations

from hypothesis import settings, strategies as st

from eppa.structures import ColoredGraph, Digraph, Graph, Palette

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=60)
settings.load_profile("repo")


@st.composite
def graphs(draw, max_n=6):
    n = draw(st.integers(0, max_n))
    vs = tuple(str(i) for i in range(n))
    pairs = list(combinations(vs, 2))
    bits = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph(vs, frozenset(p for p, b in zip(pairs, bits) if b))


@st.composite
def digraphs(draw, max_n=5, tournament=False):
    n = draw(st.integers(1 if tournament else 0, max_n))
    vs = tuple(str(i) for i in range(n))
    arcs = set()
    for u, v in combinations(vs, 2):
        x = draw(st.sampled_from((0, 1) if tournament else (0, 1, 2)))
        if x == 0:
            arcs.add((u, v))
        elif x == 1:
            arcs.add((v, u))
    return Digraph(vs, frozenset(arcs))


@st.composite
def colored_graphs(draw, max_n=5, palettes=2, colors_per=2):
    g = draw(graphs(max_n))
    pals = tuple(Palette(j, tuple(f"c{j}{k}" for k in range(colors_per))) for j in range(1, palettes + 1))
    coloring = {}
    for v in g.vertices:
        cs = set()
        for p in pals:
            cs |= set(draw(st.sets(st.sampled_from(p.colors))))
        coloring[v] = frozenset(cs)
    return ColoredGraph(g, pals, coloring)
