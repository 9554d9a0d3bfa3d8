"""Immutable carriers: graphs, digraphs, colourings, colour permutations and partial maps.

Vertices and colours are plain strings.  Every structure keeps its vertices in a
fixed order; internal algorithms work on the positions in that order, which the
structures expose through cached index tables.

Constructors are lenient: they normalise their input but do not reject
semantically broken data (a loop, a 2-cycle in a digraph, an undeclared
colour).  Use :meth:`problems` or :func:`validate_instance` to list violations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

VertexId = str
ColorId = str

FORMAT_VERSION = 1


def _uniq(items: Iterable[str]) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for x in items:
        seen.setdefault(str(x), None)
    return tuple(seen)


@dataclass(frozen=True)
class Graph:
    """A simple undirected graph; ``edges`` holds pairs ordered by vertex position."""

    vertices: tuple[VertexId, ...]
    edges: frozenset[tuple[VertexId, VertexId]] = frozenset()

    def __post_init__(self):
        verts = _uniq(self.vertices)
        pos = {v: i for i, v in enumerate(verts)}
        norm = set()
        for e in self.edges:
            u, v = (str(x) for x in e)
            if pos.get(u, -1) > pos.get(v, -1):
                u, v = v, u
            norm.add((u, v))
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", frozenset(norm))

    directed = False

    @cached_property
    def index(self) -> dict[VertexId, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def adj(self) -> tuple[frozenset[int], ...]:
        nb: list[set[int]] = [set() for _ in self.vertices]
        idx = self.index
        for u, v in self.edges:
            if u in idx and v in idx and u != v:
                nb[idx[u]].add(idx[v])
                nb[idx[v]].add(idx[u])
        return tuple(frozenset(s) for s in nb)

    # a graph is a digraph whose arcs go both ways
    @property
    def out_adj(self) -> tuple[frozenset[int], ...]:
        return self.adj

    @property
    def in_adj(self) -> tuple[frozenset[int], ...]:
        return self.adj

    def adjacent(self, u: VertexId, v: VertexId) -> bool:
        i, j = self.index.get(u), self.index.get(v)
        return i is not None and j is not None and j in self.adj[i]

    def neighbors(self, v: VertexId) -> frozenset[VertexId]:
        return frozenset(self.vertices[j] for j in self.adj[self.index[v]])

    def __len__(self) -> int:
        return len(self.vertices)

    def problems(self) -> list[str]:
        out = []
        for u, v in sorted(self.edges):
            if u == v:
                out.append(f"loop at {u!r} (irreflexivity)")
            for x in (u, v):
                if x not in self.index:
                    out.append(f"edge endpoint {x!r} is not a vertex")
        return out

    def induced(self, keep: Iterable[VertexId]) -> Graph:
        keep = set(keep)
        verts = [v for v in self.vertices if v in keep]
        return Graph(tuple(verts), frozenset(e for e in self.edges if e[0] in keep and e[1] in keep))


@dataclass(frozen=True)
class Digraph:
    """A finite directed graph; irreflexive and antisymmetric when valid."""

    vertices: tuple[VertexId, ...]
    arcs: frozenset[tuple[VertexId, VertexId]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "vertices", _uniq(self.vertices))
        object.__setattr__(self, "arcs", frozenset((str(u), str(v)) for u, v in self.arcs))

    directed = True

    @cached_property
    def index(self) -> dict[VertexId, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def out_adj(self) -> tuple[frozenset[int], ...]:
        nb: list[set[int]] = [set() for _ in self.vertices]
        idx = self.index
        for u, v in self.arcs:
            if u in idx and v in idx and u != v:
                nb[idx[u]].add(idx[v])
        return tuple(frozenset(s) for s in nb)

    @cached_property
    def in_adj(self) -> tuple[frozenset[int], ...]:
        nb: list[set[int]] = [set() for _ in self.vertices]
        for i, outs in enumerate(self.out_adj):
            for j in outs:
                nb[j].add(i)
        return tuple(frozenset(s) for s in nb)

    def has_arc(self, u: VertexId, v: VertexId) -> bool:
        return (u, v) in self.arcs

    def __len__(self) -> int:
        return len(self.vertices)

    def problems(self) -> list[str]:
        out = []
        for u, v in sorted(self.arcs):
            if u == v:
                out.append(f"loop at {u!r} (irreflexivity)")
            elif (v, u) in self.arcs and u < v:
                out.append(f"arcs ({u!r},{v!r}) and ({v!r},{u!r}) both present (antisymmetry)")
            for x in (u, v):
                if x not in self.index:
                    out.append(f"arc endpoint {x!r} is not a vertex")
        return out

    def induced(self, keep: Iterable[VertexId]) -> Digraph:
        keep = set(keep)
        verts = [v for v in self.vertices if v in keep]
        return Digraph(tuple(verts), frozenset(a for a in self.arcs if a[0] in keep and a[1] in keep))


@dataclass(frozen=True)
class Tournament(Digraph):
    """A digraph with exactly one arc between any two distinct vertices.

    The vertex order matters: the first vertex plays the distinguished role
    when a tournament is split around a point.
    """

    def problems(self) -> list[str]:
        out = super().problems()
        n = len(self.vertices)
        for i in range(n):
            for j in range(i + 1, n):
                u, v = self.vertices[i], self.vertices[j]
                if (u, v) not in self.arcs and (v, u) not in self.arcs:
                    out.append(f"no arc between {u!r} and {v!r} (totality)")
        return out

    def without_first(self) -> Tournament:
        rest = self.vertices[1:]
        keep = set(rest)
        return Tournament(rest, frozenset(a for a in self.arcs if a[0] in keep and a[1] in keep))

    @classmethod
    def from_matrix(cls, rows: Sequence[Sequence[int]], names: Sequence[str] | None = None) -> Tournament:
        names = list(names) if names is not None else [f"t{i + 1}" for i in range(len(rows))]
        arcs = {(names[i], names[j]) for i, row in enumerate(rows) for j, x in enumerate(row) if x}
        return cls(tuple(names), frozenset(arcs))


@dataclass(frozen=True)
class Palette:
    index: int
    colors: tuple[ColorId, ...]

    def __post_init__(self):
        object.__setattr__(self, "colors", _uniq(self.colors))


def _color_table(vertices, coloring) -> tuple[frozenset[ColorId], ...]:
    return tuple(frozenset(coloring.get(v, ())) for v in vertices)


@dataclass(frozen=True)
class ColoredGraph:
    """A graph whose vertices carry sets of colours drawn from disjoint palettes."""

    graph: Graph
    palettes: tuple[Palette, ...] = ()
    coloring: Mapping[VertexId, frozenset[ColorId]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "palettes", tuple(self.palettes))
        cleaned = {str(v): frozenset(cs) for v, cs in self.coloring.items() if cs}
        object.__setattr__(self, "coloring", cleaned)

    directed = False

    @property
    def vertices(self) -> tuple[VertexId, ...]:
        return self.graph.vertices

    @property
    def base(self) -> Graph:
        return self.graph

    @cached_property
    def color_sets(self) -> tuple[frozenset[ColorId], ...]:
        return _color_table(self.graph.vertices, self.coloring)

    @cached_property
    def palette_of(self) -> dict[ColorId, int]:
        return {c: p.index for p in self.palettes for c in p.colors}

    @cached_property
    def all_colors(self) -> tuple[ColorId, ...]:
        return tuple(c for p in self.palettes for c in p.colors)

    def colors(self, v: VertexId) -> frozenset[ColorId]:
        return self.coloring.get(v, frozenset())

    def colors_in(self, v: VertexId, j: int) -> frozenset[ColorId]:
        pal = self.palette_of
        return frozenset(c for c in self.colors(v) if pal.get(c) == j)

    def problems(self) -> list[str]:
        out = self.graph.problems()
        seen: dict[ColorId, int] = {}
        for p in self.palettes:
            for c in p.colors:
                if c in seen:
                    out.append(f"colour {c!r} lies in palettes {seen[c]} and {p.index}")
                seen[c] = p.index
        idx = self.graph.index
        for v, cs in sorted(self.coloring.items()):
            if v not in idx:
                out.append(f"coloured vertex {v!r} is not a vertex")
            for c in sorted(cs):
                if c not in seen:
                    out.append(f"colour {c!r} of {v!r} is in no palette")
        return out

    def with_graph_only(self) -> ColoredGraph:
        return ColoredGraph(self.graph)

    def restrict_palettes(self, keep: Iterable[int]) -> ColoredGraph:
        keep = set(keep)
        pals = tuple(p for p in self.palettes if p.index in keep)
        allowed = {c for p in pals for c in p.colors}
        col = {v: cs & allowed for v, cs in self.coloring.items()}
        return ColoredGraph(self.graph, pals, col)


@dataclass(frozen=True)
class ColoredDigraph:
    """A digraph whose vertices carry arbitrary subsets of one finite colour set."""

    digraph: Digraph
    colors: tuple[ColorId, ...] = ()
    coloring: Mapping[VertexId, frozenset[ColorId]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "colors", _uniq(self.colors))
        cleaned = {str(v): frozenset(cs) for v, cs in self.coloring.items() if cs}
        object.__setattr__(self, "coloring", cleaned)

    directed = True

    @property
    def vertices(self) -> tuple[VertexId, ...]:
        return self.digraph.vertices

    @property
    def base(self) -> Digraph:
        return self.digraph

    @cached_property
    def color_sets(self) -> tuple[frozenset[ColorId], ...]:
        return _color_table(self.digraph.vertices, self.coloring)

    @property
    def all_colors(self) -> tuple[ColorId, ...]:
        return self.colors

    def colors_of(self, v: VertexId) -> frozenset[ColorId]:
        return self.coloring.get(v, frozenset())

    def problems(self) -> list[str]:
        out = self.digraph.problems()
        declared = set(self.colors)
        idx = self.digraph.index
        for v, cs in sorted(self.coloring.items()):
            if v not in idx:
                out.append(f"coloured vertex {v!r} is not a vertex")
            for c in sorted(cs - declared):
                out.append(f"colour {c!r} of {v!r} is not declared")
        return out

    def restrict_colors(self, keep: Iterable[ColorId]) -> ColoredDigraph:
        keep = frozenset(keep)
        cols = tuple(c for c in self.colors if c in keep)
        return ColoredDigraph(self.digraph, cols, {v: cs & keep for v, cs in self.coloring.items()})


def as_colored(s) -> ColoredGraph | ColoredDigraph:
    """Wrap a bare graph or digraph as an uncoloured coloured structure."""
    if isinstance(s, (ColoredGraph, ColoredDigraph)):
        return s
    if isinstance(s, Graph):
        return ColoredGraph(s)
    if isinstance(s, Digraph):
        return ColoredDigraph(s)
    raise TypeError(f"not a graph or digraph: {type(s).__name__}")


@dataclass(frozen=True)
class ColorPermutation:
    """A permutation of colours; colours absent from ``mapping`` are fixed.

    Composition follows the right-action convention: ``p.then(q)`` applies
    ``p`` first.
    """

    mapping: Mapping[ColorId, ColorId] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "mapping", {str(k): str(v) for k, v in self.mapping.items() if k != v})

    def __call__(self, c: ColorId) -> ColorId:
        return self.mapping.get(c, c)

    def image(self, colors: Iterable[ColorId]) -> frozenset[ColorId]:
        m = self.mapping
        if not m:
            return frozenset(colors)
        if not isinstance(colors, (frozenset, set, tuple, list)):
            colors = tuple(colors)
        return frozenset(map(m.get, colors, colors))

    def then(self, other: ColorPermutation) -> ColorPermutation:
        keys = set(self.mapping) | set(other.mapping)
        return ColorPermutation({k: other(self(k)) for k in keys})

    def inverse(self) -> ColorPermutation:
        return ColorPermutation({v: k for k, v in self.mapping.items()})

    def is_bijection(self) -> bool:
        return set(self.mapping) == set(self.mapping.values())

    def is_identity(self) -> bool:
        return not self.mapping

    def __hash__(self):
        return hash(frozenset(self.mapping.items()))

    def __eq__(self, other):
        return isinstance(other, ColorPermutation) and dict(self.mapping) == dict(other.mapping)

    def union(self, other: ColorPermutation) -> ColorPermutation:
        merged = dict(self.mapping)
        merged.update(other.mapping)
        return ColorPermutation(merged)

    def restrict(self, colors: Iterable[ColorId]) -> ColorPermutation:
        keep = set(colors)
        return ColorPermutation({k: v for k, v in self.mapping.items() if k in keep})


IDENTITY = ColorPermutation()


@dataclass(frozen=True)
class PartialPermorphism:
    """A partial injective vertex map together with the colour permutation it respects."""

    map: Mapping[VertexId, VertexId]
    chi: ColorPermutation = IDENTITY

    def __post_init__(self):
        object.__setattr__(self, "map", {str(k): str(v) for k, v in self.map.items()})

    @property
    def domain(self) -> tuple[VertexId, ...]:
        return tuple(self.map)

    @property
    def range(self) -> tuple[VertexId, ...]:
        return tuple(self.map.values())

    def __call__(self, v: VertexId) -> VertexId:
        return self.map[v]

    def problems(self, s) -> list[str]:
        """Violations of injectivity and of the permorphism conditions on ``s``."""
        s = as_colored(s)
        out = []
        idx = s.base.index
        items = list(self.map.items())
        for a, b in items:
            for x in (a, b):
                if x not in idx:
                    out.append(f"map vertex {x!r} is not a vertex")
        if out:
            return out
        if len(set(self.map.values())) != len(items):
            out.append("map is not injective")
        if not self.chi.is_bijection():
            out.append("chi is not a bijection")
        cols = s.color_sets
        for a, b in items:
            want = self.chi.image(cols[idx[a]])
            if want != cols[idx[b]]:
                out.append(f"colours of {b!r} are not the chi-image of the colours of {a!r}")
        base = s.base
        rel = base.arcs if s.directed else None
        for a, b in items:
            for c, d in items:
                if a == c:
                    continue
                if s.directed:
                    if ((a, c) in rel) != ((b, d) in rel):
                        out.append(f"arc ({a!r},{c!r}) not preserved")
                elif a < c and base.adjacent(a, c) != base.adjacent(b, d):
                    out.append(f"edge {{{a!r},{c!r}}} not preserved")
        return out


@dataclass(frozen=True)
class CriticalColoringSet:
    """Forbidden colour tuples ``(V_1, ..., V_r)``, one colour per palette.

    With ``r = 0`` the set ``{()}`` makes clique freeness the plain notion.
    """

    tuples: frozenset[tuple[ColorId, ...]]
    r: int = 0

    def __post_init__(self):
        tuples = frozenset(tuple(str(c) for c in t) for t in self.tuples)
        object.__setattr__(self, "tuples", tuples)
        lengths = {len(t) for t in tuples}
        if len(lengths) > 1:
            raise ValueError("critical colourings of different lengths")
        if lengths:
            object.__setattr__(self, "r", lengths.pop())

    @classmethod
    def plain(cls) -> CriticalColoringSet:
        return cls(frozenset({()}), 0)

    def image(self, chi: ColorPermutation) -> CriticalColoringSet:
        return CriticalColoringSet(frozenset(tuple(chi(c) for c in t) for t in self.tuples), self.r)

    def is_invariant(self, chi: ColorPermutation) -> bool:
        return self.image(chi).tuples == self.tuples

    def __len__(self) -> int:
        return len(self.tuples)

    @cached_property
    def _ordered(self) -> tuple[tuple[ColorId, ...], ...]:
        return tuple(sorted(self.tuples))

    def find_within(self, colors: frozenset[ColorId] | None) -> tuple[ColorId, ...] | None:
        """The first critical tuple whose colours all lie in ``colors`` (None means unrestricted)."""
        for t in self._ordered:
            if colors is None or all(c in colors for c in t):
                return t
        return None


@dataclass(frozen=True, eq=False)
class LiftedColoringSet:
    """Critical colourings after adding the palette ``{U_d : d ∈ C}``, kept implicit.

    ``(V_1, ..., V_r, U_d)`` is critical iff ``(V_1, ..., V_r)`` is critical
    for ``base`` and the point ``d`` of ``C`` carries every ``V_j``.  The
    explicit set has up to ``|C|`` times as many tuples as ``base``, which
    compounds over the levels, so membership is answered on demand.
    """

    base: "CriticalColoringSet | LiftedColoringSet"
    point_of: Mapping[ColorId, VertexId]  # U_d -> d
    point_colors: Mapping[VertexId, frozenset[ColorId]]  # d -> its colours in C
    r: int
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    def find_within(self, colors: frozenset[ColorId] | None) -> tuple[ColorId, ...] | None:
        if colors in self._memo:
            return self._memo[colors]
        keys = self._keys
        cands = sorted(keys if colors is None else keys & colors)
        found = None
        if cands and self._base_colorblind:
            found = self.base.find_within(frozenset()) + (cands[0],)
            cands = ()
        for col in cands:
            carried = self.point_colors[self.point_of[col]]
            t = self.base.find_within(carried if colors is None else colors & carried)
            if t is not None:
                found = t + (col,)
                break
        self._memo[colors] = found
        return found

    @cached_property
    def _base_colorblind(self) -> bool:
        return self.base.find_within(frozenset()) is not None

    @cached_property
    def _keys(self) -> frozenset[ColorId]:
        return frozenset(self.point_of)

    def contains(self, t: Sequence[ColorId]) -> bool:
        if len(t) != self.r:
            return False
        d = self.point_of.get(t[-1])
        if d is None or not all(c in self.point_colors[d] for c in t[:-1]):
            return False
        base = self.base
        return base.contains(t[:-1]) if isinstance(base, LiftedColoringSet) else tuple(t[:-1]) in base.tuples

    def is_invariant(self, chi: ColorPermutation) -> bool:
        if not self.base.is_invariant(chi):
            return False
        for col, d in self.point_of.items():
            d2 = self.point_of.get(chi(col))
            if d2 is None or chi.image(self.point_colors[d]) != self.point_colors[d2]:
                return False
        return True


@dataclass(frozen=True)
class DesignatedColors:
    """The colour ``U_a^j`` per vertex ``a`` and palette ``j``: held by exactly the neighbours of ``a``."""

    entries: Mapping[tuple[VertexId, int], ColorId] = field(default_factory=dict)

    def get(self, a: VertexId, j: int) -> ColorId | None:
        return self.entries.get((a, j))

    def palettes(self) -> set[int]:
        return {j for _, j in self.entries}

    def merged(self, other: DesignatedColors) -> DesignatedColors:
        e = dict(self.entries)
        e.update(other.entries)
        return DesignatedColors(e)


@dataclass(frozen=True)
class DesignatedMap:
    """A vertex-to-colour map for digraphs with its orientation.

    ``variant == "in"``: ``b R a`` iff ``b`` has colour ``U_a``;
    ``variant == "out"``: ``a R b`` iff ``b`` has colour ``U_a``.
    """

    colors: Mapping[VertexId, ColorId]
    variant: str = "in"


# ---------------------------------------------------------------------------
# critical tuple sets for digraphs


class CriticalTupleSet:
    """Interface: a set of tuples of colour sets, tested by membership."""

    length: int

    def contains(self, sets: Sequence[frozenset[ColorId]]) -> bool:
        raise NotImplementedError

    def is_invariant(self, chi: ColorPermutation) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class AllTuples(CriticalTupleSet):
    """Every tuple is critical: freeness is plain freeness."""

    length: int

    def contains(self, sets) -> bool:
        return len(sets) == self.length

    def is_invariant(self, chi) -> bool:
        return True


@dataclass(frozen=True)
class ExplicitTuples(CriticalTupleSet):
    """An enumerated set of tuples; colour sets are intersected with ``universe`` first."""

    tuples: frozenset[tuple[frozenset[ColorId], ...]]
    universe: frozenset[ColorId]
    length: int = 0

    def __post_init__(self):
        tuples = frozenset(tuple(frozenset(s) for s in t) for t in self.tuples)
        object.__setattr__(self, "tuples", tuples)
        object.__setattr__(self, "universe", frozenset(self.universe))
        lengths = {len(t) for t in tuples}
        if len(lengths) > 1:
            raise ValueError("critical tuples of different lengths")
        if lengths:
            object.__setattr__(self, "length", lengths.pop())

    def contains(self, sets) -> bool:
        u = self.universe
        return tuple(frozenset(s) & u for s in sets) in self.tuples

    def is_invariant(self, chi) -> bool:
        if chi.image(self.universe) != self.universe:
            return False
        return frozenset(tuple(chi.image(s) for s in t) for t in self.tuples) == self.tuples


# ---------------------------------------------------------------------------
# general relational structures


@dataclass(frozen=True)
class RelationalStructure:
    signature: tuple[tuple[str, int], ...]
    universe: tuple[VertexId, ...]
    relations: Mapping[str, frozenset[tuple[VertexId, ...]]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "signature", tuple((str(s), int(k)) for s, k in self.signature))
        object.__setattr__(self, "universe", _uniq(self.universe))
        rel = {s: frozenset(tuple(str(x) for x in t) for t in self.relations.get(s, ())) for s, _ in self.signature}
        object.__setattr__(self, "relations", rel)

    def problems(self) -> list[str]:
        out = []
        arity = dict(self.signature)
        for s in self.relations:
            if s not in arity:
                out.append(f"unknown relation symbol {s!r}")
        universe = set(self.universe)
        for s, tuples in self.relations.items():
            for t in tuples:
                if len(t) != arity.get(s, len(t)):
                    out.append(f"tuple {t} has wrong arity for {s!r}")
                if not set(t) <= universe:
                    out.append(f"tuple {t} leaves the universe")
        return out

    def holds(self, symbol: str, tup: Sequence[VertexId]) -> bool:
        return tuple(tup) in self.relations.get(symbol, ())

    def induced(self, keep: Iterable[VertexId]) -> RelationalStructure:
        keep = set(keep)
        rel = {s: frozenset(t for t in ts if set(t) <= keep) for s, ts in self.relations.items()}
        return RelationalStructure(self.signature, tuple(v for v in self.universe if v in keep), rel)

    @classmethod
    def from_graph(cls, g: Graph, symbol: str = "R") -> RelationalStructure:
        pairs = {(u, v) for u, v in g.edges} | {(v, u) for u, v in g.edges}
        return cls(((symbol, 2),), g.vertices, {symbol: frozenset(pairs)})

    @classmethod
    def from_digraph(cls, d: Digraph, symbol: str = "R") -> RelationalStructure:
        return cls(((symbol, 2),), d.vertices, {symbol: d.arcs})


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class CardinalityLedger:
    """Per-palette colour counts ``d_j``; checked only when ``enabled``."""

    d: Mapping[int, int] = field(default_factory=dict)
    enabled: bool = False

    def problems(self, g: ColoredGraph) -> list[str]:
        if not self.enabled:
            return []
        out = []
        for v in g.vertices:
            for p in g.palettes:
                want = self.d.get(p.index)
                have = len(g.colors_in(v, p.index))
                if want is not None and have != want:
                    out.append(f"vertex {v!r} has {have} colours of palette {p.index}, expected {want}")
        return out

    def with_entry(self, j: int, value: int) -> CardinalityLedger:
        d = dict(self.d)
        d[j] = value
        return CardinalityLedger(d, self.enabled)


def validate_instance(
    instance,
    maps: Sequence[PartialPermorphism],
    constraint,
    designated: DesignatedColors | Sequence[DesignatedMap] | None = None,
    ledger: CardinalityLedger | None = None,
    *,
    require_pair_coverage: bool = False,
) -> ValidationReport:
    """Check every hypothesis the constructions rely on and list the violations."""
    from . import freeness as fr

    s = as_colored(instance)
    out = list(s.problems())
    if out:
        return ValidationReport(out)

    for i, p in enumerate(maps):
        out += [f"map {i}: {msg}" for msg in p.problems(s)]
        if not s.directed:
            pal = s.palette_of
            for c, d in p.chi.mapping.items():
                if pal.get(c) != pal.get(d):
                    out.append(f"map {i}: chi sends {c!r} outside its palette")
        else:
            declared = set(s.colors)
            for c, d in p.chi.mapping.items():
                if c not in declared or d not in declared:
                    out.append(f"map {i}: chi moves undeclared colour {c!r}")

    if isinstance(constraint, fr.CliqueFree):
        if s.directed:
            out.append("clique constraint given for a digraph")
            return ValidationReport(out)
        if constraint.m < 1:
            out.append("m must be at least 1")
        r = len(s.palettes)
        if constraint.critical.r != r and (constraint.critical.r or len(constraint.critical)):
            out.append(f"critical colourings have length {constraint.critical.r}, expected {r}")
        explicit = constraint.critical.tuples if isinstance(constraint.critical, CriticalColoringSet) else ()
        for t in sorted(explicit):
            if len(t) != r:
                out.append(f"critical colouring {t} does not have one colour per palette")
                continue
            for j, (c, p) in enumerate(zip(t, s.palettes)):
                if c not in p.colors:
                    out.append(f"critical colouring {t}: {c!r} is not in palette {p.index}")
        for i, p in enumerate(maps):
            if not constraint.critical.is_invariant(p.chi):
                out.append(f"critical colourings are not invariant under chi of map {i}")
        if constraint.m >= 1 and not out:
            w = fr.find_critical_clique(s, constraint.m, constraint.critical)
            if w is not None:
                out.append(f"A not U_c-K_{constraint.m}-free: {list(w.vertices)}")
    elif isinstance(constraint, fr.TournamentFree):
        if not s.directed:
            out.append("tournament constraint given for a graph")
            return ValidationReport(out)
        for j, (t, crit) in enumerate(constraint.items):
            out += [f"tournament {j}: {msg}" for msg in t.problems()]
            if len(t.vertices) < 1:
                out.append(f"tournament {j} is empty")
            if crit.length != len(t.vertices):
                out.append(f"tournament {j}: critical tuples have length {crit.length}, expected {len(t.vertices)}")
            for i, p in enumerate(maps):
                if not crit.is_invariant(p.chi):
                    out.append(f"tournament {j}: critical tuples not invariant under chi of map {i}")
        if not out:
            for j, (t, crit) in enumerate(constraint.items):
                w = fr.find_critical_tournament_copy(s, t, crit)
                if w is not None:
                    out.append(f"A contains a critical copy of tournament {j}: {list(w.vertices)}")
    elif isinstance(constraint, fr.WeakHomFree):
        rs = RelationalStructure.from_digraph(s.base) if s.directed else RelationalStructure.from_graph(s.base)
        w = fr.weakhom_free(rs, constraint.family)
        if w is not None:
            out.append(f"A admits a weak homomorphism from forbidden structure {w.extra}")
    elif constraint is not None:
        out.append(f"unknown constraint {constraint!r}")

    if designated is not None:
        out += _designated_problems(s, maps, designated)
    if ledger is not None and not s.directed:
        out += ledger.problems(s)
    if require_pair_coverage:
        for a in s.vertices:
            for b in s.vertices:
                if a != b and not any(p.map.get(a) == b for p in maps):
                    out.append(f"no map sends {a!r} to {b!r} (pair coverage)")
    return ValidationReport(out)


def _designated_problems(s, maps, designated) -> list[str]:
    out = []
    base = s.base
    cols = s.color_sets
    idx = base.index
    if not s.directed:
        for (a, j), col in sorted(designated.entries.items()):
            if a not in idx:
                out.append(f"designated colour for unknown vertex {a!r}")
                continue
            if s.palette_of.get(col) != j:
                out.append(f"designated colour {col!r} of {a!r} is not in palette {j}")
            for b in base.vertices:
                if (col in cols[idx[b]]) != base.adjacent(a, b):
                    out.append(f"designated colour U_{a}^{j}: membership of {b!r} disagrees with adjacency")
            for i, p in enumerate(maps):
                if a in p.map:
                    want = designated.get(p.map[a], j)
                    if want is None or p.chi(col) != want:
                        out.append(f"map {i}: chi does not send U_{a}^{j} to U_{p.map[a]}^{j}")
        for a in base.vertices:
            for j in designated.palettes():
                if designated.get(a, j) is None:
                    out.append(f"no designated colour for {a!r} in palette {j}")
        return out
    for k, dm in enumerate(designated):
        for a in base.vertices:
            col = dm.colors.get(a)
            if col is None:
                out.append(f"designated map {k}: no colour for {a!r}")
                continue
            for b in base.vertices:
                rel = base.has_arc(b, a) if dm.variant == "in" else base.has_arc(a, b)
                if (col in cols[idx[b]]) != rel:
                    out.append(f"designated map {k}: membership of {b!r} in U_{a} disagrees with arcs")
            for i, p in enumerate(maps):
                if a in p.map and p.chi(col) != dm.colors.get(p.map[a]):
                    out.append(f"designated map {k}: chi of map {i} does not send U_{a} to U_{p.map[a]}")
    return out


# ---------------------------------------------------------------------------
# JSON-compatible serialisation


def structure_to_dict(s) -> dict:
    if isinstance(s, Tournament):
        return {"kind": "tournament", "vertices": list(s.vertices), "arcs": sorted(map(list, s.arcs))}
    if isinstance(s, Graph):
        return {"kind": "graph", "vertices": list(s.vertices), "edges": _sorted_pairs(s, s.edges)}
    if isinstance(s, Digraph):
        return {"kind": "digraph", "vertices": list(s.vertices), "arcs": _sorted_pairs(s, s.arcs)}
    if isinstance(s, ColoredGraph):
        d = structure_to_dict(s.graph)
        d["kind"] = "colored_graph"
        d["palettes"] = [list(p.colors) for p in s.palettes]
        d["palette_indices"] = [p.index for p in s.palettes]
        d["coloring"] = {v: sorted(s.coloring[v]) for v in s.vertices if v in s.coloring}
        return d
    if isinstance(s, ColoredDigraph):
        d = structure_to_dict(s.digraph)
        d["kind"] = "colored_digraph"
        d["colors"] = list(s.colors)
        d["coloring"] = {v: sorted(s.coloring[v]) for v in s.vertices if v in s.coloring}
        return d
    if isinstance(s, RelationalStructure):
        return {
            "kind": "relational",
            "signature": [list(x) for x in s.signature],
            "universe": list(s.universe),
            "relations": {k: sorted(map(list, v)) for k, v in s.relations.items()},
        }
    raise TypeError(f"cannot serialise {type(s).__name__}")


def _sorted_pairs(s, pairs) -> list[list[str]]:
    pos = s.index
    return [list(p) for p in sorted(pairs, key=lambda e: (pos.get(e[0], -1), pos.get(e[1], -1)))]


def structure_from_dict(d: Mapping):
    kind = d["kind"]
    if kind == "graph":
        return Graph(tuple(d["vertices"]), frozenset(tuple(e) for e in d.get("edges", ())))
    if kind in ("digraph", "tournament"):
        cls = Tournament if kind == "tournament" else Digraph
        return cls(tuple(d["vertices"]), frozenset(tuple(a) for a in d.get("arcs", ())))
    if kind == "colored_graph":
        g = structure_from_dict({**d, "kind": "graph"})
        indices = d.get("palette_indices") or list(range(1, len(d.get("palettes", ())) + 1))
        pals = tuple(Palette(j, tuple(cs)) for j, cs in zip(indices, d.get("palettes", ())))
        return ColoredGraph(g, pals, {v: frozenset(cs) for v, cs in d.get("coloring", {}).items()})
    if kind == "colored_digraph":
        g = structure_from_dict({**d, "kind": "digraph"})
        return ColoredDigraph(g, tuple(d.get("colors", ())), {v: frozenset(cs) for v, cs in d.get("coloring", {}).items()})
    if kind == "relational":
        return RelationalStructure(
            tuple(tuple(x) for x in d["signature"]),
            tuple(d["universe"]),
            {k: frozenset(tuple(t) for t in v) for k, v in d.get("relations", {}).items()},
        )
    raise ValueError(f"unknown structure kind {kind!r}")
