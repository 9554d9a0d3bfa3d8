"""Forbidden-pattern searches and realisability predicates.

Every search walks candidate tuples in lexicographic order of vertex
positions and returns the first witness, so answers are deterministic.  The
optional ``budget`` caps the number of search nodes; running out raises
:class:`~eppa.errors.BudgetExhausted`, which is distinct from answering None.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from typing import Iterable, Iterator, Sequence

from .errors import BudgetExhausted
from .structures import (
    CardinalityLedger,
    ColoredDigraph,
    ColoredGraph,
    CriticalColoringSet,
    CriticalTupleSet,
    RelationalStructure,
    Tournament,
    as_colored,
)


@dataclass(frozen=True)
class CliqueFree:
    m: int
    critical: CriticalColoringSet = field(default_factory=CriticalColoringSet.plain)


@dataclass(frozen=True)
class TournamentFree:
    items: tuple[tuple[Tournament, CriticalTupleSet], ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple((t, c) for t, c in self.items))


@dataclass(frozen=True)
class WeakHomFree:
    family: tuple[RelationalStructure, ...]


FreenessConstraint = CliqueFree | TournamentFree | WeakHomFree


@dataclass(frozen=True)
class Witness:
    """Certificate of non-freeness: the offending vertices and the matched colouring."""

    vertices: tuple
    coloring: tuple | None = None
    extra: object = None


class _Ticker:
    __slots__ = ("left", "budget")

    def __init__(self, budget: int | None):
        self.budget = budget
        self.left = budget if budget is not None else -1

    def __call__(self):
        if self.left == 0:
            raise BudgetExhausted(self.budget)
        self.left -= 1


# ---------------------------------------------------------------------------
# cliques


def _clique_search(adj, cols, pool: Iterable[int], m: int, critical, tick, within: frozenset | None = None) -> tuple | None:
    """First ``m``-clique inside ``pool`` whose common colours (intersected with ``within``) contain a critical tuple."""
    first = critical.find_within(within)
    if first is None:
        return None
    if m <= 0:
        return (), first
    # when even the empty colour set holds a critical tuple, colours never prune
    colorblind = critical.find_within(frozenset()) is not None
    pool = set(pool)

    def rec(chosen, cand, common):
        need = m - len(chosen)
        if len(cand) < need:
            return None
        for v in sorted(cand):
            tick()
            if colorblind:
                nxt = common
            else:
                nxt = cols[v] if common is None else common & cols[v]
                if critical.find_within(nxt) is None:
                    continue
            if need == 1:
                return chosen + (v,), critical.find_within(nxt)
            found = rec(chosen + (v,), cand.intersection(u for u in adj[v] if u > v), nxt)
            if found is not None:
                return found
        return None

    return rec((), pool, within)


def find_critical_clique(A, m: int, critical: CriticalColoringSet | None = None, budget: int | None = None) -> Witness | None:
    """Find ``m`` pairwise adjacent vertices all carrying every colour of one critical tuple."""
    s = as_colored(A)
    if s.directed:
        raise TypeError("clique search needs an undirected graph")
    critical = critical if critical is not None else CriticalColoringSet.plain()
    found = _clique_search(s.base.adj, s.color_sets, range(len(s.vertices)), m, critical, _Ticker(budget))
    if found is None:
        return None
    verts, tup = found
    return Witness(tuple(s.vertices[i] for i in verts), tup)


def is_realisable_graph(
    A: ColoredGraph,
    A_0: Iterable[str],
    U_0: Iterable[str],
    m: int,
    critical: CriticalColoringSet,
    ledger: CardinalityLedger | None = None,
) -> bool:
    """Whether the type "adjacent to A_0, coloured U_0" can sit over a critically K_{m+1}-free graph.

    ``m`` is the size of the cliques searched inside ``A_0``: a new point adjacent
    to such a clique would complete a critical ``K_{m+1}``.
    """
    U_0 = frozenset(U_0)
    if ledger is not None and ledger.enabled:
        for p in A.palettes:
            want = ledger.d.get(p.index)
            if want is not None and len(U_0 & frozenset(p.colors)) != want:
                return False
    idx = A.graph.index
    pool = sorted(idx[a] for a in A_0)
    return _clique_search(A.graph.adj, A.color_sets, pool, m, critical, _Ticker(None), U_0) is None


def graph_realiser(A: ColoredGraph, m: int, critical, ledger: CardinalityLedger | None = None):
    """Fast form of :func:`is_realisable_graph` for many queries over one ``A``.

    Returns ``ok(mask, U_0)`` where bit ``i`` of ``mask`` selects the ``i``-th
    vertex of ``A``.  All ``m``-cliques of ``A`` and their common colours are
    listed once up front.
    """
    n = len(A.vertices)
    adj = A.graph.adj
    cols = A.color_sets
    cliques = []

    def grow(chosen, cand, common):
        if len(chosen) == m:
            cliques.append((sum(1 << v for v in chosen), common))
            return
        for v in sorted(cand):
            nxt = cols[v] if common is None else common & cols[v]
            grow(chosen + (v,), {u for u in cand if u > v and u in adj[v]}, nxt)

    if m <= 0:
        cliques.append((0, None))
    else:
        grow((), set(range(n)), None)
    palettes = [(frozenset(p.colors), ledger.d.get(p.index)) for p in A.palettes] if ledger is not None and ledger.enabled else []

    def ok(mask: int, U_0: frozenset) -> bool:
        for pal, want in palettes:
            if want is not None and len(U_0 & pal) != want:
                return False
        for cm, common in cliques:
            if cm & mask == cm and critical.find_within(U_0 if common is None else common & U_0) is not None:
                return False
        return True

    return ok


# ---------------------------------------------------------------------------
# digraph embeddings


def _embeddings(
    pattern,
    out_adj,
    in_adj,
    n: int,
    domains: Sequence[Iterable[int] | None] | None = None,
    tick=None,
) -> Iterator[tuple[int, ...]]:
    """Induced embeddings of a small digraph ``pattern`` into a target given by adjacency tables."""
    l = len(pattern.vertices)
    arcs = pattern.arcs
    rel = [[((pattern.vertices[a], pattern.vertices[b]) in arcs) for b in range(l)] for a in range(l)]
    doms = [None if d is None else frozenset(d) for d in (domains or [None] * l)]
    tick = tick or _Ticker(None)

    def rec(k, chosen):
        if k == l:
            yield tuple(chosen)
            return
        cand = None
        for j in range(k):
            sj = chosen[j]
            if rel[j][k]:
                s = out_adj[sj]
            elif rel[k][j]:
                s = in_adj[sj]
            else:
                continue
            cand = set(s) if cand is None else cand & s
        if cand is None:
            cand = set(range(n)) if doms[k] is None else set(doms[k])
        elif doms[k] is not None:
            cand &= doms[k]
        for v in sorted(cand):
            if v in chosen:
                continue
            tick()
            ok = True
            for j in range(k):
                sj = chosen[j]
                if (v in out_adj[sj]) != rel[j][k] or (sj in out_adj[v]) != rel[k][j]:
                    ok = False
                    break
            if ok:
                chosen.append(v)
                yield from rec(k + 1, chosen)
                chosen.pop()

    yield from rec(0, [])


def find_critical_tournament_copy(A, T: Tournament, U_T: CriticalTupleSet, budget: int | None = None) -> Witness | None:
    """First embedding ``T -> A`` whose tuple of colour sets lies in ``U_T``."""
    s = as_colored(A)
    if not s.directed:
        raise TypeError("tournament search needs a digraph")
    d = s.base
    cols = s.color_sets
    for emb in _embeddings(T, d.out_adj, d.in_adj, len(d.vertices), tick=_Ticker(budget)):
        sets = tuple(cols[i] for i in emb)
        if U_T.contains(sets):
            return Witness(tuple(d.vertices[i] for i in emb), sets)
    return None


def split_tournament(T: Tournament) -> tuple[Tournament, tuple[str, ...]]:
    """Remove the first vertex; report for each remaining vertex whether it is an out- ('+') or in-neighbour ('-')."""
    t1 = T.vertices[0]
    rest = T.without_first()
    signs = tuple("+" if (t1, v) in T.arcs else "-" for v in rest.vertices)
    return rest, signs


def is_realisable_digraph(
    A: ColoredDigraph,
    A_plus: Iterable[str],
    A_minus: Iterable[str],
    U_0: Iterable[str],
    forbidden: Sequence[tuple[Tournament, CriticalTupleSet]],
) -> bool:
    """Whether a new point with out-neighbours ``A_plus``, in-neighbours ``A_minus`` and colours ``U_0``
    would avoid every critical copy (with the new point in first position) of the non-trivial tournaments."""
    idx = A.digraph.index
    plus = frozenset(idx[a] for a in A_plus)
    minus = frozenset(idx[a] for a in A_minus)
    return _realisable_idx(A, plus, minus, frozenset(U_0), forbidden)


def _realisable_idx(A, plus, minus, U_0, forbidden) -> bool:
    d = A.base
    cols = A.color_sets
    for T, U_T in forbidden:
        if len(T.vertices) <= 1:
            continue
        rest, signs = split_tournament(T)
        doms = [plus if s == "+" else minus for s in signs]
        for emb in _embeddings(rest, d.out_adj, d.in_adj, len(d.vertices), doms):
            if U_T.contains((U_0,) + tuple(cols[i] for i in emb)):
                return False
    return True


# ---------------------------------------------------------------------------
# general relational structures


def is_link_structure(L: RelationalStructure) -> bool:
    """A single point, or covered by the entries of one held tuple."""
    if len(L.universe) == 1:
        return True
    every = set(L.universe)
    return any(set(t) == every for ts in L.relations.values() for t in ts)


def canonical_form(L: RelationalStructure) -> tuple:
    """Isomorphism invariant of a small structure: lexicographically least relabelling."""
    n = len(L.universe)
    best = None
    for perm in permutations(range(n)):
        pos = {v: perm[i] for i, v in enumerate(L.universe)}
        code = tuple(
            (sym, tuple(sorted(tuple(pos[x] for x in t) for t in L.relations.get(sym, ()))))
            for sym, _ in L.signature
        )
        if best is None or code < best:
            best = code
    return (n, best)


def link_types(A: RelationalStructure) -> frozenset[tuple]:
    """Canonical forms of all link structures embeddable into ``A``.

    Any embedded link structure is the substructure induced on the entries of
    one held tuple, or on a single point, so it suffices to look at those.
    """
    seen: set[frozenset] = set()
    out = set()
    for v in A.universe:
        seen.add(frozenset((v,)))
    for ts in A.relations.values():
        for t in ts:
            seen.add(frozenset(t))
    for s in seen:
        out.add(canonical_form(A.induced(s)))
    return frozenset(out)


def same_link_type(A: RelationalStructure, B: RelationalStructure) -> bool:
    if dict(A.signature) != dict(B.signature):
        raise ValueError("structures have different signatures")
    return link_types(A) == link_types(B)


def enumerate_link_structures(signature: Sequence[tuple[str, int]], max_tuples: int = 16) -> list[RelationalStructure]:
    """All link structures over ``signature`` up to isomorphism, by brute force.

    Sizes range up to the maximal arity.  Raises ValueError when a size would
    need more than ``2**max_tuples`` candidate relation sets.
    """
    max_arity = max((k for _, k in signature), default=1)
    found: dict[tuple, RelationalStructure] = {}
    for size in range(1, max(1, max_arity) + 1):
        universe = tuple(str(i) for i in range(size))
        slots = [(sym, t) for sym, k in signature for t in product(universe, repeat=k)]
        if len(slots) > max_tuples:
            raise ValueError(f"{len(slots)} candidate tuples at size {size}; too many to enumerate")
        for mask in range(1 << len(slots)):
            rel: dict[str, set] = {sym: set() for sym, _ in signature}
            for b, (sym, t) in enumerate(slots):
                if mask >> b & 1:
                    rel[sym].add(t)
            L = RelationalStructure(tuple(signature), universe, {k: frozenset(v) for k, v in rel.items()})
            if is_link_structure(L):
                found.setdefault(canonical_form(L), L)
    return [found[k] for k in sorted(found)]


def embeds(L: RelationalStructure, A: RelationalStructure) -> bool:
    """Whether ``L`` is isomorphic to an induced substructure of ``A`` (brute force)."""
    n = len(L.universe)
    target = canonical_form(L)
    for sub in combinations(A.universe, n):
        if canonical_form(A.induced(sub)) == target:
            return True
    return False


def is_weak_homomorphism(rho, T: RelationalStructure, A: RelationalStructure) -> bool:
    """Every held tuple of ``T`` maps onto a held tuple of ``A``."""
    for sym, tuples in T.relations.items():
        held = A.relations.get(sym, frozenset())
        for t in tuples:
            if tuple(rho[x] for x in t) not in held:
                return False
    return True


def weakhom_free(A: RelationalStructure, F: Sequence[RelationalStructure], budget: int | None = None) -> Witness | None:
    """First weak homomorphism from a member of ``F`` into ``A``; None when ``A`` is F-free."""
    tick = _Ticker(budget)
    for k, T in enumerate(F):
        order = list(T.universe)
        pos = {v: i for i, v in enumerate(order)}
        # tuples become checkable once their last entry is assigned
        due: list[list[tuple[str, tuple]]] = [[] for _ in order]
        for sym, ts in T.relations.items():
            for t in ts:
                due[max(pos[x] for x in t)].append((sym, t))
        rho: dict[str, str] = {}

        def rec(i):
            if i == len(order):
                return True
            for v in A.universe:
                tick()
                rho[order[i]] = v
                if all(tuple(rho[x] for x in t) in A.relations.get(sym, ()) for sym, t in due[i]):
                    if rec(i + 1):
                        return True
                del rho[order[i]]
            return False

        if rec(0):
            return Witness(tuple(rho[x] for x in order), None, (k, dict(rho)))
    return None


def clique_structure(m: int, symbol: str = "R") -> RelationalStructure:
    """``K_m`` as a symmetric irreflexive binary structure."""
    u = tuple(str(i) for i in range(m))
    pairs = frozenset((a, b) for a in u for b in u if a != b)
    return RelationalStructure(((symbol, 2),), u, {symbol: pairs})


def check(structure, constraint: FreenessConstraint, budget: int | None = None) -> Witness | None:
    """Dispatch a freeness constraint to the matching search."""
    if isinstance(constraint, CliqueFree):
        return find_critical_clique(structure, constraint.m, constraint.critical, budget)
    if isinstance(constraint, TournamentFree):
        for j, (T, U_T) in enumerate(constraint.items):
            w = find_critical_tournament_copy(structure, T, U_T, budget)
            if w is not None:
                return Witness(w.vertices, w.coloring, j)
        return None
    if isinstance(constraint, WeakHomFree):
        s = structure
        if not isinstance(s, RelationalStructure):
            s = as_colored(s)
            s = RelationalStructure.from_digraph(s.base) if s.directed else RelationalStructure.from_graph(s.base)
        return weakhom_free(s, constraint.family, budget)
    raise TypeError(f"unknown constraint {constraint!r}")
