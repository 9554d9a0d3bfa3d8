"""Type realising steps: grow ``A`` to ``C`` with exactly controlled type counts,
then extend each partial map to a bijection of ``C``.

``C`` always lists the vertices of ``A`` first, in the same order, followed by
the added points.  Neighbourhoods inside ``A`` are handled as bitmasks over
the positions of ``A``.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

from .errors import ClassSizeMismatch, StructureTooLarge
from .freeness import _realisable_idx, graph_realiser
from .structures import (
    CardinalityLedger,
    ColoredDigraph,
    ColoredGraph,
    ColorPermutation,
    CriticalColoringSet,
    CriticalTupleSet,
    Digraph,
    Graph,
    PartialPermorphism,
    Tournament,
    as_colored,
)

logger = logging.getLogger(__name__)

ColorSet = frozenset


@dataclass(frozen=True)
class TypeRealization:
    """The scaffolding ``C`` together with its counting constants.

    ``constants`` maps ``0 -> c_0`` in the base case and ``t -> c_t`` in the
    inductive and digraph cases.  ``color_family`` lists the colour sets the
    counting statement ranges over (None in the base case, where ``C`` is
    uncoloured).
    """

    C: Graph | Digraph | ColoredGraph | ColoredDigraph
    A: Graph | Digraph | ColoredGraph | ColoredDigraph
    constants: dict[int, int]
    kind: str
    color_family: tuple[frozenset, ...] | None = None

    @property
    def A_size(self) -> int:
        return len(self.A.vertices)

    @property
    def added(self) -> int:
        return len(self.C.vertices) - self.A_size


@dataclass(frozen=True)
class SymmetryExtension:
    """One total bijection of ``C`` per partial map, as position tables."""

    C_vertices: tuple[str, ...]
    h: tuple[tuple[int, ...], ...] = field(default_factory=tuple)

    def as_maps(self) -> list[dict[str, str]]:
        v = self.C_vertices
        return [{v[x]: v[y] for x, y in enumerate(hi)} for hi in self.h]


def fresh_names(taken: Iterable[str], prefix: str, count: int) -> list[str]:
    """``prefix0, prefix1, ...`` skipping names already in use."""
    taken = set(taken)
    out = []
    k = 0
    while len(out) < count:
        name = f"{prefix}{k}"
        k += 1
        if name not in taken:
            out.append(name)
    return out


def _masks(A) -> tuple[list[int], list[int]]:
    """Out- and in-neighbourhood masks of the points of ``A`` inside ``A``."""
    base = A.base if hasattr(A, "base") else A
    outs = [sum(1 << j for j in base.out_adj[i]) for i in range(len(base.vertices))]
    ins = [sum(1 << j for j in base.in_adj[i]) for i in range(len(base.vertices))]
    return outs, ins


def _mask_order(n: int) -> list[int]:
    return sorted(range(1 << n), key=lambda m: (bin(m).count("1"), [i for i in range(n) if m >> i & 1]))


def _signed_pairs(n: int) -> list[tuple[int, int]]:
    """Disjoint (plus, minus) mask pairs ordered by joint size then positions."""
    out = []
    for code in range(3 ** n):
        plus = minus = 0
        x = code
        for i in range(n):
            d = x % 3
            x //= 3
            if d == 1:
                plus |= 1 << i
            elif d == 2:
                minus |= 1 << i
        out.append((plus, minus))
    out.sort(key=lambda pm: (bin(pm[0] | pm[1]).count("1"), [i for i in range(n) if (pm[0] | pm[1]) >> i & 1], pm))
    return out


def _names_of(mask: int, verts: Sequence[str]) -> list[str]:
    return [v for i, v in enumerate(verts) if mask >> i & 1]


def _check_cap(size: int, cap: int | None, level: int | None, what: str):
    if cap is not None and size > cap:
        raise StructureTooLarge(cap, what, level)


# ---------------------------------------------------------------------------
# base case


def realize_types_base(A, *, level: int = 1, cap: int | None = None) -> TypeRealization:
    """Add points until every exact neighbourhood type over ``A`` is realised ``c_0`` times.

    Works for graphs (types are subsets of ``A``) and digraphs (types are
    disjoint out/in pairs).  Added points are uncoloured and all their
    neighbours lie in ``A``.
    """
    base = as_colored(A).base
    n = len(base.vertices)
    outs, ins = _masks(base)
    if base.directed:
        keys = _signed_pairs(n)
        have = defaultdict(int)
        for i in range(n):
            have[(outs[i], ins[i])] += 1
    else:
        keys = _mask_order(n)
        have = defaultdict(int)
        for i in range(n):
            have[outs[i]] += 1
    c0 = max((have[k] for k in keys), default=0)
    _check_cap(n + c0 * len(keys) - n, cap, level, "C")
    todo = [(k, c0 - have[k]) for k in keys if c0 > have[k]]
    total = sum(c for _, c in todo)
    names = fresh_names(base.vertices, f"t{level}_", total)
    it = iter(names)
    verts = list(base.vertices)
    rel = set(base.arcs if base.directed else base.edges)
    for k, count in todo:
        for _ in range(count):
            x = next(it)
            verts.append(x)
            if base.directed:
                plus, minus = k
                rel.update((x, a) for a in _names_of(plus, base.vertices))
                rel.update((a, x) for a in _names_of(minus, base.vertices))
            else:
                rel.update((a, x) for a in _names_of(k, base.vertices))
    C = Digraph(tuple(verts), frozenset(rel)) if base.directed else Graph(tuple(verts), frozenset(rel))
    logger.debug("base type realisation at level %d: |A|=%d c_0=%d |C|=%d", level, n, c0, len(verts))
    return TypeRealization(C, base, {0: c0}, "base")


def base_class_counts(tr: TypeRealization) -> dict:
    """Recount ``|{c in C : N_A(c) = A_0}|`` for every type key (exact audit)."""
    C = tr.C
    n = tr.A_size
    out = defaultdict(int)
    full = (1 << n) - 1
    for i in range(len(C.vertices)):
        o = sum(1 << j for j in C.out_adj[i] if j < n)
        if C.directed:
            inn = sum(1 << j for j in C.in_adj[i] if j < n)
            out[(o, inn)] += 1
        else:
            out[o & full] += 1
    keys = _signed_pairs(n) if C.directed else _mask_order(n)
    return {k: out.get(k, 0) for k in keys}


# ---------------------------------------------------------------------------
# inductive / coloured case


def color_family(
    sets: Iterable[frozenset],
    chis: Sequence[ColorPermutation],
    cap: int | None = None,
    incidence_cap: int | None = None,
    level: int | None = None,
) -> tuple[frozenset, ...]:
    """Closure of ``sets`` under the colour permutations, in canonical order.

    A finite set closed under a permutation is also closed under its inverse.
    ``incidence_cap`` bounds the summed sizes of the member sets.
    """
    seen = set()
    stack = list(dict.fromkeys(frozenset(s) for s in sets))
    seen.update(stack)
    weight = sum(len(s) for s in stack)
    while stack:
        s = stack.pop()
        for chi in chis:
            t = chi.image(s)
            if t not in seen:
                seen.add(t)
                stack.append(t)
                weight += len(t)
                if cap is not None and len(seen) > cap:
                    raise StructureTooLarge(cap, "colour-set family", level)
                if incidence_cap is not None and weight > incidence_cap:
                    raise StructureTooLarge(incidence_cap, "colour incidences of the family", level)
    return tuple(sorted(seen, key=lambda s: (len(s), sorted(s))))


def realize_types_inductive(
    A: ColoredGraph,
    m: int,
    critical: CriticalColoringSet,
    chis: Sequence[ColorPermutation] = (),
    *,
    ledger: CardinalityLedger | None = None,
    level: int = 1,
    cap: int | None = None,
    family_cap: int | None = None,
    incidence_cap: int | None = None,
) -> TypeRealization:
    """Chain construction ``A = C_T ⊆ ... ⊆ C_0 = C`` for a critically ``K_{m+1}``-free ``A``.

    The counting statement: for every ``A_0 ⊆ A`` and every colour set ``U_0``
    of the family, the number of ``c`` with ``N_A(c) ⊇ A_0`` and ``U(c) = U_0``
    is ``c_{|A_0|}`` when ``(A_0, U_0)`` is realisable and 0 otherwise.  The
    family is the closure of the colour sets of ``A`` under ``chis``.
    """
    A = as_colored(A)
    n = len(A.vertices)
    fam = color_family(A.color_sets, chis, family_cap, incidence_cap, level)
    outs, _ = _masks(A)

    realisable: dict[tuple[int, frozenset], bool] = {}
    realiser = graph_realiser(A, m, critical, ledger)

    def ok(mask, U0):
        key = (mask, U0)
        if key not in realisable:
            realisable[key] = realiser(mask, U0)
        return realisable[key]

    exact: dict[frozenset, dict[int, int]] = {U0: defaultdict(int) for U0 in fam}
    for i in range(n):
        exact[A.color_sets[i]][outs[i]] += 1

    def superset_count(mask, U0):
        return sum(c for k, c in exact[U0].items() if k & mask == mask)

    masks_by_size: dict[int, list[int]] = defaultdict(list)
    for mk in _mask_order(n):
        masks_by_size[bin(mk).count("1")].append(mk)

    constants = {n: 0}
    added: list[tuple[int, frozenset, int]] = []
    total = 0
    weight = sum(len(cs) for cs in A.color_sets)
    for t in range(n, 0, -1):
        size = t - 1
        pairs = [(mk, U0) for mk in masks_by_size[size] for U0 in fam if ok(mk, U0)]
        current = {pu: superset_count(*pu) for pu in pairs}
        ct = max(current.values(), default=0)
        constants[size] = ct
        for (mk, U0), have in current.items():
            if ct > have:
                added.append((mk, U0, ct - have))
                exact[U0][mk] += ct - have
                total += ct - have
                weight += (ct - have) * len(U0)
                _check_cap(n + total, cap, level, "C")
                _check_cap(weight, incidence_cap, level, "colour incidences of C")

    names = iter(fresh_names(A.vertices, f"t{level}_", total))
    verts = list(A.vertices)
    edges = set(A.graph.edges)
    coloring = dict(A.coloring)
    for mk, U0, count in added:
        for _ in range(count):
            x = next(names)
            verts.append(x)
            edges.update((a, x) for a in _names_of(mk, A.vertices))
            if U0:
                coloring[x] = U0
    C = ColoredGraph(Graph(tuple(verts), frozenset(edges)), A.palettes, coloring)
    logger.debug("inductive type realisation at level %d: |A|=%d |family|=%d |C|=%d", level, n, len(fam), len(verts))
    return TypeRealization(C, A, constants, "inductive", fam)


def inductive_class_counts(tr: TypeRealization) -> dict[tuple[int, frozenset], int]:
    """Recount ``|{c : N_A(c) ⊇ A_0, U(c) = U_0}|`` over all masks and family members."""
    C = tr.C
    n = tr.A_size
    exact = defaultdict(int)
    for i in range(len(C.vertices)):
        mk = sum(1 << j for j in C.base.adj[i] if j < n)
        exact[(mk, C.color_sets[i])] += 1
    out = {}
    for U0 in tr.color_family:
        for mk in range(1 << n):
            out[(mk, U0)] = sum(c for (k, u), c in exact.items() if u == U0 and k & mk == mk)
    return out


# ---------------------------------------------------------------------------
# digraph case


def realize_types_digraph(
    A: ColoredDigraph,
    forbidden: Sequence[tuple[Tournament, CriticalTupleSet]],
    chis: Sequence[ColorPermutation] = (),
    *,
    level: int = 1,
    cap: int | None = None,
    family_cap: int | None = None,
    incidence_cap: int | None = None,
) -> TypeRealization:
    """Digraph analogue of :func:`realize_types_inductive` with signed neighbourhoods.

    Counts ``|{c : N^+_A(c) ⊇ A_0^+, N^-_A(c) ⊇ A_0^-, U(c) = U_0}|`` equal
    ``c_{|A_0^+ ∪ A_0^-|}`` on realisable triples and 0 elsewhere.
    """
    A = as_colored(A)
    n = len(A.vertices)
    fam = color_family(A.color_sets, chis, family_cap, incidence_cap, level)
    outs, ins = _masks(A)
    idx_sets = {}

    def to_set(mk):
        if mk not in idx_sets:
            idx_sets[mk] = frozenset(i for i in range(n) if mk >> i & 1)
        return idx_sets[mk]

    realisable: dict = {}

    def ok(pm, U0):
        key = (pm, U0)
        if key not in realisable:
            realisable[key] = _realisable_idx(A, to_set(pm[0]), to_set(pm[1]), U0, forbidden)
        return realisable[key]

    exact: dict[frozenset, dict[tuple[int, int], int]] = {U0: defaultdict(int) for U0 in fam}
    for i in range(n):
        exact[A.color_sets[i]][(outs[i], ins[i])] += 1

    def superset_count(pm, U0):
        p, q = pm
        return sum(c for (kp, kq), c in exact[U0].items() if kp & p == p and kq & q == q)

    by_size: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for pm in _signed_pairs(n):
        by_size[bin(pm[0] | pm[1]).count("1")].append(pm)

    constants = {n: 0}
    added = []
    total = 0
    weight = sum(len(cs) for cs in A.color_sets)
    for t in range(n, 0, -1):
        size = t - 1
        pairs = [(pm, U0) for pm in by_size[size] for U0 in fam if ok(pm, U0)]
        current = {pu: superset_count(*pu) for pu in pairs}
        ct = max(current.values(), default=0)
        constants[size] = ct
        for (pm, U0), have in current.items():
            if ct > have:
                added.append((pm, U0, ct - have))
                exact[U0][pm] += ct - have
                total += ct - have
                weight += (ct - have) * len(U0)
                _check_cap(n + total, cap, level, "C")
                _check_cap(weight, incidence_cap, level, "colour incidences of C")

    names = iter(fresh_names(A.vertices, f"t{level}_", total))
    verts = list(A.vertices)
    arcs = set(A.digraph.arcs)
    coloring = dict(A.coloring)
    for (p, q), U0, count in added:
        for _ in range(count):
            x = next(names)
            verts.append(x)
            arcs.update((x, a) for a in _names_of(p, A.vertices))
            arcs.update((a, x) for a in _names_of(q, A.vertices))
            if U0:
                coloring[x] = U0
    C = ColoredDigraph(Digraph(tuple(verts), frozenset(arcs)), A.colors, coloring)
    logger.debug("digraph type realisation at level %d: |A|=%d |family|=%d |C|=%d", level, n, len(fam), len(verts))
    return TypeRealization(C, A, constants, "digraph", fam)


def digraph_class_counts(tr: TypeRealization) -> dict:
    C = tr.C
    n = tr.A_size
    exact = defaultdict(int)
    for i in range(len(C.vertices)):
        p = sum(1 << j for j in C.base.out_adj[i] if j < n)
        q = sum(1 << j for j in C.base.in_adj[i] if j < n)
        exact[(p, q, C.color_sets[i])] += 1
    out = {}
    for U0 in tr.color_family:
        for p, q in _signed_pairs(n):
            out[((p, q), U0)] = sum(
                c for (kp, kq, u), c in exact.items() if u == U0 and kp & p == p and kq & q == q
            )
    return out


# ---------------------------------------------------------------------------
# extending the partial maps


def match_classes(
    size: int,
    key_src: Callable[[int], Hashable],
    key_tgt: Callable[[int], Hashable],
    transport: Callable[[Hashable], Hashable],
    forced: dict[int, int],
    max_cycle: int = 4,
) -> tuple[int, ...]:
    """A bijection ``h`` of ``range(size)`` with ``h ⊇ forced`` sending each source class onto the transported target class.

    Any such bijection will do; short cycles keep the generated group small.
    Chains of forced pairs are closed first when the classes allow it, then
    free points are placed on cycles of length 1, 2, ... ``max_cycle``, and
    whatever remains is paired in increasing order.
    """
    src_key = [key_src(c) for c in range(size)]
    tgt_key = [key_tgt(c) for c in range(size)]
    src: dict[Hashable, list[int]] = defaultdict(list)
    tgt: dict[Hashable, list[int]] = defaultdict(list)
    for c in range(size):
        src[src_key[c]].append(c)
        tgt[tgt_key[c]].append(c)
    for k, members in src.items():
        tk = transport(k)
        if len(members) != len(tgt.get(tk, ())):
            raise ClassSizeMismatch(f"class {k!r} has {len(members)} points, its image {tk!r} has {len(tgt.get(tk, ()))}")
    want_of = {k: transport(k) for k in src}
    want = [want_of[k] for k in src_key]
    h = [-1] * size
    pre = [-1] * size

    def put(a, b):
        h[a] = b
        pre[b] = a

    for a, b in forced.items():
        if tgt_key[b] != want[a]:
            raise ClassSizeMismatch(f"forced pair {a}->{b} crosses classes")
        put(a, b)

    # points free on both sides, bucketed by (class the image must lie in, own target class)
    kinds: dict[tuple, list[int]] = defaultdict(list)
    for c in range(size):
        if h[c] < 0 and pre[c] < 0:
            kinds[(want[c], tgt_key[c])].append(c)

    # kinds are ordered by their least point, which keeps everything independent of hash seeds
    rank = {k: pts[0] for k, pts in kinds.items()}

    def take(kind):
        pts = kinds.get(kind)
        return pts.pop(0) if pts else None

    # close each forced chain s -> ... -> e, directly or through one free point
    for s0 in range(size):
        if pre[s0] >= 0 or h[s0] < 0:
            continue
        e = s0
        while h[e] >= 0:
            e = h[e]
        if tgt_key[s0] == want[e]:
            put(e, s0)
            continue
        for (w, t), pts in kinds.items():
            if t == want[e] and w == tgt_key[s0] and pts:
                z = pts.pop(0)
                put(e, z)
                put(z, s0)
                break

    # short cycles among free points; a kind u may precede kind v iff v's target class is u's wanted class.
    # Taking cycles only removes points, so one pass over the start kinds per length suffices.
    for length in range(1, max_cycle + 1):
        live = sorted((k for k, pts in kinds.items() if pts), key=rank.__getitem__)
        by_tgt: dict[Hashable, list] = defaultdict(list)
        for k in live:
            by_tgt[k[1]].append(k)

        def succ(u):
            return [v for v in by_tgt.get(u[0], ()) if kinds[v]]

        for start in live:
            while kinds[start]:
                cyc = _find_cycle(start, succ, length)
                if cyc is None:
                    break
                n_copies = min(len(kinds[k]) for k in cyc)
                for _ in range(n_copies):
                    pts = [take(k) for k in cyc]
                    for x, y in zip(pts, pts[1:] + pts[:1]):
                        put(x, y)

    # remainder: increasing order within each class pair
    free_tgt: dict[Hashable, list[int]] = defaultdict(list)
    for c in range(size):
        if pre[c] < 0:
            free_tgt[tgt_key[c]].append(c)
    for c in range(size):
        if h[c] < 0:
            put(c, free_tgt[want[c]].pop(0))
    return tuple(h)


def _find_cycle(start, succ, length: int):
    """A simple cycle of exactly ``length`` kinds through ``start``, or None."""
    path = [start]

    def rec():
        u = path[-1]
        if len(path) == length:
            return start in succ(u)
        for v in succ(u):
            if v in path:
                continue
            path.append(v)
            if rec():
                return True
            path.pop()
        return False

    return list(path) if rec() else None


def _forced(p: PartialPermorphism, idx) -> dict[int, int]:
    return {idx[a]: idx[b] for a, b in p.map.items()}


def extend_to_symmetries_base(tr: TypeRealization, maps: Sequence[PartialPermorphism]) -> SymmetryExtension:
    """Bijections ``h_i ⊇ p_i`` of ``C`` with ``a R b ⟺ a^{p_i} R b^{h_i}`` for ``a`` in the domain."""
    C = as_colored(tr.C).base
    idx = C.index
    size = len(C.vertices)
    hs = []
    for p in maps:
        forced = _forced(p, idx)
        dom = frozenset(forced)
        rng = frozenset(forced.values())
        if C.directed:
            def ks(c, d=dom):
                return (C.out_adj[c] & d, C.in_adj[c] & d)

            def kt(c, r=rng):
                return (C.out_adj[c] & r, C.in_adj[c] & r)

            def tr_key(k, f=forced):
                return (frozenset(f[x] for x in k[0]), frozenset(f[x] for x in k[1]))
        else:
            def ks(c, d=dom):
                return C.adj[c] & d

            def kt(c, r=rng):
                return C.adj[c] & r

            def tr_key(k, f=forced):
                return frozenset(f[x] for x in k)
        hs.append(match_classes(size, ks, kt, tr_key, forced))
    return SymmetryExtension(C.vertices, tuple(hs))


def extend_to_symmetries_colored(tr: TypeRealization, maps: Sequence[PartialPermorphism]) -> SymmetryExtension:
    """As the base case, and additionally colour-equivariant: ``b ∈ V ⟺ b^{h_i} ∈ V^{χ_i}``."""
    C = as_colored(tr.C)
    base = C.base
    cols = C.color_sets
    idx = base.index
    size = len(base.vertices)
    hs = []
    for p in maps:
        forced = _forced(p, idx)
        dom = frozenset(forced)
        rng = frozenset(forced.values())
        chi = p.chi
        if base.directed:
            def ks(c, d=dom):
                return (base.out_adj[c] & d, base.in_adj[c] & d, cols[c])

            def kt(c, r=rng):
                return (base.out_adj[c] & r, base.in_adj[c] & r, cols[c])

            def tr_key(k, f=forced, chi=chi):
                return (frozenset(f[x] for x in k[0]), frozenset(f[x] for x in k[1]), chi.image(k[2]))
        else:
            def ks(c, d=dom):
                return (base.adj[c] & d, cols[c])

            def kt(c, r=rng):
                return (base.adj[c] & r, cols[c])

            def tr_key(k, f=forced, chi=chi):
                return (frozenset(f[x] for x in k[0]), chi.image(k[1]))
        hs.append(match_classes(size, ks, kt, tr_key, forced))
    return SymmetryExtension(base.vertices, tuple(hs))


def symmetry_problems(tr: TypeRealization, maps: Sequence[PartialPermorphism], ext: SymmetryExtension, colored: bool) -> list[str]:
    """Pointwise audit of the required properties of each ``h_i`` over ``C × D_i``."""
    C = as_colored(tr.C)
    base = C.base
    idx = base.index
    out = []
    for i, (p, h) in enumerate(zip(maps, ext.h)):
        if sorted(h) != list(range(len(h))):
            out.append(f"h_{i} is not a bijection")
            continue
        for a, b in p.map.items():
            if h[idx[a]] != idx[b]:
                out.append(f"h_{i} does not extend p_{i} at {a!r}")
        for a in p.map:
            ia, ib = idx[a], idx[p.map[a]]
            for c in range(len(h)):
                if (c in base.out_adj[ia]) != (h[c] in base.out_adj[ib]):
                    out.append(f"h_{i}: relation from {a!r} to {base.vertices[c]!r} not transported")
                if base.directed and (c in base.in_adj[ia]) != (h[c] in base.in_adj[ib]):
                    out.append(f"h_{i}: relation from {base.vertices[c]!r} to {a!r} not transported")
        if colored:
            for c in range(len(h)):
                if p.chi.image(C.color_sets[c]) != C.color_sets[h[c]]:
                    out.append(f"h_{i} is not colour-equivariant at {base.vertices[c]!r}")
    return out


def class_size_pairs(tr: TypeRealization, maps: Sequence[PartialPermorphism], colored: bool) -> list[tuple[int, Hashable, int, int]]:
    """``(i, class key, |source class|, |transported target class|)`` for every class met on either side.

    Source classes are cut out by the exact neighbourhood in ``D_i`` (and the
    exact colour set when ``colored``); targets by the same data over ``R_i``.
    """
    C = as_colored(tr.C)
    base = C.base
    idx = base.index
    cols = C.color_sets
    out = []
    for i, p in enumerate(maps):
        f = {idx[a]: idx[b] for a, b in p.map.items()}
        dom, rng = frozenset(f), frozenset(f.values())
        back = {y: x for x, y in f.items()}

        def key(c, side, fwd):
            parts = [frozenset(fwd[x] for x in base.out_adj[c] & side)]
            if base.directed:
                parts.append(frozenset(fwd[x] for x in base.in_adj[c] & side))
            if colored:
                parts.append(cols[c])
            return tuple(parts)

        ident_d = {x: x for x in dom}
        src = Counter(key(c, dom, ident_d) for c in range(len(base.vertices)))
        tgt = Counter(key(c, rng, back) for c in range(len(base.vertices)))
        chi_inv = p.chi.inverse()
        # express target keys in source terms: pull the range back through p and the colours through chi^-1
        tgt_in_src = Counter()
        for k, n in tgt.items():
            k2 = k[:-1] + (chi_inv.image(k[-1]),) if colored else k
            tgt_in_src[k2] += n
        for k in sorted(set(src) | set(tgt_in_src), key=lambda k: [sorted(x) for x in k]):
            out.append((i, k, src.get(k, 0), tgt_in_src.get(k, 0)))
    return out
