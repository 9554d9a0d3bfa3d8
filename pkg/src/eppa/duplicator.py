"""The duplicator step: close the pairs ``(χ_i, h_i)`` to a finite group Γ,
glue copies of ``A`` indexed by Γ into ``B = A×Γ/≡``, and read off the
automorphisms ``f_i``.

Group elements are stored as rows of one integer table: the colour
permutation on the first ``K`` columns and the bijection of ``C`` on the
rest.  Products use the right-action convention, ``(g·s)[x] = s[g[x]]``.
Points of ``A×Γ`` are numbered ``g * |A| + a``.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import FactViolation, GroupTooLarge, StructureTooLarge
from .structures import (
    ColoredDigraph,
    ColoredGraph,
    ColorPermutation,
    DesignatedColors,
    Digraph,
    Graph,
    PartialPermorphism,
    as_colored,
)
from .typerealize import fresh_names

logger = logging.getLogger(__name__)

DEFAULT_GROUP_CAP = 100_000


@dataclass(frozen=True)
class GroupElement:
    chi: ColorPermutation
    h: tuple[int, ...]


@dataclass
class DuplicatorGroup:
    """Explicitly enumerated finite group; element 0 is the identity."""

    colors: tuple[str, ...]
    c_size: int
    table: np.ndarray
    n_generators: int
    right: np.ndarray  # right[g, i] = index of g·γ_i
    left: np.ndarray  # left[g, i] = index of γ_i·g
    parent: np.ndarray  # BFS tree: element = parent · γ_{via}
    via: np.ndarray
    _index: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return self.table.shape[0]

    @cached_property
    def color_pos(self) -> dict[str, int]:
        return {c: k for k, c in enumerate(self.colors)}

    @cached_property
    def color_array(self) -> np.ndarray:
        return np.array(self.colors + ("",) * self.c_size, dtype=object)

    @cached_property
    def _pos_cache(self) -> dict:
        return {}

    @property
    def K(self) -> int:
        return len(self.colors)

    def element(self, k: int) -> GroupElement:
        row = self.table[k]
        chi = ColorPermutation({self.colors[x]: self.colors[int(y)] for x, y in enumerate(row[: self.K])})
        return GroupElement(chi, tuple(int(y) for y in row[self.K:]))

    def lookup(self, row: np.ndarray) -> int | None:
        return self._index.get(row.tobytes())

    def mul(self, g: int, s: int) -> int:
        """Index of ``g·s`` (apply ``g`` first)."""
        k = self.lookup(self.table[s][self.table[g]])
        if k is None:
            raise FactViolation("closure", f"product of elements {g} and {s} is missing")
        return k

    def inverse(self, g: int) -> int:
        row = self.table[g]
        inv = np.empty_like(row)
        inv[row] = np.arange(row.shape[0], dtype=row.dtype)
        k = self.lookup(inv)
        if k is None:
            raise FactViolation("closure", f"inverse of element {g} is missing")
        return k

    def word(self, g: int) -> list[int]:
        """Generator indices ``i_1 … i_k`` with element ``g = γ_{i_1}…γ_{i_k}``."""
        out = []
        while g != 0:
            out.append(int(self.via[g]))
            g = int(self.parent[g])
        return out[::-1]

    def apply_word_right(self, start: np.ndarray, word: Sequence[int]) -> np.ndarray:
        """Vectorised ``δ ↦ δ·γ_{i_1}…γ_{i_k}`` for an array of element indices."""
        cur = start
        for i in word:
            cur = self.right[cur, i]
        return cur


def _perm_rows(generators: Sequence[GroupElement], colors: Sequence[str]):
    pos = {c: i for i, c in enumerate(colors)}
    rows = []
    for g in generators:
        chi = [pos[g.chi(c)] for c in colors]
        rows.append(np.array(chi + [len(colors) + x for x in g.h], dtype=np.int64))
    return rows


def generate_group(
    generators: Sequence[GroupElement],
    cap: int = DEFAULT_GROUP_CAP,
    colors: Sequence[str] | None = None,
    level: int | None = None,
    cell_cap: int | None = None,
) -> DuplicatorGroup:
    """Closure of the generators under composition, by breadth-first search.

    Raises :class:`GroupTooLarge` as soon as more than ``cap`` elements appear,
    or when the element table would exceed ``cell_cap`` entries.
    """
    if colors is None:
        seen = set()
        for g in generators:
            seen |= set(g.chi.mapping) | set(g.chi.mapping.values())
        colors = sorted(seen)
    colors = tuple(colors)
    K = len(colors)
    c_size = len(generators[0].h) if generators else 0
    width = K + c_size
    dtype = np.int16 if width < 2 ** 15 else np.int32
    gens = [r.astype(dtype) for r in _perm_rows(generators, colors)]
    # composite index tables: every column of C is offset by K
    for r in gens:
        if sorted(r.tolist()) != list(range(width)):
            raise ValueError("generator is not a permutation")
    ident = np.arange(width, dtype=dtype)
    rows = [ident]
    index = {ident.tobytes(): 0}
    parent = [0]
    via = [-1]
    right = []
    k = 0
    while k < len(rows):
        g = rows[k]
        r = []
        for i, s in enumerate(gens):
            prod = s[g]
            key = prod.tobytes()
            j = index.get(key)
            if j is None:
                j = len(rows)
                if j >= cap:
                    raise GroupTooLarge(cap, level)
                if cell_cap is not None and (j + 1) * width > cell_cap:
                    raise GroupTooLarge(cell_cap, level, "group table cells")
                rows.append(prod)
                index[key] = j
                parent.append(k)
                via.append(i)
            r.append(j)
        right.append(r)
        k += 1
    table = np.stack(rows)
    n = len(gens)
    right_arr = np.array(right, dtype=np.int64).reshape(len(rows), n)
    left = np.empty((len(rows), n), dtype=np.int64)
    for i, s in enumerate(gens):
        prods = table[:, s]  # γ_i·g: apply γ_i then g, i.e. g[γ_i]
        for gidx in range(len(rows)):
            left[gidx, i] = index[prods[gidx].tobytes()]
    group = DuplicatorGroup(colors, c_size, table, n, right_arr, left, np.array(parent), np.array(via), index)
    logger.debug("generated group of order %d (width %d)", len(rows), width)
    return group


@dataclass
class QuotientStructure:
    """``B = A×Γ/≡`` with the class of every point of ``A×Γ``."""

    structure: ColoredGraph | ColoredDigraph
    labels: np.ndarray  # labels[g * |A| + a] = position of the class in structure.vertices
    embedding: dict[str, str]
    n_a: int
    automorphisms: list[np.ndarray] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.structure.vertices)

    def cls(self, a: int, g: int) -> int:
        return int(self.labels[g * self.n_a + a])


def build_quotient(
    A,
    maps: Sequence[PartialPermorphism],
    gamma: DuplicatorGroup,
    C=None,
    designated: DesignatedColors | None = None,
    *,
    audit: bool = True,
    name_prefix: str = "t0_",
    incidence_cap: int | None = None,
    level: int | None = None,
) -> QuotientStructure:
    """Glue the copies ``A × {γ}`` along ``(a^{p_i}, γ) ≡ (a, γ_i γ)`` and install the induced structure.

    ``C`` (the carrier the ``h_i`` act on, with ``A`` in its first positions)
    enables the neighbour-transport audit; ``designated`` enables the
    designated-colour audit.
    """
    A = as_colored(A)
    base = A.base
    nA = len(base.vertices)
    N = len(gamma)
    idx = base.index
    total = nA * N

    src, dst = [], []
    g_all = np.arange(N, dtype=np.int64)
    for i, p in enumerate(maps):
        for a, b in p.map.items():
            ia, ib = idx[a], idx[b]
            src.append(g_all * nA + ib)
            dst.append(gamma.left[:, i] * nA + ia)
    if src and total:
        s = np.concatenate(src)
        d = np.concatenate(dst)
        graph = coo_matrix((np.ones_like(s, dtype=np.int8), (s, d)), shape=(total, total)).tocsr()
        _, raw = connected_components(graph, directed=False)
    else:
        raw = np.arange(total)

    # canonical naming: classes of (a, 1) first in the order of A, then by least (a, g)
    node = np.arange(total, dtype=np.int64)
    a_of = node % nA if nA else node
    g_of = node // nA if nA else node
    key = a_of * N + g_of
    n_raw = int(raw.max()) + 1 if total else 0
    least = np.full(n_raw, np.iinfo(np.int64).max, dtype=np.int64)
    np.minimum.at(least, raw, key)
    first = raw[:nA]  # classes of (a, identity)
    if len(set(first.tolist())) != nA:
        raise FactViolation(1, "two points of A are identified")
    order = np.full(n_raw, -1, dtype=np.int64)
    order[first] = np.arange(nA)
    rest = np.setdiff1d(np.arange(n_raw), first)
    rest = rest[np.argsort(least[rest], kind="stable")]
    order[rest] = np.arange(nA, n_raw)
    labels = order[raw]

    names = list(base.vertices) + fresh_names(base.vertices, name_prefix, len(rest))
    rep_node = np.empty(n_raw, dtype=np.int64)
    rep_node[labels[::-1]] = node[::-1]  # any member; the audit checks independence
    if incidence_cap is not None and n_raw:
        sizes = np.array([len(cs) for cs in A.color_sets], dtype=np.int64)
        weight = int(sizes[rep_node % nA].sum())
        if weight > incidence_cap:
            raise StructureTooLarge(incidence_cap, "colour incidences of B", level)

    # relation
    arcs = list(base.arcs) if base.directed else list(base.edges)
    if arcs:
        au = np.array([idx[u] for u, _ in arcs], dtype=np.int64)
        av = np.array([idx[v] for _, v in arcs], dtype=np.int64)
        eu = labels[(g_all[:, None] * nA + au[None, :]).ravel()]
        ev = labels[(g_all[:, None] * nA + av[None, :]).ravel()]
        if not base.directed:
            eu, ev = np.minimum(eu, ev), np.maximum(eu, ev)
        codes = np.unique(eu * n_raw + ev)
    else:
        codes = np.zeros(0, dtype=np.int64)
    rel = frozenset((names[int(c // n_raw)], names[int(c % n_raw)]) for c in codes)

    # colours: U(class of (a, (χ, h))) = U(a)^χ
    coloring = {}
    for cls_pos, nd in enumerate(rep_node.tolist()):
        a, g = nd % nA, nd // nA
        if A.color_sets[a]:
            coloring[names[cls_pos]] = _moved_colors(gamma, A.color_sets[a], g)
    if base.directed:
        structure = ColoredDigraph(Digraph(tuple(names), rel), A.colors, coloring)
    else:
        structure = ColoredGraph(Graph(tuple(names), rel), A.palettes, coloring)
    q = QuotientStructure(structure, labels, {v: v for v in base.vertices}, nA)

    if audit:
        audit_facts(q, A, gamma, C, designated)
    q.automorphisms = quotient_automorphisms(q, gamma)
    logger.debug("quotient: |A|=%d |Γ|=%d |B|=%d", nA, N, n_raw)
    return q


def _moved_colors(gamma: DuplicatorGroup, colors: frozenset, g: int) -> frozenset:
    """``U^χ`` for the colour permutation of element ``g``; colours outside the group's range stay fixed."""
    cache = gamma._pos_cache
    key = colors
    if key not in cache:
        cpos = gamma.color_pos
        inside = [c for c in colors if c in cpos]
        cache[key] = (np.array([cpos[c] for c in inside], dtype=np.int64), frozenset(c for c in colors if c not in cpos))
    pos, fixed = cache[key]
    if not len(pos):
        return fixed
    return fixed | frozenset(gamma.color_array[gamma.table[g, pos]].tolist())


def _class_constant(labels: np.ndarray, values: list, n_cls: int) -> int | None:
    """Return a node whose value differs from the first value seen in its class, or None."""
    seen: dict[int, object] = {}
    for nd, (lab, v) in enumerate(zip(labels.tolist(), values)):
        prev = seen.setdefault(lab, v)
        if prev != v:
            return nd
    return None


def audit_facts(q: QuotientStructure, A, gamma: DuplicatorGroup, C=None, designated: DesignatedColors | None = None) -> None:
    """Assert the representative-independence facts; raise :class:`FactViolation` on failure."""
    A = as_colored(A)
    base = A.base
    nA = q.n_a
    N = len(gamma)
    K = gamma.K
    labels = q.labels
    n_cls = q.size
    if nA == 0:
        return
    table = gamma.table
    cpos = {c: k for k, c in enumerate(gamma.colors)}

    # fact 1: a^h and U(a)^χ depend only on the class
    img = table[:, K:K + nA]  # img[g, a] = a^{h_g} (A occupies the first positions of C)
    vals = img.ravel().tolist()
    bad = _class_constant(labels, vals, n_cls)
    if bad is not None:
        raise FactViolation(1, f"a^h differs inside the class of point {divmod(bad, nA)[::-1]}")
    color_keys: list = [None] * (N * nA)
    for a in range(nA):
        cs = sorted(A.color_sets[a])
        moved = [cpos[c] for c in cs if c in cpos]
        fixed = tuple(c for c in cs if c not in cpos)
        if moved:
            imgs = np.sort(table[:, moved], axis=1)
            keys = [(fixed, r.tobytes()) for r in imgs]
        else:
            keys = [(fixed, b"")] * N
        for g in range(N):
            color_keys[g * nA + a] = keys[g]
    bad = _class_constant(labels, color_keys, n_cls)
    if bad is not None:
        raise FactViolation(1, f"U(a)^χ differs inside the class of point {divmod(bad, nA)[::-1]}")

    # fact 5: the installed colours are U(a)^χ; by fact 1 one member per class suffices
    s = q.structure
    rep = np.empty(n_cls, dtype=np.int64)
    rep[labels[::-1]] = np.arange(N * nA)[::-1]
    for cls_pos, nd in enumerate(rep.tolist()):
        a, g = nd % nA, nd // nA
        want = _moved_colors(gamma, A.color_sets[a], g)
        if s.color_sets[cls_pos] != want:
            raise FactViolation(5, f"colours of the class of ({base.vertices[a]}, {g}) are not U(a)^χ")

    # facts 2 and 4: same-copy pairs are related in B iff related in A
    if s.directed:
        target = s.base.arcs
    else:
        target = s.base.edges
    n_b = q.size
    codes_b = set()
    pos_b = s.base.index
    for u, v in target:
        codes_b.add(pos_b[u] * n_b + pos_b[v])
        if not s.directed:
            codes_b.add(pos_b[v] * n_b + pos_b[u])
    lab2 = labels.reshape(N, nA)
    for a in range(nA):
        for b in range(nA):
            if a == b:
                continue
            related = (b in base.out_adj[a])
            la, lb = lab2[:, a], lab2[:, b]
            if np.any(la == lb):
                raise FactViolation(1, f"{base.vertices[a]} and {base.vertices[b]} collapse in some copy")
            codes = la * n_b + lb
            if related:
                continue
            hit = [int(c) for c in codes.tolist() if c in codes_b]
            if hit:
                raise FactViolation(4, f"{base.vertices[a]},{base.vertices[b]} unrelated in A but related in some copy")

    # fact 3: C-neighbourhoods transported consistently, designated colours likewise
    if C is not None:
        Cb = as_colored(C).base
        keys = [None] * (N * nA)
        for a in range(nA):
            nb_out = sorted(Cb.out_adj[a])
            nb_in = sorted(Cb.in_adj[a]) if Cb.directed else []
            io = np.sort(table[:, [K + x for x in nb_out]], axis=1) if nb_out else np.zeros((N, 0), dtype=table.dtype)
            ii = np.sort(table[:, [K + x for x in nb_in]], axis=1) if nb_in else np.zeros((N, 0), dtype=table.dtype)
            for g in range(N):
                keys[g * nA + a] = (io[g].tobytes(), ii[g].tobytes())
        bad = _class_constant(labels, keys, n_cls)
        if bad is not None:
            raise FactViolation(3, f"C-neighbourhood transport differs inside the class of {divmod(bad, nA)[::-1]}")
    if designated is not None and designated.entries:
        js = sorted(designated.palettes())
        keys = [None] * (N * nA)
        for a in range(nA):
            cols = [designated.get(base.vertices[a], j) for j in js]
            cols_pos = [cpos[c] if c in cpos else -1 for c in cols]
            for g in range(N):
                keys[g * nA + a] = tuple(int(table[g, p]) if p >= 0 else cols[k] for k, p in enumerate(cols_pos))
        bad = _class_constant(labels, keys, n_cls)
        if bad is not None:
            raise FactViolation(3, f"designated colours differ inside the class of {divmod(bad, nA)[::-1]}")


def quotient_automorphisms(q: QuotientStructure, gamma: DuplicatorGroup) -> list[np.ndarray]:
    """``f_i : (a, γ)/≡ ↦ (a, γγ_i)/≡`` as position tables on the classes of ``B``."""
    nA = q.n_a
    N = len(gamma)
    labels = q.labels
    out = []
    if nA == 0:
        return [np.zeros(0, dtype=np.int64) for _ in range(gamma.n_generators)]
    node = np.arange(N * nA, dtype=np.int64)
    a_of = node % nA
    g_of = node // nA
    for i in range(gamma.n_generators):
        tgt = labels[gamma.right[g_of, i] * nA + a_of]
        f = np.full(q.size, -1, dtype=np.int64)
        f[labels] = tgt
        if not np.array_equal(f[labels], tgt):
            raise FactViolation("f", f"f_{i} is not well defined on classes")
        if np.any(f < 0) or len(np.unique(f)) != q.size:
            raise FactViolation("f", f"f_{i} is not a bijection")
        out.append(f)
    return out


def automorphism_maps(q: QuotientStructure) -> list[dict[str, str]]:
    names = q.structure.vertices
    return [{names[x]: names[int(y)] for x, y in enumerate(f)} for f in q.automorphisms]


def check_homomorphism(q: QuotientStructure, gamma: DuplicatorGroup, pairs: int = 100, sample: int = 256, seed: int = 0) -> int:
    """Spot-check ``φ(γγ') = φ(γ)φ(γ')`` on random pairs; returns the number of pairs checked.

    ``φ(γ)`` sends ``(a, δ)/≡`` to ``(a, δγ)/≡``.  Each pair is compared on up to
    ``sample`` class representatives.
    """
    rng = np.random.default_rng(seed)
    nA = q.n_a
    N = len(gamma)
    if nA == 0 or N == 0:
        return 0
    labels = q.labels
    rep = np.empty(q.size, dtype=np.int64)
    rep[labels[::-1]] = np.arange(N * nA)[::-1]
    if q.size > sample:
        rep = rng.choice(rep, size=sample, replace=False)
    a_of = rep % nA
    d_of = rep // nA
    for _ in range(pairs):
        g, h = (int(x) for x in rng.integers(0, N, size=2))
        gh = gamma.mul(g, h)
        lhs = labels[gamma.apply_word_right(d_of, gamma.word(gh)) * nA + a_of]
        mid = gamma.apply_word_right(d_of, gamma.word(g))
        # apply φ(h) to the class reached: representative-independence makes any member valid
        rhs = labels[gamma.apply_word_right(mid, gamma.word(h)) * nA + a_of]
        if not np.array_equal(lhs, rhs):
            raise FactViolation("homomorphism", f"φ({g}·{h}) ≠ φ({g})φ({h})")
    return pairs


def orbit_witness(b: str, f_list: Sequence[dict[str, str]], embedded: Sequence[str]) -> list[tuple[int, int]] | None:
    """Shortest word ``[(i, ±1), ...]`` with ``b`` mapped into the embedded copy of ``A``.

    Returns None when no such word exists (which the construction rules out).
    """
    target = set(embedded)
    if b in target:
        return []
    inverses = [{v: k for k, v in f.items()} for f in f_list]
    prev: dict[str, tuple[str, tuple[int, int]] | None] = {b: None}
    queue = deque([b])
    while queue:
        x = queue.popleft()
        for i in range(len(f_list)):
            for sign, f in ((1, f_list[i]), (-1, inverses[i])):
                y = f[x]
                if y in prev:
                    continue
                prev[y] = (x, (i, sign))
                if y in target:
                    word = []
                    cur = y
                    while prev[cur] is not None:
                        px, step = prev[cur]
                        word.append(step)
                        cur = px
                    return word[::-1]
                queue.append(y)
    return None
