"""Independent certification of extensions, plus a tiny exhaustive existence oracle.

Nothing here imports the construction modules: every check goes back to the
definitions, using only the data types and the freeness searches.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from . import freeness as fr
from .errors import BudgetExhausted
from .structures import (
    ColoredDigraph,
    ColoredGraph,
    ColorPermutation,
    DesignatedColors,
    DesignatedMap,
    Digraph,
    Graph,
    PartialPermorphism,
    as_colored,
)

CHECK_NAMES = (
    "induced-substructure",
    "extension",
    "bijectivity",
    "automorphism",
    "freeness",
    "orbit-condition",
    "neighborhood-color-condition",
)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    witness: object = None
    detail: str = ""


@dataclass
class CertificateReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            line = f"{'PASS' if c.passed else 'FAIL'} {c.name}"
            if c.detail:
                line += f": {c.detail}"
            if not c.passed and c.witness is not None:
                line += f" witness={c.witness!r}"
            out.append(line)
        return out

    def to_dict(self) -> list[dict]:
        return [
            {"name": c.name, "passed": c.passed, "detail": c.detail, "witness": _jsonable(c.witness)}
            for c in self.checks
        ]


def _jsonable(x):
    if x is None or isinstance(x, (str, int, float, bool)):
        return x
    if isinstance(x, (frozenset, set)):
        return sorted(_jsonable(y) for y in x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(y) for y in x]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    return repr(x)


def _related(s, u: str, v: str) -> bool:
    b = s.base
    return b.has_arc(u, v) if b.directed else b.adjacent(u, v)


def _relation(s) -> frozenset:
    b = s.base
    return b.arcs if b.directed else b.edges


def _own_colors(s) -> frozenset:
    return frozenset(s.all_colors)


def verify_extension(
    A,
    result,
    constraint,
    maps: Sequence[PartialPermorphism],
    designated: DesignatedColors | Sequence[DesignatedMap] | None = None,
    *,
    budget: int | None = None,
) -> CertificateReport:
    """Run the seven definition-level checks on ``result`` (anything with ``.B`` and ``.automorphisms``).

    The automorphisms may be :class:`PartialPermorphism` objects (total maps
    with their colour permutation) or plain dicts, in which case the colour
    permutation of the matching partial map is assumed.
    """
    A = as_colored(A)
    B = as_colored(result.B)
    fs: list[PartialPermorphism] = []
    for k, f in enumerate(result.automorphisms):
        if isinstance(f, PartialPermorphism):
            fs.append(f)
        else:
            chi = maps[k].chi if k < len(maps) else ColorPermutation()
            fs.append(PartialPermorphism(dict(f), chi))
    rep = CertificateReport()
    rep.checks.append(_check_induced(A, B))
    rep.checks.append(_check_extension(A, maps, fs))
    rep.checks.append(_check_bijective(B, fs))
    rep.checks.append(_check_automorphism(B, fs))
    rep.checks.append(_check_freeness(B, constraint, budget))
    rep.checks.append(_check_orbits(A, B, fs))
    rep.checks.append(_check_neighbour_colors(A, B, designated))
    return rep


def _check_induced(A, B) -> Check:
    name = "induced-substructure"
    bverts = set(B.vertices)
    for v in A.vertices:
        if v not in bverts:
            return Check(name, False, v, "vertex of A missing from B")
    for u in A.vertices:
        for v in A.vertices:
            if u != v and _related(A, u, v) != _related(B, u, v):
                return Check(name, False, (u, v), "relation differs on A")
    mine = _own_colors(A)
    bidx = B.base.index
    aidx = A.base.index
    for v in A.vertices:
        if B.color_sets[bidx[v]] & mine != A.color_sets[aidx[v]]:
            return Check(name, False, v, "colours differ on A")
    return Check(name, True)


def _check_extension(A, maps, fs) -> Check:
    name = "extension"
    if len(fs) != len(maps):
        return Check(name, False, len(fs), f"expected {len(maps)} automorphisms")
    colors = _own_colors(A)
    for i, (p, f) in enumerate(zip(maps, fs)):
        for a, b in p.map.items():
            if f.map.get(a) != b:
                return Check(name, False, (i, a), f"f_{i}({a}) = {f.map.get(a)!r}, expected {b!r}")
        for c in colors:
            if p.chi(c) != f.chi(c):
                return Check(name, False, (i, c), f"colour permutation of f_{i} disagrees with p_{i}")
    return Check(name, True)


def _check_bijective(B, fs) -> Check:
    name = "bijectivity"
    verts = set(B.vertices)
    for i, f in enumerate(fs):
        if set(f.map) != verts:
            missing = sorted(verts - set(f.map))[:1] or sorted(set(f.map) - verts)[:1]
            return Check(name, False, (i, missing), f"f_{i} is not total on B")
        if set(f.map.values()) != verts:
            return Check(name, False, i, f"f_{i} is not onto B")
    return Check(name, True)


def _check_automorphism(B, fs) -> Check:
    """Relation preserved forwards, and the images are as many as the pairs.

    Together with bijectivity this covers non-adjacent pairs too, without
    visiting all ``|B|^2`` pairs.
    """
    name = "automorphism"
    rel = _relation(B)
    ordered = sorted(rel)
    directed = B.base.directed
    idx = B.base.index
    for i, f in enumerate(fs):
        m = f.map
        for u, v in ordered:
            fu, fv = m.get(u), m.get(v)
            ok = (fu, fv) in rel if directed else ((fu, fv) in rel or (fv, fu) in rel)
            if not ok:
                return Check(name, False, (i, (u, v)), f"f_{i} does not preserve the relation at ({u},{v})")
        images = {(m[u], m[v]) if directed else frozenset((m[u], m[v])) for u, v in rel if u in m and v in m}
        if len(images) != len(rel):
            return Check(name, False, i, f"f_{i} is not injective on the relation")
        for v in B.vertices:
            if v in m and f.chi.image(B.color_sets[idx[v]]) != B.color_sets[idx[m[v]]]:
                return Check(name, False, (i, v), f"f_{i} is not a chi-permorphism at {v}")
    return Check(name, True)


def _check_freeness(B, constraint, budget) -> Check:
    name = "freeness"
    try:
        w = fr.check(B, constraint, budget)
    except BudgetExhausted as e:
        return Check(name, False, None, str(e))
    if w is not None:
        return Check(name, False, w.vertices, "forbidden pattern found")
    return Check(name, True)


def _check_orbits(A, B, fs) -> Check:
    """Every point of B is reachable from A under the group generated by the f_i."""
    name = "orbit-condition"
    seen = set(A.vertices) & set(B.vertices)
    inv = [{v: k for k, v in f.map.items()} for f in fs]
    queue = deque(seen)
    while queue:
        x = queue.popleft()
        for f, g in zip(fs, inv):
            for y in (f.map.get(x), g.get(x)):
                if y is not None and y not in seen:
                    seen.add(y)
                    queue.append(y)
    for v in B.vertices:
        if v not in seen:
            return Check(name, False, v, "point has no orbit element in A")
    return Check(name, True)


def _check_neighbour_colors(A, B, designated) -> Check:
    name = "neighborhood-color-condition"
    if not designated:
        return Check(name, True, None, "no designated colours (vacuous)")
    bidx = B.base.index
    if isinstance(designated, DesignatedColors):
        for (a, j), col in sorted(designated.entries.items()):
            if a not in bidx:
                return Check(name, False, a, "designated vertex missing from B")
            for b in B.base.neighbors(a):
                if col not in B.color_sets[bidx[b]]:
                    return Check(name, False, (a, b, j), f"{b} adjacent to {a} lacks U_{a}^{j}")
        return Check(name, True, None, f"{len(designated.entries)} designated colours")
    base = B.base
    for k, dm in enumerate(designated):
        for a, col in sorted(dm.colors.items()):
            if a not in bidx:
                return Check(name, False, a, "designated vertex missing from B")
            ia = bidx[a]
            nbrs = base.in_adj[ia] if dm.variant == "in" else base.out_adj[ia]
            for ib in nbrs:
                if col not in B.color_sets[ib]:
                    return Check(name, False, (k, a, base.vertices[ib]), f"{dm.variant}-variant colour of {a} missing")
    return Check(name, True, None, f"{len(designated)} designated maps")


# ---------------------------------------------------------------------------
# brute-force oracle


@dataclass
class OracleResult:
    B: ColoredGraph | ColoredDigraph
    automorphisms: list[PartialPermorphism]
    nodes: int = 0


class _Counter:
    def __init__(self, budget):
        self.budget = budget
        self.used = 0

    def tick(self):
        self.used += 1
        if self.budget is not None and self.used > self.budget:
            raise BudgetExhausted(self.budget)


def _candidate_color_sets(A, maps) -> list[frozenset]:
    colors = list(A.all_colors)
    if not colors:
        return [frozenset()]
    if len(colors) <= 4:
        out = []
        for mask in range(1 << len(colors)):
            out.append(frozenset(c for i, c in enumerate(colors) if mask >> i & 1))
        return out
    # larger universes: the orbits of the colour sets already present
    seen = set(A.color_sets)
    stack = list(seen)
    while stack:
        s = stack.pop()
        for p in maps:
            t = p.chi.image(s)
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return sorted(seen, key=lambda s: (len(s), sorted(s)))


def _find_extension_map(B, p: PartialPermorphism, counter: _Counter) -> dict[str, str] | None:
    """Backtracking search for a total chi-permorphism of B extending p."""
    base = B.base
    verts = base.vertices
    idx = base.index
    cols = B.color_sets
    n = len(verts)
    f = {idx[a]: idx[b] for a, b in p.map.items()}
    used = set(f.values())
    if len(used) != len(f):
        return None
    out_adj = base.out_adj
    for a, b in f.items():
        if p.chi.image(cols[a]) != cols[b]:
            return None
    order = [i for i in range(n) if i not in f]

    def consistent(x, y):
        if p.chi.image(cols[x]) != cols[y]:
            return False
        for a, b in f.items():
            if (a in out_adj[x]) != (b in out_adj[y]) or (x in out_adj[a]) != (y in out_adj[b]):
                return False
        return True

    for a in list(f):
        for b in list(f):
            if a != b and (b in out_adj[a]) != (f[b] in out_adj[f[a]]):
                return None

    def rec(k):
        if k == len(order):
            return True
        x = order[k]
        for y in range(n):
            if y in used:
                continue
            counter.tick()
            if consistent(x, y):
                f[x] = y
                used.add(y)
                if rec(k + 1):
                    return True
                del f[x]
                used.discard(y)
        return False

    if rec(0):
        return {verts[a]: verts[b] for a, b in f.items()}
    return None


def brute_force_extension(A, maps: Sequence[PartialPermorphism], constraint, size_cap: int, budget: int | None = 2_000_000) -> OracleResult | None:
    """Exhaustive search for ``B ⊇ A`` with ``|B| ≤ size_cap`` carrying extending permorphisms.

    Returns the first extension found (by size, then relation pattern on the
    new points, then colour choice) or None when nothing exists within the
    cap.  None is never a proof of non-existence beyond the cap.  Raises
    :class:`BudgetExhausted` when ``budget`` search nodes are used up.
    """
    A = as_colored(A)
    base = A.base
    directed = base.directed
    counter = _Counter(budget)
    color_opts = _candidate_color_sets(A, maps)
    taken = set(base.vertices)
    for size in range(len(base.vertices), size_cap + 1):
        k = size - len(base.vertices)
        new = []
        i = 0
        while len(new) < k:
            name = f"x{i}"
            i += 1
            if name not in taken:
                new.append(name)
        verts = list(base.vertices) + new
        pairs = [(u, v) for a, u in enumerate(verts) for v in verts[a + 1:] if u in new or v in new]
        states = 3 if directed else 2
        for pattern in product(range(states), repeat=len(pairs)):
            counter.tick()
            rel = set(base.arcs if directed else base.edges)
            for (u, v), st in zip(pairs, pattern):
                if st == 1:
                    rel.add((u, v))
                elif st == 2:
                    rel.add((v, u))
            for colors in product(color_opts, repeat=k):
                counter.tick()
                coloring = dict(A.coloring)
                for v, cs in zip(new, colors):
                    if cs:
                        coloring[v] = cs
                if directed:
                    B = ColoredDigraph(Digraph(tuple(verts), frozenset(rel)), A.colors, coloring)
                else:
                    B = ColoredGraph(Graph(tuple(verts), frozenset(rel)), A.palettes, coloring)
                if fr.check(B, constraint) is not None:
                    continue
                fs = []
                for p in maps:
                    f = _find_extension_map(B, p, counter)
                    if f is None:
                        break
                    fs.append(PartialPermorphism(f, p.chi))
                else:
                    return OracleResult(B, fs, counter.used)
    return None
