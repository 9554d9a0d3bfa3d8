"""The full inductions: graph extensions by recursion on the clique size, digraph
extensions by recursion on the largest forbidden tournament.

Every level keeps the vertex set of ``A``; only the colours grow.  The
deepest level runs the duplicator once, and the structure it produces serves
every level after forgetting the palettes that level did not know about.

Indexing: the public ``m`` is the size of the clique to forbid.  A level with
``m == 1`` forbids critically coloured single points and is the base case.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Mapping, Sequence

from . import freeness as fr
from .duplicator import (
    DEFAULT_GROUP_CAP,
    GroupElement,
    automorphism_maps,
    build_quotient,
    check_homomorphism,
    generate_group,
)
from .errors import ClassSizeMismatch, FactViolation, InvalidInstance, NotFree, StructureTooLarge
from .structures import (
    AllTuples,
    CardinalityLedger,
    ColoredDigraph,
    ColoredGraph,
    ColorPermutation,
    CriticalColoringSet,
    CriticalTupleSet,
    DesignatedColors,
    DesignatedMap,
    Digraph,
    Graph,
    LiftedColoringSet,
    Palette,
    PartialPermorphism,
    Tournament,
    as_colored,
    validate_instance,
)
from .typerealize import (
    SymmetryExtension,
    TypeRealization,
    class_size_pairs,
    extend_to_symmetries_base,
    extend_to_symmetries_colored,
    realize_types_base,
    realize_types_digraph,
    realize_types_inductive,
    symmetry_problems,
)
from .verify import CertificateReport, verify_extension

logger = logging.getLogger(__name__)

DEFAULT_STRUCTURE_CAP = 100_000
# memory and time follow the number of (point, colour) incidences rather than point counts
DEFAULT_INCIDENCE_CAP = 1_000_000
DEFAULT_GROUP_CELL_CAP = 50_000_000


@dataclass(frozen=True)
class Options:
    cap_group: int = DEFAULT_GROUP_CAP
    cap_structure: int = DEFAULT_STRUCTURE_CAP
    cap_incidences: int = DEFAULT_INCIDENCE_CAP
    cap_group_cells: int = DEFAULT_GROUP_CELL_CAP
    strict_ledger: bool = False
    certify: bool = True
    certify_levels: bool = True
    hom_pairs: int = 100
    audit: bool = True


@dataclass(frozen=True)
class LiftedContext:
    """Everything the next recursion level needs after adding one palette."""

    A: ColoredGraph
    newPalette: Palette
    newChis: tuple[ColorPermutation, ...]
    newCritical: LiftedColoringSet
    designated: DesignatedColors
    maps: tuple[PartialPermorphism, ...]
    ledger: CardinalityLedger | None = None
    color_of: Mapping[str, str] = field(default_factory=dict)  # point of C -> its new colour


@dataclass
class Level:
    """One recursion level: its instance, constraint and side conditions."""

    index: int
    A: ColoredGraph | ColoredDigraph
    maps: tuple[PartialPermorphism, ...]
    constraint: object
    designated: object
    colors: frozenset
    stats: dict = field(default_factory=dict)


@dataclass
class ExtensionResult:
    B: ColoredGraph | ColoredDigraph
    automorphisms: list[PartialPermorphism]
    certificates: CertificateReport | None
    stats: list[dict]
    level_reports: list[tuple[int, CertificateReport]] = field(default_factory=list)
    B_full: ColoredGraph | ColoredDigraph | None = None
    group_order: int = 0

    @property
    def certified(self) -> bool:
        if self.certificates is None or not self.certificates.ok:
            return False
        return all(rep.ok for _, rep in self.level_reports)

    @property
    def maps(self) -> list[dict[str, str]]:
        return [dict(f.map) for f in self.automorphisms]


# ---------------------------------------------------------------------------
# helpers


def _as_permorphisms(maps) -> tuple[PartialPermorphism, ...]:
    out = []
    for p in maps:
        if isinstance(p, PartialPermorphism):
            out.append(p)
        else:
            out.append(PartialPermorphism({str(a): str(b) for a, b in dict(p).items()}, ColorPermutation()))
    return tuple(out)


def _check_structure_cap(size: int, opts: Options, what: str, level: int):
    if size > opts.cap_structure:
        raise StructureTooLarge(opts.cap_structure, what, level)


def _new_colors(C_vertices: Sequence[str], taken: set, prefix: str) -> dict[str, str]:
    """One fresh colour name per point of ``C``, avoiding existing colour names."""
    out = {}
    for d in C_vertices:
        name = f"{prefix}{d}"
        k = 0
        while name in taken:
            k += 1
            name = f"{prefix}{d}~{k}"
        taken.add(name)
        out[d] = name
    return out


def _audit_class_matching(tr, maps, ext, colored: bool, stats: dict):
    """Recount the matched classes on both sides and check the pointwise properties of each ``h_i``."""
    pairs = class_size_pairs(tr, maps, colored)
    for i, key, a, b in pairs:
        if a != b:
            raise ClassSizeMismatch(f"map {i}: class {key!r} has {a} points, its image has {b}")
    bad = symmetry_problems(tr, maps, ext, colored=colored)
    if bad:
        raise FactViolation("class-matching", bad[0])
    stats["class_pairs_checked"] = stats.get("class_pairs_checked", 0) + len(pairs)


def _run_base(A, maps, designated, level: int, opts: Options, stats: dict):
    """Base type realisation followed by the duplicator; returns ``(B_full, f maps, |Γ|)``."""
    t0 = time.perf_counter()
    tr = realize_types_base(A, level=level, cap=opts.cap_structure)
    ext = extend_to_symmetries_base(tr, maps)
    if opts.audit:
        _audit_class_matching(tr, maps, ext, False, stats)
    gens = [GroupElement(p.chi, h) for p, h in zip(maps, ext.h)]
    gamma = generate_group(gens, opts.cap_group, colors=A.all_colors, level=level, cell_cap=opts.cap_group_cells)
    if len(A.vertices) * len(gamma) > 4 * opts.cap_structure:
        raise StructureTooLarge(opts.cap_structure, "A×Γ", level)
    q = build_quotient(A, maps, gamma, C=tr.C, designated=designated if isinstance(designated, DesignatedColors) else None,
        audit=opts.audit, incidence_cap=opts.cap_incidences, level=level,
    )
    _check_structure_cap(q.size, opts, "B", level)
    hom = check_homomorphism(q, gamma, pairs=opts.hom_pairs) if opts.audit and opts.hom_pairs else 0
    stats.update(
        kind="base",
        C=len(tr.C.vertices),
        c0=tr.constants[0],
        group=len(gamma),
        group_width=int(gamma.table.shape[1]),
        B=q.size,
        hom_pairs_checked=hom,
        seconds=round(time.perf_counter() - t0, 4),
    )
    return q.structure, automorphism_maps(q), len(gamma)


def _finish(levels: list[Level], B_full, fmaps, order: int, opts: Options, project) -> ExtensionResult:
    """Project the deepest structure back to every level and certify."""
    top = levels[0]
    reports = []
    chis_full = levels[-1].maps
    for lv in levels:
        B_lv = project(B_full, lv)
        fs = [PartialPermorphism(f, chi.restrict(lv.colors)) for f, chi in zip(fmaps, (p.chi for p in chis_full))]
        if opts.certify and (opts.certify_levels or lv is top):
            t0 = time.perf_counter()
            rep = verify_extension(lv.A, _Plain(B_lv, fs), lv.constraint, lv.maps, lv.designated)
            lv.stats["verify_seconds"] = round(time.perf_counter() - t0, 4)
            lv.stats["certified"] = rep.ok
            reports.append((lv.index, rep))
    B_top = project(B_full, top)
    fs_top = [PartialPermorphism(f, p.chi) for f, p in zip(fmaps, top.maps)]
    cert = reports[0][1] if reports else None
    return ExtensionResult(B_top, fs_top, cert, [lv.stats for lv in levels], reports, B_full, order)


@dataclass
class _Plain:
    B: object
    automorphisms: list


# ---------------------------------------------------------------------------
# graphs


def lift_colors(
    C: ColoredGraph,
    h_list: SymmetryExtension,
    U_c: CriticalColoringSet | LiftedColoringSet,
    A: ColoredGraph,
    maps: Sequence[PartialPermorphism] = (),
    designated: DesignatedColors | None = None,
    *,
    level: int = 1,
    ledger: CardinalityLedger | None = None,
    tr: TypeRealization | None = None,
    clique_size: int = 0,
) -> LiftedContext:
    """Add the palette ``{U_d : d ∈ C}`` with ``a ∈ U_d ⟺ d R a`` and lift maps, critical tuples and designated colours."""
    A = as_colored(A)
    C = as_colored(C)
    taken = set(C.all_colors)
    color_of = _new_colors(C.vertices, taken, f"U{level}_")
    new_index = max((p.index for p in A.palettes), default=0) + 1
    palette = Palette(new_index, tuple(color_of[d] for d in C.vertices))

    cadj = C.base.adj
    cidx = C.base.index
    coloring = {v: set(A.colors(v)) for v in A.vertices}
    for a in A.vertices:
        for d in cadj[cidx[a]]:
            coloring[a].add(color_of[C.vertices[d]])
    lifted_A = ColoredGraph(A.graph, A.palettes + (palette,), {v: frozenset(cs) for v, cs in coloring.items()})

    cverts = C.vertices
    new_chis = []
    new_maps = []
    for p, h in zip(maps, h_list.h):
        extra = {color_of[cverts[x]]: color_of[cverts[y]] for x, y in enumerate(h) if x != y}
        chi = ColorPermutation({**p.chi.mapping, **extra})
        new_chis.append(chi)
        new_maps.append(PartialPermorphism(p.map, chi))

    # (V_1..V_r, U_d) is critical iff (V_1..V_r) is and d carries every V_j
    new_critical = LiftedColoringSet(
        U_c, {color_of[d]: d for d in cverts}, {d: C.color_sets[k] for k, d in enumerate(cverts)}, U_c.r + 1
    )

    entries = dict(designated.entries) if designated is not None else {}
    for a in A.vertices:
        entries[(a, new_index)] = color_of[a]
    new_designated = DesignatedColors(entries)

    new_ledger = ledger
    if ledger is not None and ledger.enabled and tr is not None:
        c1 = tr.constants.get(1, 0)
        ks = set()
        for a in A.vertices:
            k = sum(1 for U0 in tr.color_family if fr.is_realisable_graph(A, [a], U0, clique_size, U_c, ledger))
            ks.add(k)
        k = min(ks) if ks else 0
        new_ledger = ledger.with_entry(new_index, k * c1)
    return LiftedContext(lifted_A, palette, tuple(new_chis), new_critical, new_designated, tuple(new_maps), new_ledger, color_of)


def _graph_levels(A: ColoredGraph, maps, m: int, critical, designated, ledger, opts: Options):
    levels: list[Level] = []
    cur_A, cur_maps, cur_m, cur_crit, cur_des, cur_ledger = A, maps, m, critical, designated, ledger
    while True:
        lv_index = len(levels) + 1
        constraint = fr.CliqueFree(cur_m, cur_crit)
        lv = Level(lv_index, cur_A, cur_maps, constraint, cur_des, frozenset(cur_A.all_colors))
        lv.stats.update(level=lv_index, m=cur_m, palettes=len(cur_A.palettes), colors=len(cur_A.all_colors))
        levels.append(lv)
        report = validate_instance(
            cur_A, cur_maps, constraint, cur_des if cur_des is not None and cur_des.entries else None, cur_ledger,
            require_pair_coverage=opts.strict_ledger,
        )
        if not report.ok:
            if lv_index == 1:
                w = fr.find_critical_clique(cur_A, cur_m, cur_crit) if cur_m >= 1 else None
                if w is not None:
                    raise NotFree(f"A contains a critical K_{cur_m}: {list(w.vertices)}", w)
                raise InvalidInstance(report.violations)
            raise FactViolation("recursion", f"level {lv_index} hypotheses fail: {report.violations[0]}")
        if cur_m == 1:
            return levels
        t0 = time.perf_counter()
        tr = realize_types_inductive(
            cur_A, cur_m - 1, cur_crit, [p.chi for p in cur_maps], ledger=cur_ledger, level=lv_index,
            cap=opts.cap_structure, family_cap=opts.cap_structure, incidence_cap=opts.cap_incidences,
        )
        ext = extend_to_symmetries_colored(tr, cur_maps)
        if opts.audit:
            _audit_class_matching(tr, cur_maps, ext, True, lv.stats)
        lift = lift_colors(tr.C, ext, cur_crit, cur_A, cur_maps, cur_des, level=lv_index, ledger=cur_ledger, tr=tr, clique_size=cur_m - 1)
        _check_structure_cap(len(lift.newPalette.colors), opts, "palette", lv_index)
        lv.stats.update(
            kind="inductive",
            family=len(tr.color_family),
            C=len(tr.C.vertices),
            constants={str(k): v for k, v in tr.constants.items()},
            seconds=round(time.perf_counter() - t0, 4),
        )
        cur_A, cur_maps, cur_m, cur_crit, cur_des, cur_ledger = (
            lift.A, lift.maps, cur_m - 1, lift.newCritical, lift.designated, lift.ledger,
        )


def extend_colored(
    A: ColoredGraph,
    maps,
    m: int,
    U_c: CriticalColoringSet | None = None,
    designated: DesignatedColors | None = None,
    *,
    ledger: CardinalityLedger | None = None,
    options: Options | None = None,
    **kw,
) -> ExtensionResult:
    """Extend the ``χ_i``-permorphisms of a critically ``K_m``-free coloured graph to total ones."""
    opts = options or Options(**kw)
    A = as_colored(A)
    if A.directed:
        raise TypeError("extend_colored needs a coloured graph")
    if m < 1:
        raise InvalidInstance(["m must be at least 1"])
    maps = _as_permorphisms(maps)
    U_c = U_c if U_c is not None else CriticalColoringSet.plain()
    if ledger is None and opts.strict_ledger:
        ledger = CardinalityLedger({}, True)
    levels = _graph_levels(A, maps, m, U_c, designated, ledger, opts)
    deepest = levels[-1]
    B_full, fmaps, order = _run_base(deepest.A, deepest.maps, deepest.designated, deepest.index, opts, deepest.stats)

    def project(B, lv):
        return B.restrict_palettes(p.index for p in lv.A.palettes)

    return _finish(levels, B_full, fmaps, order, opts, project)


def extend_graph(A: Graph, maps, m: int, **kw) -> ExtensionResult:
    """Extend partial isomorphisms of a ``K_m``-free graph to automorphisms of a ``K_m``-free graph."""
    return extend_colored(as_colored(A), maps, m, CriticalColoringSet.plain(), None, **kw)


# ---------------------------------------------------------------------------
# digraphs


@dataclass(frozen=True, eq=False)
class LiftedTuples(CriticalTupleSet):
    """Critical tuples for ``T - t_1`` after adding the colours ``U_c^±``.

    ``(V_2, ..., V_l)`` is critical when one point ``c`` of ``C`` has
    ``U_c^{ε_k} ∈ V_k`` for every position and
    ``(U(c), V_2 ∩ U, ..., V_l ∩ U)`` is critical for the original tournament.
    """

    base: CriticalTupleSet
    universe: frozenset
    signs: tuple[str, ...]
    plus: Mapping[str, str]  # colour U_c^+ -> c
    minus: Mapping[str, str]
    point_colors: Mapping[str, frozenset]  # c -> U(c)
    plus_of: Mapping[str, str]  # c -> U_c^+
    minus_of: Mapping[str, str]

    @property
    def length(self) -> int:
        return len(self.signs)

    def contains(self, sets) -> bool:
        if len(sets) != len(self.signs):
            return False
        cand = None
        for V, sg in zip(sets, self.signs):
            table = self.plus if sg == "+" else self.minus
            pts = {table[c] for c in V if c in table}
            cand = pts if cand is None else cand & pts
            if not cand:
                return False
        restricted = tuple(frozenset(V) & self.universe for V in sets)
        for c in sorted(cand):
            if self.base.contains((self.point_colors[c],) + restricted):
                return True
        return False

    def is_invariant(self, chi: ColorPermutation) -> bool:
        if chi.image(self.universe) != self.universe or not self.base.is_invariant(chi):
            return False
        for c, col in self.plus_of.items():
            d = self.plus.get(chi(col))
            if d is None or chi(self.minus_of[c]) != self.minus_of[d]:
                return False
            if chi.image(self.point_colors[c]) != self.point_colors[d]:
                return False
        return True


def _digraph_levels(A: ColoredDigraph, maps, forbidden, designated, opts: Options):
    levels: list[Level] = []
    cur_A, cur_maps, cur_forb, cur_des = A, maps, list(forbidden), list(designated or [])
    while True:
        lv_index = len(levels) + 1
        constraint = fr.TournamentFree(tuple(cur_forb))
        lv = Level(lv_index, cur_A, cur_maps, constraint, tuple(cur_des), frozenset(cur_A.all_colors))
        biggest = max((len(t.vertices) for t, _ in cur_forb), default=0)
        lv.stats.update(level=lv_index, max_tournament=biggest, colors=len(cur_A.all_colors), forbidden=len(cur_forb))
        levels.append(lv)
        report = validate_instance(cur_A, cur_maps, constraint, cur_des or None)
        if not report.ok:
            if lv_index == 1:
                w = fr.check(cur_A, constraint) if not cur_A.problems() else None
                if w is not None:
                    raise NotFree(f"A contains a critical copy of forbidden tournament {w.extra}: {list(w.vertices)}", w)
                raise InvalidInstance(report.violations)
            raise FactViolation("recursion", f"level {lv_index} hypotheses fail: {report.violations[0]}")
        big = [(t, u) for t, u in cur_forb if len(t.vertices) > 1]
        if not big:
            return levels
        t0 = time.perf_counter()
        chis = [p.chi for p in cur_maps]
        tr = realize_types_digraph(
            cur_A, big, chis, level=lv_index, cap=opts.cap_structure, family_cap=opts.cap_structure,
            incidence_cap=opts.cap_incidences,
        )
        ext = extend_to_symmetries_colored(tr, cur_maps)
        if opts.audit:
            _audit_class_matching(tr, cur_maps, ext, True, lv.stats)
        C = tr.C
        taken = set(C.all_colors)
        plus_of = _new_colors(C.vertices, taken, f"P{lv_index}_")
        minus_of = _new_colors(C.vertices, taken, f"M{lv_index}_")
        _check_structure_cap(2 * len(C.vertices), opts, "colours", lv_index)
        cb = C.base
        cidx = cb.index
        coloring = {v: set(cur_A.colors_of(v)) for v in cur_A.vertices}
        for a in cur_A.vertices:
            ia = cidx[a]
            coloring[a].update(plus_of[cb.vertices[c]] for c in cb.in_adj[ia])  # c R a
            coloring[a].update(minus_of[cb.vertices[c]] for c in cb.out_adj[ia])  # a R c
        universe = frozenset(cur_A.all_colors)
        new_colors = cur_A.colors + tuple(plus_of[v] for v in C.vertices) + tuple(minus_of[v] for v in C.vertices)
        new_A = ColoredDigraph(cur_A.digraph, new_colors, {v: frozenset(cs) for v, cs in coloring.items()})
        new_maps = []
        for p, h in zip(cur_maps, ext.h):
            extra = {}
            for x, y in enumerate(h):
                if x != y:
                    cx, cy = C.vertices[x], C.vertices[y]
                    extra[plus_of[cx]] = plus_of[cy]
                    extra[minus_of[cx]] = minus_of[cy]
            new_maps.append(PartialPermorphism(p.map, ColorPermutation({**p.chi.mapping, **extra})))
        point_colors = {v: C.color_sets[k] for k, v in enumerate(C.vertices)}
        plus_rev = {c: v for v, c in plus_of.items()}
        minus_rev = {c: v for v, c in minus_of.items()}
        new_forb = []
        for t, u in cur_forb:
            if len(t.vertices) == 1:
                new_forb.append((t, u))
                continue
            rest, signs = fr.split_tournament(t)
            new_forb.append((rest, LiftedTuples(u, universe, signs, plus_rev, minus_rev, point_colors, plus_of, minus_of)))
        new_des = list(cur_des) + [
            DesignatedMap({a: plus_of[a] for a in cur_A.vertices}, "out"),
            DesignatedMap({a: minus_of[a] for a in cur_A.vertices}, "in"),
        ]
        lv.stats.update(
            kind="digraph",
            family=len(tr.color_family),
            C=len(C.vertices),
            constants={str(k): v for k, v in tr.constants.items()},
            seconds=round(time.perf_counter() - t0, 4),
        )
        cur_A, cur_maps, cur_forb, cur_des = new_A, tuple(new_maps), new_forb, new_des


def extend_digraph(
    A,
    maps,
    forbidden: Sequence[tuple[Tournament, CriticalTupleSet] | Tournament],
    designated: Sequence[DesignatedMap] | None = None,
    *,
    options: Options | None = None,
    **kw,
) -> ExtensionResult:
    """Extend the permorphisms of a coloured digraph free of critical copies of the forbidden tournaments."""
    opts = options or Options(**kw)
    A = as_colored(A)
    if not A.directed:
        raise TypeError("extend_digraph needs a (coloured) digraph")
    maps = _as_permorphisms(maps)
    items = []
    for f in forbidden:
        if isinstance(f, Digraph):
            items.append((f, AllTuples(len(f.vertices))))
        else:
            items.append(tuple(f))
    levels = _digraph_levels(A, maps, items, designated, opts)
    deepest = levels[-1]
    B_full, fmaps, order = _run_base(deepest.A, deepest.maps, None, deepest.index, opts, deepest.stats)

    def project(B, lv):
        return B.restrict_colors(lv.A.all_colors)

    return _finish(levels, B_full, fmaps, order, opts, project)


# ---------------------------------------------------------------------------
# tournaments and family reduction


def _canonical_code(matrix: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Least upper-triangle code over the orderings that sort vertices by score; also the ordering used."""
    n = len(matrix)
    scores = [sum(row) for row in matrix]
    groups = [[v for v in range(n) if scores[v] == s] for s in sorted(set(scores))]
    best = None
    for parts in product(*(permutations(g) for g in groups)):
        order = [v for part in parts for v in part]
        code = tuple(matrix[order[i]][order[j]] for i in range(n) for j in range(i + 1, n))
        if best is None or code < best[0]:
            best = (code, tuple(order))
    return best


def _from_code(n: int, code: Sequence[int]) -> Tournament:
    rows = [[0] * n for _ in range(n)]
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            if code[k]:
                rows[i][j] = 1
            else:
                rows[j][i] = 1
            k += 1
    return Tournament.from_matrix(rows)


def enumerate_tournaments(k: int) -> list[Tournament]:
    """One tournament per isomorphism type on ``k`` vertices, ordered by canonical code.

    Grown one vertex at a time from the representatives of size ``k - 1``.
    """
    if k < 1:
        return []
    codes = {()}
    for n in range(2, k + 1):
        nxt = set()
        for code in codes:
            base = _from_code(n - 1, code)
            prev = [[1 if (u, v) in base.arcs else 0 for v in base.vertices] for u in base.vertices]
            for dirs in product((0, 1), repeat=n - 1):
                rows = [r + [dirs[i]] for i, r in enumerate(prev)]
                rows.append([1 - d for d in dirs] + [0])
                nxt.add(_canonical_code(rows)[0])
        codes = nxt
    return [_from_code(k, c) for c in sorted(codes)]


@dataclass(frozen=True)
class MinSizeRule:
    """The infinite family of all tournaments with at least ``min_size`` vertices."""

    min_size: int


def reduce_family(family_spec, A_size: int) -> list[Tournament]:
    """A finite family equivalent to ``family_spec`` for extending a structure of ``A_size`` points.

    Keeps the members of size at most ``A_size`` and appends every tournament
    of size ``A_size + 1``: ``A`` avoids the latter trivially, and any digraph
    avoiding them avoids every larger tournament too.
    """
    if isinstance(family_spec, MinSizeRule):
        small = [t for k in range(max(1, family_spec.min_size), A_size + 1) for t in enumerate_tournaments(k)]
    else:
        small = [t for t in family_spec if len(t.vertices) <= A_size]
    return small + enumerate_tournaments(A_size + 1)
