"""Command-line front end.

    eppa extend INSTANCE.json [-o RESULT.json] [--cap-group N] ...
    eppa verify INSTANCE.json RESULT.json
    eppa enumerate tournaments K

Exit codes: 0 success, 1 certification failure, 2 input not free,
3 a cap or bound was hit, 4 unreadable or inconsistent input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from .errors import BudgetExhausted, CapExceeded, InvalidInstance, NotFree
from .freeness import CliqueFree, TournamentFree
from .pipeline import (
    DEFAULT_GROUP_CELL_CAP,
    DEFAULT_INCIDENCE_CAP,
    DEFAULT_STRUCTURE_CAP,
    MinSizeRule,
    Options,
    enumerate_tournaments,
    extend_colored,
    extend_digraph,
    reduce_family,
)
from .duplicator import DEFAULT_GROUP_CAP
from .structures import (
    AllTuples,
    ColoredDigraph,
    ColoredGraph,
    ColorPermutation,
    CriticalColoringSet,
    DesignatedColors,
    DesignatedMap,
    Digraph,
    ExplicitTuples,
    Graph,
    Palette,
    PartialPermorphism,
    Tournament,
    as_colored,
    structure_from_dict,
    structure_to_dict,
)
from .verify import brute_force_extension, verify_extension

logger = logging.getLogger("eppa")

INSTANCE_FORMAT = "eppa-instance/1"
RESULT_FORMAT = "eppa-result/1"
ENUMERATION_FORMAT = "eppa-tournaments/1"

EXIT_OK, EXIT_UNCERTIFIED, EXIT_NOT_FREE, EXIT_CAP, EXIT_INPUT = 0, 1, 2, 3, 4
MAX_ENUMERATE = 6

# wall-clock fields make output differ between identical runs
_TIMING_KEYS = ("seconds", "verify_seconds")


class InputError(Exception):
    """Malformed input file; the message names the offending position."""


@dataclass
class Instance:
    kind: str
    A: ColoredGraph | ColoredDigraph
    maps: list[PartialPermorphism]
    constraint: dict
    designated: object = None

    def freeness(self):
        """The freeness constraint to certify against, with infinite families reduced."""
        c = self.constraint
        if self.kind == "graph":
            return CliqueFree(c["m"], c["critical"])
        return TournamentFree(tuple(c["items"]))


# ---------------------------------------------------------------------------
# parsing


def _need(d, key, where, kind=None):
    if not isinstance(d, dict) or key not in d:
        raise InputError(f"{where}: missing field {key!r}")
    v = d[key]
    if kind is not None and not isinstance(v, kind):
        raise InputError(f"{where}.{key}: expected {kind.__name__ if isinstance(kind, type) else kind}")
    return v


def _pairs(raw, where) -> frozenset:
    if not isinstance(raw, list):
        raise InputError(f"{where}: expected a list of pairs")
    out = set()
    for k, e in enumerate(raw):
        if not isinstance(e, list) or len(e) != 2:
            raise InputError(f"{where}[{k}]: expected a 2-element array")
        out.add((str(e[0]), str(e[1])))
    return frozenset(out)


def _coloring(d, vertices, where) -> dict:
    raw = d.get("coloring", {})
    if not isinstance(raw, dict):
        raise InputError(f"{where}.coloring: expected an object")
    vs = set(vertices)
    out = {}
    for v, cs in raw.items():
        if v not in vs:
            raise InputError(f"{where}.coloring.{v}: unknown vertex")
        if not isinstance(cs, list):
            raise InputError(f"{where}.coloring.{v}: expected a list of colours")
        out[v] = frozenset(map(str, cs))
    return out


def _tournament(raw, where) -> Tournament:
    vs = tuple(map(str, _need(raw, "vertices", where, list)))
    t = Tournament(vs, _pairs(raw.get("arcs", []), f"{where}.arcs"))
    bad = t.problems()
    if bad:
        raise InputError(f"{where}: {bad[0]}")
    return t


def _check_pairs(pairs, vertices, where):
    vs = set(vertices)
    for u, v in sorted(pairs):
        if u not in vs or v not in vs:
            raise InputError(f"{where}: pair ({u!r}, {v!r}) uses an unknown vertex")


def parse_instance(data) -> Instance:
    if not isinstance(data, dict):
        raise InputError("instance: expected a JSON object")
    fmt = data.get("format", INSTANCE_FORMAT)
    if fmt != INSTANCE_FORMAT:
        raise InputError(f"format: unsupported {fmt!r} (expected {INSTANCE_FORMAT!r})")
    kind = _need(data, "kind", "instance", str)
    if kind not in ("graph", "digraph"):
        raise InputError(f"kind: expected 'graph' or 'digraph', got {kind!r}")
    vertices = tuple(map(str, _need(data, "vertices", "instance", list)))
    if len(set(vertices)) != len(vertices):
        raise InputError("vertices: duplicate vertex")
    coloring = _coloring(data, vertices, "instance")
    if kind == "graph":
        edges = _pairs(data.get("edges", []), "edges")
        _check_pairs(edges, vertices, "edges")
        raw_pals = data.get("palettes", [])
        if not isinstance(raw_pals, list) or not all(isinstance(p, list) for p in raw_pals):
            raise InputError("palettes: expected a list of colour lists")
        pals = tuple(Palette(j, tuple(map(str, p))) for j, p in enumerate(raw_pals, 1))
        A = ColoredGraph(Graph(vertices, edges), pals, coloring)
    else:
        arcs = _pairs(data.get("arcs", []), "arcs")
        _check_pairs(arcs, vertices, "arcs")
        colors = tuple(map(str, data.get("colors", sorted({c for cs in coloring.values() for c in cs}))))
        A = ColoredDigraph(Digraph(vertices, arcs), colors, coloring)

    maps = []
    for k, raw in enumerate(data.get("partial_maps", [])):
        where = f"partial_maps[{k}]"
        m = _need(raw, "map", where, dict)
        chi = raw.get("chi", {})
        if not isinstance(chi, dict):
            raise InputError(f"{where}.chi: expected an object")
        maps.append(PartialPermorphism({str(a): str(b) for a, b in m.items()}, ColorPermutation(chi)))

    raw_c = _need(data, "constraint", "instance", dict)
    ctype = _need(raw_c, "type", "constraint", str)
    if kind == "graph":
        if ctype != "clique_free":
            raise InputError(f"constraint.type: graphs take 'clique_free', got {ctype!r}")
        m = _need(raw_c, "m", "constraint", int)
        if m < 1:
            raise InputError("constraint.m: must be at least 1")
        crit_raw = raw_c.get("critical")
        if crit_raw is None:
            critical = CriticalColoringSet.plain()
        else:
            if not isinstance(crit_raw, list) or not all(isinstance(t, list) for t in crit_raw):
                raise InputError("constraint.critical: expected a list of colour tuples")
            critical = CriticalColoringSet(frozenset(tuple(map(str, t)) for t in crit_raw))
        constraint = {"type": ctype, "m": m, "critical": critical}
    else:
        if ctype == "forbidden_tournaments":
            items = []
            for k, raw in enumerate(_need(raw_c, "tournaments", "constraint", list)):
                where = f"constraint.tournaments[{k}]"
                t = _tournament(raw, where)
                crit = raw.get("critical")
                if crit is None:
                    items.append((t, AllTuples(len(t.vertices))))
                else:
                    universe = raw.get("universe", sorted(A.colors))
                    tuples = frozenset(tuple(frozenset(map(str, s)) for s in tup) for tup in crit)
                    items.append((t, ExplicitTuples(tuples, frozenset(map(str, universe)), len(t.vertices))))
        elif ctype == "all_tournaments_min_size":
            s = _need(raw_c, "s", "constraint", int)
            items = [(t, AllTuples(len(t.vertices))) for t in reduce_family(MinSizeRule(s), len(vertices))]
        else:
            raise InputError(f"constraint.type: unknown digraph constraint {ctype!r}")
        constraint = {"type": ctype, "items": items}

    designated = None
    raw_d = data.get("designated")
    if raw_d is not None:
        if kind == "graph":
            entries = {}
            for k, e in enumerate(raw_d):
                if not isinstance(e, list) or len(e) != 3:
                    raise InputError(f"designated[{k}]: expected [vertex, palette index, colour]")
                entries[(str(e[0]), int(e[1]))] = str(e[2])
            designated = DesignatedColors(entries)
        else:
            designated = []
            for k, e in enumerate(raw_d):
                where = f"designated[{k}]"
                cols = _need(e, "colors", where, dict)
                variant = e.get("variant", "in")
                if variant not in ("in", "out"):
                    raise InputError(f"{where}.variant: expected 'in' or 'out'")
                designated.append(DesignatedMap({str(a): str(c) for a, c in cols.items()}, variant))
    return Instance(kind, A, maps, constraint, designated)


def load_json(path: str, what: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as e:
        raise InputError(f"{what}: cannot read {path}: {e.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{what}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None


def parse_result(data, inst: Instance):
    """The structure and total maps from a result file, checked against the instance's vertex set."""
    if not isinstance(data, dict):
        raise InputError("result: expected a JSON object")
    if data.get("format") != RESULT_FORMAT:
        raise InputError(f"result.format: expected {RESULT_FORMAT!r}")
    raw_B = _need(data, "B", "result", dict)
    try:
        B = as_colored(structure_from_dict(raw_B))
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"result.B: {e}") from None
    if B.directed != inst.A.directed:
        raise InputError("result.B: kind does not match the instance")
    bv = set(B.vertices)
    missing = [v for v in inst.A.vertices if v not in bv]
    if missing:
        raise InputError(f"result.B.vertices: instance vertex {missing[0]!r} is absent")
    fs = []
    for k, raw in enumerate(_need(data, "automorphisms", "result", list)):
        where = f"result.automorphisms[{k}]"
        m = _need(raw, "map", where, dict)
        if set(m) != bv:
            raise InputError(f"{where}.map: domain differs from the vertex set of B")
        fs.append(PartialPermorphism({str(a): str(b) for a, b in m.items()}, ColorPermutation(raw.get("chi", {}))))
    if len(fs) != len(inst.maps):
        raise InputError(f"result.automorphisms: {len(fs)} maps for {len(inst.maps)} partial maps")
    return B, fs


# ---------------------------------------------------------------------------
# output


def _chi_dict(chi: ColorPermutation) -> dict:
    return {k: chi.mapping[k] for k in sorted(chi.mapping)}


def _clean_stats(stats: list[dict], timings: bool) -> list[dict]:
    out = []
    for s in stats:
        d = {k: v for k, v in s.items() if timings or k not in _TIMING_KEYS}
        out.append({k: d[k] for k in sorted(d)})
    return out


def to_dot(B) -> str:
    B = as_colored(B)
    directed = B.directed
    lines = ["digraph B {" if directed else "graph B {"]
    for v, cs in zip(B.vertices, B.color_sets):
        cols = ",".join(sorted(cs))
        label = f"{v}\\n{cols}" if cols else v
        lines.append(f'  "{v}" [label="{label}"];')
    d = structure_to_dict(B)
    op = "->" if directed else "--"
    for u, v in d.get("arcs" if directed else "edges", []):
        lines.append(f'  "{u}" {op} "{v}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ---------------------------------------------------------------------------
# commands


def _options(args) -> Options:
    return Options(
        cap_group=args.cap_group,
        cap_structure=args.cap_structure,
        cap_incidences=args.cap_incidences,
        cap_group_cells=args.cap_group_cells,
        strict_ledger=args.strict_ledger,
    )


def cmd_extend(args) -> int:
    inst = parse_instance(load_json(args.instance, "instance"))
    opts = _options(args)
    logger.info("extending %s on %d vertices with %d maps", inst.kind, len(inst.A.vertices), len(inst.maps))
    if inst.kind == "graph":
        c = inst.constraint
        res = extend_colored(inst.A, inst.maps, c["m"], c["critical"], inst.designated, options=opts)
    else:
        res = extend_digraph(inst.A, inst.maps, inst.constraint["items"], inst.designated, options=opts)

    out = {
        "format": RESULT_FORMAT,
        "kind": inst.kind,
        "certified": res.certified,
        "B": structure_to_dict(res.B),
        "automorphisms": [{"map": dict(f.map), "chi": _chi_dict(f.chi)} for f in res.automorphisms],
        "certificates": res.certificates.to_dict() if res.certificates else [],
        "group_order": res.group_order,
        "stats": _clean_stats(res.stats, timings=False),
    }
    if args.oracle_max_size is not None:
        found = brute_force_extension(inst.A, inst.maps, inst.freeness(), args.oracle_max_size)
        out["oracle"] = {"size_cap": args.oracle_max_size, "found": found is not None}
        if found is not None:
            out["oracle"]["size"] = len(as_colored(found.B).vertices)
    _write(args.output, _dump(out))
    if args.emit_stats:
        for s in _clean_stats(res.stats, timings=True):
            print(json.dumps(s, sort_keys=True), file=sys.stderr)
    if args.emit_dot:
        _write(args.emit_dot, to_dot(res.B))
    if not res.certified:
        rep = res.certificates
        for line in rep.lines() if rep else ["FAIL certification was not run"]:
            print(line, file=sys.stderr)
        return EXIT_UNCERTIFIED
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = parse_instance(load_json(args.instance, "instance"))
    B, fs = parse_result(load_json(args.result, "result"), inst)

    @dataclass
    class _Given:
        B: object
        automorphisms: list

    rep = verify_extension(inst.A, _Given(B, fs), inst.freeness(), inst.maps, inst.designated)
    for line in rep.lines():
        print(line)
    return EXIT_OK if rep.ok else EXIT_UNCERTIFIED


def cmd_enumerate(args) -> int:
    if args.what != "tournaments":
        raise InputError(f"enumerate: unknown kind {args.what!r}")
    if args.k < 1:
        raise InputError("enumerate: k must be at least 1")
    if args.k > args.max_k:
        print(f"error: k={args.k} exceeds the bound {args.max_k}", file=sys.stderr)
        return EXIT_CAP
    ts = enumerate_tournaments(args.k)
    if args.format == "json":
        _write(None, _dump({"format": ENUMERATION_FORMAT, "k": args.k, "count": len(ts),
                            "tournaments": [structure_to_dict(t) for t in ts]}))
    else:
        for k, t in enumerate(ts):
            arcs = " ".join(f"{u}>{v}" for u, v in structure_to_dict(t)["arcs"])
            print(f"{k}: {arcs}")
        print(f"count {len(ts)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eppa", description="Extend partial automorphisms of forbidden-pattern-free graphs and digraphs.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="log progress to stderr (repeat for debug)")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("extend", help="build a certified extension")
    e.add_argument("instance", help="instance JSON file, or - for stdin")
    e.add_argument("-o", "--output", help="result file (default stdout)")
    e.add_argument("--cap-group", type=int, default=DEFAULT_GROUP_CAP, metavar="N")
    e.add_argument("--cap-structure", type=int, default=DEFAULT_STRUCTURE_CAP, metavar="N")
    e.add_argument("--cap-incidences", type=int, default=DEFAULT_INCIDENCE_CAP, metavar="N",
                   help="bound on (point, colour) incidences per level")
    e.add_argument("--cap-group-cells", type=int, default=DEFAULT_GROUP_CELL_CAP, metavar="N",
                   help="bound on entries of the group element table")
    e.add_argument("--oracle-max-size", type=int, default=None, metavar="N",
                   help="also run the exhaustive oracle up to N vertices")
    e.add_argument("--strict-ledger", action="store_true",
                   help="track colour cardinalities and require pair-covering maps")
    e.add_argument("--emit-stats", action="store_true", help="print per-level statistics to stderr")
    e.add_argument("--emit-dot", metavar="PATH", help="write B in DOT format")
    e.set_defaults(run=cmd_extend)

    v = sub.add_parser("verify", help="certify a result against its instance")
    v.add_argument("instance")
    v.add_argument("result")
    v.set_defaults(run=cmd_verify)

    n = sub.add_parser("enumerate", help="list tournaments up to isomorphism")
    n.add_argument("what", choices=["tournaments"])
    n.add_argument("k", type=int)
    n.add_argument("--max-k", type=int, default=MAX_ENUMERATE)
    n.add_argument("--format", choices=["text", "json"], default="text")
    n.set_defaults(run=cmd_enumerate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.run(args)
    except NotFree as e:
        print(f"not free: {e}", file=sys.stderr)
        return EXIT_NOT_FREE
    except (CapExceeded, BudgetExhausted) as e:
        print(f"cap: {e}", file=sys.stderr)
        return EXIT_CAP
    except (InputError, InvalidInstance) as e:
        print(f"input: {e}", file=sys.stderr)
        return EXIT_INPUT
    except KeyboardInterrupt:
        print("interrupted", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
