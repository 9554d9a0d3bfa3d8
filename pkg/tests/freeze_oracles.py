"""Recompute the reference values and write them to frozen/oracle_values.json.

Run by hand; the test suite only reads the frozen file and checks that the
oracles still reproduce it.
"""

import json
from pathlib import Path

import oracles

OUT = Path(__file__).with_name("frozen") / "oracle_values.json"

P3 = (["0", "1", "2"], [("0", "1"), ("1", "2")])


def _realised(vertices, edges, domain=None) -> dict:
    vs, es, c0 = oracles.base_realisation(vertices, edges)
    out = {"c0": c0, "C_size": len(vs)}
    if domain is not None:
        sizes = oracles.domain_class_sizes(vs, es, domain)
        out["domain_class_sizes"] = sorted(sizes.values())
    return out


def compute() -> dict:
    counts = oracles.neighbourhood_counts(*P3, P3[0])
    c0 = max(counts.values())
    return {
        "tournament_counts": [oracles.tournament_classes(k) for k in range(1, 7)],
        "path3": {
            "c0": c0,
            "C_size": len(P3[0]) + sum(c0 - c for c in counts.values()),
            "own_counts": {"".join(sorted(k)) or "-": v for k, v in sorted(counts.items(), key=lambda kv: sorted(kv[0]))},
        },
        "one_vertex": _realised(["0"], []),
        "two_isolated": _realised(["0", "1"], [], domain=["0"]),
        "five_cycle_has_triangle": oracles.has_clique(
            list("01234"), [(str(i), str((i + 1) % 5)) for i in range(5)], 3),
        "lcm_group_order": oracles.group_order([(1, 0, 3, 4, 2)]),
        "edge_transposition_at_2": oracles.graph_extension_exists(["0", "1"], [("0", "1")], [{"0": "1"}], 3, 2),
        "path3_shift_at_3": oracles.graph_extension_exists(*P3, [{"0": "1", "1": "2"}], 3, 3),
        "path3_shift_at_4": oracles.graph_extension_exists(*P3, [{"0": "1", "1": "2"}], 3, 4),
    }


if __name__ == "__main__":
    OUT.parent.mkdir(exist_ok=True)
    OUT.write_text(json.dumps(compute(), indent=2) + "\n")
    print(OUT.read_text())
