"""Finite extensions of partial automorphisms for K_m-free graphs and tournament-free digraphs."""

from .errors import (
    BudgetExhausted,
    CapExceeded,
    ClassSizeMismatch,
    EppaError,
    FactViolation,
    GroupTooLarge,
    InvalidInstance,
    NotFree,
    StructureTooLarge,
)
from .freeness import CliqueFree, TournamentFree, WeakHomFree
from .pipeline import (
    ExtensionResult,
    MinSizeRule,
    enumerate_tournaments,
    extend_colored,
    extend_digraph,
    extend_graph,
    reduce_family,
)
from .structures import (
    ColoredDigraph,
    ColoredGraph,
    ColorPermutation,
    Digraph,
    Graph,
    PartialPermorphism,
    Tournament,
)
from .verify import brute_force_extension, verify_extension

__all__ = [
    "BudgetExhausted", "CapExceeded", "ClassSizeMismatch", "EppaError", "FactViolation",
    "GroupTooLarge", "InvalidInstance", "NotFree", "StructureTooLarge",
    "CliqueFree", "TournamentFree", "WeakHomFree",
    "ExtensionResult", "MinSizeRule", "enumerate_tournaments", "extend_colored",
    "extend_digraph", "extend_graph", "reduce_family",
    "ColoredDigraph", "ColoredGraph", "ColorPermutation", "Digraph", "Graph",
    "PartialPermorphism", "Tournament",
    "brute_force_extension", "verify_extension",
]
