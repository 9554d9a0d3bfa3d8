"""Exception types raised by the constructions and searches."""

from __future__ import annotations


class EppaError(Exception):
    """Base class for all errors raised by this package."""


class NotFree(EppaError):
    """The input already contains a forbidden (critically coloured) pattern."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class InvalidInstance(EppaError):
    """The input violates a hypothesis of the construction."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class CapExceeded(EppaError):
    """A size guardrail was hit; the caller may raise the cap and retry."""

    def __init__(self, what: str, cap: int, level: int | None = None):
        where = f" at level {level}" if level is not None else ""
        super().__init__(f"{what} exceeded cap {cap}{where}")
        self.what = what
        self.cap = cap
        self.level = level


class GroupTooLarge(CapExceeded):
    def __init__(self, cap: int, level: int | None = None, what: str = "group"):
        super().__init__(what, cap, level)


class StructureTooLarge(CapExceeded):
    def __init__(self, cap: int, what: str = "structure", level: int | None = None):
        super().__init__(what, cap, level)


class BudgetExhausted(EppaError):
    """An exhaustive search ran out of its node budget before finishing."""

    def __init__(self, budget: int):
        super().__init__(f"search budget of {budget} nodes exhausted")
        self.budget = budget


class ClassSizeMismatch(EppaError):
    """Matched neighbourhood classes differ in size (an implementation bug)."""


class FactViolation(EppaError):
    """A structural fact about the quotient failed (an implementation bug)."""

    def __init__(self, fact: int | str, detail: str):
        super().__init__(f"fact {fact} violated: {detail}")
        self.fact = fact
