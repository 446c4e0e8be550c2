"""Result types shared by all backends."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .core import DeltaScalar


@dataclass(frozen=True)
class Sat:
    model: Mapping[int, DeltaScalar]
    status = "sat"


@dataclass(frozen=True)
class Unsat:
    """``certificate`` is a Farkas multiplier vector; ``None`` only for cores built from backtracking."""

    core: frozenset[int]
    certificate: Mapping[int, Fraction] | None = None
    status = "unsat"


@dataclass(frozen=True)
class PartialUnsat:
    level: int
    core: frozenset[int]
    status = "partial-unsat"


SolveOutcome = Sat | Unsat | PartialUnsat


@dataclass
class Stats:
    """Counters for one solve call; ``None`` marks counters a backend does not have."""

    nodes_visited: int | None = None
    rows_generated: int = 0
    pivots: int | None = None
    max_depth: int | None = None


class BudgetExceeded(RuntimeError):
    def __init__(self, message: str, stats: Stats):
        super().__init__(message)
        self.stats = stats
