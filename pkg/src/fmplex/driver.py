"""Run any backend on a parsed problem and translate the answer back to asserts."""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from fractions import Fraction

from .core import gaussian_eliminate, instantiate_delta, satisfies
from .fm import DEFAULT_MAX_ROWS, fm_solve
from .heuristics import make_heuristic
from .outcome import BudgetExceeded, Sat, Stats, Unsat
from .search import DEFAULT_MAX_NODES, solve
from .simplex import simplex_solve
from .smtlib import Problem

BACKENDS = ("fm", "fmplex-a", "fmplex-b", "fmplex-c", "simplex")
HEURISTICS = ("mfo", "mcl", "rand")


def default_seed() -> int:
    return int(os.environ.get("FMPLEX_SEED", "0"))


@dataclass
class RunConfig:
    backend: str = "fmplex-c"
    heuristic: str = "mfo"
    seed: int = field(default_factory=default_seed)
    max_nodes: int = DEFAULT_MAX_NODES
    max_rows: int | None = None

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.heuristic not in HEURISTICS:
            raise ValueError(f"unknown heuristic {self.heuristic!r}")

    @property
    def uses_heuristic(self) -> bool:
        return self.backend.startswith("fmplex")


@dataclass
class Decision:
    status: str  # sat | unsat | budget
    model: dict[int, Fraction] | None = None
    core: set[int] | None = None
    certified: bool = False
    stats: Stats = field(default_factory=Stats)
    time_ms: float = 0.0


def decide(problem: Problem, config: RunConfig | None = None) -> Decision:
    """Gaussian preprocessing, then the configured backend.

    Models are δ-instantiated and re-checked against every atom; cores are
    sets of assert indices.
    """
    config = config or RunConfig()
    start = time.perf_counter()
    eqs, ineqs = problem.constraints()
    n = len(problem.variables)
    gauss = gaussian_eliminate(eqs, ineqs, n)
    if gauss.conflict is not None:
        core = {eqs[k].origin for k in gauss.conflict}
        return Decision("unsat", core=core, certified=True, time_ms=_ms(start))
    system = gauss.system
    try:
        if config.backend == "fm":
            outcome, stats = fm_solve(system, config.max_rows or DEFAULT_MAX_ROWS)
        elif config.backend == "simplex":
            outcome, stats = simplex_solve(system)
        else:
            variant = config.backend[-1].upper()
            outcome, stats = solve(
                system,
                variant,
                make_heuristic(config.heuristic, config.seed),
                max_nodes=config.max_nodes,
                max_rows=config.max_rows,
            )
    except BudgetExceeded as exc:
        return Decision("budget", stats=exc.stats, time_ms=_ms(start))

    if isinstance(outcome, Sat):
        full = gauss.extend(outcome.model)
        for k in range(n):
            full.setdefault(k, Fraction(0))
        values, _ = instantiate_delta(full, ineqs)
        if not satisfies(values, ineqs + eqs):
            raise AssertionError("backend returned a model that violates the input")
        return Decision("sat", model=values, stats=stats, time_ms=_ms(start))
    assert isinstance(outcome, Unsat)
    rows, used_eqs = gauss.original_support(outcome.core)
    core = {ineqs[i].origin for i in rows} | {eqs[k].origin for k in used_eqs}
    return Decision("unsat", core=core, certified=outcome.certificate is not None, stats=stats, time_ms=_ms(start))


def _ms(start: float) -> float:
    return (time.perf_counter() - start) * 1000.0
