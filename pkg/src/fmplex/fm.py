"""Classic Fourier-Motzkin elimination with provenance and row-growth accounting."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import (
    ONE,
    ZERO,
    Constraint,
    DeltaScalar,
    LinearSystem,
    bound_rewrite,
    combine,
    combine_rows,
    index_sets,
)
from .outcome import BudgetExceeded, Sat, SolveOutcome, Stats, Unsat

DEFAULT_MAX_ROWS = 10**7


@dataclass
class FmStep:
    var: int
    rows_before: int
    rows_after: int
    cumulative: int


@dataclass
class FmTrace:
    steps: list[FmStep] = field(default_factory=list)

    @property
    def rows_generated(self) -> int:
        return self.steps[-1].cumulative if self.steps else 0


def fm_eliminate(system: LinearSystem, j: int) -> LinearSystem:
    """Pair every lower bound on x_j with every upper bound; keep rows without x_j.

    Row order: pairs ``(l, u)`` in lexicographic order, then the untouched rows.
    """
    minus, plus, zero = index_sets(system, j)
    rows: list[Constraint] = []
    prov = []
    btlvl = []
    for l in minus:
        cl = -ONE / system.rows[l].coeffs[j]
        for u in plus:
            cu = ONE / system.rows[u].coeffs[j]
            rows.append(combine_rows([(cl, system.rows[l]), (cu, system.rows[u])], system.nvars))
            prov.append(combine([(cl, system.prov[l]), (cu, system.prov[u])]))
            btlvl.append(max(system.btlvl[l], system.btlvl[u]))
    for i in zero:
        rows.append(system.rows[i])
        prov.append(system.prov[i])
        btlvl.append(system.btlvl[i])
    return LinearSystem(tuple(rows), tuple(prov), tuple(btlvl), system.nvars, system.origin_count)


def fm_qe(system: LinearSystem, variables: Sequence[int]) -> tuple[LinearSystem, FmTrace]:
    if len(set(variables)) != len(variables):
        raise ValueError("variables to eliminate must be distinct")
    trace = FmTrace()
    total = 0
    for j in variables:
        before = len(system)
        system = fm_eliminate(system, j)
        total += len(system)
        trace.steps.append(FmStep(j, before, len(system), total))
    return system, trace


def _product(system: LinearSystem, j: int) -> int:
    minus, plus, _ = index_sets(system, j)
    return len(minus) * len(plus)


def pick_variable(system: LinearSystem) -> int | None:
    """Fewest generated pairs first, ties by variable index; ``None`` if all columns are zero."""
    best = None
    for j in range(system.nvars):
        if any(row.coeffs[j] for row in system.rows):
            key = (_product(system, j), j)
            if best is None or key < best:
                best = key
    return None if best is None else best[1]


def fm_solve(system: LinearSystem, max_rows: int = DEFAULT_MAX_ROWS) -> tuple[SolveOutcome, Stats]:
    """Decide satisfiability by eliminating every variable.

    A trivially false row after any step has nonnegative provenance and is
    returned as a Farkas certificate.  Otherwise the empty assignment is
    extended back through the eliminated variables.
    """
    stats = Stats()
    history: list[tuple[LinearSystem, int]] = []
    current = system
    while True:
        for i in current.conflicts():
            cert = dict(current.prov[i])
            return Unsat(frozenset(cert), cert), stats
        j = pick_variable(current)
        if j is None:
            break
        nxt = fm_eliminate(current, j)
        stats.rows_generated += len(nxt)
        if stats.rows_generated > max_rows:
            raise BudgetExceeded(f"more than {max_rows} rows generated", stats)
        history.append((current, j))
        current = nxt

    model: dict[int, DeltaScalar] = {}
    for sys_k, j in reversed(history):
        model[j] = _pick_value(sys_k, j, model)
    for k in range(system.nvars):
        model.setdefault(k, DeltaScalar(ZERO))
    return Sat(model), stats


def _pick_value(system: LinearSystem, j: int, model: dict) -> DeltaScalar:
    """A value between the largest lower and smallest upper bound on x_j under ``model``.

    Variables still unassigned but occurring next to x_j are fixed to 0 first.
    """
    for row in system.rows:
        if row.coeffs[j]:
            for k, c in enumerate(row.coeffs):
                if c and k != j and k not in model:
                    model[k] = DeltaScalar(ZERO)
    lower = None
    upper = None
    for row in system.rows:
        if not row.coeffs[j]:
            continue
        bnd = bound_rewrite(row, j)
        v = bnd.value(model)
        if bnd.lower:
            if lower is None or v > lower:
                lower = v
        elif upper is None or v < upper:
            upper = v
    if lower is not None:
        return lower
    if upper is not None:
        return upper
    return DeltaScalar(ZERO)


def is_redundant_by_construction(i: int, F: Sequence[Sequence[Fraction]]) -> bool:
    """Whether row ``i`` of ``F`` is a conical combination of the other rows of ``F``.

    Decided as exact LP feasibility of ``r >= 0, r_i = 0, r·F = F[i]`` by the simplex backend.
    """
    from .simplex import simplex_solve

    others = [k for k in range(len(F)) if k != i]
    if not others:
        return False
    width = len(F[i])
    nv = len(others)
    rows: list[Constraint] = []
    for c in range(width):
        coeffs = [Fraction(F[k][c]) for k in others]
        target = Fraction(F[i][c])
        rows.append(Constraint(tuple(coeffs), DeltaScalar(target)))
        rows.append(Constraint(tuple(-x for x in coeffs), DeltaScalar(-target)))
    for v in range(nv):
        coeffs = [ZERO] * nv
        coeffs[v] = -ONE
        rows.append(Constraint(tuple(coeffs), DeltaScalar(ZERO)))
    outcome, _ = simplex_solve(LinearSystem.original(rows, nv))
    return isinstance(outcome, Sat)
