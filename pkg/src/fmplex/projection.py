"""Restricted projections and disjunctive quantifier elimination."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Literal, Sequence

from .core import ONE, LinearSystem, combine, combine_rows, index_sets
from .outcome import BudgetExceeded, Stats

Sign = Literal["minus", "plus"]


class InvalidDesignee(ValueError):
    pass


def projection_matrix(system: LinearSystem, j: int, i: int | None) -> list[dict[int, Fraction]]:
    """Sparse rows of the projection matrix for designee ``i`` (``None`` for ⊥).

    With a designee, the rows are: every other lower bound compared against
    ``i``, then every other upper bound, then the rows without x_j, each
    group in ascending index order.
    """
    minus, plus, zero = index_sets(system, j)
    if i is None:
        if minus and plus:
            raise InvalidDesignee(f"x{j + 1} has lower and upper bounds; ⊥ is not allowed")
        return [{k: ONE} for k in zero]
    if not (minus and plus):
        raise InvalidDesignee(f"x{j + 1} is bounded on one side only; only ⊥ is allowed")
    a_i = system.rows[i].coeffs[j]
    if not a_i:
        raise InvalidDesignee(f"row {i} does not bound x{j + 1}")
    F: list[dict[int, Fraction]] = []
    for k in minus:
        if k != i:
            F.append({i: ONE / a_i, k: -ONE / system.rows[k].coeffs[j]})
    for k in plus:
        if k != i:
            F.append({i: -ONE / a_i, k: ONE / system.rows[k].coeffs[j]})
    for k in zero:
        F.append({k: ONE})
    return F


def update_btlvl(
    F: Sequence[dict[int, Fraction]],
    parent_btlvl: Sequence[int],
    child_level: int,
    copies: Literal["inherit", "level"] = "inherit",
) -> tuple[int, ...]:
    """Backtrack levels of the rows produced by one projection step.

    A positive combination of two parent rows keeps the larger of their
    levels; a row subtracting one bound from another gets ``child_level``.
    Copied rows keep their level unless ``copies == "level"``.
    """
    out = []
    for f in F:
        if len(f) == 1:
            (k,) = f
            out.append(parent_btlvl[k] if copies == "inherit" else child_level)
        elif all(c > 0 for c in f.values()):
            out.append(max(parent_btlvl[k] for k in f))
        else:
            out.append(child_level)
    return tuple(out)


def restricted_projection(
    system: LinearSystem,
    j: int,
    i: int | None,
    child_level: int = 1,
    copies: Literal["inherit", "level"] = "inherit",
) -> LinearSystem:
    F = projection_matrix(system, j, i)
    rows = tuple(combine_rows([(c, system.rows[k]) for k, c in f.items()], system.nvars) for f in F)
    prov = tuple(combine([(c, system.prov[k]) for k, c in f.items()]) for f in F)
    btlvl = update_btlvl(F, system.btlvl, child_level, copies)
    return LinearSystem(rows, prov, btlvl, system.nvars, system.origin_count)


def fmp_set(system: LinearSystem, j: int, sign: Sign) -> list[LinearSystem]:
    minus, plus, _ = index_sets(system, j)
    if minus and plus:
        return [restricted_projection(system, j, i) for i in (minus if sign == "minus" else plus)]
    return [restricted_projection(system, j, None)]


@dataclass
class QeResult:
    """A disjunction of conjunctions; each disjunct is a system free of the eliminated variables."""

    disjuncts: list[LinearSystem] = field(default_factory=list)
    eliminated: tuple[int, ...] = ()
    rows_generated: int = 0


Policy = Callable[[LinearSystem, Sequence[int]], tuple[int, Sign]]


def fmplex_qe(
    system: LinearSystem,
    variables: Sequence[int],
    sign: Sign | Policy = "minus",
    max_rows: int | None = None,
    visit: Callable[[LinearSystem], None] | None = None,
) -> QeResult:
    """Eliminate ``variables`` by iterated FMP steps.

    With a fixed ``sign`` the variables are eliminated in the given order.
    A callable ``sign(system, remaining) -> (j, sign)`` instead decides the
    variable and side independently at every node.  ``visit`` sees every
    intermediate system.
    """
    result = QeResult(eliminated=tuple(variables))
    stats = Stats()

    def policy(node: LinearSystem, remaining: Sequence[int]) -> tuple[int, Sign]:
        if callable(sign):
            return sign(node, remaining)
        return remaining[0], sign

    def recurse(node: LinearSystem, remaining: tuple[int, ...]) -> None:
        if visit is not None:
            visit(node)
        if not remaining:
            result.disjuncts.append(node)
            return
        j, s = policy(node, remaining)
        rest = tuple(v for v in remaining if v != j)
        for child in fmp_set(node, j, s):
            result.rows_generated += len(child)
            stats.rows_generated = result.rows_generated
            if max_rows is not None and result.rows_generated > max_rows:
                raise BudgetExceeded(f"more than {max_rows} rows generated", stats)
            recurse(child, rest)

    recurse(system, tuple(variables))
    return result
