"""Depth-first satisfiability search over restricted projections.

Variant ``A`` explores restricted projections until a satisfiable leaf or a
global conflict.  ``B`` additionally excludes designees whose original row
already failed in a sibling subtree.  ``C`` also backtracks
non-chronologically using per-row backtrack levels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Mapping, Sequence

from .core import ZERO, DeltaScalar, LinearSystem, bound_rewrite, index_sets
from .heuristics import ChoiceSet, Heuristic, MinFanout
from .outcome import BudgetExceeded, PartialUnsat, Sat, SolveOutcome, Stats, Unsat
from .projection import restricted_projection

Variant = Literal["A", "B", "C"]
DEFAULT_MAX_NODES = 10**6


class MappingViolation(AssertionError):
    pass


def nonbasis_map(i: int, nonbasis: frozenset[int], system: LinearSystem) -> int:
    """The single original row in row ``i``'s support outside the non-basis."""
    rest = [k for k in system.prov[i] if k not in nonbasis]
    if len(rest) != 1:
        raise MappingViolation(f"row {i} maps to {sorted(rest)} outside non-basis {sorted(nonbasis)}")
    return rest[0]


def classify_conflict(system: LinearSystem, i: int) -> Literal["global", "local", "none"]:
    if not system.rows[i].is_conflict():
        return "none"
    return "global" if all(v > 0 for v in system.prov[i].values()) else "local"


def construct_model(
    child_model: Mapping[int, DeltaScalar], j: int, i: int | None, parent: LinearSystem
) -> dict[int, DeltaScalar]:
    """Extend a model of ``P_{j,i}(parent)`` to x_j.

    With a designee the value of its bound is taken; for ⊥ the smallest upper
    bound (or the largest lower bound, or 0 without bounds).  Variables of the
    parent that the child model lacks are fixed to 0 beforehand.
    """
    model = dict(child_model)
    for row in parent.rows:
        for k, c in enumerate(row.coeffs):
            if c and k != j and k not in model:
                model[k] = DeltaScalar(ZERO)
    if i is not None:
        model[j] = bound_rewrite(parent.rows[i], j).value(model)
        return model
    minus, plus, _ = index_sets(parent, j)
    if plus and not minus:
        model[j] = min(bound_rewrite(parent.rows[k], j).value(model) for k in plus)
    elif minus and not plus:
        model[j] = max(bound_rewrite(parent.rows[k], j).value(model) for k in minus)
    else:
        model[j] = DeltaScalar(ZERO)
    return model


@dataclass
class SearchNode:
    """One call of the search, handed to ``trace`` callbacks."""

    system: LinearSystem
    nonbasis: frozenset[int]
    excluded: frozenset[int]
    level: int
    parent: "SearchNode | None" = None
    step: tuple[int, int | None] | None = None  # (variable, designee row in parent or None)

    def ancestor(self, level: int) -> "SearchNode":
        node = self
        while node.level > level:
            node = node.parent
        return node


Trace = Callable[..., None]


@dataclass
class _Config:
    variant: str
    heuristic: Heuristic
    exclusion: bool
    copies: str
    stop_at_sat: bool
    max_nodes: int
    max_rows: int | None
    trace: Trace | None
    stats: Stats = field(default_factory=lambda: Stats(nodes_visited=0, max_depth=0))


def solve(
    original: LinearSystem,
    variant: Variant = "C",
    heuristic: Heuristic | None = None,
    *,
    exclusion: bool | None = None,
    copies: Literal["inherit", "level"] = "inherit",
    stop_at_sat: bool = True,
    max_nodes: int = DEFAULT_MAX_NODES,
    max_rows: int | None = None,
    trace: Trace | None = None,
) -> tuple[SolveOutcome, Stats]:
    """Run the search on an equality-free system.

    ``exclusion`` defaults to on for variants B and C.  ``stop_at_sat=False``
    keeps exploring siblings after a satisfiable child (full traversal).
    ``trace(event, node, **info)`` receives ``"node"``, ``"choose"`` and
    ``"conflict"`` events.
    """
    if variant not in ("A", "B", "C"):
        raise ValueError(f"unknown variant {variant!r}")
    heuristic = heuristic or MinFanout()
    heuristic.reset()
    cfg = _Config(
        variant=variant,
        heuristic=heuristic,
        exclusion=(variant != "A") if exclusion is None else exclusion,
        copies=copies,
        stop_at_sat=stop_at_sat,
        max_nodes=max_nodes,
        max_rows=max_rows,
        trace=trace,
    )
    root = SearchNode(original, frozenset(), frozenset(), 0)
    outcome = _search(cfg, root)
    if isinstance(outcome, Sat):
        model = dict(outcome.model)
        for k in range(original.nvars):
            model.setdefault(k, DeltaScalar(ZERO))
        outcome = Sat(model)
    return outcome, cfg.stats


def _search(cfg: _Config, node: SearchNode) -> SolveOutcome:
    stats = cfg.stats
    system = node.system
    lvl = node.level
    stats.nodes_visited += 1
    stats.max_depth = max(stats.max_depth, lvl)
    if stats.nodes_visited > cfg.max_nodes:
        raise BudgetExceeded(f"more than {cfg.max_nodes} nodes visited", stats)
    if cfg.trace:
        cfg.trace("node", node)

    conflicts = system.conflicts()
    if not conflicts and system.is_zero():
        return Sat({})
    for i in conflicts:
        f = system.prov[i]
        if all(v > 0 for v in f.values()):
            return Unsat(frozenset(f), dict(f))
    if conflicts:
        if cfg.variant == "C":
            i = min(conflicts, key=lambda k: (system.btlvl[k], k))
            target = system.btlvl[i] - 1
        else:
            i = conflicts[0]
            target = lvl - 1
        if cfg.trace:
            cfg.trace("conflict", node, row=i, target=target)
        return PartialUnsat(target, system.support(i))

    mapped = [nonbasis_map(i, node.nonbasis, system) for i in range(len(system))]
    excluded_set = node.excluded
    core: set[int] = set()
    choice, order = _choose(cfg, node, mapped)
    sat: Sat | None = None
    for i in order:
        j = choice.var
        child_sys = restricted_projection(system, j, i, child_level=lvl + 1, copies=cfg.copies)
        stats.rows_generated += len(child_sys)
        if cfg.max_rows is not None and stats.rows_generated > cfg.max_rows:
            raise BudgetExceeded(f"more than {cfg.max_rows} rows generated", stats)
        nonbasis = node.nonbasis if i is None else node.nonbasis | {mapped[i]}
        child = SearchNode(child_sys, nonbasis, excluded_set, lvl + 1, node, (j, i))
        result = _search(cfg, child)
        if isinstance(result, Unsat):
            return result
        if isinstance(result, Sat):
            model = construct_model(result.model, j, i, system)
            if cfg.stop_at_sat:
                return Sat(model)
            sat = sat or Sat(model)
        elif result.level < lvl:
            return result
        else:
            core |= result.core
        if cfg.exclusion and i is not None:
            excluded_set = excluded_set | {mapped[i]}
    if sat is not None:
        return sat
    if lvl == 0:
        return Unsat(frozenset(core), None)
    return PartialUnsat(lvl - 1, frozenset(core))


def _choose(cfg: _Config, node: SearchNode, mapped: Sequence[int]) -> tuple[ChoiceSet, list[int | None]]:
    excluded_rows = frozenset(i for i, o in enumerate(mapped) if o in node.excluded) if cfg.exclusion else frozenset()
    choice, order = cfg.heuristic.choose(node.system, excluded_rows, node.level, mapped)
    if cfg.trace:
        cfg.trace("choose", node, choice=choice, order=order, excluded_rows=excluded_rows, mapped=mapped)
    return choice, order
