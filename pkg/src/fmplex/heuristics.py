"""Branch choices and the heuristics that pick among them."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Literal, Sequence

from .core import LinearSystem, index_sets

Side = Literal["lower", "upper"]


class ScriptError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChoiceSet:
    """One element ``V`` of the branch choices: designees for x_var, or ⊥ when ``side`` is None."""

    var: int
    side: Side | None
    rows: tuple[int, ...] = ()

    @property
    def is_bottom(self) -> bool:
        return self.side is None

    @property
    def fanout(self) -> int:
        return 1 if self.side is None else len(self.rows)

    def designees(self) -> list[int | None]:
        return [None] if self.side is None else list(self.rows)


def branch_choices(system: LinearSystem, excluded: frozenset[int] | set[int] = frozenset()) -> list[ChoiceSet]:
    """All choice sets, variable by variable; excluded rows never appear as designees."""
    out = []
    for j in range(system.nvars):
        minus, plus, _ = index_sets(system, j)
        if not minus and not plus:
            continue
        if minus and plus:
            out.append(ChoiceSet(j, "lower", tuple(i for i in minus if i not in excluded)))
            out.append(ChoiceSet(j, "upper", tuple(i for i in plus if i not in excluded)))
        else:
            out.append(ChoiceSet(j, None))
    return out


def _row_length(system: LinearSystem, i: int) -> int:
    return sum(1 for c in system.rows[i].coeffs if c)


class Heuristic:
    name = "base"

    def reset(self) -> None:
        """Called once at the start of every solve."""

    def choose(
        self,
        system: LinearSystem,
        excluded: frozenset[int],
        level: int,
        mapped: Sequence[int],
    ) -> tuple[ChoiceSet, list[int | None]]:
        raise NotImplementedError


class MinFanout(Heuristic):
    """Fewest children; at fanout one prefer ⊥; rows by backtrack level, then index."""

    name = "mfo"

    def choose(self, system, excluded, level, mapped):
        choices = branch_choices(system, excluded)
        if not choices:
            raise ValueError("no branch choices in a system without variables")
        best = min(choices, key=lambda v: (v.fanout, not v.is_bottom, v.var, v.side != "lower"))
        order = sorted(best.rows, key=lambda i: (system.btlvl[i], i))
        return best, order if not best.is_bottom else [None]


class MinColumnLength(Heuristic):
    """⊥ if possible; else the variable with fewest bounds, smaller side; sparse rows first."""

    name = "mcl"

    def choose(self, system, excluded, level, mapped):
        choices = branch_choices(system, excluded)
        if not choices:
            raise ValueError("no branch choices in a system without variables")
        bottoms = [v for v in choices if v.is_bottom]
        if bottoms:
            return bottoms[0], [None]
        best_j = None
        for j in sorted({v.var for v in choices}):
            minus, plus, _ = index_sets(system, j)
            key = (len(minus) + len(plus), j)
            if best_j is None or key < best_j:
                best_j = key
        j = best_j[1]
        lower, upper = (v for v in choices if v.var == j)
        best = upper if len(upper.rows) < len(lower.rows) else lower
        order = sorted(best.rows, key=lambda i: (_row_length(system, i), i))
        return best, order


class RandomChoice(Heuristic):
    """Uniform choice set and shuffled designees from a generator seeded per solve."""

    name = "rand"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.rng = random.Random(seed)

    def reset(self):
        self.rng = random.Random(self.seed)

    def choose(self, system, excluded, level, mapped):
        choices = branch_choices(system, excluded)
        if not choices:
            raise ValueError("no branch choices in a system without variables")
        best = choices[self.rng.randrange(len(choices))]
        if best.is_bottom:
            return best, [None]
        order = list(best.rows)
        self.rng.shuffle(order)
        return best, order


@dataclass(frozen=True)
class ScriptStep:
    """Choice at one search depth.

    ``order`` lists original row indices (via the non-basis mapping) to try
    first; entries that are not designees at a given node are skipped.
    """

    var: int
    side: Side | None
    order: tuple[int, ...] = ()


class Scripted(Heuristic):
    """Replays one fixed step per search depth (tests and worked examples)."""

    name = "scripted"

    def __init__(self, steps: Sequence[ScriptStep]):
        self.steps = list(steps)

    def choose(self, system, excluded, level, mapped):
        if level >= len(self.steps):
            raise ScriptError(f"script has no step for depth {level}")
        step = self.steps[level]
        for v in branch_choices(system, excluded):
            if v.var == step.var and v.side == step.side:
                break
        else:
            raise ScriptError(f"step {step} does not apply at depth {level}")
        if v.is_bottom:
            return v, [None]
        by_original = {mapped[i]: i for i in v.rows}
        first = [by_original[o] for o in step.order if o in by_original]
        rest = [i for i in v.rows if i not in first]
        return v, first + rest


def make_heuristic(name: str, seed: int = 0) -> Heuristic:
    if name == "mfo":
        return MinFanout()
    if name == "mcl":
        return MinColumnLength()
    if name == "rand":
        return RandomChoice(seed)
    raise ValueError(f"unknown heuristic {name!r}")
