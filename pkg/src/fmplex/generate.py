"""Random conjunctions of linear constraints for differential testing."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .core import Constraint, LinearSystem, normalize


@dataclass
class Instance:
    nvars: int
    coeffs: list[list[int]]
    bounds: list[Fraction]
    relations: list[str]
    planted: dict[int, Fraction] | None = None

    def rows(self) -> list[Constraint]:
        return [normalize(rel, a, b, origin=k) for k, (a, b, rel) in enumerate(zip(self.coeffs, self.bounds, self.relations))]

    def system(self) -> LinearSystem:
        return LinearSystem.original(self.rows(), self.nvars)


def random_instance(
    rng: random.Random,
    nvars: int,
    nrows: int,
    coeff_range: tuple[int, int] = (-3, 3),
    bound_range: tuple[int, int] = (-4, 4),
    sat_bias: float = 0.0,
    strict_ratio: float = 0.0,
) -> Instance:
    """Uniform integer coefficients and bounds.

    With probability ``sat_bias`` a random rational point is planted and every
    bound that excludes it is relaxed just enough to include it (strictly for
    strict rows).
    """
    lo, hi = coeff_range
    coeffs = [[rng.randint(lo, hi) for _ in range(nvars)] for _ in range(nrows)]
    bounds = [Fraction(rng.randint(*bound_range)) for _ in range(nrows)]
    relations = ["<" if rng.random() < strict_ratio else "<=" for _ in range(nrows)]
    planted = None
    if rng.random() < sat_bias:
        planted = {k: Fraction(rng.randint(-6, 6), rng.randint(1, 3)) for k in range(nvars)}
        for r in range(nrows):
            value = sum(c * planted[k] for k, c in enumerate(coeffs[r]))
            strict = relations[r] == "<"
            if value > bounds[r] or (strict and value >= bounds[r]):
                bounds[r] = Fraction(math.floor(value) + 1) if strict else Fraction(math.ceil(value))
    return Instance(nvars, coeffs, bounds, relations, planted)


def random_system(rng: random.Random, max_vars: int = 3, max_rows: int = 6, **kwargs) -> LinearSystem:
    n = rng.randint(1, max_vars)
    m = rng.randint(1, max_rows)
    return random_instance(rng, n, m, **kwargs).system()
