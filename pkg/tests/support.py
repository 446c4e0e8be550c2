"""Worked-example systems and independent oracles shared by the tests."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from pathlib import Path

from fmplex.core import LinearSystem, rank
from fmplex.generate import random_instance

DATA = Path(__file__).parent / "data"

# four rows over (x1, x2); indices are zero-based throughout
EX1 = LinearSystem.from_lists([[-1, -1], [0, -2], [-2, 1], [0, 1]], [-4, -2, 1, 5])
# EX1 plus -x2 <= 0
EX3 = LinearSystem.from_lists([[-1, -1], [0, -2], [-2, 1], [0, 1], [0, -1]], [-4, -2, 1, 5, 0])
EX4 = LinearSystem.from_lists(
    [[0, 0, -1], [1, -1, -1], [1, 0, 0], [-1, 1, 0], [0, -1, 1]],
    [0, 0, -1, -1, 0],
)
TRIVIAL_UNSAT = LinearSystem.from_lists([[1], [-1]], [0, -1])

GRID = [Fraction(k, 2) for k in range(-8, 9)]


def as_lists(system: LinearSystem):
    """Rows as ``([coeffs], real bound, delta)`` triples with Fraction entries."""
    return [(list(r.coeffs), r.bound.real, r.bound.delta) for r in system.rows]


def det(matrix) -> Fraction:
    """Leibniz expansion; only for tiny matrices."""
    n = len(matrix)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        sign = 1
        for a in range(n):
            for b in range(a + 1, n):
                if perm[a] > perm[b]:
                    sign = -sign
        term = Fraction(sign)
        for r, c in enumerate(perm):
            term *= matrix[r][c]
        total += term
    return total


def minor_rank(matrix) -> int:
    """Largest k with a nonzero k×k minor."""
    if not matrix:
        return 0
    rows, cols = len(matrix), len(matrix[0])
    for k in range(min(rows, cols), 0, -1):
        for rs in itertools.combinations(range(rows), k):
            for cs in itertools.combinations(range(cols), k):
                if det([[matrix[r][c] for c in cs] for r in rs]):
                    return k
    return 0


def provenance_rank_ok(system: LinearSystem) -> bool:
    return rank(system.provenance_matrix()) == len(system)


def _lt(a, b):
    """Strict order on (real, delta) pairs."""
    return a[0] < b[0] or (a[0] == b[0] and a[1] < b[1])


def point_satisfies(rows, point) -> bool:
    """Exact check of ``rows`` (from :func:`as_lists`) at a rational point."""
    for coeffs, b, d in rows:
        lhs = sum((c * x for c, x in zip(coeffs, point)), Fraction(0))
        if _lt((b, d), (lhs, Fraction(0))):
            return False
    return True


def extends(rows, j: int, partial) -> bool:
    """Whether some real x_j completes ``partial`` (x_j's slot ignored) to a solution.

    Collects the bounds on x_j as (value, strict) and compares the tightest ones.
    """
    lower, upper = None, None
    for coeffs, b, d in rows:
        rest = sum((c * x for k, (c, x) in enumerate(zip(coeffs, partial)) if k != j), Fraction(0))
        a = coeffs[j]
        strict = d < 0
        if a == 0:
            if rest > b or (rest == b and strict):
                return False
            continue
        v = (b - rest) / a
        if a > 0:
            if upper is None or v < upper[0] or (v == upper[0] and strict):
                upper = (v, strict)
        else:
            if lower is None or v > lower[0] or (v == lower[0] and strict):
                lower = (v, strict)
    if lower is None or upper is None:
        return True
    return lower[0] < upper[0] or (lower[0] == upper[0] and not lower[1] and not upper[1])


def grid_points(n: int, j: int):
    """All grid points over the variables other than x_j (x_j fixed to 0)."""
    others = [k for k in range(n) if k != j]
    for values in itertools.product(GRID, repeat=len(others)):
        point = [Fraction(0)] * n
        for k, v in zip(others, values):
            point[k] = v
        yield point


def differential_instances(count: int, seed: int, max_vars=4, max_rows=8, sat_bias=0.5, strict_ratio=0.0):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(1, max_vars)
        m = rng.randint(1, max_rows)
        out.append(random_instance(rng, n, m, sat_bias=sat_bias, strict_ratio=strict_ratio))
    return out


def small_systems(count: int, seed: int, max_vars=3, max_rows=6, coeff_range=(-2, 2)):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.randint(1, max_vars)
        m = rng.randint(1, max_rows)
        out.append(random_instance(rng, n, m, coeff_range=coeff_range, bound_range=(-2, 2)).system())
    return out
