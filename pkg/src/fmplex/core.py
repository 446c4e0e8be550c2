"""Exact arithmetic and linear systems with provenance tracking.

Rows are always in ``a·x <= b`` form.  Coefficients are ``Fraction``;
bounds are :class:`DeltaScalar` so that strict constraints ``a·x < b`` can
be stored as ``a·x <= b - δ`` for an infinitesimal ``δ > 0``.

Every :class:`LinearSystem` remembers, for each row, the linear
combination of the *original* rows that produced it (its provenance).
All indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class UnsupportedTerm(ValueError):
    """A term that is not linear with rational coefficients."""


class NotABound(ValueError):
    """The row does not mention the variable to be bounded."""


class IncompleteAssignment(KeyError):
    """An assignment misses a variable that the row depends on."""


class DeltaScalar:
    """``real + delta·δ`` for an infinitesimal ``δ > 0``, ordered lexicographically."""

    __slots__ = ("real", "delta")

    def __init__(self, real=ZERO, delta=ZERO):
        self.real = Fraction(real)
        self.delta = Fraction(delta)

    @staticmethod
    def lift(value) -> "DeltaScalar":
        if isinstance(value, DeltaScalar):
            return value
        return DeltaScalar(value, ZERO)

    def __add__(self, other):
        other = DeltaScalar.lift(other)
        return DeltaScalar(self.real + other.real, self.delta + other.delta)

    __radd__ = __add__

    def __sub__(self, other):
        other = DeltaScalar.lift(other)
        return DeltaScalar(self.real - other.real, self.delta - other.delta)

    def __rsub__(self, other):
        return DeltaScalar.lift(other) - self

    def __neg__(self):
        return DeltaScalar(-self.real, -self.delta)

    def __mul__(self, factor):
        if isinstance(factor, DeltaScalar):
            if factor.delta:
                raise TypeError("product of two δ-terms is not linear")
            factor = factor.real
        return DeltaScalar(self.real * factor, self.delta * factor)

    __rmul__ = __mul__

    def __truediv__(self, divisor):
        return DeltaScalar(self.real / divisor, self.delta / divisor)

    def _key(self, other):
        other = DeltaScalar.lift(other)
        return (self.real, self.delta), (other.real, other.delta)

    def __eq__(self, other):
        if not isinstance(other, (DeltaScalar, int, Fraction)):
            return NotImplemented
        a, b = self._key(other)
        return a == b

    def __lt__(self, other):
        a, b = self._key(other)
        return a < b

    def __le__(self, other):
        a, b = self._key(other)
        return a <= b

    def __gt__(self, other):
        a, b = self._key(other)
        return a > b

    def __ge__(self, other):
        a, b = self._key(other)
        return a >= b

    def __hash__(self):
        if not self.delta:
            return hash(self.real)
        return hash((self.real, self.delta))

    def __bool__(self):
        return bool(self.real) or bool(self.delta)

    def instantiate(self, delta_value) -> Fraction:
        return self.real + self.delta * delta_value

    def __repr__(self):
        if not self.delta:
            return f"DeltaScalar({self.real})"
        return f"DeltaScalar({self.real}, {self.delta})"

    def __str__(self):
        if not self.delta:
            return str(self.real)
        return f"{self.real}{'+' if self.delta > 0 else '-'}{abs(self.delta)}δ"


@dataclass(frozen=True)
class Constraint:
    """A row ``coeffs·x <= bound``; ``equality`` marks ``=`` rows awaiting elimination."""

    coeffs: tuple[Fraction, ...]
    bound: DeltaScalar
    origin: int | None = None
    equality: bool = False

    @property
    def is_strict(self) -> bool:
        return self.bound.delta < 0

    def is_trivial(self) -> bool:
        return not any(self.coeffs)

    def is_conflict(self) -> bool:
        """``0 <= b`` with ``b < 0``."""
        return self.is_trivial() and self.bound < 0

    def __str__(self):
        terms = [f"{c}*x{k + 1}" for k, c in enumerate(self.coeffs) if c]
        lhs = " + ".join(terms) if terms else "0"
        return f"{lhs} <= {self.bound}"


def make_row(coeffs: Iterable, bound, delta=0, origin: int | None = None) -> Constraint:
    """Convenience constructor from plain numbers."""
    bound = bound if isinstance(bound, DeltaScalar) else DeltaScalar(bound, delta)
    return Constraint(tuple(Fraction(c) for c in coeffs), bound, origin)


@dataclass(frozen=True)
class LinearSystem:
    """Rows plus per-row provenance (sparse ``{original index: multiplier}``) and backtrack level."""

    rows: tuple[Constraint, ...]
    prov: tuple[Mapping[int, Fraction], ...]
    btlvl: tuple[int, ...]
    nvars: int
    origin_count: int

    @classmethod
    def original(cls, rows: Sequence[Constraint], nvars: int | None = None) -> "LinearSystem":
        rows = tuple(rows)
        if nvars is None:
            nvars = len(rows[0].coeffs) if rows else 0
        for row in rows:
            if len(row.coeffs) != nvars:
                raise ValueError("row length does not match the number of variables")
        return cls(
            rows=rows,
            prov=tuple({i: ONE} for i in range(len(rows))),
            btlvl=(0,) * len(rows),
            nvars=nvars,
            origin_count=len(rows),
        )

    @classmethod
    def from_lists(cls, matrix, bounds, deltas=None) -> "LinearSystem":
        """Build an original system from nested number lists (test and CLI helper)."""
        deltas = deltas or [0] * len(bounds)
        rows = [make_row(a, b, d) for a, b, d in zip(matrix, bounds, deltas)]
        nvars = len(matrix[0]) if matrix else 0
        return cls.original(rows, nvars)

    def __len__(self):
        return len(self.rows)

    def column(self, j: int) -> list[Fraction]:
        return [row.coeffs[j] for row in self.rows]

    def is_zero(self) -> bool:
        return all(row.is_trivial() for row in self.rows)

    def conflicts(self) -> list[int]:
        return [i for i, row in enumerate(self.rows) if row.is_conflict()]

    def support(self, i: int) -> frozenset[int]:
        return frozenset(self.prov[i])

    def provenance_matrix(self) -> list[list[Fraction]]:
        dense = []
        for f in self.prov:
            vec = [ZERO] * self.origin_count
            for k, v in f.items():
                vec[k] = v
            dense.append(vec)
        return dense

    def matrix(self) -> list[list[Fraction]]:
        return [list(row.coeffs) for row in self.rows]


def combine(pairs: Iterable[tuple[Fraction, Mapping[int, Fraction]]]) -> dict[int, Fraction]:
    """Sparse linear combination ``Σ c·f``, dropping zero entries."""
    out: dict[int, Fraction] = {}
    for c, f in pairs:
        for k, v in f.items():
            out[k] = out.get(k, ZERO) + c * v
    return {k: v for k, v in out.items() if v}


def combine_rows(pairs: Sequence[tuple[Fraction, Constraint]], nvars: int) -> Constraint:
    coeffs = [ZERO] * nvars
    real = ZERO
    delta = ZERO
    for c, row in pairs:
        for k, a in enumerate(row.coeffs):
            if a:
                coeffs[k] += c * a
        real += c * row.bound.real
        delta += c * row.bound.delta
    return Constraint(tuple(coeffs), DeltaScalar(real, delta))


# -- constructing rows -------------------------------------------------------

RELATIONS = ("<=", "<", ">=", ">", "=")


def normalize(relation: str, coeffs: Sequence, constant, origin: int | None = None) -> Constraint:
    """Canonicalise ``coeffs·x REL constant`` into a ``<=`` row.

    ``>=``/``>`` are negated, strict relations get ``δ = -1`` in the bound,
    and ``=`` yields a row flagged ``equality`` for :func:`gaussian_eliminate`.
    """
    try:
        coeffs = [Fraction(c) for c in coeffs]
        constant = Fraction(constant)
    except (TypeError, ValueError) as exc:
        raise UnsupportedTerm(str(exc)) from exc
    if relation in (">=", ">"):
        coeffs = [-c for c in coeffs]
        constant = -constant
    if relation == "=":
        return Constraint(tuple(coeffs), DeltaScalar(constant), origin, equality=True)
    if relation not in RELATIONS:
        raise UnsupportedTerm(f"unknown relation {relation!r}")
    delta = -ONE if relation in ("<", ">") else ZERO
    return Constraint(tuple(coeffs), DeltaScalar(constant, delta), origin)


def index_sets(system: LinearSystem, j: int) -> tuple[list[int], list[int], list[int]]:
    """Rows giving lower bounds (``a_ij < 0``), upper bounds (``> 0``) and none (``= 0``) on x_j."""
    minus, plus, zero = [], [], []
    for i, row in enumerate(system.rows):
        a = row.coeffs[j]
        if a < 0:
            minus.append(i)
        elif a > 0:
            plus.append(i)
        else:
            zero.append(i)
    return minus, plus, zero


@dataclass(frozen=True)
class SymbolicBound:
    """``x_j >= coeffs·x + constant`` (lower) or ``x_j <= ...`` (upper); ``coeffs[j] == 0``."""

    var: int
    coeffs: tuple[Fraction, ...]
    constant: DeltaScalar
    lower: bool

    def value(self, assignment: Mapping[int, object]) -> DeltaScalar:
        total = self.constant
        for k, c in enumerate(self.coeffs):
            if c:
                if k not in assignment:
                    raise IncompleteAssignment(k)
                total = total + DeltaScalar.lift(assignment[k]) * c
        return total


def bound_rewrite(row: Constraint, j: int) -> SymbolicBound:
    a = row.coeffs[j]
    if not a:
        raise NotABound(f"x{j + 1} does not occur in the row")
    coeffs = tuple(ZERO if k == j else -c / a for k, c in enumerate(row.coeffs))
    return SymbolicBound(j, coeffs, row.bound / a, lower=a < 0)


# -- semantics ---------------------------------------------------------------


def term_value(coeffs: Sequence[Fraction], assignment: Mapping[int, object]) -> DeltaScalar:
    real = ZERO
    delta = ZERO
    for k, c in enumerate(coeffs):
        if not c:
            continue
        if k not in assignment:
            raise IncompleteAssignment(k)
        v = assignment[k]
        if isinstance(v, DeltaScalar):
            real += c * v.real
            delta += c * v.delta
        else:
            real += c * v
    return DeltaScalar(real, delta)


def evaluate(assignment: Mapping[int, object], row: Constraint) -> bool:
    """Whether the (rational or δ-valued) assignment satisfies the row exactly."""
    lhs = term_value(row.coeffs, assignment)
    if row.equality:
        return lhs == row.bound
    return lhs <= row.bound


def satisfies(assignment: Mapping[int, object], rows: Iterable[Constraint]) -> bool:
    return all(evaluate(assignment, row) for row in rows)


def check_farkas(cert: Mapping[int, Fraction], original: LinearSystem) -> bool:
    """True iff ``f >= 0``, ``f·A = 0`` and ``f·b < 0`` (δ-order) for the original rows."""
    if any(v < 0 for v in cert.values()):
        return False
    if any(not 0 <= k < len(original.rows) for k in cert):
        return False
    row = combine_rows([(Fraction(v), original.rows[k]) for k, v in cert.items()], original.nvars)
    return row.is_trivial() and row.bound < 0


def _integer_row(row: Sequence) -> list[int]:
    fr = [Fraction(x) for x in row]
    den = 1
    for x in fr:
        den = den * x.denominator // gcd(den, x.denominator)
    return [int(x * den) for x in fr]


def rank(rows: Sequence[Sequence]) -> int:
    """Exact rank by fraction-free (integer) Gaussian elimination."""
    work = [_integer_row(r) for r in rows]
    work = [r for r in work if any(r)]
    if not work:
        return 0
    ncols = len(work[0])
    r = 0
    for col in range(ncols):
        pivot = next((k for k in range(r, len(work)) if work[k][col]), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        p = work[r]
        for k in range(r + 1, len(work)):
            q = work[k][col]
            if q:
                new = [p[col] * work[k][c] - q * p[c] for c in range(ncols)]
                g = 0
                for x in new:
                    g = gcd(g, x)
                work[k] = [x // g for x in new] if g > 1 else new
        r += 1
        if r == len(work):
            break
    return r


# -- equalities --------------------------------------------------------------


@dataclass
class Substitution:
    """``x_var = (constant - Σ coeffs[k]·x_k) / pivot`` recorded during elimination."""

    var: int
    coeffs: tuple[Fraction, ...]
    constant: Fraction
    pivot: Fraction

    def value(self, assignment: Mapping[int, object]) -> DeltaScalar:
        total = DeltaScalar(self.constant)
        for k, c in enumerate(self.coeffs):
            if c and k != self.var:
                total = total - DeltaScalar.lift(assignment.get(k, ZERO)) * c
        return total / self.pivot


@dataclass
class GaussResult:
    system: LinearSystem
    record: list[Substitution]
    # for each reduced row: index of the source inequality and equality indices used
    sources: list[int]
    eq_support: list[frozenset[int]]
    conflict: frozenset[int] | None = None

    def extend(self, model: Mapping[int, object]) -> dict[int, object]:
        """Extend a model of the reduced system to the eliminated variables."""
        full = dict(model)
        for sub in reversed(self.record):
            full[sub.var] = sub.value(full)
        return full

    def original_support(self, reduced_rows: Iterable[int]) -> tuple[set[int], set[int]]:
        """Map reduced row indices to (inequality indices, equality indices)."""
        ineqs: set[int] = set()
        eqs: set[int] = set()
        for i in reduced_rows:
            ineqs.add(self.sources[i])
            eqs |= self.eq_support[i]
        return ineqs, eqs


def gaussian_eliminate(
    equalities: Sequence[Constraint], inequalities: Sequence[Constraint], nvars: int | None = None
) -> GaussResult:
    """Use each consistent equality to eliminate one variable from everything else.

    An equality that reduces to ``0 = c`` with ``c != 0`` stops the process and is
    reported in ``conflict`` as the set of equality indices it was combined from.
    """
    if nvars is None:
        sample = list(equalities) + list(inequalities)
        nvars = len(sample[0].coeffs) if sample else 0
    eqs = [(list(e.coeffs), e.bound.real, {k: ONE}) for k, e in enumerate(equalities)]
    ineqs = [(list(r.coeffs), r.bound, set()) for r in inequalities]
    record: list[Substitution] = []
    conflict = None
    for idx in range(len(eqs)):
        coeffs, const, prov = eqs[idx]
        pivot_var = next((k for k, c in enumerate(coeffs) if c), None)
        if pivot_var is None:
            if const != 0:
                conflict = frozenset(prov)
                break
            continue
        p = coeffs[pivot_var]
        record.append(Substitution(pivot_var, tuple(coeffs), const, p))
        for later in range(idx + 1, len(eqs)):
            c2, k2, f2 = eqs[later]
            q = c2[pivot_var]
            if q:
                t = q / p
                eqs[later] = (
                    [x - t * y for x, y in zip(c2, coeffs)],
                    k2 - t * const,
                    combine([(ONE, f2), (-t, prov)]),
                )
        for r, (c2, b2, used) in enumerate(ineqs):
            q = c2[pivot_var]
            if q:
                t = q / p
                ineqs[r] = ([x - t * y for x, y in zip(c2, coeffs)], b2 - DeltaScalar(t * const), used | set(prov))
    rows = [
        Constraint(tuple(c), b, inequalities[k].origin) for k, (c, b, _) in enumerate(ineqs)
    ]
    return GaussResult(
        system=LinearSystem.original(rows, nvars),
        record=record,
        sources=list(range(len(ineqs))),
        eq_support=[frozenset(u) for _, _, u in ineqs],
        conflict=conflict,
    )


def instantiate_delta(model: Mapping[int, object], rows: Iterable[Constraint]) -> tuple[dict[int, Fraction], Fraction]:
    """Pick a concrete ``δ0 > 0`` keeping every row satisfied; return the rational model and ``δ0``.

    ``δ0 = min(1, (b - p) / (q - d))`` over rows where the real slack is positive and
    the δ-coefficient of the left side ``q`` exceeds that of the bound ``d``.
    """
    delta0 = ONE
    for row in rows:
        lhs = term_value(row.coeffs, model)
        if row.equality:
            continue
        if lhs.real < row.bound.real and lhs.delta > row.bound.delta:
            ratio = (row.bound.real - lhs.real) / (lhs.delta - row.bound.delta)
            if ratio < delta0:
                delta0 = ratio
    values = {k: DeltaScalar.lift(v).instantiate(delta0) for k, v in model.items()}
    return values, delta0
