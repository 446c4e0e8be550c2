"""General simplex over δ-rationals, written in terms of a row non-basis.

The non-basis ``N`` is a set of original rows that are currently tight
(``a_i·x = b_i``) and linearly independent with ``|N| = rank(A)``.  Every
other row ``r`` is stored as its coefficients ``λ_r`` over ``N``
(``a_r = Σ λ_{r,i} a_i``), so its current value is ``Σ λ_{r,i} b_i``.

A violated row ``r`` is repaired by swapping it into ``N`` in exchange for
some ``i`` with ``λ_{r,i} > 0``.  If there is no such ``i`` the multipliers
``e_r - λ_r`` form a Farkas certificate.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .core import ONE, ZERO, DeltaScalar, LinearSystem
from .outcome import Sat, SolveOutcome, Stats, Unsat


class InvalidPivot(ValueError):
    pass


class Tableau:
    def __init__(self, system: LinearSystem, nonbasis: list[int], coef: dict[int, dict[int, Fraction]]):
        self.system = system
        self.nonbasis = nonbasis
        self.coef = coef

    def copy(self) -> "Tableau":
        return Tableau(self.system, list(self.nonbasis), {r: dict(c) for r, c in self.coef.items()})

    def value(self, r: int) -> DeltaScalar:
        """Value of row ``r``'s left-hand side at the current vertex."""
        if r not in self.coef:
            return self.system.rows[r].bound
        real = ZERO
        delta = ZERO
        rows = self.system.rows
        for i, lam in self.coef[r].items():
            b = rows[i].bound
            real += lam * b.real
            delta += lam * b.delta
        return DeltaScalar(real, delta)

    def violated(self) -> list[int]:
        rows = self.system.rows
        return [r for r in sorted(self.coef) if self.value(r) > rows[r].bound]

    def column_length(self, i: int) -> int:
        return sum(1 for c in self.coef.values() if c.get(i))

    def provenance(self, r: int) -> dict[int, Fraction]:
        """Multipliers over original rows of the identity ``a_r - Σ λ_{r,i} a_i = 0``."""
        f = {r: ONE}
        for i, lam in self.coef.get(r, {}).items():
            f[i] = -lam
        return f

    def pivot(self, leaving: int, entering: int) -> None:
        """In place: ``N := N ∪ {entering} \\ {leaving}``."""
        if leaving == entering:
            raise InvalidPivot("leaving and entering row coincide")
        if leaving not in self.nonbasis or entering not in self.coef:
            raise InvalidPivot("leaving must be in the non-basis and entering outside it")
        lam_k = self.coef[entering]
        pivot = lam_k.get(leaving, ZERO)
        if not pivot:
            raise InvalidPivot("entering row is dependent on the remaining non-basis rows")
        # a_leaving expressed over N' = N - {leaving} + {entering}
        rep = {entering: ONE / pivot}
        for i, lam in lam_k.items():
            if i != leaving:
                rep[i] = -lam / pivot
        del self.coef[entering]
        for r, lam_r in self.coef.items():
            t = lam_r.pop(leaving, None)
            if t:
                for i, c in rep.items():
                    v = lam_r.get(i, ZERO) + t * c
                    if v:
                        lam_r[i] = v
                    else:
                        lam_r.pop(i, None)
        self.coef[leaving] = rep
        self.nonbasis[self.nonbasis.index(leaving)] = entering

    def model(self) -> dict[int, DeltaScalar]:
        """A point making every row of ``N`` tight; free directions are set to 0."""
        rows = [self.system.rows[i] for i in self.nonbasis]
        return solve_equalities(
            [r.coeffs for r in rows], [r.bound for r in rows], self.system.nvars
        )


def solve_equalities(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[DeltaScalar], nvars: int) -> dict[int, DeltaScalar]:
    """Solve an independent system ``M x = rhs`` exactly; non-pivot variables get 0."""
    work = [[Fraction(c) for c in row] + [DeltaScalar.lift(b)] for row, b in zip(matrix, rhs)]
    pivots: list[int] = []
    r = 0
    for col in range(nvars):
        p = next((k for k in range(r, len(work)) if work[k][col]), None)
        if p is None:
            continue
        work[r], work[p] = work[p], work[r]
        inv = ONE / work[r][col]
        work[r] = [x * inv for x in work[r]]
        for k in range(len(work)):
            if k != r and work[k][col]:
                t = work[k][col]
                work[k] = [x - t * y for x, y in zip(work[k], work[r])]
        pivots.append(col)
        r += 1
    model = {k: DeltaScalar(ZERO) for k in range(nvars)}
    for row, col in zip(work, pivots):
        model[col] = row[-1]
    return model


def build_tableau(system: LinearSystem) -> Tableau:
    """Greedy maximal independent non-basis, scanning rows in order."""
    # reduced basis entries: (pivot column, vector normalised at pivot, combination over N)
    basis: list[tuple[int, list[Fraction], dict[int, Fraction]]] = []
    nonbasis: list[int] = []
    coef: dict[int, dict[int, Fraction]] = {}
    for r, row in enumerate(system.rows):
        vec = list(row.coeffs)
        comb: dict[int, Fraction] = {}
        for p, w, wc in basis:
            t = vec[p]
            if t:
                vec = [x - t * y for x, y in zip(vec, w)]
                for i, c in wc.items():
                    v = comb.get(i, ZERO) + t * c
                    if v:
                        comb[i] = v
                    else:
                        comb.pop(i, None)
        col = next((k for k, x in enumerate(vec) if x), None)
        if col is None:
            coef[r] = comb
            continue
        inv = ONE / vec[col]
        vec = [x * inv for x in vec]
        # vec = inv * (a_r - Σ comb·a)  →  combination {r: inv, i: -inv*comb_i}
        new_comb = {r: inv}
        for i, c in comb.items():
            new_comb[i] = -inv * c
        for idx, (p, w, wc) in enumerate(basis):
            t = w[col]
            if t:
                w2 = [x - t * y for x, y in zip(w, vec)]
                wc2 = dict(wc)
                for i, c in new_comb.items():
                    v = wc2.get(i, ZERO) - t * c
                    if v:
                        wc2[i] = v
                    else:
                        wc2.pop(i, None)
                basis[idx] = (p, w2, wc2)
        basis.append((col, vec, new_comb))
        nonbasis.append(r)
    return Tableau(system, nonbasis, coef)


def pivot(tableau: Tableau, leaving: int, entering: int) -> Tableau:
    out = tableau.copy()
    out.pivot(leaving, entering)
    return out


def simplex_solve(system: LinearSystem) -> tuple[SolveOutcome, Stats]:
    """Check satisfiability; returns the outcome and the pivot count in ``Stats``.

    The leaving row is chosen by minimum column length (ties: smallest index);
    once a non-basis repeats, Bland's rule takes over for good.
    """
    tab = build_tableau(system)
    stats = Stats(pivots=0)
    seen = {frozenset(tab.nonbasis)}
    bland = False
    rows = system.rows
    while True:
        violated = None
        for r in sorted(tab.coef):
            if tab.value(r) > rows[r].bound:
                violated = r
                break
        if violated is None:
            return Sat(tab.model()), stats
        lam = tab.coef[violated]
        candidates = sorted(i for i, c in lam.items() if c > 0)
        if not candidates:
            cert = {k: v for k, v in tab.provenance(violated).items() if v}
            return Unsat(frozenset(cert), cert), stats
        if bland:
            leaving = candidates[0]
        else:
            leaving = min(candidates, key=lambda i: (tab.column_length(i), i))
        tab.pivot(leaving, violated)
        stats.pivots += 1
        key = frozenset(tab.nonbasis)
        if key in seen:
            bland = True
        seen.add(key)
