"""Exact linear real arithmetic: Fourier-Motzkin, restricted-projection search and simplex."""

from .core import Constraint, DeltaScalar, LinearSystem, check_farkas, evaluate, normalize, rank
from .fm import fm_eliminate, fm_qe, fm_solve
from .outcome import BudgetExceeded, PartialUnsat, Sat, Stats, Unsat
from .projection import fmp_set, fmplex_qe, restricted_projection
from .search import solve
from .simplex import simplex_solve

__all__ = [
    "BudgetExceeded",
    "Constraint",
    "DeltaScalar",
    "LinearSystem",
    "PartialUnsat",
    "Sat",
    "Stats",
    "Unsat",
    "check_farkas",
    "evaluate",
    "fm_eliminate",
    "fm_qe",
    "fm_solve",
    "fmp_set",
    "fmplex_qe",
    "normalize",
    "rank",
    "restricted_projection",
    "simplex_solve",
    "solve",
]
