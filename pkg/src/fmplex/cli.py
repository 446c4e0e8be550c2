"""Command-line front end: ``fmplex solve|eliminate|check|gen|bench``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from .core import IncompleteAssignment, evaluate, index_sets
from .driver import BACKENDS, HEURISTICS, Decision, RunConfig, decide, default_seed
from .fm import fm_qe
from .generate import random_instance
from .outcome import BudgetExceeded
from .projection import fmplex_qe
from .smtlib import (
    Assertion,
    Atom,
    Problem,
    ProblemResult,
    SmtError,
    parse,
    parse_core,
    parse_model,
    print_problem,
    print_qe,
    print_result,
)

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
CSV_HEADER = ["file", "backend", "heuristic", "seed", "result", "time_ms", "rows_generated", "nodes_visited", "pivots", "max_depth"]


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _load(path: str) -> Problem:
    return parse(_read(path))


def _text_or_file(value: str) -> str:
    return Path(value).read_text() if os.path.isfile(value) else value


def _config(args) -> RunConfig:
    return RunConfig(
        backend=args.backend,
        heuristic=args.heuristic,
        seed=args.seed,
        max_nodes=args.max_nodes,
        max_rows=args.max_rows,
    )


def _num(value) -> str:
    return "-" if value is None else str(value)


def stats_line(decision: Decision) -> str:
    s = decision.stats
    return (
        f"; nodes={_num(s.nodes_visited)} rows={_num(s.rows_generated)} pivots={_num(s.pivots)}"
        f" depth={_num(s.max_depth)} time_ms={decision.time_ms:.3f}"
    )


# -- solve -------------------------------------------------------------------


def cmd_solve(args) -> int:
    problem = _load(args.file)
    decision = decide(problem, _config(args))
    if decision.status == "budget":
        print("unknown")
        print("budget exhausted", file=sys.stderr)
        code = EXIT_BUDGET
    else:
        result = ProblemResult(decision.status, decision.model, frozenset(decision.core or ()))
        sys.stdout.write(print_result(result, problem, force_model=args.model, force_core=args.core))
        code = EXIT_OK
    if args.stats:
        print(stats_line(decision))
    return code


# -- eliminate ---------------------------------------------------------------


def smaller_side(system, remaining):
    """Eliminate the next variable from the side with fewer bounds (lower on ties)."""
    j = remaining[0]
    minus, plus, _ = index_sets(system, j)
    return j, "plus" if len(plus) < len(minus) else "minus"


def cmd_eliminate(args) -> int:
    problem = _load(args.file)
    index = {name: k for k, name in enumerate(problem.variables)}
    unknown = [v for v in args.vars if v not in index]
    if unknown:
        raise UsageError(f"unknown variable(s): {' '.join(unknown)}")
    variables = [index[v] for v in args.vars]
    system = problem.system()
    if args.method == "fm":
        projected, _ = fm_qe(system, variables)
        out = print_qe([projected.rows], problem.variables)
    else:
        sign = smaller_side if args.sign == "smaller" else args.sign
        try:
            result = fmplex_qe(system, variables, sign, max_rows=args.max_rows)
        except BudgetExceeded as exc:
            print(f"budget exhausted: {exc}", file=sys.stderr)
            return EXIT_BUDGET
        out = print_qe(result, problem.variables)
    print(out)
    return EXIT_OK


# -- check -------------------------------------------------------------------


def check_model(problem: Problem, model: dict[int, Fraction]) -> bool:
    eqs, ineqs = problem.constraints()
    try:
        return all(evaluate(model, row) for row in eqs + ineqs)
    except IncompleteAssignment:
        return False


def check_core(problem: Problem, core: frozenset[int]) -> bool:
    sub = dataclasses.replace(problem, asserts=[problem.asserts[k] for k in sorted(core)])
    return decide(sub, RunConfig(backend="simplex")).status == "unsat"


def cmd_check(args) -> int:
    problem = _load(args.file)
    if (args.model is None) == (args.core is None):
        raise UsageError("give exactly one of --model or --core")
    if args.model is not None:
        ok = check_model(problem, parse_model(_text_or_file(args.model), problem))
    else:
        ok = check_core(problem, parse_core(_text_or_file(args.core), problem))
    print("valid" if ok else "invalid")
    return EXIT_OK if ok else EXIT_INVALID


# -- gen ---------------------------------------------------------------------


def instance_problem(inst) -> Problem:
    names = [f"x{k + 1}" for k in range(inst.nvars)]
    asserts = [
        Assertion([Atom(rel, tuple(Fraction(c) for c in a), Fraction(b))])
        for a, b, rel in zip(inst.coeffs, inst.bounds, inst.relations)
    ]
    return Problem(names, asserts, logic="QF_LRA", check_sat=True)


def _range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        bounds = (int(lo), int(hi)) if sep else (-abs(int(lo)), abs(int(lo)))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from None
    if bounds[0] > bounds[1]:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return bounds


def cmd_gen(args) -> int:
    if args.count < 0 or args.nvars < 1 or args.nrows < 1:
        raise UsageError("count must be >= 0, nvars and nrows >= 1")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)
    width = max(4, len(str(args.count)))
    for k in range(args.count):
        inst = random_instance(
            rng,
            args.nvars,
            args.nrows,
            coeff_range=args.coeff_range,
            sat_bias=args.sat_bias,
            strict_ratio=args.strict_ratio,
        )
        (out / f"inst_{k:0{width}d}.smt2").write_text(print_problem(instance_problem(inst)))
    return EXIT_OK


# -- bench -------------------------------------------------------------------


def bench_configs(args) -> list[RunConfig]:
    configs = []
    for backend in args.backend:
        if not backend.startswith("fmplex"):
            configs.append(RunConfig(backend, seed=args.seed[0], max_nodes=args.max_nodes, max_rows=args.max_rows))
            continue
        for h in args.heuristic:
            seeds = args.seed if h == "rand" else args.seed[:1]
            for seed in seeds:
                configs.append(RunConfig(backend, h, seed, args.max_nodes, args.max_rows))
    return configs


def bench_row(path: Path, config: RunConfig) -> list[str]:
    heuristic = config.heuristic if config.uses_heuristic else ""
    head = [path.name, config.backend, heuristic, str(config.seed)]
    try:
        decision = decide(parse(path.read_text()), config)
    except (OSError, SmtError, ValueError, ArithmeticError, AssertionError):
        return head + ["error", "", "", "", "", ""]
    s = decision.stats
    counters = [s.rows_generated, s.nodes_visited, s.pivots, s.max_depth]
    if config.backend == "simplex":
        counters[0] = counters[1] = counters[3] = None
    return head + [decision.status, f"{decision.time_ms:.3f}"] + ["" if c is None else str(c) for c in counters]


def _bench_job(job):
    return bench_row(*job)


def cmd_bench(args) -> int:
    root = Path(args.dir)
    if not root.is_dir():
        raise UsageError(f"{args.dir} is not a directory")
    files = sorted(root.glob("*.smt2"))
    jobs = [(f, c) for f in files for c in bench_configs(args)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_bench_job, jobs))
    else:
        rows = [_bench_job(j) for j in jobs]
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)
    return EXIT_OK


# -- argument parsing --------------------------------------------------------


def _budget_flags(p):
    p.add_argument("--max-nodes", type=int, default=10**6, help="search node budget (fmplex backends)")
    p.add_argument("--max-rows", type=int, default=None, help="generated row budget (fm, fmplex)")


def _list(choices):
    def parse_list(text):
        items = [t for t in text.split(",") if t]
        bad = [t for t in items if t not in choices]
        if bad:
            raise argparse.ArgumentTypeError(f"invalid choice(s) {bad}; pick from {list(choices)}")
        return items

    return parse_list


def _ints(text):
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fmplex", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="decide a QF_LRA conjunction")
    p.add_argument("file")
    p.add_argument("--backend", choices=BACKENDS, default="fmplex-c")
    p.add_argument("--heuristic", choices=HEURISTICS, default="mfo")
    p.add_argument("--seed", type=int, default=default_seed())
    _budget_flags(p)
    p.add_argument("--stats", action="store_true", help="append a '; nodes=...' counter line")
    p.add_argument("--model", action="store_true", help="print the model even without (get-model)")
    p.add_argument("--core", action="store_true", help="print the core even without (get-unsat-core)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("eliminate", help="project variables out, printing the quantifier-free result")
    p.add_argument("file")
    p.add_argument("--vars", nargs="*", default=[], metavar="NAME")
    p.add_argument("--method", choices=("fmplex", "fm"), default="fmplex")
    p.add_argument("--sign", choices=("minus", "plus", "smaller"), default="minus")
    p.add_argument("--max-rows", type=int, default=None)
    p.set_defaults(func=cmd_eliminate)

    p = sub.add_parser("check", help="validate a model or an unsat core (text or file)")
    p.add_argument("file")
    p.add_argument("--model", metavar="WITNESS")
    p.add_argument("--core", metavar="WITNESS")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="write random instances")
    p.add_argument("out", help="output directory")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--nvars", type=int, default=3)
    p.add_argument("--nrows", type=int, default=6)
    p.add_argument("--coeff-range", type=_range, default=(-3, 3), metavar="LO..HI")
    p.add_argument("--seed", type=int, default=default_seed())
    p.add_argument("--sat-bias", type=float, default=0.0)
    p.add_argument("--strict-ratio", type=float, default=0.0)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run configurations over a directory, CSV on stdout")
    p.add_argument("dir")
    p.add_argument("--backend", type=_list(BACKENDS), default=list(BACKENDS), metavar="B1,B2")
    p.add_argument("--heuristic", type=_list(HEURISTICS), default=["mfo"], metavar="H1,H2")
    p.add_argument("--seed", type=_ints, default=[default_seed()], metavar="S1,S2")
    _budget_flags(p)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (SmtError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
