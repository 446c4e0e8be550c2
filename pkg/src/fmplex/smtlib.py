"""A conjunctive QF_LRA subset of SMT-LIB 2: parsing and printing."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import Constraint, LinearSystem, normalize
from .projection import QeResult


class SmtError(Exception):
    def __init__(self, message: str, pos: tuple[int, int] | None = None):
        self.pos = pos
        if pos is not None:
            message = f"{pos[0]}:{pos[1]}: {message}"
        super().__init__(message)


class SmtSyntaxError(SmtError):
    pass


class Unsupported(SmtError):
    pass


class UnknownSymbol(SmtError):
    pass


# -- s-expressions -----------------------------------------------------------


@dataclass(frozen=True)
class Token:
    text: str
    pos: tuple[int, int]


class SList(list):
    pos: tuple[int, int] = (0, 0)


_TOKEN = re.compile(r"""\s+|;[^\n]*|\(|\)|\|[^|]*\||"(?:[^"]|"")*"|[^\s()";|]+""")


def read_sexprs(text: str) -> list:
    stack: list[SList] = [SList()]
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise SmtSyntaxError(f"unexpected character {text[pos]!r}", (line, pos - line_start + 1))
        tok = m.group()
        where = (line, pos - line_start + 1)
        if tok == "(":
            lst = SList()
            lst.pos = where
            stack.append(lst)
        elif tok == ")":
            if len(stack) == 1:
                raise SmtSyntaxError("unbalanced ')'", where)
            done = stack.pop()
            stack[-1].append(done)
        elif not tok[0].isspace() and tok[0] != ";":
            stack[-1].append(Token(tok, where))
        newlines = tok.count("\n")
        if newlines:
            line += newlines
            line_start = pos + tok.rfind("\n") + 1
        pos = m.end()
    if len(stack) != 1:
        raise SmtSyntaxError("unterminated '('", stack[-1].pos)
    return list(stack[0])


def _pos(expr) -> tuple[int, int]:
    return expr.pos


# -- problem -----------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    """``Σ coeffs[k]·x_k REL constant`` with ``REL`` in ``<=, <, >=, >, =``."""

    relation: str
    coeffs: tuple[Fraction, ...]
    constant: Fraction


@dataclass
class Assertion:
    atoms: list[Atom]
    name: str | None = None


@dataclass
class Problem:
    variables: list[str] = field(default_factory=list)
    asserts: list[Assertion] = field(default_factory=list)
    logic: str | None = None
    check_sat: bool = False
    get_model: bool = False
    get_unsat_core: bool = False

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def label(self, k: int) -> str:
        return self.asserts[k].name or f"a{k}"

    def constraints(self, subset: Iterable[int] | None = None) -> tuple[list[Constraint], list[Constraint]]:
        """(equalities, inequalities); each row's ``origin`` is its assert index."""
        eqs, ineqs = [], []
        chosen = range(len(self.asserts)) if subset is None else sorted(subset)
        for k in chosen:
            for atom in self.asserts[k].atoms:
                row = normalize(atom.relation, atom.coeffs, atom.constant, origin=k)
                (eqs if row.equality else ineqs).append(row)
        return eqs, ineqs

    def system(self) -> LinearSystem:
        """All atoms as ``<=`` rows, equalities split into two opposite rows."""
        eqs, ineqs = self.constraints()
        rows = list(ineqs)
        for e in eqs:
            rows.append(normalize("<=", e.coeffs, e.bound.real, e.origin))
            rows.append(normalize(">=", e.coeffs, e.bound.real, e.origin))
        return LinearSystem.original(rows, self.nvars)


UNSUPPORTED_HEADS = {"or", "not", "ite", "distinct", "=>", "xor", "let", "forall", "exists", "push", "pop", "abs", "div", "mod", "to_real", "to_int"}
RELATION_HEADS = ("<=", "<", ">=", ">", "=")
_DECIMAL = re.compile(r"^\d+(\.\d+)?$")


class _Parser:
    def __init__(self):
        self.problem = Problem()
        self.index: dict[str, int] = {}

    def run(self, exprs) -> Problem:
        for cmd in exprs:
            if not isinstance(cmd, SList) or not cmd or not isinstance(cmd[0], Token):
                raise SmtSyntaxError("expected a command", _pos(cmd))
            head = cmd[0].text
            handler = getattr(self, "cmd_" + head.replace("-", "_"), None)
            if handler is None:
                if head in UNSUPPORTED_HEADS:
                    raise Unsupported(f"command {head!r} is not supported", cmd.pos)
                raise SmtSyntaxError(f"unknown command {head!r}", cmd.pos)
            handler(cmd)
        return self.problem

    # commands
    def cmd_set_logic(self, cmd):
        self.problem.logic = cmd[1].text if len(cmd) > 1 and isinstance(cmd[1], Token) else None

    def cmd_set_info(self, cmd):
        pass

    def cmd_set_option(self, cmd):
        pass

    def cmd_exit(self, cmd):
        pass

    def cmd_check_sat(self, cmd):
        self.problem.check_sat = True

    def cmd_get_model(self, cmd):
        self.problem.get_model = True

    def cmd_get_unsat_core(self, cmd):
        self.problem.get_unsat_core = True

    def _declare(self, name_tok, sort, where):
        if not isinstance(name_tok, Token):
            raise SmtSyntaxError("expected a symbol", where)
        if not (isinstance(sort, Token) and sort.text == "Real"):
            raise Unsupported("only sort Real is supported", where)
        name = name_tok.text.strip("|")
        if name in self.index:
            raise SmtSyntaxError(f"symbol {name!r} declared twice", name_tok.pos)
        self.index[name] = len(self.problem.variables)
        self.problem.variables.append(name)

    def cmd_declare_fun(self, cmd):
        if len(cmd) != 4 or not isinstance(cmd[2], SList) or cmd[2]:
            raise Unsupported("only nullary declare-fun is supported", cmd.pos)
        self._declare(cmd[1], cmd[3], cmd.pos)

    def cmd_declare_const(self, cmd):
        if len(cmd) != 3:
            raise SmtSyntaxError("malformed declare-const", cmd.pos)
        self._declare(cmd[1], cmd[2], cmd.pos)

    def cmd_assert(self, cmd):
        if len(cmd) != 2:
            raise SmtSyntaxError("assert takes one formula", cmd.pos)
        body = cmd[1]
        name = None
        if isinstance(body, SList) and body and isinstance(body[0], Token) and body[0].text == "!":
            attrs = body[2:]
            for k in range(0, len(attrs) - 1, 2):
                if isinstance(attrs[k], Token) and attrs[k].text == ":named":
                    name = attrs[k + 1].text.strip("|")
            body = body[1]
        atoms: list[Atom] = []
        self.formula(body, atoms)
        self.problem.asserts.append(Assertion(atoms, name))

    # formulas
    def formula(self, expr, out: list[Atom]):
        if isinstance(expr, Token):
            if expr.text == "true":
                return
            raise Unsupported(f"formula {expr.text!r} is not supported", expr.pos)
        if not expr or not isinstance(expr[0], Token):
            raise SmtSyntaxError("malformed formula", expr.pos)
        head = expr[0].text
        if head == "and":
            for sub in expr[1:]:
                self.formula(sub, out)
        elif head == "!":
            self.formula(expr[1], out)
        elif head in RELATION_HEADS:
            if len(expr) != 3:
                raise Unsupported(f"{head} must have exactly two arguments", expr.pos)
            lhs = self.term(expr[1])
            rhs = self.term(expr[2])
            coeffs = [Fraction(0)] * len(self.problem.variables)
            for k, c in lhs[0].items():
                coeffs[k] += c
            for k, c in rhs[0].items():
                coeffs[k] -= c
            out.append(Atom(head, tuple(coeffs), rhs[1] - lhs[1]))
        elif head in UNSUPPORTED_HEADS:
            raise Unsupported(f"{head!r} is not supported (conjunctions only)", expr.pos)
        else:
            raise Unsupported(f"unknown formula head {head!r}", expr.pos)

    # terms: (linear part {var: coeff}, constant)
    def term(self, expr) -> tuple[dict[int, Fraction], Fraction]:
        if isinstance(expr, Token):
            text = expr.text
            if _DECIMAL.match(text):
                return {}, Fraction(text)
            name = text.strip("|")
            if name not in self.index:
                raise UnknownSymbol(f"undeclared symbol {name!r}", expr.pos)
            return {self.index[name]: Fraction(1)}, Fraction(0)
        if not expr or not isinstance(expr[0], Token):
            raise SmtSyntaxError("malformed term", expr.pos)
        head = expr[0].text
        if head in UNSUPPORTED_HEADS:
            raise Unsupported(f"{head!r} is not supported", expr.pos)
        args = [self.term(a) for a in expr[1:]]
        if head == "+":
            return _sum(args)
        if head == "-":
            if len(args) == 1:
                return _scale(args[0], Fraction(-1))
            if not args:
                raise SmtSyntaxError("'-' needs arguments", expr.pos)
            return _sum([args[0]] + [_scale(a, Fraction(-1)) for a in args[1:]])
        if head == "*":
            linear = [a for a in args if a[0]]
            if len(linear) > 1:
                raise Unsupported("nonlinear multiplication", expr.pos)
            factor = Fraction(1)
            for a in args:
                if not a[0]:
                    factor *= a[1]
            base = linear[0] if linear else ({}, Fraction(1))
            return _scale(base, factor)
        if head == "/":
            if len(args) != 2 or args[1][0]:
                raise Unsupported("division by a non-constant", expr.pos)
            if args[1][1] == 0:
                raise Unsupported("division by zero", expr.pos)
            return _scale(args[0], 1 / args[1][1])
        raise UnknownSymbol(f"unknown function {head!r}", expr.pos)


def _sum(args):
    lin: dict[int, Fraction] = {}
    const = Fraction(0)
    for l, c in args:
        for k, v in l.items():
            lin[k] = lin.get(k, Fraction(0)) + v
        const += c
    return {k: v for k, v in lin.items() if v}, const


def _scale(arg, factor):
    lin, const = arg
    return {k: v * factor for k, v in lin.items() if v * factor}, const * factor


def parse(text: str) -> Problem:
    return _Parser().run(read_sexprs(text))


# -- printing ----------------------------------------------------------------


def format_rational(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        body = str(abs(q.numerator))
    else:
        body = f"(/ {abs(q.numerator)} {q.denominator})"
    return f"(- {body})" if q < 0 else body


def format_term(coeffs: Sequence[Fraction], names: Sequence[str]) -> str:
    parts = []
    for k, c in enumerate(coeffs):
        if not c:
            continue
        if c == 1:
            parts.append(names[k])
        elif c == -1:
            parts.append(f"(- {names[k]})")
        else:
            parts.append(f"(* {format_rational(c)} {names[k]})")
    if not parts:
        return "0"
    if len(parts) == 1:
        return parts[0]
    return "(+ " + " ".join(parts) + ")"


def format_atom(atom: Atom, names: Sequence[str]) -> str:
    return f"({atom.relation} {format_term(atom.coeffs, names)} {format_rational(atom.constant)})"


def format_row(row: Constraint, names: Sequence[str]) -> str:
    """A ``<=`` row as ``(<= t c)``, or ``(< t c)`` when its bound carries ``-δ``."""
    rel = "<" if row.bound.delta < 0 else "<="
    return f"({rel} {format_term(row.coeffs, names)} {format_rational(row.bound.real)})"


def print_problem(problem: Problem) -> str:
    lines = []
    if problem.logic:
        lines.append(f"(set-logic {problem.logic})")
    for name in problem.variables:
        lines.append(f"(declare-fun {name} () Real)")
    for a in problem.asserts:
        atoms = [format_atom(x, problem.variables) for x in a.atoms]
        body = atoms[0] if len(atoms) == 1 else "(and " + " ".join(atoms) + ")" if atoms else "true"
        if a.name:
            body = f"(! {body} :named {a.name})"
        lines.append(f"(assert {body})")
    if problem.check_sat:
        lines.append("(check-sat)")
    if problem.get_model:
        lines.append("(get-model)")
    if problem.get_unsat_core:
        lines.append("(get-unsat-core)")
    return "\n".join(lines) + "\n"


@dataclass
class ProblemResult:
    """A decision for a :class:`Problem`: rational model by variable index, core by assert index."""

    status: str
    model: Mapping[int, Fraction] | None = None
    core: frozenset[int] | None = None


def print_result(
    result: ProblemResult, problem: Problem, force_model: bool = False, force_core: bool = False
) -> str:
    lines = [result.status]
    if result.status == "sat" and (problem.get_model or force_model) and result.model is not None:
        defs = [
            f"(define-fun {name} () Real {format_rational(result.model.get(k, 0))})"
            for k, name in enumerate(problem.variables)
        ]
        lines.append("(model " + " ".join(defs) + ")" if defs else "(model)")
    if result.status == "unsat" and (problem.get_unsat_core or force_core) and result.core is not None:
        labels = [problem.label(k) for k in sorted(result.core)]
        lines.append("(core " + " ".join(labels) + ")" if labels else "(core)")
    return "\n".join(lines) + "\n"


def format_conjunction(rows: Sequence[Constraint], names: Sequence[str]) -> str:
    if not rows:
        return "true"
    return "(and " + " ".join(format_row(r, names) for r in rows) + ")"


def print_qe(result: QeResult | Sequence[Sequence[Constraint]], names: Sequence[str]) -> str:
    """``(or (and ...) ...)``; a lone disjunct is printed without ``or``."""
    if isinstance(result, QeResult):
        disjuncts = [d.rows for d in result.disjuncts]
    else:
        disjuncts = list(result)
    if not disjuncts:
        return "false"
    parts = [format_conjunction(d, names) for d in disjuncts]
    if len(parts) == 1:
        return parts[0]
    return "(or " + " ".join(parts) + ")"


# -- witnesses ---------------------------------------------------------------


def _constant(expr) -> Fraction:
    lin, const = _Parser().term(expr)
    return const


def parse_model(text: str, problem: Problem) -> dict[int, Fraction]:
    """Read ``(model (define-fun x () Real v) ...)``; a leading ``sat`` line is ignored."""
    exprs = [e for e in read_sexprs(text) if not (isinstance(e, Token) and e.text == "sat")]
    if len(exprs) != 1 or not isinstance(exprs[0], SList) or not exprs[0] or exprs[0][0].text != "model":
        raise SmtSyntaxError("expected a single (model ...) expression")
    model: dict[int, Fraction] = {}
    index = {name: k for k, name in enumerate(problem.variables)}
    for d in exprs[0][1:]:
        if not isinstance(d, SList) or len(d) != 5 or d[0].text != "define-fun":
            raise SmtSyntaxError("expected (define-fun name () Real value)", getattr(d, "pos", None))
        name = d[1].text.strip("|")
        if name not in index:
            raise UnknownSymbol(f"model defines unknown symbol {name!r}", d[1].pos)
        model[index[name]] = _constant(d[4])
    return model


def parse_core(text: str, problem: Problem) -> frozenset[int]:
    """Read ``(core l1 l2 ...)`` (or bare labels); labels are names, ``a<k>`` or plain indices."""
    exprs = [e for e in read_sexprs(text) if not (isinstance(e, Token) and e.text == "unsat")]
    if len(exprs) == 1 and isinstance(exprs[0], SList) and exprs[0] and exprs[0][0].text == "core":
        items = exprs[0][1:]
    else:
        items = exprs
    by_label = {problem.label(k): k for k in range(len(problem.asserts))}
    out = set()
    for tok in items:
        if not isinstance(tok, Token):
            raise SmtSyntaxError("core entries must be labels", tok.pos)
        label = tok.text.strip("|")
        if label.isdigit() and label not in by_label and int(label) < len(problem.asserts):
            out.add(int(label))
            continue
        if label not in by_label:
            raise UnknownSymbol(f"unknown core label {label!r}", tok.pos)
        out.add(by_label[label])
    return frozenset(out)
