"""Constrained Horn clause export for saturations that do not terminate.

Resolution on the bare clause parts (constraints ignored) often terminates
even when the constrained saturation does not. The constraints attached to
each clause part are then the least solution of a system of Horn clauses
over fresh predicates ``mu_i``, which external fixpoint engines can check.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from lark import Lark, Transformer, UnexpectedInput

from app.logic import formula as fm
from app.logic import linarith as la
from app.logic.errors import ParseError, UnsupportedInput
from app.logic.formula import FALSE, TRUE, Formula
from app.logic.hres import (
    ConstrainedClause, Diverged, canonical_rename, clause_renamings, factor, rename_apart, resolve,
)
from app.logic.limits import RunLimits
from app.logic.ordering import Precedence
from app.logic.terms import (
    NUM, POINT, App, Cmp, Const, Eq, Literal, Num, Pred, Sort, Term, Var, iter_terms, mgu, minus, plus, times,
    variables,
)

logger = logging.getLogger(__name__)

ClausePart = Tuple[Literal, ...]


# ---------------------------------------------------------------- pure saturation


@dataclass(frozen=True)
class InferenceShape:
    """One inference of the pure saturation, instantiated as a Horn rule"""

    rule: str
    premises: Tuple[int, ...]
    positions: Tuple[int, ...]
    body_args: Tuple[Tuple[Term, ...], ...]
    conclusion: int
    head_args: Tuple[Term, ...]


@dataclass
class PureSaturation:
    clauses: List[ClausePart]
    inferences: List[InferenceShape] = field(default_factory=list)

    @property
    def bottom(self) -> Optional[int]:
        for index, part in enumerate(self.clauses, start=1):
            if not part:
                return index
        return None


def mu_variables(part: ClausePart) -> Tuple[Var, ...]:
    """Arguments of the ``mu`` predicate of a clause part, sorted by name"""
    return tuple(sorted(variables(part), key=lambda v: v.name))


def _check_pure(part: ClausePart) -> None:
    for literal in part:
        if not isinstance(literal.atom, Pred) or not all(isinstance(a, Var) for a in literal.atom.args):
            raise UnsupportedInput(f"clause part argument is not a variable: {literal}")


def _apart(first: ClausePart, second: ClausePart) -> Tuple[ClausePart, Dict[Var, Term]]:
    used = {v.name for v in variables(first)} | {v.name for v in variables(second)}
    clashing = set(variables(first)) & set(variables(second))
    mapping: Dict[Var, Term] = {}
    for var in variables(second):
        if var in clashing:
            counter = 1
            while f"{var.name}_{counter}" in used:
                counter += 1
            used.add(f"{var.name}_{counter}")
            mapping[var] = Var(f"{var.name}_{counter}", var.sort)
    return tuple(l.substitute(mapping) for l in second), mapping


def _find_variant(parts: Sequence[ClausePart], candidate: ClausePart) -> Optional[Tuple[int, Dict[Var, Term]]]:
    for index, part in enumerate(parts, start=1):
        for renaming in clause_renamings(part, candidate):
            return index, renaming
    return None


def saturate_pure(parts: Sequence[ClausePart], predicate: str, prec: Optional[Precedence] = None,
                  limits: RunLimits = RunLimits()) -> Union[PureSaturation, Diverged]:
    """Saturate clause parts up to variants, recording every inference shape"""
    prec = prec or Precedence(eliminable=frozenset({predicate}))
    clauses: List[ClausePart] = [tuple(p) for p in parts]
    for part in clauses:
        _check_pure(part)
    result = PureSaturation(clauses)
    processed = 0
    while processed < len(clauses):
        given_index = processed + 1
        given = ConstrainedClause(TRUE, clauses[processed], given_index)
        processed += 1
        steps = []
        for factored in factor(given, prec):
            steps.append((factored, ((given_index, mu_variables(given.literals)),)))
        for partner_index in range(1, given_index + 1):
            partner_part = clauses[partner_index - 1]
            renamed, mapping = _apart(given.literals, partner_part)
            partner_vars = tuple(mapping.get(v, v) for v in mu_variables(partner_part))
            partner = ConstrainedClause(TRUE, renamed, partner_index)
            for conclusion in resolve(given, partner, prec):
                steps.append((conclusion, ((given_index, mu_variables(given.literals)),
                                           (partner_index, partner_vars))))
            if partner_index != given_index:
                for conclusion in resolve(partner, given, prec):
                    steps.append((conclusion, ((partner_index, partner_vars),
                                               (given_index, mu_variables(given.literals)))))
        for conclusion, premises in steps:
            derived = conclusion.clause.literals
            found = _find_variant(clauses, derived)
            if found is None:
                clauses.append(canonical_rename(ConstrainedClause(TRUE, derived)).literals)
                found = _find_variant(clauses, derived)
                logger.debug("new clause part %d: %s", len(clauses), part_str(clauses[-1]))
                if len(clauses) > limits.max_clauses:
                    partial = [ConstrainedClause(TRUE, p, i) for i, p in enumerate(clauses, start=1)]
                    return Diverged(partial, [], "clause limit")
            index, renaming = found
            sigma = conclusion.mgu
            body = tuple(tuple(a.substitute(sigma) for a in args) for _, args in premises)
            head = tuple(renaming[v] for v in mu_variables(clauses[index - 1]))
            result.inferences.append(InferenceShape(conclusion.rule, tuple(p for p, _ in premises),
                                                    conclusion.positions, body, index, head))
    logger.info("pure saturation: %d clause parts, %d inference shapes", len(clauses), len(result.inferences))
    return result


def part_str(part: ClausePart) -> str:
    return " | ".join(str(l) for l in part) if part else "_|_"


# ---------------------------------------------------------------- horn systems


@dataclass(frozen=True)
class MuAtom:
    index: int
    args: Tuple[Term, ...] = ()

    @property
    def name(self) -> str:
        return f"mu_{self.index}"

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class HornRule:
    """``body & constraint -> head``; a missing head reads as false"""

    body: Tuple[MuAtom, ...]
    constraint: Formula
    head: Optional[MuAtom]

    def variables(self) -> Tuple[Var, ...]:
        seen: Dict[Var, None] = {}
        for atom in self.body:
            for var in variables(atom.args):
                seen.setdefault(var, None)
        for var in fm.free_variables(self.constraint):
            seen.setdefault(var, None)
        if self.head is not None:
            for var in variables(self.head.args):
                seen.setdefault(var, None)
        return tuple(seen)

    def __str__(self) -> str:
        premises = [str(a) for a in self.body]
        if self.constraint != TRUE or not premises:
            premises.append(str(self.constraint))
        head = str(self.head) if self.head is not None else "false"
        return f"{' & '.join(premises)} -> {head}"


@dataclass
class ChcSystem:
    signatures: Dict[int, Tuple[Sort, ...]]
    rules: List[HornRule]
    query: int
    number_sort: str = "Int"
    symbols: Dict[str, Tuple[Tuple[Sort, ...], Optional[Sort]]] = field(default_factory=dict)

    def query_rule(self) -> HornRule:
        arity = self.signatures[self.query]
        args = tuple(Var(f"x{i}", sort) for i, sort in enumerate(arity, start=1))
        return HornRule((MuAtom(self.query, args),), TRUE, None)

    def to_smtlib(self) -> str:
        return render_smtlib(self)


def _number_sort(clauses: Sequence[ConstrainedClause]) -> str:
    for clause in clauses:
        for term in fm.formula_terms(clause.constraint):
            if isinstance(term, Num) and term.value.denominator != 1:
                return "Real"
    return "Int"


def _free_symbols(clauses: Sequence[ConstrainedClause]) -> Dict[str, Tuple[Tuple[Sort, ...], Optional[Sort]]]:
    symbols: Dict[str, Tuple[Tuple[Sort, ...], Optional[Sort]]] = {}
    for clause in clauses:
        for atom in fm.atoms(clause.constraint):
            if isinstance(atom, Pred):
                symbols.setdefault(atom.name, (tuple(a.sort for a in atom.args), None))
            for term in iter_terms(atom):
                if isinstance(term, App) and not term.is_arithmetic:
                    symbols.setdefault(term.fn, (tuple(a.sort for a in term.args), term.sort))
                elif isinstance(term, Const):
                    symbols.setdefault(term.name, ((), term.sort))
    return dict(sorted(symbols.items()))


def emit_chc(clauses: Sequence[ConstrainedClause], saturation: PureSaturation) -> Optional[ChcSystem]:
    """Horn system whose least model gives the constraints of the saturation.

    Returns ``None`` when the pure saturation has no empty clause part: the
    clause set is then equivalent to true.
    """
    if saturation.bottom is None:
        logger.info("no empty clause part: the eliminated formula is equivalent to true")
        return None
    signatures = {index: tuple(v.sort for v in mu_variables(part))
                  for index, part in enumerate(saturation.clauses, start=1)}
    rules: List[HornRule] = []
    for index, clause in enumerate(clauses, start=1):
        rules.append(HornRule((), clause.constraint, MuAtom(index, mu_variables(clause.literals))))
    for shape in saturation.inferences:
        body = tuple(MuAtom(premise, args) for premise, args in zip(shape.premises, shape.body_args))
        rules.append(HornRule(body, TRUE, MuAtom(shape.conclusion, shape.head_args)))
    return ChcSystem(signatures, rules, saturation.bottom, _number_sort(clauses), _free_symbols(clauses))


# ---------------------------------------------------------------- smt-lib rendering


def _sort_name(sort: Optional[Sort], number_sort: str) -> str:
    if sort is None:
        return "Bool"
    return number_sort if sort == NUM else "Point"


def _smt_number(value: Fraction) -> str:
    magnitude = abs(value)
    text = str(magnitude.numerator) if magnitude.denominator == 1 else \
        f"(/ {magnitude.numerator} {magnitude.denominator})"
    return f"(- {text})" if value < 0 else text


def smt_term(term: Term) -> str:
    if isinstance(term, Num):
        return _smt_number(term.value)
    if isinstance(term, (Var, Const)):
        return term.name
    if not term.args:
        return term.fn
    return f"({term.fn} {' '.join(smt_term(a) for a in term.args)})"


def smt_formula(formula: Formula) -> str:
    if formula == TRUE:
        return "true"
    if formula == FALSE:
        return "false"
    if isinstance(formula, fm.AtomF):
        atom = formula.atom
        if isinstance(atom, Pred):
            if not atom.args:
                return atom.name
            return f"({atom.name} {' '.join(smt_term(a) for a in atom.args)})"
        if isinstance(atom, Eq):
            return f"(= {smt_term(atom.lhs)} {smt_term(atom.rhs)})"
        return f"({atom.op} {smt_term(atom.lhs)} {smt_term(atom.rhs)})"
    if isinstance(formula, fm.Not):
        return f"(not {smt_formula(formula.arg)})"
    if isinstance(formula, fm.And):
        return f"(and {' '.join(smt_formula(a) for a in formula.args)})"
    if isinstance(formula, fm.Or):
        return f"(or {' '.join(smt_formula(a) for a in formula.args)})"
    raise UnsupportedInput(f"quantified constraint cannot be exported: {formula}")


def _mu_sexpr(atom: MuAtom) -> str:
    if not atom.args:
        return atom.name
    return f"({atom.name} {' '.join(smt_term(a) for a in atom.args)})"


def _rule_sexpr(rule: HornRule, number_sort: str) -> str:
    parts = [_mu_sexpr(a) for a in rule.body]
    if rule.constraint != TRUE or not parts:
        parts.append(smt_formula(rule.constraint))
    body = parts[0] if len(parts) == 1 else f"(and {' '.join(parts)})"
    head = _mu_sexpr(rule.head) if rule.head is not None else "false"
    implication = f"(=> {body} {head})"
    bound = rule.variables()
    if not bound:
        return f"(assert {implication})"
    binders = " ".join(f"({v.name} {_sort_name(v.sort, number_sort)})" for v in bound)
    return f"(assert (forall ({binders}) {implication}))"


def render_smtlib(system: ChcSystem) -> str:
    lines = ["(set-logic HORN)"]
    sorts = [s for sig in system.signatures.values() for s in sig]
    sorts += [s for args, result in system.symbols.values() for s in args + ((result,) if result else ())]
    if POINT in sorts:
        lines.append("(declare-sort Point 0)")
    for name, (args, result) in system.symbols.items():
        arg_sorts = " ".join(_sort_name(s, system.number_sort) for s in args)
        lines.append(f"(declare-fun {name} ({arg_sorts}) {_sort_name(result, system.number_sort)})")
    for index, signature in sorted(system.signatures.items()):
        arg_sorts = " ".join(_sort_name(s, system.number_sort) for s in signature)
        lines.append(f"(declare-fun mu_{index} ({arg_sorts}) Bool)")
    for rule in system.rules:
        lines.append(_rule_sexpr(rule, system.number_sort))
    lines.append(_rule_sexpr(system.query_rule(), system.number_sort))
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- smt-lib parsing


SEXPR_GRAMMAR = r"""
    start: _item*
    _item: list | ATOM
    list: "(" _item* ")"
    ATOM: /[^\s()]+/
    COMMENT: /;[^\n]*/
    %import common.WS
    %ignore WS
    %ignore COMMENT
"""


class _SexprTransformer(Transformer):
    def start(self, items):
        return list(items)

    def list(self, items):
        return list(items)

    def ATOM(self, token):
        return str(token)


_sexpr_parser = Lark(SEXPR_GRAMMAR, parser="lalr", transformer=_SexprTransformer())


def parse_sexprs(text: str) -> List:
    try:
        return _sexpr_parser.parse(text)
    except UnexpectedInput as exc:
        raise ParseError(f"malformed s-expression: {exc.__class__.__name__}",
                         getattr(exc, "line", None), getattr(exc, "column", None)) from exc


def _is_numeral(token: str) -> bool:
    try:
        Fraction(token)
    except ValueError:
        return False
    return token[0].isdigit()


class _SystemReader:
    def __init__(self):
        self.signatures: Dict[int, Tuple[Sort, ...]] = {}
        self.symbols: Dict[str, Tuple[Tuple[Sort, ...], Optional[Sort]]] = {}
        self.rules: List[HornRule] = []
        self.query: Optional[int] = None
        self.number_sort = "Int"

    def sort(self, name: str) -> Optional[Sort]:
        if name in ("Int", "Real"):
            self.number_sort = name
            return NUM
        if name == "Point":
            return POINT
        if name == "Bool":
            return None
        raise ParseError(f"unknown sort {name}")

    def command(self, item) -> None:
        if not isinstance(item, list) or not item:
            raise ParseError(f"expected a command, got {item!r}")
        head = item[0]
        if head in ("set-logic", "check-sat", "declare-sort", "exit", "get-model"):
            return
        if head == "declare-fun":
            name, args, result = item[1], item[2], item[3]
            signature = tuple(self.sort(a) for a in args)
            if name.startswith("mu_"):
                self.signatures[int(name[3:])] = signature
            else:
                self.symbols[name] = (signature, self.sort(result))
            return
        if head == "assert":
            self.assertion(item[1])
            return
        raise ParseError(f"unsupported command {head}")

    def assertion(self, item) -> None:
        scope: Dict[str, Var] = {}
        if isinstance(item, list) and item and item[0] == "forall":
            for name, sort in item[1]:
                scope[name] = Var(name, self.sort(sort))
            item = item[2]
        if not (isinstance(item, list) and len(item) == 3 and item[0] == "=>"):
            raise ParseError("expected an implication")
        body, head = item[1], item[2]
        conjuncts = body[1:] if isinstance(body, list) and body and body[0] == "and" else [body]
        mus = tuple(self.mu(c, scope) for c in conjuncts if self.is_mu(c))
        constraint = fm.conj(*(self.formula(c, scope) for c in conjuncts if not self.is_mu(c)))
        if head == "false":
            if len(mus) == 1 and constraint == TRUE:
                self.query = mus[0].index
                return
            self.rules.append(HornRule(mus, constraint, None))
            return
        self.rules.append(HornRule(mus, constraint, self.mu(head, scope)))

    @staticmethod
    def is_mu(item) -> bool:
        name = item[0] if isinstance(item, list) and item else item
        return isinstance(name, str) and name.startswith("mu_")

    def mu(self, item, scope) -> MuAtom:
        if isinstance(item, str):
            return MuAtom(int(item[3:]))
        return MuAtom(int(item[0][3:]), tuple(self.term(a, scope) for a in item[1:]))

    def term(self, item, scope) -> Term:
        if isinstance(item, str):
            if item in scope:
                return scope[item]
            if _is_numeral(item):
                return Num(Fraction(item))
            signature = self.symbols.get(item)
            if signature is None:
                raise ParseError(f"undeclared symbol {item}")
            return Const(item, signature[1])
        head, args = item[0], item[1:]
        if head == "-" and len(args) == 1:
            inner = self.term(args[0], scope)
            if isinstance(inner, Num):
                return Num(-inner.value)
            return App("-", (inner,))
        if head == "/" and all(isinstance(a, str) and _is_numeral(a) for a in args):
            return Num(Fraction(args[0]) / Fraction(args[1]))
        if head == "+":
            return plus(self.term(args[0], scope), self.term(args[1], scope))
        if head == "-":
            return minus(self.term(args[0], scope), self.term(args[1], scope))
        if head == "*":
            coefficient = self.term(args[0], scope)
            return times(coefficient.value, self.term(args[1], scope))
        signature = self.symbols.get(head)
        if signature is None:
            raise ParseError(f"undeclared function {head}")
        return App(head, tuple(self.term(a, scope) for a in args), signature[1])

    def formula(self, item, scope) -> Formula:
        if item == "true":
            return TRUE
        if item == "false":
            return FALSE
        if isinstance(item, str):
            return fm.AtomF(Pred(item, ()))
        head, args = item[0], item[1:]
        if head == "not":
            return fm.neg(self.formula(args[0], scope))
        if head == "and":
            return fm.conj(*(self.formula(a, scope) for a in args))
        if head == "or":
            return fm.disj(*(self.formula(a, scope) for a in args))
        if head == "=":
            return fm.AtomF(Eq(self.term(args[0], scope), self.term(args[1], scope)))
        if head in ("<=", "<", ">=", ">"):
            return fm.AtomF(Cmp(head, self.term(args[0], scope), self.term(args[1], scope)))
        return fm.AtomF(Pred(head, tuple(self.term(a, scope) for a in args)))


def parse_chc(text: str) -> ChcSystem:
    """Read back a Horn system in the format written by ``render_smtlib``"""
    reader = _SystemReader()
    for item in parse_sexprs(text):
        reader.command(item)
    if reader.query is None:
        raise ParseError("no query assertion found")
    return ChcSystem(reader.signatures, reader.rules, reader.query, reader.number_sort, reader.symbols)


# ---------------------------------------------------------------- external answers


class ChcVerdict(str, Enum):
    SATISFIABLE = "satisfiable"
    UNSATISFIABLE = "unsatisfiable"
    INCONCLUSIVE = "inconclusive"


@dataclass
class ExternalAnswer:
    verdict: ChcVerdict
    model: List[str] = field(default_factory=list)

    @property
    def summary(self) -> str:
        if self.verdict is ChcVerdict.SATISFIABLE:
            return "the structure satisfies exists P. N"
        if self.verdict is ChcVerdict.UNSATISFIABLE:
            return "the structure does not satisfy exists P. N"
        return "inconclusive"


def _render_sexpr(item) -> str:
    if isinstance(item, list):
        return "(" + " ".join(_render_sexpr(i) for i in item) + ")"
    return item


def interpret_external_model(text: str, system: Optional[ChcSystem]) -> ExternalAnswer:
    """Verdict of an external fixpoint engine run on the exported system"""
    if system is None:
        return ExternalAnswer(ChcVerdict.SATISFIABLE)
    stripped = text.strip()
    if not stripped:
        raise ParseError("empty solver answer")
    first, _, rest = stripped.partition("\n")
    token = first.strip()
    verdicts = {"sat": ChcVerdict.SATISFIABLE, "unsat": ChcVerdict.UNSATISFIABLE, "unknown": ChcVerdict.INCONCLUSIVE}
    if token not in verdicts:
        raise ParseError(f"unexpected solver answer {token!r}", 1, 1)
    model: List[str] = []
    for item in parse_sexprs(rest):
        if item == []:
            continue
        definitions = item if isinstance(item, list) and item and isinstance(item[0], list) else [item]
        for definition in definitions:
            if isinstance(definition, list) and definition and definition[0] == "model":
                definitions.extend(definition[1:])
                continue
            if not (isinstance(definition, list) and len(definition) == 5 and definition[0] == "define-fun"):
                raise ParseError(f"unexpected model entry {_render_sexpr(definition)}")
            _, name, params, _, body = definition
            args = ", ".join(p[0] for p in params)
            model.append(f"{name}({args}) = {_render_sexpr(body)}" if args else f"{name} = {_render_sexpr(body)}")
    return ExternalAnswer(verdicts[token], model)


# ---------------------------------------------------------------- acceleration


@dataclass(frozen=True)
class AccelerationPattern:
    position: int
    offset: Fraction
    init: Tuple[ConstrainedClause, ...]
    step: Optional[ConstrainedClause]
    negative: Tuple[ConstrainedClause, ...]


@dataclass
class Acceleration:
    clauses: List[ConstrainedClause]
    criterion: Formula
    pattern: AccelerationPattern


def _step_offset(clause: ConstrainedClause) -> Tuple[int, Fraction]:
    negative = next(l for l in clause.literals if not l.positive)
    positive = next(l for l in clause.literals if l.positive)
    differing = [i for i, (a, b) in enumerate(zip(negative.atom.args, positive.atom.args)) if a != b]
    if len(differing) != 1:
        raise UnsupportedInput(f"step clause changes {len(differing)} arguments: {clause}")
    i = differing[0]
    y, x = negative.atom.args[i], positive.atom.args[i]
    parts = fm.conjuncts(clause.constraint)
    if len(parts) != 1 or fm.to_literal(parts[0]) is None or not la.is_arithmetic(fm.to_literal(parts[0]).atom):
        raise UnsupportedInput(f"step constraint is not a single translation: {clause.constraint}")
    atom = la.from_literal(fm.to_literal(parts[0]))
    if atom.rel != "=" or set(atom.expr.coefficients) != {x, y} or \
            atom.expr.coefficient(x) != -atom.expr.coefficient(y):
        raise UnsupportedInput(f"step constraint is not of the form y = x + c: {clause.constraint}")
    # scale to y - x - c = 0
    scaled = atom.expr.scale(1 / atom.expr.coefficient(y))
    return i, -scaled.const


def match_pattern(clauses: Sequence[ConstrainedClause], predicate: str) -> AccelerationPattern:
    init, steps, negative = [], [], []
    for clause in clauses:
        signs = sorted(l.positive for l in clause.literals)
        if any(l.atom.name != predicate for l in clause.literals):
            raise UnsupportedInput(f"clause mentions another predicate in its clause part: {clause}")
        if signs == [True]:
            init.append(clause)
        elif signs == [False]:
            negative.append(clause)
        elif signs == [False, True]:
            steps.append(clause)
        else:
            raise UnsupportedInput(f"clause does not fit the translation pattern: {clause}")
    if len(steps) != 1:
        raise UnsupportedInput(f"expected exactly one step clause, found {len(steps)}")
    position, offset = _step_offset(steps[0])
    return AccelerationPattern(position, offset, tuple(init), steps[0], tuple(negative))


def _replace_arg(atom: Pred, position: int, term: Term) -> Pred:
    args = list(atom.args)
    args[position] = term
    return Pred(atom.name, tuple(args))


def _fresh(taken: set, base: str) -> Var:
    name, counter = base, 0
    while name in taken:
        counter += 1
        name = f"{base}{counter}"
    taken.add(name)
    return Var(name, NUM)


def _eliminate_helper(constraint: Formula, var: Var) -> Formula:
    try:
        return la.qe(var, constraint)
    except UnsupportedInput:
        return constraint


def accelerate_unit(clauses: Sequence[ConstrainedClause], predicate: str) -> Acceleration:
    """Replace the iterated-translation family by clauses with an iteration counter ``k``"""
    pattern = match_pattern(clauses, predicate)
    i, c = pattern.position, pattern.offset
    if c == 0:
        kept = [cl for cl in clauses if cl is not pattern.step]
        return Acceleration(kept, _criterion([]), pattern)

    def chain(target: Term, source: Term, k: Var) -> Formula:
        return fm.conj(fm.AtomF(Eq(target, plus(source, times(c, k))))
                       if c != 1 else fm.AtomF(Eq(target, plus(source, k))),
                       fm.AtomF(Cmp(">=", k, Num(0))))

    result: List[ConstrainedClause] = []
    for clause in pattern.init:
        literal = clause.literals[0]
        taken = {v.name for v in clause.variables()}
        w, k = _fresh(taken, "w"), _fresh(taken, "k")
        x = literal.atom.args[i]
        constraint = fm.conj(fm.substitute(clause.constraint, {x: w}), chain(w, x, k))
        result.append(ConstrainedClause(_eliminate_helper(constraint, w), clause.literals))

    step = pattern.step
    negative_lit = next(l for l in step.literals if not l.positive)
    positive_lit = next(l for l in step.literals if l.positive)
    taken = {v.name for v in step.variables()}
    k = _fresh(taken, "k")
    result.append(ConstrainedClause(chain(negative_lit.atom.args[i], positive_lit.atom.args[i], k),
                                    step.literals))

    for clause in pattern.negative:
        literal = clause.literals[0]
        taken = {v.name for v in clause.variables()}
        w, k = _fresh(taken, "w"), _fresh(taken, "k")
        x = literal.atom.args[i]
        constraint = fm.conj(fm.substitute(clause.constraint, {x: w}), chain(x, w, k))
        result.append(ConstrainedClause(constraint, clause.literals))

    bottoms: List[Formula] = []
    for init in pattern.init:
        for negative in pattern.negative:
            bottom = _bottom_clause(init, negative, i, chain)
            if bottom is not None:
                result.append(bottom)
                bottoms.append(bottom.constraint)
    return Acceleration(result, _criterion(bottoms), pattern)


def _bottom_clause(init: ConstrainedClause, negative: ConstrainedClause, i: int, chain) -> Optional[ConstrainedClause]:
    negative = rename_apart(init, negative)
    taken = {v.name for v in init.variables()} | {v.name for v in negative.variables()}
    w, u, k = _fresh(taken, "w"), _fresh(taken, "u"), _fresh(taken, "k")
    pos_atom, neg_atom = init.literals[0].atom, negative.literals[0].atom
    pivot = _fresh(taken, "t")
    sigma = mgu(_replace_arg(pos_atom, i, pivot), _replace_arg(neg_atom, i, pivot))
    if sigma is None:
        return None
    first = fm.substitute(init.constraint, {pos_atom.args[i]: w})
    second = fm.substitute(negative.constraint, {neg_atom.args[i]: u})
    constraint = fm.substitute(fm.conj(first, second, chain(w, u, k)), sigma)
    return ConstrainedClause(_eliminate_helper(constraint, w), ())


def _criterion(bottoms: Sequence[Formula]) -> Formula:
    """Universal closure of the negated empty-clause constraints"""
    return fm.conj(*(fm.forall(fm.free_variables(b), fm.neg(b)) for b in bottoms))
