"""Problem files in the section syntax of the tool listings.

Sections come in a fixed order::

    Base_functions      := {(+,2), (-,2), (*,2)}
    Extension_functions := {(r1, 1, 1), (d, 2, 1)}
    Parameters          := {r1, r2}
    Relations           := {(<=, 2), (<, 2), (E, 2)}
    Theory              := Tm;
    Clauses             := (FORALL x,y). d(x,y) = _0 --> x = y; ...
    Query               := NOT(u = v); d(u,v) <= r1(u); ...
    Classes             := A := (MinDG(r) & MaxDG(1))-; ...

Identifiers that are not bound by ``FORALL`` are constants. Sorts of
variables and constants are inferred from their use: arguments of
extension functions and predicates are points, operands of arithmetic and
comparisons are numbers.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from lark import Lark, Token, Transformer, UnexpectedInput, v_args

from app.logic import formula as fm
from app.logic import graphlib
from app.logic.errors import NonlinearTermError, ParseError, SoqeError
from app.logic.formula import FALSE, TRUE, Formula
from app.logic.hres import ConstrainedClause, to_constrained
from app.logic.locality import ExtTerm, TheoryExtension
from app.logic.terms import (
    COMPARISONS, NUM, POINT, App, Clause, Cmp, Const, Eq, Num, Pred, Sort, Term, Var, is_ground,
)

logger = logging.getLogger(__name__)

SECTION_ORDER = ("Base_functions", "Extension_functions", "Parameters", "Relations",
                 "Theory", "Clauses", "Query", "Classes")
ARITHMETIC = ("+", "-", "*")

PROBLEM_GRAMMAR = r"""
    start: section*

    section: "Base_functions" ":=" signature_set ";"?      -> base_functions
           | "Extension_functions" ":=" signature_set ";"? -> extension_functions
           | "Parameters" ":=" name_set ";"?               -> parameters
           | "Relations" ":=" signature_set ";"?           -> relations
           | "Theory" ":=" NAME ";"?                       -> theory
           | "Clauses" ":=" statement*                     -> clauses
           | "Query" ":=" statement*                       -> query
           | "Classes" ":=" class_def*                     -> classes

    signature_set: "{" [signature ("," signature)*] "}"
    signature: "(" sig_symbol ("," NUMBER)+ ")"
    !sig_symbol: NAME | "+" | "-" | "*" | "<=" | "<" | ">=" | ">" | "="
    name_set: "{" [NAME ("," NAME)*] "}"

    statement: [quantifier] body ";"
    quantifier: "(" "FORALL" NAME ("," NAME)* ")" "."
    body: premises "-->" conclusions  -> implication
        | formula "||" clause_part    -> constrained
        | formula                     -> plain
    premises: [formula ("," formula)*]
    conclusions: [formula ("," formula)*]
    clause_part: "_|_"                -> bottom
               | formula ("," formula)* -> literal_list

    ?formula: conjunction ("|" conjunction)*  -> infix_or
    ?conjunction: literal_f ("&" literal_f)*  -> infix_and
    ?literal_f: "NOT" "(" formula ")"                  -> negation
              | "AND" "(" formula ("," formula)* ")"   -> and_form
              | "OR" "(" formula ("," formula)* ")"    -> or_form
              | "TRUE"                                 -> true_form
              | "FALSE"                                -> false_form
              | term rel term                          -> comparison
              | term                                   -> bare_atom
    !rel: "<=" | "<" | ">=" | ">" | "=" | "!="

    ?term: sum
    ?sum: product
        | sum "+" product -> add
        | sum "-" product -> sub
    ?product: unary
            | product "*" unary -> mul
    ?unary: "-" unary -> negate
          | primary
    ?primary: NUMERAL                      -> numeral
            | NUMBER                       -> numeral
            | NAME "(" term ("," term)* ")" -> application
            | NAME                         -> name
            | "(" term ")"

    class_def: NAME ":=" class_expr ";"
    ?class_expr: class_atom
               | class_atom ("&" class_atom)+ -> class_meet
    ?class_atom: NAME                                   -> class_call
               | NAME "(" class_arg ("," class_arg)* ")" -> class_call
               | "(" class_expr ")" closure?            -> class_group
    !closure: "+" | "-"
    class_arg: NAME | NUMBER | NUMERAL

    NAME: /[A-Za-z][A-Za-z0-9_']*/
    NUMERAL: /_-?\d+(\.\d+)?(\/\d+)?/
    NUMBER: /\d+(\.\d+)?(\/\d+)?/
    COMMENT: /#[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""


# ---------------------------------------------------------------- raw syntax


@dataclass(frozen=True)
class RawName:
    name: str
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RawApp:
    fn: str
    args: Tuple["RawTerm", ...]
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RawNumber:
    value: Fraction


RawTerm = Union[RawName, RawApp, RawNumber]


@dataclass(frozen=True)
class RawAtom:
    op: Optional[str]
    lhs: RawTerm
    rhs: Optional[RawTerm] = None
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class RawConnective:
    kind: str
    args: Tuple = ()


class StatementKind(str, Enum):
    FORMULA = "formula"
    IMPLICATION = "implication"
    CONSTRAINED = "constrained"


@dataclass(frozen=True)
class RawStatement:
    kind: StatementKind
    variables: Tuple[str, ...]
    left: Tuple = ()
    right: Tuple = ()
    line: int = 0
    column: int = 0


@dataclass(frozen=True)
class Declaration:
    name: str
    numbers: Tuple[int, ...]

    @property
    def arity(self) -> int:
        return self.numbers[0]


@dataclass(frozen=True)
class ClassCall:
    name: str
    args: Tuple[str, ...] = ()
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ClassMeet:
    parts: Tuple["ClassSyntax", ...]


@dataclass(frozen=True)
class ClassGroup:
    inner: "ClassSyntax"
    closure: Optional[str] = None


ClassSyntax = Union[ClassCall, ClassMeet, ClassGroup]


def _fraction(text: str) -> Fraction:
    return Fraction(text.lstrip("_"))


def _position(meta) -> Tuple[int, int]:
    if getattr(meta, "empty", True):
        return 0, 0
    return meta.line, meta.column


class _RawBuilder(Transformer):
    """Parse tree to raw syntax; sorts and symbols are resolved afterwards"""

    def start(self, sections):
        return list(sections)

    def base_functions(self, items):
        return ("Base_functions", items[0])

    def extension_functions(self, items):
        return ("Extension_functions", items[0])

    def parameters(self, items):
        return ("Parameters", items[0])

    def relations(self, items):
        return ("Relations", items[0])

    def theory(self, items):
        return ("Theory", items[0])

    def clauses(self, items):
        return ("Clauses", tuple(items))

    def query(self, items):
        return ("Query", tuple(items))

    def classes(self, items):
        return ("Classes", tuple(items))

    def signature_set(self, items):
        return tuple(i for i in items if i is not None)

    def signature(self, items):
        symbol, *numbers = items
        return Declaration(symbol, tuple(int(n) for n in numbers))

    def sig_symbol(self, items):
        return str(items[0])

    def name_set(self, items):
        return tuple(str(i) for i in items if i is not None)

    @v_args(meta=True)
    def statement(self, meta, items):
        quantifier, (kind, left, right) = items
        line, column = _position(meta)
        return RawStatement(kind, tuple(quantifier or ()), left, right, line, column)

    def quantifier(self, items):
        return tuple(str(i) for i in items)

    def implication(self, items):
        return StatementKind.IMPLICATION, items[0], items[1]

    def constrained(self, items):
        return StatementKind.CONSTRAINED, (items[0],), items[1]

    def plain(self, items):
        return StatementKind.FORMULA, (items[0],), ()

    def premises(self, items):
        return tuple(i for i in items if i is not None)

    conclusions = premises

    def bottom(self, _):
        return ()

    def literal_list(self, items):
        return tuple(items)

    def infix_or(self, items):
        return items[0] if len(items) == 1 else RawConnective("or", tuple(items))

    def infix_and(self, items):
        return items[0] if len(items) == 1 else RawConnective("and", tuple(items))

    def negation(self, items):
        return RawConnective("not", (items[0],))

    def and_form(self, items):
        return RawConnective("and", tuple(items))

    def or_form(self, items):
        return RawConnective("or", tuple(items))

    def true_form(self, _):
        return RawConnective("true")

    def false_form(self, _):
        return RawConnective("false")

    @v_args(meta=True)
    def comparison(self, meta, items):
        return RawAtom(items[1], items[0], items[2], *_position(meta))

    @v_args(meta=True)
    def bare_atom(self, meta, items):
        return RawAtom(None, items[0], None, *_position(meta))

    def rel(self, items):
        return str(items[0])

    @v_args(meta=True)
    def add(self, meta, items):
        return RawApp("+", tuple(items), *_position(meta))

    @v_args(meta=True)
    def sub(self, meta, items):
        return RawApp("-", tuple(items), *_position(meta))

    @v_args(meta=True)
    def mul(self, meta, items):
        return RawApp("*", tuple(items), *_position(meta))

    @v_args(meta=True)
    def negate(self, meta, items):
        return RawApp("-", (items[0],), *_position(meta))

    def numeral(self, items):
        return RawNumber(_fraction(str(items[0])))

    def application(self, items):
        head: Token = items[0]
        return RawApp(str(head), tuple(items[1:]), head.line, head.column)

    def name(self, items):
        token: Token = items[0]
        return RawName(str(token), token.line, token.column)

    def class_def(self, items):
        return str(items[0]), items[1], items[0].line, items[0].column

    def class_meet(self, items):
        return ClassMeet(tuple(items))

    def class_call(self, items):
        head: Token = items[0]
        return ClassCall(str(head), tuple(items[1:]), head.line, head.column)

    def class_group(self, items):
        return ClassGroup(items[0], items[1] if len(items) > 1 else None)

    def closure(self, items):
        return str(items[0])

    def class_arg(self, items):
        text = str(items[0])
        return text[1:] if text.startswith("_") else text


_problem_parser = Lark(PROBLEM_GRAMMAR, parser="lalr", propagate_positions=True, maybe_placeholders=True)
_builder = _RawBuilder()


# ---------------------------------------------------------------- resolved syntax


@dataclass(frozen=True)
class Statement:
    """A resolved clause statement; ``left``/``right`` keep the written shape for printing"""

    kind: StatementKind
    variables: Tuple[Var, ...]
    left: Tuple[Formula, ...]
    right: Tuple[Formula, ...] = ()
    line: int = field(default=0, compare=False)

    def formula(self) -> Formula:
        if self.kind is StatementKind.IMPLICATION:
            return fm.implies(fm.conj(*self.left), fm.disj(*self.right))
        if self.kind is StatementKind.CONSTRAINED:
            return fm.implies(self.left[0], fm.disj(*self.right))
        return self.left[0]

    def clauses(self, max_dnf: Optional[int] = None) -> List[Clause]:
        return fm.cnf(self.formula(), max_dnf)

    def constrained(self) -> ConstrainedClause:
        literals = tuple(fm.to_literal(f) for f in self.right)
        return ConstrainedClause(self.left[0], literals)


@dataclass(frozen=True)
class ClassDefinition:
    name: str
    syntax: ClassSyntax
    expression: graphlib.ClassExpression


@dataclass
class ProblemFile:
    base_functions: Tuple[Declaration, ...] = ()
    extension_functions: Tuple[Declaration, ...] = ()
    parameters: Tuple[str, ...] = ()
    relations: Tuple[Declaration, ...] = ()
    theory: Optional[str] = None
    clauses: Tuple[Statement, ...] = ()
    query: Tuple[Statement, ...] = ()
    classes: Tuple[ClassDefinition, ...] = ()
    extra_terms: Tuple[ExtTerm, ...] = ()
    encoded_predicates: FrozenSet[str] = frozenset()
    sections: Tuple[str, ...] = ()

    @property
    def predicates(self) -> Dict[str, int]:
        declared = {d.name: d.arity for d in self.relations if d.name not in COMPARISONS and d.name != "="}
        for declaration in self.extension_functions:
            if declaration.name in self.encoded_predicates:
                declared[declaration.name] = declaration.arity
        return declared

    @property
    def extension_symbols(self) -> FrozenSet[str]:
        return frozenset(d.name for d in self.extension_functions) | frozenset(self.predicates)

    def clause_set(self, max_dnf: Optional[int] = None) -> List[Clause]:
        """Ordinary clauses of every statement written without ``||``"""
        result: List[Clause] = []
        for statement in self.clauses:
            if statement.kind is not StatementKind.CONSTRAINED:
                result.extend(statement.clauses(max_dnf))
        return result

    def goal(self, max_dnf: Optional[int] = None) -> List[Clause]:
        result: List[Clause] = []
        for statement in self.query:
            result.extend(statement.clauses(max_dnf))
        return result

    def clause_predicates(self) -> FrozenSet[str]:
        """Predicates written in the clause part of ``||`` statements"""
        names = set()
        for statement in self.clauses:
            if statement.kind is StatementKind.CONSTRAINED:
                names.update(fm.to_literal(f).atom.name for f in statement.right)
        return frozenset(names)

    def split_clauses(self, predicates: Optional[Sequence[str]] = None, max_dnf: Optional[int] = None
                      ) -> Tuple[List[ConstrainedClause], List[Clause]]:
        """Constrained clauses over ``predicates`` and the remaining background clauses.

        Without explicit predicates, those of the ``||`` clause parts are used,
        or every declared predicate when there are none.
        """
        names = set(predicates) if predicates else set(self.clause_predicates() or self.predicates)
        constrained = [s.constrained() for s in self.clauses if s.kind is StatementKind.CONSTRAINED]
        background: List[Clause] = []
        for clause in self.clause_set(max_dnf):
            if any(isinstance(l.atom, Pred) and l.atom.name in names for l in clause):
                constrained.append(to_constrained(clause, names))
            else:
                background.append(clause)
        return constrained, background

    def extension(self, theory: Optional[str] = None, psort_card: Optional[int] = None,
                  parameters: Sequence[str] = (), max_dnf: Optional[int] = None) -> TheoryExtension:
        return TheoryExtension.preset(theory or self.theory or "Tu", self.clause_set(max_dnf),
                                      self.extension_symbols, tuple(self.parameters) + tuple(parameters),
                                      psort_card)

    def class_named(self, name: str) -> graphlib.ClassExpression:
        for definition in self.classes:
            if definition.name == name:
                return definition.expression
        known = ", ".join(d.name for d in self.classes) or "none"
        raise ParseError(f"class {name!r} is not defined; defined classes: {known}")


# ---------------------------------------------------------------- resolution


def _fail(message: str, node=None) -> ParseError:
    return ParseError(message, getattr(node, "line", None) or None, getattr(node, "column", None) or None)


class _Resolver:
    """Sort inference and symbol checking over the raw statements of one file"""

    def __init__(self, extension: Dict[str, int], relations: Dict[str, int], parameters: Sequence[str]):
        self.extension = extension
        self.relations = relations
        self.parameters = set(parameters)
        self.sorts: Dict[Tuple, Sort] = {}
        self.encoded: FrozenSet[str] = frozenset()
        self.extra_terms: Dict[ExtTerm, None] = {}

    # -------------------------------------------------------- encoded predicates

    def find_encoded(self, statements: Sequence[RawStatement]) -> FrozenSet[str]:
        """Extension functions only ever compared with 0 or 1 stand for predicates"""
        as_predicate: set = set()
        as_number: set = set()

        def scan_term(term):
            if isinstance(term, RawApp):
                if term.fn in self.extension:
                    as_number.add(term.fn)
                for arg in term.args:
                    scan_term(arg)

        def scan_args(term):
            for arg in term.args:
                scan_term(arg)

        def scan(node):
            if isinstance(node, RawConnective):
                for arg in node.args:
                    scan(arg)
                return
            if node.op in ("=", "!=") and isinstance(node.lhs, RawApp) and node.lhs == node.rhs:
                scan_args(node.lhs)
                return
            if node.op in ("=", "!="):
                for side, other in ((node.lhs, node.rhs), (node.rhs, node.lhs)):
                    if _zero_one_test(side, other, self.extension):
                        as_predicate.add(side.fn)
                        scan_args(side)
                        return
            scan_term(node.lhs)
            if node.rhs is not None:
                scan_term(node.rhs)

        for statement in statements:
            for node in statement.left + statement.right:
                scan(node)
        self.encoded = frozenset(as_predicate - as_number)
        return self.encoded

    def _encoded_side(self, side, other) -> bool:
        if not isinstance(side, RawApp) or side.fn not in self.encoded:
            return False
        return other == side or _zero_one_test(side, other, self.encoded)

    # -------------------------------------------------------- sort inference

    def _key(self, name: str, bound: FrozenSet[str], scope: int) -> Tuple:
        return ("var", scope, name) if name in bound else ("const", name)

    def _unify(self, key: Tuple, sort: Sort, node) -> bool:
        known = self.sorts.get(key)
        if known is None:
            self.sorts[key] = sort
            return True
        if known != sort:
            raise _fail(f"{key[-1]} is used both as {known} and as {sort}", node)
        return False

    def _visit_term(self, term: RawTerm, expected: Optional[Sort], bound, scope) -> Optional[Sort]:
        if isinstance(term, RawNumber):
            return NUM
        if isinstance(term, RawName):
            key = self._key(term.name, bound, scope)
            if expected is not None:
                self._unify(key, expected, term)
            return self.sorts.get(key)
        if term.fn in ARITHMETIC:
            for arg in term.args:
                self._visit_term(arg, NUM, bound, scope)
            return NUM
        if term.fn in self.relations or term.fn in self.encoded:
            raise _fail(f"predicate {term.fn} used as a term", term)
        if term.fn not in self.extension:
            raise _fail(f"undeclared function symbol {term.fn}", term)
        if len(term.args) != self.extension[term.fn]:
            raise _fail(f"{term.fn} expects {self.extension[term.fn]} arguments, got {len(term.args)}", term)
        for arg in term.args:
            self._visit_term(arg, POINT, bound, scope)
        return NUM

    def _predicate_args(self, term: RawTerm, bound, scope, links: List) -> None:
        if isinstance(term, RawName):
            if self.relations.get(term.name) != 0:
                raise _fail(f"{term.name} is not a declared predicate", term)
            return
        if not isinstance(term, RawApp) or term.fn not in self.relations and term.fn not in self.encoded:
            raise _fail(f"expected a predicate atom, found {_raw_str(term)}", term)
        arity = self.relations.get(term.fn, self.extension.get(term.fn))
        if len(term.args) != arity:
            raise _fail(f"{term.fn} expects {arity} arguments, got {len(term.args)}", term)
        for index, arg in enumerate(term.args):
            links.append((("arg", term.fn, index), arg, bound, scope))

    def _visit(self, node, bound, scope, pending: List, links: List) -> None:
        if isinstance(node, RawConnective):
            for arg in node.args:
                self._visit(arg, bound, scope, pending, links)
            return
        if node.op is None:
            self._predicate_args(node.lhs, bound, scope, links)
        elif node.op in COMPARISONS:
            self._visit_term(node.lhs, NUM, bound, scope)
            self._visit_term(node.rhs, NUM, bound, scope)
        elif self._encoded_side(node.lhs, node.rhs) or self._encoded_side(node.rhs, node.lhs):
            for side in (node.lhs, node.rhs):
                if isinstance(side, RawApp):
                    self._predicate_args(side, bound, scope, links)
        else:
            pending.append((node, bound, scope))

    def infer(self, statements: Sequence[Tuple[RawStatement, int]]) -> None:
        pending: List = []
        links: List = []
        for statement, scope in statements:
            bound = frozenset(statement.variables)
            for node in statement.left + statement.right:
                self._visit(node, bound, scope, pending, links)
        changed = True
        while changed:
            changed = False
            # a predicate argument position has one sort across the file
            for position, arg, bound, scope in links:
                known = self.sorts.get(position)
                found = self._visit_term(arg, None, bound, scope)
                if known is None and found is not None:
                    self.sorts[position] = found
                    changed = True
                elif known is not None and found is None:
                    self._visit_term(arg, known, bound, scope)
                    changed = True
                elif known is not None and known != found:
                    raise _fail(f"argument {position[2] + 1} of {position[1]} is used both as {known} and as {found}",
                                arg)
            for atom, bound, scope in pending:
                left = self._visit_term(atom.lhs, None, bound, scope)
                right = self._visit_term(atom.rhs, None, bound, scope)
                if left is not None and right is None:
                    self._visit_term(atom.rhs, left, bound, scope)
                    changed = True
                elif right is not None and left is None:
                    self._visit_term(atom.lhs, right, bound, scope)
                    changed = True
                elif left is not None and left != right:
                    raise _fail(f"equation between sorts {left} and {right}", atom)

    # -------------------------------------------------------- building

    def _sort(self, name: str, bound, scope) -> Sort:
        return self.sorts.get(self._key(name, bound, scope), POINT)

    def term(self, raw: RawTerm, bound, scope) -> Term:
        if isinstance(raw, RawNumber):
            return Num(raw.value)
        if isinstance(raw, RawName):
            sort = self._sort(raw.name, bound, scope)
            return Var(raw.name, sort) if raw.name in bound else Const(raw.name, sort)
        args = tuple(self.term(a, bound, scope) for a in raw.args)
        if raw.fn == "*":
            left, right = args
            if _numeric_value(right) is not None and _numeric_value(left) is None:
                left, right = right, left
            coefficient = _numeric_value(left)
            if coefficient is None:
                raise _fail(f"nonlinear term {_raw_str(raw)}", raw)
            try:
                return App("*", (Num(coefficient), right))
            except NonlinearTermError as exc:
                raise _fail(str(exc), raw) from exc
        return App(raw.fn, args)

    def atom_formula(self, raw: RawAtom, bound, scope, ground_query: bool) -> Formula:
        if raw.op is None:
            if isinstance(raw.lhs, RawName):
                return fm.AtomF(Pred(raw.lhs.name))
            return fm.AtomF(Pred(raw.lhs.fn, tuple(self.term(a, bound, scope) for a in raw.lhs.args)))
        negated = raw.op == "!="
        lhs, rhs = raw.lhs, raw.rhs
        if self._encoded_side(rhs, lhs) and not isinstance(lhs, RawApp):
            lhs, rhs = rhs, lhs
        if self._encoded_side(lhs, rhs) and lhs.fn in self.encoded:
            atom = Pred(lhs.fn, tuple(self.term(a, bound, scope) for a in lhs.args))
            if isinstance(rhs, RawNumber):
                positive = (rhs.value == 1) != negated
                return fm.AtomF(atom) if positive else fm.Not(fm.AtomF(atom))
            self._remember(atom, ground_query)
            return FALSE if negated else TRUE
        left, right = self.term(lhs, bound, scope), self.term(rhs, bound, scope)
        if raw.op in COMPARISONS:
            return fm.AtomF(Cmp(raw.op, left, right))
        if left == right and isinstance(left, App) and not left.is_arithmetic:
            self._remember(left, ground_query)
            return FALSE if negated else TRUE
        atom = fm.AtomF(Eq(left, right))
        return fm.Not(atom) if negated else atom

    def _remember(self, term: ExtTerm, ground_query: bool) -> None:
        if ground_query and is_ground(term):
            self.extra_terms.setdefault(term, None)

    def formula(self, node, bound, scope, ground_query: bool = False) -> Formula:
        if isinstance(node, RawAtom):
            return self.atom_formula(node, bound, scope, ground_query)
        args = [self.formula(a, bound, scope, ground_query) for a in node.args]
        if node.kind == "not":
            return fm.neg(args[0])
        if node.kind == "and":
            return fm.conj(*args)
        if node.kind == "or":
            return fm.disj(*args)
        return TRUE if node.kind == "true" else FALSE

    def statement(self, raw: RawStatement, scope: int, ground_query: bool = False) -> Statement:
        bound = frozenset(raw.variables)
        if ground_query and raw.variables:
            raise ParseError("query statements must be ground", raw.line or None, raw.column or None)
        left = tuple(self.formula(n, bound, scope, ground_query) for n in raw.left)
        right = tuple(self.formula(n, bound, scope, ground_query) for n in raw.right)
        if raw.kind is StatementKind.CONSTRAINED:
            for formula in right:
                literal = fm.to_literal(formula)
                if literal is None or not isinstance(literal.atom, Pred):
                    raise ParseError("the clause part after || holds predicate literals only",
                                     raw.line or None, raw.column or None)
        variables = tuple(Var(name, self._sort(name, bound, scope)) for name in raw.variables)
        return Statement(raw.kind, variables, left, right, raw.line)


def _zero_one_test(side, other, names) -> bool:
    return isinstance(side, RawApp) and side.fn in names and isinstance(other, RawNumber) and other.value in (0, 1)


def _numeric_value(term: Term) -> Optional[Fraction]:
    if isinstance(term, Num):
        return term.value
    if isinstance(term, App) and term.fn == "-" and len(term.args) == 1:
        inner = _numeric_value(term.args[0])
        return None if inner is None else -inner
    return None


def _raw_str(term) -> str:
    if isinstance(term, RawNumber):
        return str(term.value)
    if isinstance(term, RawName):
        return term.name
    if isinstance(term, RawApp) and term.fn in ARITHMETIC and len(term.args) == 2:
        return f"{_raw_str(term.args[0])} {term.fn} {_raw_str(term.args[1])}"
    return f"{term.fn}({', '.join(_raw_str(a) for a in term.args)})"


def _resolve_class(syntax: ClassSyntax) -> graphlib.ClassExpression:
    if isinstance(syntax, ClassCall):
        try:
            return graphlib.preset(syntax.name, *syntax.args)
        except (SoqeError, TypeError) as exc:
            raise ParseError(str(exc), syntax.line or None, syntax.column or None) from exc
    if isinstance(syntax, ClassMeet):
        parts = [_resolve_class(p) for p in syntax.parts]
        if any(p.transformation.tag is not graphlib.TransformationTag.IDENTITY for p in parts):
            raise ParseError("closures apply to a whole class expression; group it with parentheses")
        spec = parts[0].spec
        for part in parts[1:]:
            spec = graphlib.intersect(spec, part.spec)
        return graphlib.ClassExpression(spec)
    inner = _resolve_class(syntax.inner)
    if syntax.closure is None:
        return inner
    if inner.transformation.tag is not graphlib.TransformationTag.IDENTITY:
        raise ParseError("a class expression takes at most one closure")
    tag = graphlib.TransformationTag.PLUS if syntax.closure == "+" else graphlib.TransformationTag.MINUS
    return graphlib.ClassExpression(inner.spec, graphlib.Transformation(tag))


def _parse_sections(text: str) -> List[Tuple[str, object]]:
    try:
        return _builder.transform(_problem_parser.parse(text))
    except UnexpectedInput as exc:
        raise ParseError(f"unexpected input: {exc.__class__.__name__}",
                         getattr(exc, "line", None), getattr(exc, "column", None)) from exc


def parse_extra_terms(text: str, problem: ProblemFile) -> Tuple[ExtTerm, ...]:
    """Ground extension terms separated by ``;``, read against the problem's declarations"""
    body = " ".join(f"{part.strip()} = {part.strip()};" for part in text.split(";") if part.strip())
    if not body:
        return ()
    (_, raw), = _parse_sections(f"Query := {body}")
    resolver = _Resolver({d.name: d.arity for d in problem.extension_functions},
                         {n: a for n, a in problem.predicates.items() if n not in problem.encoded_predicates},
                         problem.parameters)
    resolver.encoded = problem.encoded_predicates
    resolver.infer([(s, i) for i, s in enumerate(raw)])
    for index, statement in enumerate(raw):
        resolver.statement(statement, index, ground_query=True)
    return tuple(resolver.extra_terms)


def parse_problem(text: str) -> ProblemFile:
    """Parse and resolve a problem file"""
    sections = _parse_sections(text)

    contents: Dict[str, object] = {}
    last = -1
    for name, value in sections:
        index = SECTION_ORDER.index(name)
        if index <= last:
            raise ParseError(f"section {name} is out of order or repeated; expected order: {', '.join(SECTION_ORDER)}")
        last = index
        contents[name] = value

    base = tuple(contents.get("Base_functions", ()))
    for declaration in base:
        if declaration.name not in ARITHMETIC:
            raise ParseError(f"base function {declaration.name} is not supported; only +, - and * are")
    extension = tuple(contents.get("Extension_functions", ()))
    relations = tuple(contents.get("Relations", ()))
    parameters = tuple(contents.get("Parameters", ()))

    resolver = _Resolver({d.name: d.arity for d in extension},
                         {d.name: d.arity for d in relations if d.name not in COMPARISONS and d.name != "="},
                         parameters)
    clause_raw = tuple(contents.get("Clauses", ()))
    query_raw = tuple(contents.get("Query", ()))
    scoped = [(s, i) for i, s in enumerate(clause_raw)] + [(s, len(clause_raw) + i) for i, s in enumerate(query_raw)]
    resolver.find_encoded(clause_raw + query_raw)
    resolver.infer(scoped)
    clauses = tuple(resolver.statement(s, i) for i, s in enumerate(clause_raw))
    query = tuple(resolver.statement(s, len(clause_raw) + i, ground_query=True) for i, s in enumerate(query_raw))

    definitions = []
    for name, syntax, line, column in contents.get("Classes", ()):
        if any(d.name == name for d in definitions):
            raise ParseError(f"class {name} is defined twice", line, column)
        definitions.append(ClassDefinition(name, syntax, _resolve_class(syntax)))

    theory = contents.get("Theory")
    problem = ProblemFile(base, extension, parameters, relations, str(theory) if theory is not None else None,
                          clauses, query, tuple(definitions), tuple(resolver.extra_terms), resolver.encoded,
                          tuple(name for name, _ in sections))
    logger.info("parsed %d clause statements, %d query statements and %d classes",
                len(clauses), len(query), len(definitions))
    return problem


