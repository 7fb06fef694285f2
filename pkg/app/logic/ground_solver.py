"""Satisfiability of ground clause sets over points, rationals and free predicates.

Uninterpreted applications are reduced to opaque constants by adding the
pairwise congruence clauses up front (Ackermann's reduction). The boolean
skeleton is searched with DPLL; each propositional model is checked against
the theories (union-find on points, Fourier-Motzkin on rationals) and a
theory conflict is learnt as a blocking clause.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx

from app.logic import linarith as la
from app.logic.errors import UnsupportedInput, UsageError
from app.logic.terms import (
    NUM, App, Atom, Clause, Eq, Literal, Num, Pred, Term, clause_str, format_number, is_ground, iter_terms,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroundProblem:
    clauses: Tuple[Clause, ...]
    psort_card: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))


@dataclass
class GroundModel:
    point_classes: Tuple[Tuple[Term, ...], ...] = ()
    values: Dict[Term, Fraction] = field(default_factory=dict)
    predicates: Dict[Pred, bool] = field(default_factory=dict)

    def element(self, term: Term) -> int:
        for index, members in enumerate(self.point_classes):
            if term in members:
                return index
        raise KeyError(f"{term} is not a point term of the model")

    def value(self, term: Term) -> Fraction:
        return la.linearize(term).value(self.values)

    def _key(self, term: Term):
        return ("n", self.value(term)) if term.sort == NUM else ("p", self.element(term))

    def predicate(self, atom: Pred) -> bool:
        if atom in self.predicates:
            return self.predicates[atom]
        wanted = tuple(self._key(a) for a in atom.args)
        for known, truth in self.predicates.items():
            if known.name == atom.name and tuple(self._key(a) for a in known.args) == wanted:
                return truth
        return False

    def holds(self, literal: Literal) -> bool:
        atom = literal.atom
        if la.is_arithmetic(atom):
            truth = la.from_literal(Literal(atom)).holds(self.values)
        elif isinstance(atom, Eq):
            truth = self.element(atom.lhs) == self.element(atom.rhs)
        else:
            truth = self.predicate(atom)
        return truth == literal.positive

    def satisfies(self, clause: Sequence[Literal]) -> bool:
        return any(self.holds(l) for l in clause)

    def lines(self) -> List[str]:
        lines = []
        for index, members in enumerate(self.point_classes, start=1):
            lines.append(f"class {index}: {', '.join(str(m) for m in members)}")
        for term in sorted(self.values, key=str):
            if isinstance(term, Num):
                continue
            lines.append(f"{term} = {format_number(self.values[term])}")
        for atom in sorted(self.predicates, key=str):
            lines.append(f"{atom} = {'true' if self.predicates[atom] else 'false'}")
        return lines

    def __str__(self) -> str:
        return "\n".join(self.lines())


@dataclass(frozen=True)
class GroundResult:
    is_sat: bool
    model: Optional[GroundModel] = None


# ---------------------------------------------------------------- encoding


@dataclass(frozen=True)
class _AtomInfo:
    kind: str
    atom: Union[la.LinAtom, Eq, Pred]

    def literal(self, positive: bool) -> Literal:
        if self.kind == "arith":
            literal = self.atom.to_literal()
            return literal if positive else literal.negate()
        return Literal(self.atom, positive)


def _term_key(term: Term) -> Tuple[str, str]:
    return (str(term), type(term).__name__)


class _Encoder:
    def __init__(self):
        self.index: Dict[Hashable, int] = {}
        self.info: List[_AtomInfo] = [None]

    def _var(self, key: Hashable, info: _AtomInfo) -> int:
        if key not in self.index:
            self.index[key] = len(self.info)
            self.info.append(info)
        return self.index[key]

    def literal(self, literal: Literal) -> Union[int, bool]:
        atom = literal.atom
        if la.is_arithmetic(atom):
            linear = la.from_literal(literal)
            truth = linear.truth()
            if truth is not None:
                return truth
            positive = linear.rel in ("<=", "=")
            base = linear if positive else linear.negate().normalized()
            var = self._var(("arith", base), _AtomInfo("arith", base))
            return var if positive else -var
        if isinstance(atom, Eq):
            lhs, rhs = sorted((atom.lhs, atom.rhs), key=_term_key)
            if lhs == rhs:
                return literal.positive
            canonical = Eq(lhs, rhs)
            var = self._var(("eq", canonical), _AtomInfo("eq", canonical))
            return var if literal.positive else -var
        var = self._var(("pred", atom), _AtomInfo("pred", atom))
        return var if literal.positive else -var

    def clause(self, clause: Sequence[Literal]) -> Optional[List[int]]:
        """Signed variables of the clause, ``None`` when it is trivially true"""
        encoded: List[int] = []
        for literal in clause:
            value = self.literal(literal)
            if value is True:
                return None
            if value is False:
                continue
            if -value in encoded:
                return None
            if value not in encoded:
                encoded.append(value)
        return encoded


def congruence_clauses(clauses: Iterable[Clause]) -> List[Clause]:
    """Ackermann congruence clauses for every pair of same-symbol applications"""
    applications: Dict[Tuple[str, int], List[App]] = {}
    predicates: Dict[Tuple[str, int], List[Pred]] = {}
    for clause in clauses:
        for literal in clause:
            if isinstance(literal.atom, Pred) and literal.atom.args:
                group = predicates.setdefault((literal.atom.name, len(literal.atom.args)), [])
                if literal.atom not in group:
                    group.append(literal.atom)
            for term in iter_terms(literal):
                if isinstance(term, App) and not term.is_arithmetic and term.args:
                    group = applications.setdefault((term.fn, len(term.args)), [])
                    if term not in group:
                        group.append(term)
    extra: List[Clause] = []
    for group in applications.values():
        for s, t in combinations(group, 2):
            premises = _argument_disequalities(s.args, t.args)
            extra.append(premises + (Literal(Eq(s, t)),))
    for group in predicates.values():
        for s, t in combinations(group, 2):
            premises = _argument_disequalities(s.args, t.args)
            extra.append(premises + (Literal(s, False), Literal(t)))
            extra.append(premises + (Literal(t, False), Literal(s)))
    return extra


def _argument_disequalities(left: Sequence[Term], right: Sequence[Term]) -> Tuple[Literal, ...]:
    return tuple(Literal(Eq(a, b), False) for a, b in zip(left, right) if a != b)


# ---------------------------------------------------------------- solver


class GroundSolver:
    """DPLL over the boolean skeleton with eager theory checks"""

    def __init__(self, problem: GroundProblem):
        for clause in problem.clauses:
            if not is_ground(clause):
                raise UnsupportedInput(f"ground solver received a non-ground clause: {clause_str(clause)}")
        self.problem = problem
        self.encoder = _Encoder()
        self.clauses: List[Clause] = list(problem.clauses)
        self.congruence = set(congruence_clauses(problem.clauses))
        self.clauses.extend(sorted(self.congruence, key=clause_str))
        self.encoded: List[List[int]] = []
        self.trivially_unsat = False
        for clause in self.clauses:
            self._encode(clause)
        self.projection = set(range(1, len(self.encoder.info)))
        self.learned: List[List[int]] = []
        self.assignment: Optional[Dict[int, bool]] = None
        self.model: Optional[GroundModel] = None
        self.checked = False

    def _encode(self, clause: Sequence[Literal]) -> None:
        encoded = self.encoder.clause(clause)
        if encoded is None:
            return
        if not encoded:
            self.trivially_unsat = True
        self.encoded.append(encoded)

    def add_clause(self, clause: Sequence[Literal]) -> None:
        clause = tuple(clause)
        self.clauses.append(clause)
        self._encode(clause)
        for extra in congruence_clauses(self.clauses):
            if extra not in self.congruence:
                self.congruence.add(extra)
                self.clauses.append(extra)
                self._encode(extra)
        self.checked = False

    def check(self) -> GroundResult:
        self.checked = True
        self.assignment = None
        self.model = None
        if self.trivially_unsat:
            return GroundResult(False)
        while True:
            assignment = _dpll(self.encoded + self.learned)
            if assignment is None:
                return GroundResult(False)
            conflict, model = self._theory_check(assignment)
            if conflict is None:
                self.assignment = assignment
                self.model = model
                return GroundResult(True, model)
            logger.debug("theory conflict over %d literals", len(conflict))
            if not conflict:
                return GroundResult(False)
            self.learned.append([-l for l in conflict])

    def extract_model(self) -> GroundModel:
        if not self.checked or self.model is None:
            raise UsageError("no model available: the last check did not return sat")
        return self.model

    def cube(self) -> Tuple[Literal, ...]:
        """Literals of the last satisfying assignment over the problem's own atoms"""
        if self.assignment is None:
            raise UsageError("no satisfying assignment available")
        return tuple(
            self.encoder.info[var].literal(value)
            for var, value in sorted(self.assignment.items())
            if var in self.projection
        )

    # ------------------------------------------------------------ theories

    def _theory_check(self, assignment: Dict[int, bool]):
        point_terms: Dict[Term, None] = {}
        numeric_terms: Dict[Term, None] = {}
        for clause in self.clauses:
            for literal in clause:
                for term in _value_terms(literal.atom):
                    if term.sort == NUM:
                        numeric_terms.setdefault(term, None)
                    else:
                        point_terms.setdefault(term, None)

        equalities: List[int] = []
        disequalities: List[int] = []
        arithmetic: List[int] = []
        for var, value in sorted(assignment.items()):
            info = self.encoder.info[var]
            signed = var if value else -var
            if info.kind == "eq":
                (equalities if value else disequalities).append(signed)
            elif info.kind == "arith":
                arithmetic.append(signed)

        graph = nx.Graph()
        graph.add_nodes_from(point_terms)
        for signed in equalities:
            atom = self.encoder.info[signed].atom
            graph.add_edge(atom.lhs, atom.rhs, literal=signed)
        for signed in disequalities:
            atom = self.encoder.info[-signed].atom
            if atom.lhs in graph and atom.rhs in graph and nx.has_path(graph, atom.lhs, atom.rhs):
                path = nx.shortest_path(graph, atom.lhs, atom.rhs)
                explanation = [graph.edges[a, b]["literal"] for a, b in zip(path, path[1:])]
                return [signed] + explanation, None

        components = [sorted(c, key=_term_key) for c in nx.connected_components(graph)]
        components.sort(key=lambda c: _term_key(c[0]))
        classes = self._fit_cardinality(components, disequalities)
        if classes is None:
            return equalities + disequalities, None

        atoms = [la.from_literal(self.encoder.info[abs(s)].literal(s > 0)) for s in arithmetic]
        outcome = la.lra_sat(atoms)
        if not outcome.is_sat:
            return [arithmetic[i] for i in outcome.core], None

        values = dict(outcome.model)
        predicates: Dict[Pred, bool] = {}
        for var, value in sorted(assignment.items()):
            info = self.encoder.info[var]
            if info.kind == "pred":
                predicates[info.atom] = value
        model = GroundModel(tuple(tuple(c) for c in classes), {}, predicates)
        for term in numeric_terms:
            if isinstance(term, Num):
                continue
            if term not in values:
                values[term] = self._congruent_value(term, values, model)
            model.values[term] = values[term]
        return None, model

    def _fit_cardinality(self, components: List[List[Term]], disequalities: List[int]):
        card = self.problem.psort_card
        if card is None or len(components) <= card:
            return components
        owner = {term: i for i, component in enumerate(components) for term in component}
        apart = set()
        for signed in disequalities:
            atom = self.encoder.info[-signed].atom
            i, j = owner[atom.lhs], owner[atom.rhs]
            apart.add((min(i, j), max(i, j)))
        colors: List[int] = []

        def assign(position: int) -> bool:
            if position == len(components):
                return True
            for color in range(card):
                if all(colors[other] != color for other in range(position) if (other, position) in apart):
                    colors.append(color)
                    if assign(position + 1):
                        return True
                    colors.pop()
            return False

        if not assign(0):
            return None
        merged: Dict[int, List[Term]] = {}
        for component, color in zip(components, colors):
            merged.setdefault(color, []).extend(component)
        result = [sorted(terms, key=_term_key) for _, terms in sorted(merged.items())]
        result.sort(key=lambda c: _term_key(c[0]))
        return result

    @staticmethod
    def _congruent_value(term: Term, values: Dict[Term, Fraction], model: GroundModel) -> Fraction:
        if isinstance(term, App):
            wanted = tuple(_safe_key(model, a, values) for a in term.args)
            for other, value in values.items():
                if isinstance(other, App) and other.fn == term.fn and len(other.args) == len(term.args):
                    if tuple(_safe_key(model, a, values) for a in other.args) == wanted:
                        return value
        return Fraction(0)


def _safe_key(model: GroundModel, term: Term, values: Dict[Term, Fraction]):
    if term.sort == NUM:
        return ("n", la.linearize(term).value(values))
    try:
        return ("p", model.element(term))
    except KeyError:
        return ("t", str(term))


def _value_terms(atom: Atom) -> List[Term]:
    """Terms that receive a value in a model: points and opaque numeric terms"""
    found: List[Term] = []
    for term in iter_terms(atom):
        if isinstance(term, App) and term.is_arithmetic:
            continue
        if isinstance(term, Num):
            continue
        found.append(term)
    return found


# ---------------------------------------------------------------- DPLL


def _dpll(clauses: List[List[int]]) -> Optional[Dict[int, bool]]:
    assignment: Dict[int, bool] = {}
    trail: List[Tuple[int, bool]] = []
    while True:
        if _propagate(clauses, assignment, trail):
            while trail:
                var, decided = trail.pop()
                value = assignment.pop(var)
                if decided:
                    assignment[var] = not value
                    trail.append((var, False))
                    break
            else:
                return None
            continue
        choice = _decide(clauses, assignment)
        if choice is None:
            return assignment
        assignment[abs(choice)] = choice > 0
        trail.append((abs(choice), True))


def _propagate(clauses: List[List[int]], assignment: Dict[int, bool], trail: List[Tuple[int, bool]]) -> bool:
    """Unit propagation; returns True on conflict"""
    changed = True
    while changed:
        changed = False
        for clause in clauses:
            open_literal = None
            open_count = 0
            satisfied = False
            for literal in clause:
                value = assignment.get(abs(literal))
                if value is None:
                    open_count += 1
                    open_literal = literal
                elif value == (literal > 0):
                    satisfied = True
                    break
            if satisfied:
                continue
            if open_count == 0:
                return True
            if open_count == 1:
                assignment[abs(open_literal)] = open_literal > 0
                trail.append((abs(open_literal), False))
                changed = True
    return False


def _decide(clauses: List[List[int]], assignment: Dict[int, bool]) -> Optional[int]:
    """Literal occurring in most unsatisfied clauses, first occurrence wins ties"""
    counts: Dict[int, int] = {}
    for clause in clauses:
        if any(assignment.get(abs(l)) == (l > 0) for l in clause):
            continue
        for literal in clause:
            if abs(literal) not in assignment:
                counts[literal] = counts.get(literal, 0) + 1
    if not counts:
        return None
    best = max(counts.values())
    return next(l for l, c in counts.items() if c == best)


def check_ground(problem: GroundProblem) -> GroundResult:
    return GroundSolver(problem).check()
