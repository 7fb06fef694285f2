"""Ordered resolution and factoring on constrained clauses (``constraint || P-literals``).

The clause part of a constrained clause only holds literals of the predicate
being eliminated, applied to variables. Everything else lives in the
constraint. Saturation uses a given-clause loop with semantic redundancy:
a conclusion is dropped when a clause with the same clause part (up to
renaming) has a weaker constraint modulo the background theory.
"""
import heapq
import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union

from app.logic import formula as fm
from app.logic.errors import ResourceExhausted, SoqeError
from app.logic.formula import Formula
from app.logic.ground_solver import GroundProblem, GroundSolver
from app.logic.limits import RunLimits
from app.logic.locality import TheoryExtension, check_sat_ext
from app.logic.ordering import Precedence, is_maximal, strictly_maximal
from app.logic.terms import (
    Clause, Const, Eq, Literal, Pred, Substitution, Term, Var, constants, mgu, variables,
)

logger = logging.getLogger(__name__)

VARIABLE_POOL = ("u", "v", "w", "x", "y", "z")


@dataclass(frozen=True)
class InferenceRecord:
    rule: str
    premises: Tuple[int, ...]
    mgu: Substitution
    conclusion: int
    positions: Tuple[int, ...] = ()

    def line(self, clause: "ConstrainedClause") -> str:
        premises = ",".join(str(p) for p in self.premises)
        return f"{self.conclusion} {self.rule} {premises} {self.mgu} {clause}"


@dataclass(frozen=True)
class ConstrainedClause:
    """``constraint || literals``, universally closed"""

    constraint: Formula
    literals: Tuple[Literal, ...]
    id: int = field(default=0, compare=False)
    provenance: Optional[InferenceRecord] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "literals", tuple(self.literals))

    @property
    def is_empty(self) -> bool:
        return not self.literals

    def variables(self) -> Tuple[Var, ...]:
        seen: Dict[Var, None] = {}
        for var in variables(self.literals):
            seen.setdefault(var, None)
        for var in fm.free_variables(self.constraint):
            seen.setdefault(var, None)
        return tuple(seen)

    def substitute(self, sigma) -> "ConstrainedClause":
        return ConstrainedClause(fm.substitute(self.constraint, sigma),
                                 tuple(l.substitute(sigma) for l in self.literals))

    def with_id(self, id: int, provenance: Optional[InferenceRecord] = None) -> "ConstrainedClause":
        return ConstrainedClause(self.constraint, self.literals, id, provenance)

    def predicates(self) -> FrozenSet[str]:
        names = {l.atom.name for l in self.literals}
        names.update(a.name for a in fm.atoms(self.constraint) if isinstance(a, Pred))
        return frozenset(names)

    def to_clauses(self, max_clauses: Optional[int] = None) -> List[Clause]:
        """Ordinary clauses equivalent to this constrained clause"""
        return [tuple(negated) + self.literals for negated in fm.cnf(fm.neg(self.constraint), max_clauses)]

    def as_formula(self) -> Formula:
        """Universal closure of ``constraint -> literals``"""
        body = fm.implies(self.constraint, fm.clause_formula(self.literals))
        return fm.forall(self.variables(), body)

    def clause_part_str(self) -> str:
        if not self.literals:
            return "_|_"
        return " | ".join(str(l) for l in self.literals)

    def __str__(self) -> str:
        return f"{self.constraint} || {self.clause_part_str()}"


ConstrainedPClause = ConstrainedClause


@dataclass(frozen=True)
class BackgroundTheory:
    """Universal axioms over the constraint symbols plus an optional local extension"""

    axioms: Tuple[Clause, ...] = ()
    ext: Optional[TheoryExtension] = None
    depth: int = 2

    @property
    def psort_card(self) -> Optional[int]:
        return self.ext.psort_card if self.ext is not None else None


# ---------------------------------------------------------------- conversion


def to_constrained(clause: Sequence[Literal], predicates: Iterable[str]) -> ConstrainedClause:
    """Move non-P literals into the (negated) constraint and abstract non-variable P-arguments"""
    predicates = set(predicates)
    taken = {v.name for v in variables(tuple(clause))}
    counter = 0
    constraint: List[Formula] = []
    part: List[Literal] = []
    for literal in clause:
        atom = literal.atom
        if isinstance(atom, Pred) and atom.name in predicates:
            args = []
            for arg in atom.args:
                if isinstance(arg, Var):
                    args.append(arg)
                    continue
                counter += 1
                while f"z{counter}" in taken:
                    counter += 1
                fresh = Var(f"z{counter}", arg.sort)
                taken.add(fresh.name)
                constraint.append(fm.AtomF(Eq(fresh, arg)))
                args.append(fresh)
            part.append(Literal(Pred(atom.name, tuple(args)), literal.positive))
        else:
            constraint.append(fm.lit(literal.negate()))
    return ConstrainedClause(fm.conj(*constraint), tuple(part))


def lift(clauses: Iterable[ConstrainedClause], predicate: str,
         max_clauses: Optional[int] = None) -> List[ConstrainedClause]:
    """Re-express clauses so that ``predicate`` moves from constraints to clause parts"""
    lifted: List[ConstrainedClause] = []
    for clause in clauses:
        if predicate in clause.predicates() and any(
                isinstance(a, Pred) and a.name == predicate for a in fm.atoms(clause.constraint)):
            for ordinary in clause.to_clauses(max_clauses):
                lifted.append(to_constrained(ordinary, {predicate}))
        elif clause.literals and any(l.atom.name != predicate for l in clause.literals):
            for ordinary in clause.to_clauses(max_clauses):
                lifted.append(to_constrained(ordinary, {predicate}))
        else:
            lifted.append(ConstrainedClause(clause.constraint, clause.literals, clause.id))
    return lifted


# ---------------------------------------------------------------- renaming


def canonical_rename(clause: ConstrainedClause) -> ConstrainedClause:
    """Rename variables to u, v, w, x, y, z, u1, ... in order of first occurrence"""
    order = clause.variables()
    sigma: Dict[Var, Term] = {}
    for index, var in enumerate(order):
        base = VARIABLE_POOL[index % len(VARIABLE_POOL)]
        round_ = index // len(VARIABLE_POOL)
        sigma[var] = Var(base if round_ == 0 else f"{base}{round_}", var.sort)
    renamed = clause.substitute(sigma)
    return ConstrainedClause(renamed.constraint, renamed.literals, clause.id, clause.provenance)


def rename_apart(c1: ConstrainedClause, c2: ConstrainedClause) -> ConstrainedClause:
    """Variant of ``c2`` sharing no variable with ``c1``"""
    used = {v.name for v in c1.variables()} | {v.name for v in c2.variables()}
    clashing = set(c1.variables()) & set(c2.variables())
    sigma: Dict[Var, Term] = {}
    counter = 0
    for var in c2.variables():
        if var in clashing:
            counter += 1
            while f"{var.name}_{counter}" in used:
                counter += 1
            used.add(f"{var.name}_{counter}")
            sigma[var] = Var(f"{var.name}_{counter}", var.sort)
    renamed = c2.substitute(sigma)
    return ConstrainedClause(renamed.constraint, renamed.literals, c2.id, c2.provenance)


# ---------------------------------------------------------------- inferences


@dataclass(frozen=True)
class Conclusion:
    clause: ConstrainedClause
    rule: str
    premises: Tuple[int, ...]
    mgu: Substitution
    positions: Tuple[int, ...]


def _dedupe(literals: Iterable[Literal]) -> Tuple[Literal, ...]:
    return tuple(dict.fromkeys(literals))


def resolve(c1: ConstrainedClause, c2: ConstrainedClause, prec: Precedence) -> List[Conclusion]:
    """Resolvents on a positive literal of ``c1`` and a negative literal of ``c2``"""
    c2 = rename_apart(c1, c2)
    conclusions: List[Conclusion] = []
    for i, positive in enumerate(c1.literals):
        if not positive.positive:
            continue
        for j, negative in enumerate(c2.literals):
            if negative.positive or negative.atom.name != positive.atom.name:
                continue
            sigma = mgu(positive.atom, negative.atom)
            if sigma is None:
                continue
            left = tuple(l.substitute(sigma) for l in c1.literals)
            right = tuple(l.substitute(sigma) for l in c2.literals)
            if not strictly_maximal(i, left, prec) or not is_maximal(j, right, prec):
                continue
            constraint = fm.conj(fm.substitute(c1.constraint, sigma), fm.substitute(c2.constraint, sigma))
            rest = _dedupe(left[:i] + left[i + 1:] + right[:j] + right[j + 1:])
            conclusions.append(Conclusion(ConstrainedClause(constraint, rest), "resolution",
                                          (c1.id, c2.id), sigma, (i, j)))
    return conclusions


def factor(clause: ConstrainedClause, prec: Precedence) -> List[Conclusion]:
    conclusions: List[Conclusion] = []
    literals = clause.literals
    for i, first in enumerate(literals):
        if not first.positive:
            continue
        for j in range(i + 1, len(literals)):
            second = literals[j]
            if not second.positive or second.atom.name != first.atom.name:
                continue
            sigma = mgu(first.atom, second.atom)
            if sigma is None:
                continue
            instance = tuple(l.substitute(sigma) for l in literals)
            if not is_maximal(i, instance, prec):
                continue
            rest = instance[:j] + instance[j + 1:]
            conclusions.append(Conclusion(ConstrainedClause(fm.substitute(clause.constraint, sigma), rest),
                                          "factoring", (clause.id,), sigma, (i, j)))
    return conclusions


# ---------------------------------------------------------------- redundancy


def is_tautology(clause: ConstrainedClause) -> bool:
    present = set(clause.literals)
    return any(l.negate() in present for l in present)


def _skolemize(variables_: Sequence[Var], taken: Set[str]) -> Dict[Var, Term]:
    sigma: Dict[Var, Term] = {}
    for var in variables_:
        name = f"sk_{var.name}"
        while name in taken:
            name += "'"
        taken.add(name)
        sigma[var] = Const(name, var.sort)
    return sigma


def _ground_axioms(axioms: Sequence[Clause], goal: Sequence[Clause], depth: int) -> List[Clause]:
    instances: Dict[Clause, None] = {}
    pool: Dict[Const, None] = dict.fromkeys(constants(tuple(l for c in goal for l in c)))
    for _ in range(max(depth, 1)):
        before = len(pool)
        for axiom in axioms:
            axiom_vars = variables(axiom)
            choices = [[c for c in pool if c.sort == v.sort] for v in axiom_vars]
            for combination in product(*choices):
                instance = tuple(l.substitute(dict(zip(axiom_vars, combination))) for l in axiom)
                instances.setdefault(instance, None)
        for instance in instances:
            for const in constants(instance):
                pool.setdefault(const, None)
        if len(pool) == before:
            break
    return list(instances)


# ---------------------------------------------------------------- Horn backgrounds


@dataclass(frozen=True)
class HornRule:
    """``body -> head``; a rule without head forbids its body"""

    body: Tuple[Pred, ...]
    head: Optional[Pred]


@lru_cache(maxsize=64)
def horn_rules(bg: BackgroundTheory) -> Optional[Tuple[HornRule, ...]]:
    """The axioms as range-restricted Horn rules over predicates, ``None`` if they are not"""
    if bg.ext is not None:
        return None
    rules: List[HornRule] = []
    for axiom in bg.axioms:
        if not all(isinstance(l.atom, Pred) for l in axiom):
            return None
        heads = [l.atom for l in axiom if l.positive]
        body = tuple(l.atom for l in axiom if not l.positive)
        if len(heads) > 1:
            return None
        head = heads[0] if heads else None
        if head is not None and not set(variables(head)) <= set(variables(body)):
            return None
        rules.append(HornRule(body, head))
    return tuple(rules)


def _bind(patterns: Sequence[Term], values: Sequence[Term], binding: Dict[Var, Term],
          bindable: Optional[FrozenSet[Var]] = None) -> Optional[Dict[Var, Term]]:
    if len(patterns) != len(values):
        return None
    extended = binding
    for pattern, value in zip(patterns, values):
        if pattern in extended:
            if extended[pattern] != value:
                return None
        elif isinstance(pattern, Var) and (bindable is None or pattern in bindable):
            if pattern.sort != value.sort:
                return None
            if extended is binding:
                extended = dict(binding)
            extended[pattern] = value
        elif pattern != value:
            return None
    return extended


def _join(body: Sequence[Pred], facts: Dict[str, List[Pred]], binding: Dict[Var, Term]) -> Iterator[Dict[Var, Term]]:
    if not body:
        yield binding
        return
    first = body[0]
    for fact in facts.get(first.name, ()):
        extended = _bind(first.args, fact.args, binding)
        if extended is not None:
            yield from _join(body[1:], facts, extended)


def _forward_chain(rules: Sequence[HornRule], facts: Iterable[Pred]) -> Tuple[FrozenSet[Pred], bool]:
    """Least fixpoint of the rules over ``facts``, and whether a headless rule fired"""
    known: Set[Pred] = set(facts)
    index: Dict[str, List[Pred]] = {}
    for fact in known:
        index.setdefault(fact.name, []).append(fact)
    changed = True
    while changed:
        changed = False
        for rule in rules:
            derived = []
            for binding in _join(rule.body, index, {}):
                if rule.head is None:
                    return frozenset(known), True
                derived.append(rule.head.substitute(binding))
            for fact in derived:
                if fact not in known:
                    known.add(fact)
                    index.setdefault(fact.name, []).append(fact)
                    changed = True
    return frozenset(known), False


class HornState:
    """What a conjunction of predicate literals entails under Horn rules.

    Variables of the conjunction are read as distinct constants.
    """

    def __init__(self, rules: Sequence[HornRule], literals: Sequence[Literal]):
        self.rules = tuple(rules)
        self.negatives = frozenset(l.atom for l in literals if not l.positive)
        self.facts, fired = _forward_chain(self.rules, (l.atom for l in literals if l.positive))
        self.consistent = not fired and not (self.facts & self.negatives)
        self.index: Dict[str, List[Pred]] = {}
        for fact in sorted(self.facts, key=str):
            self.index.setdefault(fact.name, []).append(fact)
        self._refuted: Dict[Pred, bool] = {}

    def entails(self, literal: Literal) -> bool:
        if not self.consistent:
            return True
        atom = literal.atom
        if literal.positive:
            return atom in self.facts
        if atom in self.negatives:
            return True
        if atom not in self._refuted:
            facts, fired = _forward_chain(self.rules, self.facts | {atom})
            self._refuted[atom] = fired or bool(facts & self.negatives)
        return self._refuted[atom]


def _predicate_literals(formula: Formula) -> Optional[Tuple[Literal, ...]]:
    """The conjuncts as predicate literals, ``None`` if some conjunct is something else"""
    literals = []
    for conjunct in fm.conjuncts(formula):
        literal = fm.to_literal(conjunct)
        if literal is None or not isinstance(literal.atom, Pred):
            return None
        literals.append(literal)
    return tuple(literals)


def _horn_view(formula: Formula, bg: BackgroundTheory) -> Optional[HornState]:
    rules = horn_rules(bg)
    if rules is None:
        return None
    literals = _predicate_literals(formula)
    if literals is None:
        return None
    return HornState(rules, literals)


# ---------------------------------------------------------------- entailment


@lru_cache(maxsize=4096)
def _ground_satisfiable(formula: Formula, bg: BackgroundTheory, max_dnf: Optional[int]) -> bool:
    taken = {c.name for c in constants(tuple(fm.atoms(formula)))}
    sigma = _skolemize(fm.free_variables(formula), taken)
    goal = fm.cnf(fm.substitute(formula, sigma), max_dnf)
    goal = goal + _ground_axioms(bg.axioms, goal, bg.depth)
    if bg.ext is not None:
        return check_sat_ext(bg.ext, goal).is_sat
    return GroundSolver(GroundProblem(tuple(goal), bg.psort_card)).check().is_sat


def satisfiable(formula: Formula, bg: BackgroundTheory, max_dnf: Optional[int] = None) -> bool:
    """Satisfiability of the existential closure of ``formula`` modulo the background"""
    state = _horn_view(formula, bg)
    if state is not None:
        return state.consistent
    return _ground_satisfiable(formula, bg, max_dnf)


def consistent_on(clauses: Sequence[ConstrainedClause], bg: BackgroundTheory, points: int,
                  max_dnf: Optional[int] = None) -> bool:
    """Satisfiability of every instance over ``points`` fresh point constants.

    An unsatisfiable answer means the clause set has no model at all; a
    satisfiable one only speaks for models of that size.
    """
    pool = [Const(f"c{i}") for i in range(1, max(points, 1) + 1)]
    numbers: Dict[Var, Term] = {}
    instances: List[Formula] = []
    for clause in clauses:
        clause_vars = clause.variables()
        for var in clause_vars:
            if var.sort.interpreted:
                numbers.setdefault(var, Const(f"n_{var.name}", var.sort))
        point_vars = [v for v in clause_vars if not v.sort.interpreted]
        body = fm.implies(clause.constraint, fm.clause_formula(clause.literals))
        for choice in product(pool, repeat=len(point_vars)):
            sigma = {**numbers, **dict(zip(point_vars, choice))}
            instances.append(fm.substitute(body, sigma))
    return satisfiable(fm.conj(*instances), bg, max_dnf)


def entails(bg: BackgroundTheory, premise: Formula, conclusion: Formula, max_dnf: Optional[int] = None) -> bool:
    """Whether ``premise -> conclusion`` is valid modulo the background (sound, may say False)"""
    state = _horn_view(premise, bg)
    wanted = _predicate_literals(conclusion)
    if state is not None and wanted is not None:
        return all(state.entails(l) for l in wanted)
    try:
        return not satisfiable(fm.conj(premise, fm.neg(conclusion)), bg, max_dnf)
    except ResourceExhausted:
        return False


# ---------------------------------------------------------------- redundancy checks


def clause_renamings(source: Sequence[Literal], target: Sequence[Literal]) -> Iterable[Dict[Var, Term]]:
    """Injective variable renamings mapping the clause part ``source`` onto ``target``"""
    if len(source) != len(target):
        return

    def extend(index: int, used: Tuple[int, ...], mapping: Dict[Var, Term]):
        if index == len(source):
            yield dict(mapping)
            return
        literal = source[index]
        for k, candidate in enumerate(target):
            if k in used or candidate.positive != literal.positive or candidate.atom.name != literal.atom.name:
                continue
            if len(candidate.atom.args) != len(literal.atom.args):
                continue
            extended = dict(mapping)
            ok = True
            for a, b in zip(literal.atom.args, candidate.atom.args):
                if a in extended:
                    ok = extended[a] == b
                elif b in extended.values() or a.sort != b.sort:
                    ok = False
                else:
                    extended[a] = b
                if not ok:
                    break
            if ok:
                yield from extend(index + 1, used + (k,), extended)

    yield from extend(0, (), {})


def _weaker_by_ordering(candidate: Formula, existing: Formula) -> bool:
    """Approximation of the ordering side condition of semantic entailment"""
    mine = set(fm.conjuncts(candidate))
    theirs = fm.conjuncts(existing)
    return set(theirs) <= mine or len(theirs) < len(mine)


Lookup = Callable[[Literal, Dict[Var, Term]], Iterable[Dict[Var, Term]]]


def _embeddings(patterns: Sequence[Literal], binding: Dict[Var, Term], lookup: Lookup) -> Iterator[Dict[Var, Term]]:
    """Extensions of ``binding`` under which ``lookup`` finds every pattern"""
    if not patterns:
        yield binding
        return
    for extended in lookup(patterns[0], binding):
        yield from _embeddings(patterns[1:], extended, lookup)


def _syntactic_lookup(literals: Sequence[Literal], bindable: FrozenSet[Var]) -> Lookup:
    index: Dict[Tuple[bool, str], List[Literal]] = {}
    for literal in literals:
        index.setdefault((literal.positive, literal.atom.name), []).append(literal)

    def lookup(pattern: Literal, binding: Dict[Var, Term]) -> Iterator[Dict[Var, Term]]:
        for literal in index.get((pattern.positive, pattern.atom.name), ()):
            extended = _bind(pattern.atom.args, literal.atom.args, binding, bindable)
            if extended is not None:
                yield extended

    return lookup


def _horn_lookup(state: HornState, own: Sequence[Term], bindable: FrozenSet[Var]) -> Lookup:
    def lookup(pattern: Literal, binding: Dict[Var, Term]) -> Iterator[Dict[Var, Term]]:
        if pattern.positive:
            for fact in state.index.get(pattern.atom.name, ()):
                extended = _bind(pattern.atom.args, fact.args, binding, bindable)
                if extended is not None:
                    yield extended
            return
        open_ = [a for a in dict.fromkeys(pattern.atom.args) if a in bindable and a not in binding]
        for choice in product(*([t for t in own if t.sort == var.sort] for var in open_)):
            extended = {**binding, **dict(zip(open_, choice))}
            if state.entails(Literal(pattern.atom.substitute(extended), False)):
                yield extended

    return lookup


@dataclass(frozen=True)
class Redundancy:
    """``by`` entails the clause; ``approximated`` marks claims resting on the conjunct-count ordering"""

    by: ConstrainedClause
    approximated: bool = False


class DeadlinePassed(Exception):
    """The time limit of a saturation ran out"""


def _check_deadline(deadline: Optional[float]) -> None:
    if deadline is not None and time.monotonic() > deadline:
        raise DeadlinePassed()


def _ordered(literals: Sequence[Literal]) -> List[Literal]:
    # positive patterns first: they bind the variables the negative ones are tested with
    return sorted(literals, key=lambda l: not l.positive)


def redundant(clause: ConstrainedClause, others: Iterable[ConstrainedClause], bg: BackgroundTheory,
              max_dnf: Optional[int] = None, deadline: Optional[float] = None) -> Optional[Redundancy]:
    """A clause of ``others`` that semantically entails ``clause``, if one is found.

    Subsumption of constraints is tried against every clause before any
    entailment modulo the background.
    """
    own_vars = clause.variables()
    mine = _predicate_literals(clause.constraint)
    prepared = []
    for other in others:
        if len(other.literals) != len(clause.literals):
            continue
        other = rename_apart(clause, other)
        prepared.append((other, _predicate_literals(other.constraint),
                         list(clause_renamings(other.literals, clause.literals))))

    for other, patterns, renamings in prepared:
        _check_deadline(deadline)
        bindable = frozenset(other.variables())
        for rho in renamings:
            if patterns is not None and mine is not None:
                lookup = _syntactic_lookup(mine, bindable)
                if next(_embeddings(_ordered(patterns), rho, lookup), None) is not None:
                    return Redundancy(other)
                continue
            for mapping in _extra_choices(other, rho, own_vars):
                if set(fm.conjuncts(fm.substitute(other.constraint, mapping))) <= set(fm.conjuncts(clause.constraint)):
                    return Redundancy(other)

    state = _horn_view(clause.constraint, bg)
    if state is not None and not state.consistent:
        state = None
    own_terms = tuple(own_vars) + tuple(constants(tuple(fm.atoms(clause.constraint))))
    for other, patterns, renamings in prepared:
        _check_deadline(deadline)
        bindable = frozenset(other.variables())
        for rho in renamings:
            if state is not None and patterns is not None:
                mappings = _embeddings(_ordered(patterns), rho, _horn_lookup(state, own_terms, bindable))
                for mapping in mappings:
                    if _weaker_by_ordering(clause.constraint, fm.substitute(other.constraint, mapping)):
                        return Redundancy(other, approximated=True)
                continue
            for mapping in _extra_choices(other, rho, own_vars):
                renamed = fm.substitute(other.constraint, mapping)
                if not _weaker_by_ordering(clause.constraint, renamed):
                    continue
                if entails(bg, clause.constraint, renamed, max_dnf):
                    return Redundancy(other, approximated=True)
    return None


def _extra_choices(other: ConstrainedClause, rho: Dict[Var, Term], own_vars: Sequence[Var]) -> Iterator[Dict[Var, Term]]:
    """``rho`` extended to the variables of ``other`` outside its clause part"""
    extra = [v for v in other.variables() if v not in rho]
    options = [[w for w in own_vars if w.sort == v.sort] or [v] for v in extra]
    for choice in product(*options):
        mapping = dict(rho)
        mapping.update(zip(extra, choice))
        yield mapping


# ---------------------------------------------------------------- saturation


@dataclass
class Saturated:
    clauses: List[ConstrainedClause]
    trace: List[str]

    @property
    def is_saturated(self) -> bool:
        return True


@dataclass
class Diverged:
    partial: List[ConstrainedClause]
    trace: List[str]
    reason: str

    @property
    def is_saturated(self) -> bool:
        return False


SaturationResult = Union[Saturated, Diverged]


def _selection_key(clause: ConstrainedClause) -> Tuple[int, int, int]:
    return (len(clause.literals), fm.size(clause.constraint), clause.id)


def _flag(trace: List[str], rule: str, premises: Tuple[int, ...], clause: ConstrainedClause,
          found: Redundancy) -> None:
    if found.approximated:
        names = ",".join(str(p) for p in premises)
        trace.append(f"- {rule} {names} {clause} redundant by {found.by.id} (smaller by conjunct count)")


def saturate(clauses: Sequence[ConstrainedClause], bg: BackgroundTheory, prec: Precedence,
             limits: RunLimits = RunLimits()) -> SaturationResult:
    """Given-clause saturation; divergence is reported as a value.

    Trace lines of kept conclusions start with their id. Conclusions dropped
    on the strength of the conjunct-count ordering get a line starting with ``-``.
    """
    deadline = time.monotonic() + limits.timeout if limits.timeout else None
    passive: List[Tuple[Tuple[int, int, int], ConstrainedClause]] = []
    everything: List[ConstrainedClause] = []
    trace: List[str] = []
    next_id = 1
    for clause in clauses:
        numbered = clause.with_id(next_id)
        next_id += 1
        everything.append(numbered)
        heapq.heappush(passive, (_selection_key(numbered), numbered))
    logger.info("saturation started with %d clauses", len(everything))
    active: List[ConstrainedClause] = []
    try:
        while passive:
            _check_deadline(deadline)
            _, given = heapq.heappop(passive)
            if given.provenance is not None:
                found = redundant(given, active, bg, limits.max_dnf, deadline)
                if found is not None:
                    _flag(trace, "selection", (given.id,), given, found)
                    continue
            active.append(given)
            candidates: List[Conclusion] = factor(given, prec)
            for partner in active:
                candidates.extend(resolve(given, partner, prec))
                if partner is not given:
                    candidates.extend(resolve(partner, given, prec))
            for conclusion in candidates:
                _check_deadline(deadline)
                derived = canonical_rename(conclusion.clause)
                if is_tautology(derived):
                    continue
                try:
                    if not satisfiable(derived.constraint, bg, limits.max_dnf):
                        continue
                except ResourceExhausted:
                    pass
                pool = active + [c for _, c in passive]
                found = redundant(derived, pool, bg, limits.max_dnf, deadline)
                if found is not None:
                    _flag(trace, conclusion.rule, conclusion.premises, derived, found)
                    continue
                record = InferenceRecord(conclusion.rule, conclusion.premises, conclusion.mgu, next_id,
                                         conclusion.positions)
                derived = derived.with_id(next_id, record)
                next_id += 1
                trace.append(record.line(derived))
                logger.debug(trace[-1])
                heapq.heappush(passive, (_selection_key(derived), derived))
                if len(active) + len(passive) > limits.max_clauses:
                    return _diverged(active, passive, trace, "clause limit")
    except DeadlinePassed:
        return _diverged(active, passive, trace, "timeout")
    active.sort(key=lambda c: c.id)
    logger.info("saturation finished with %d clauses", len(active))
    return Saturated(active, trace)


def _diverged(active, passive, trace, reason: str) -> Diverged:
    partial = sorted(active + [c for _, c in passive], key=lambda c: c.id)
    logger.warning("saturation stopped (%s) after %d clauses", reason, len(partial))
    return Diverged(partial, trace, reason)


def predicate_free(clauses: Iterable[ConstrainedClause], predicate: str) -> List[ConstrainedClause]:
    return [c for c in clauses if predicate not in c.predicates()]


def eliminate(clauses: Sequence[ConstrainedClause], predicate: str, bg: BackgroundTheory,
              prec: Optional[Precedence] = None, limits: RunLimits = RunLimits()
              ) -> Tuple[Optional[List[ConstrainedClause]], SaturationResult]:
    """P-free part of the saturation, ``None`` when saturation diverges"""
    prec = prec or Precedence(eliminable=frozenset({predicate}))
    if predicate not in prec.eliminable:
        prec = Precedence(prec.eliminable | {predicate}, prec.extension, prec.explicit, prec.constants)
    kept = [c for c in clauses if predicate not in c.predicates()]
    involved = lift([c for c in clauses if predicate in c.predicates()], predicate, limits.max_dnf)
    result = saturate(kept + involved, bg, prec, limits)
    if not result.is_saturated:
        return None, result
    return predicate_free(result.clauses, predicate), result


def eliminate_seq(clauses: Sequence[ConstrainedClause], predicates: Sequence[str], bg: BackgroundTheory,
                  prec: Optional[Precedence] = None, limits: RunLimits = RunLimits()
                  ) -> Tuple[Optional[List[ConstrainedClause]], List[SaturationResult]]:
    if len(set(predicates)) != len(predicates):
        raise SoqeError("predicates to eliminate must be pairwise distinct")
    current = list(clauses)
    results: List[SaturationResult] = []
    for predicate in predicates:
        stage_prec = Precedence(frozenset({predicate}), prec.extension, prec.explicit, prec.constants) \
            if prec is not None else None
        outcome, result = eliminate(current, predicate, bg, stage_prec, limits)
        results.append(result)
        if outcome is None:
            return None, results
        current = outcome
    return current, results
