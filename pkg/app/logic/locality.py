"""Local theory extensions: closures, instantiation, purification and checking.

A ground goal ``G`` is satisfiable together with the extension clauses ``K``
iff the finitely many instances of ``K`` whose extension terms lie in
``psi(est(K, G))`` are satisfiable together with ``G`` in the base theory.
The base theory is pure equality on points plus linear rational arithmetic.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from app.logic.errors import PreconditionError, UnsupportedInput
from app.logic.ground_solver import GroundModel, GroundProblem, GroundSolver
from app.logic.terms import (
    NUM, POINT, App, Clause, Cmp, Const, Eq, Literal, Num, Pred, Term, Var, clause_str, constants, is_flat_linear,
    is_ground, iter_terms, match, substitute, variables,
)

logger = logging.getLogger(__name__)

ExtTerm = Union[App, Pred]


class PsiVariant(str, Enum):
    IDENTITY = "identity"
    SYMMETRIC = "symmetric"
    NO_TRIANGLE = "no-triangle"
    METRIC = "metric"


def distance_axioms(symbol: str = "d") -> Dict[str, Clause]:
    x, y, z = Var("x"), Var("y"), Var("z")

    def d(a, b):
        return App(symbol, (a, b))

    zero = Num(0)
    return {
        "d1": (Literal(Cmp(">=", d(x, y), zero)),),
        "d2": (Literal(Cmp("<=", d(x, y), App("+", (d(x, z), d(z, y))))),),
        "d3": (Literal(Eq(d(x, y), d(y, x))),),
        "d4": (Literal(Eq(x, y), False), Literal(Eq(d(x, y), zero))),
        "d5": (Literal(Eq(d(x, y), zero), False), Literal(Eq(x, y))),
    }


PRESETS: Dict[str, Tuple[Tuple[str, ...], PsiVariant]] = {
    "Tu": ((), PsiVariant.IDENTITY),
    "Tp": (("d1",), PsiVariant.IDENTITY),
    "Ts": (("d3",), PsiVariant.SYMMETRIC),
    "Tn": (("d1", "d3", "d4", "d5"), PsiVariant.NO_TRIANGLE),
    "Tm": (("d1", "d2", "d3", "d4", "d5"), PsiVariant.METRIC),
}


def psi_for_axioms(names: Iterable[str]) -> PsiVariant:
    wanted = tuple(sorted(set(names)))
    for axioms, psi in PRESETS.values():
        if tuple(sorted(axioms)) == wanted:
            return psi
    raise UnsupportedInput(f"no closure operator is known for the distance axioms {', '.join(wanted) or 'none'}")


@dataclass(frozen=True)
class TheoryExtension:
    """Base theory extended by ``extension_symbols`` constrained by ``clauses``"""

    clauses: Tuple[Clause, ...] = ()
    extension_symbols: FrozenSet[str] = frozenset({"d"})
    parameters: FrozenSet[str] = frozenset()
    psi: PsiVariant = PsiVariant.IDENTITY
    distance_axioms: Tuple[str, ...] = ()
    psort_card: Optional[int] = None
    distance_symbol: str = "d"

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        object.__setattr__(self, "extension_symbols", frozenset(self.extension_symbols))
        object.__setattr__(self, "parameters", frozenset(self.parameters))
        if psi_for_axioms(self.distance_axioms) != self.psi:
            raise UnsupportedInput(f"closure {self.psi.value} does not match axioms {self.distance_axioms}")
        for clause in self.clauses:
            flat, _ = is_flat_linear(clause, self.extension_symbols)
            if not flat:
                raise UnsupportedInput(f"extension clause is not flat: {clause_str(clause)}")

    @classmethod
    def preset(cls, name: str, clauses: Sequence[Clause] = (), extension_symbols: Iterable[str] = ("d",),
               parameters: Iterable[str] = (), psort_card: Optional[int] = None,
               distance_symbol: str = "d") -> "TheoryExtension":
        if name not in PRESETS:
            raise UnsupportedInput(f"unknown theory preset {name!r}; expected one of {', '.join(PRESETS)}")
        axioms, psi = PRESETS[name]
        return cls(tuple(clauses), frozenset(extension_symbols) | {distance_symbol}, frozenset(parameters),
                   psi, axioms, psort_card, distance_symbol)

    def axioms(self) -> Tuple[Clause, ...]:
        table = distance_axioms(self.distance_symbol)
        return tuple(table[name] for name in self.distance_axioms) + self.clauses

    def with_clauses(self, extra: Iterable[Clause]) -> "TheoryExtension":
        return TheoryExtension(self.clauses + tuple(tuple(c) for c in extra), self.extension_symbols,
                               self.parameters, self.psi, self.distance_axioms, self.psort_card,
                               self.distance_symbol)

    def with_parameters(self, parameters: Iterable[str]) -> "TheoryExtension":
        return TheoryExtension(self.clauses, self.extension_symbols, frozenset(parameters), self.psi,
                               self.distance_axioms, self.psort_card, self.distance_symbol)


# ---------------------------------------------------------------- closures


def _occurrences(obj, symbols: FrozenSet[str]) -> List[ExtTerm]:
    found: Dict[ExtTerm, None] = {}
    literals = [obj] if isinstance(obj, Literal) else list(obj)
    for literal in literals:
        if isinstance(literal.atom, Pred) and literal.atom.name in symbols:
            found.setdefault(literal.atom, None)
        for term in iter_terms(literal):
            if isinstance(term, App) and term.fn in symbols:
                found.setdefault(term, None)
    return list(found)


def est(clauses: Iterable[Clause], goal: Iterable[Clause], symbols: Iterable[str]) -> Tuple[ExtTerm, ...]:
    """Ground extension-rooted terms of ``clauses`` and ``goal``"""
    symbols = frozenset(symbols)
    found: Dict[ExtTerm, None] = {}
    for clause in list(goal) + list(clauses):
        for occurrence in _occurrences(clause, symbols):
            if is_ground(occurrence):
                found.setdefault(occurrence, None)
    return tuple(found)


def point_constants(terms: Iterable[ExtTerm]) -> Tuple[Const, ...]:
    found: Dict[Const, None] = {}
    for term in terms:
        for sub in iter_terms(term):
            if isinstance(sub, Const) and sub.sort == POINT:
                found.setdefault(sub, None)
    return tuple(found)


def psi_close(variant: PsiVariant, terms: Iterable[ExtTerm], symbol: str = "d") -> Tuple[ExtTerm, ...]:
    terms = tuple(dict.fromkeys(terms))
    if variant is PsiVariant.IDENTITY:
        return terms
    distances = [t for t in terms if isinstance(t, App) and t.fn == symbol]
    added: List[ExtTerm] = []
    if variant is PsiVariant.METRIC:
        kept = [t for t in terms if not (isinstance(t, App) and t.fn == symbol)]
        points = point_constants(terms)
        pairs = [App(symbol, (a, b)) for a in points for b in points]
        return tuple(dict.fromkeys(kept + pairs))
    for term in distances:
        added.append(App(symbol, (term.args[1], term.args[0]), term.sort))
    if variant is PsiVariant.NO_TRIANGLE:
        for point in point_constants(terms):
            added.append(App(symbol, (point, point)))
    return tuple(dict.fromkeys(list(terms) + added))


# ---------------------------------------------------------------- instantiation


@dataclass
class Instantiation:
    instances: List[Clause] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)


def instantiate(clauses: Iterable[Clause], terms: Sequence[ExtTerm], symbols: Iterable[str],
                grounding: Sequence[Const] = ()) -> Instantiation:
    """Instances whose extension terms all lie in ``terms``.

    Variables not below any extension symbol are grounded over ``grounding``
    (points only) with a warning.
    """
    symbols = frozenset(symbols)
    by_symbol: Dict[str, List[ExtTerm]] = {}
    for term in terms:
        by_symbol.setdefault(term.fn if isinstance(term, App) else term.name, []).append(term)
    result = Instantiation()
    seen: Dict[Clause, None] = {}
    for clause in clauses:
        patterns = [o for o in _occurrences(clause, symbols) if not is_ground(o)]
        ground_terms = [o for o in _occurrences(clause, symbols) if is_ground(o)]
        if any(o not in terms for o in ground_terms):
            continue
        for bindings in _match_all(patterns, by_symbol):
            instance = substitute(clause, bindings)
            remaining = variables(instance)
            if remaining:
                instances = _ground_remaining(instance, remaining, grounding, result)
            else:
                instances = [instance]
            for ground in instances:
                seen.setdefault(ground, None)
    result.instances = list(seen)
    return result


def _match_all(patterns: Sequence[ExtTerm], by_symbol: Mapping[str, List[ExtTerm]]):
    def extend(index: int, bindings: Dict):
        if index == len(patterns):
            yield dict(bindings)
            return
        pattern = patterns[index]
        name = pattern.fn if isinstance(pattern, App) else pattern.name
        for candidate in by_symbol.get(name, ()):
            matched = _match_ext(pattern, candidate, bindings)
            if matched is not None:
                yield from extend(index + 1, matched)

    yield from extend(0, {})


def _match_ext(pattern: ExtTerm, candidate: ExtTerm, bindings: Dict) -> Optional[Dict]:
    if type(pattern) is not type(candidate):
        return None
    if isinstance(pattern, Pred):
        return match(pattern, candidate, bindings)
    return match(Pred(pattern.fn, pattern.args), Pred(candidate.fn, candidate.args), bindings) \
        if pattern.fn == candidate.fn else None


def _ground_remaining(instance: Clause, remaining, grounding: Sequence[Const], result: Instantiation) -> List[Clause]:
    if any(v.sort == NUM for v in remaining):
        raise UnsupportedInput(f"numeric variable outside extension terms in {clause_str(instance)}")
    message = f"variables {', '.join(v.name for v in remaining)} are not below an extension symbol in " \
              f"{clause_str(instance)}; grounding over point constants"
    if message not in result.warnings:
        logger.warning(message)
        result.warnings.append(message)
    return [substitute(instance, dict(zip(remaining, choice)))
            for choice in product(grounding, repeat=len(remaining))]


def check_swap_condition(clauses: Iterable[Clause], terms: Sequence[ExtTerm], symbols: Iterable[str]) -> List[str]:
    """Swapped instances missing from ``terms`` for binary symbols of non-linear clauses"""
    symbols = frozenset(symbols)
    present = set(terms)
    missing: Dict[str, None] = {}
    for clause in clauses:
        _, linear = is_flat_linear(clause, symbols)
        if linear:
            continue
        shared = {o.fn for o in _occurrences(clause, symbols) if isinstance(o, App) and len(o.args) == 2}
        for term in terms:
            if isinstance(term, App) and term.fn in shared:
                swapped = App(term.fn, (term.args[1], term.args[0]), term.sort)
                if swapped not in present:
                    missing.setdefault(str(swapped), None)
    for item in missing:
        logger.warning("swap condition violated: %s is not in the instantiation set", item)
    return list(missing)


# ---------------------------------------------------------------- purification


@dataclass(frozen=True)
class Purification:
    k0: Tuple[Clause, ...]
    g0: Tuple[Clause, ...]
    definitions: Tuple[Tuple[Const, App], ...]
    con0: Tuple[Clause, ...]

    def clauses(self) -> Tuple[Clause, ...]:
        return self.k0 + self.g0 + self.con0

    def definition_map(self) -> Dict[Const, App]:
        return dict(self.definitions)


def purify(instances: Sequence[Clause], goal: Sequence[Clause], symbols: Iterable[str],
           prefix: str = "e") -> Purification:
    """Replace extension applications by fresh constants, bottom-up"""
    symbols = frozenset(symbols)
    names: Dict[App, Const] = {}
    taken = {c.name for c in constants(tuple(l for c in list(instances) + list(goal) for l in c))}

    def name_of(term: App) -> Const:
        if term not in names:
            index = len(names) + 1
            while f"{prefix}_{index}" in taken:
                index += 1
            taken.add(f"{prefix}_{index}")
            names[term] = Const(f"{prefix}_{index}", term.sort)
        return names[term]

    def flatten(term: Term) -> Term:
        if isinstance(term, App):
            args = tuple(flatten(a) for a in term.args)
            rebuilt = App(term.fn, args, term.sort)
            if term.fn in symbols:
                return name_of(rebuilt)
            return rebuilt
        return term

    def purify_clause(clause: Clause) -> Clause:
        return tuple(_map_literal(literal, flatten) for literal in clause)

    g0 = tuple(purify_clause(c) for c in goal)
    k0 = tuple(purify_clause(c) for c in instances)
    definitions = tuple((const, term) for term, const in names.items())
    for const, term in definitions:
        logger.info("%s = %s", const, term)
    con0: List[Clause] = []
    for i, (ci, ti) in enumerate(definitions):
        for cj, tj in definitions[i + 1:]:
            if ti.fn != tj.fn:
                continue
            premises = tuple(Literal(Eq(a, b), False) for a, b in zip(ti.args, tj.args) if a != b)
            con0.append(premises + (Literal(Eq(ci, cj)),))
    return Purification(k0, g0, definitions, tuple(con0))


def _map_literal(literal: Literal, fn) -> Literal:
    atom = literal.atom
    if isinstance(atom, Pred):
        atom = Pred(atom.name, tuple(fn(a) for a in atom.args))
    elif isinstance(atom, Eq):
        atom = Eq(fn(atom.lhs), fn(atom.rhs))
    else:
        atom = Cmp(atom.op, fn(atom.lhs), fn(atom.rhs))
    return Literal(atom, literal.positive)


# ---------------------------------------------------------------- checking


@dataclass
class ExtensionResult:
    is_sat: bool
    model: Optional[GroundModel]
    purification: Purification
    instances: List[Clause]
    terms: Tuple[ExtTerm, ...]
    warnings: List[str] = field(default_factory=list)

    def model_lines(self) -> List[str]:
        if self.model is None:
            return []
        lines = []
        for index, members in enumerate(self.model.point_classes, start=1):
            lines.append(f"class {index}: {', '.join(str(m) for m in members)}")
        definitions = self.purification.definition_map()
        rendered = []
        for term, value in self.model.values.items():
            shown = definitions.get(term, term)
            rendered.append(f"{shown} = {Num(value)}")
        lines.extend(sorted(rendered))
        for atom in sorted(self.model.predicates, key=str):
            lines.append(f"{atom} = {'true' if self.model.predicates[atom] else 'false'}")
        return lines


def instantiation_terms(ext: TheoryExtension, goal: Sequence[Clause],
                        extra_terms: Iterable[ExtTerm] = ()) -> Tuple[ExtTerm, ...]:
    base = est(ext.axioms(), goal, ext.extension_symbols)
    return psi_close(ext.psi, tuple(base) + tuple(extra_terms), ext.distance_symbol)


def reduce_to_base(ext: TheoryExtension, goal: Sequence[Clause],
                   extra_terms: Iterable[ExtTerm] = ()) -> Tuple[Purification, Instantiation, Tuple[ExtTerm, ...]]:
    goal = tuple(tuple(c) for c in goal)
    for clause in goal:
        if not is_ground(clause):
            raise UnsupportedInput(f"goal clause is not ground: {clause_str(clause)}")
        flat, _ = is_flat_linear(clause, ext.extension_symbols)
        if not flat:
            raise UnsupportedInput(f"goal clause is not flat: {clause_str(clause)}")
    terms = instantiation_terms(ext, goal, extra_terms)
    grounding = tuple(dict.fromkeys(point_constants(terms) + tuple(
        c for c in constants(tuple(l for clause in goal for l in clause)) if c.sort == POINT)))
    instantiation = instantiate(ext.axioms(), terms, ext.extension_symbols, grounding)
    instantiation.warnings.extend(check_swap_condition(ext.axioms(), terms, ext.extension_symbols))
    purification = purify(instantiation.instances, goal, ext.extension_symbols)
    return purification, instantiation, terms


def check_sat_ext(ext: TheoryExtension, goal: Sequence[Clause],
                  extra_terms: Iterable[ExtTerm] = ()) -> ExtensionResult:
    purification, instantiation, terms = reduce_to_base(ext, goal, extra_terms)
    logger.info("checking %d instances against %d goal clauses", len(instantiation.instances), len(goal))
    solver = GroundSolver(GroundProblem(purification.clauses(), ext.psort_card))
    outcome = solver.check()
    return ExtensionResult(outcome.is_sat, outcome.model, purification, instantiation.instances, terms,
                           instantiation.warnings)


# ---------------------------------------------------------------- metric completion


@dataclass(frozen=True)
class PartialModel:
    points: Tuple[str, ...]
    distances: Mapping[Tuple[str, str], Fraction]
    parameters: Mapping[str, Mapping[str, Fraction]] = field(default_factory=dict)


def check_metric(points: Sequence[str], table: Mapping[Tuple[str, str], Fraction]) -> None:
    """Raise ``PreconditionError`` naming the first violated distance axiom"""
    for p in points:
        for q in points:
            value = table[(p, q)]
            if value < 0:
                raise PreconditionError("distance is negative", "d1", (p, q))
            if value != table[(q, p)]:
                raise PreconditionError("distance is not symmetric", "d3", (p, q))
            if p == q and value != 0:
                raise PreconditionError("distance of a point to itself is not zero", "d4", (p,))
            if p != q and value == 0:
                raise PreconditionError("distinct points at distance zero", "d5", (p, q))
            for r in points:
                if value > table[(p, r)] + table[(r, q)]:
                    raise PreconditionError("triangle inequality fails", "d2", (p, q, r))


def complete_metric(model: PartialModel) -> Dict[Tuple[str, str], Fraction]:
    """Extend a metric defined on P1 x P1 to all points of the model"""
    defined = [p for p in model.points if any(p in pair for pair in model.distances)]
    first = [p for p in model.points if p in defined]
    second = [p for p in model.points if p not in defined]
    for p in first:
        for q in first:
            if (p, q) not in model.distances:
                raise PreconditionError("distance table is not total on its defined points", None, (p, q))
    check_metric(first, model.distances)
    d1 = {pair: Fraction(v) for pair, v in model.distances.items()}
    d2 = {(p, q): Fraction(0 if p == q else 1) for p in second for q in second}
    table = dict(d1)
    table.update(d2)
    if not first or not second:
        return table
    m = max(list(d1.values()) + list(d2.values()))
    d0 = m + 1
    p1, p2 = first[0], second[0]
    for p in first:
        for q in second:
            value = d0 + d1[(p, p1)] + d2[(p2, q)]
            table[(p, q)] = value
            table[(q, p)] = value
    return table
