"""Boolean formulas over atoms of ``app.logic.terms``.

Constructors ``conj``/``disj``/``neg`` flatten and fold constants, so
formulas built through them are kept small. Normal forms (NNF, DNF, CNF)
operate on quantifier-free formulas only.
"""
from dataclasses import dataclass
from itertools import product
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from app.logic.errors import ResourceExhausted, UnsupportedInput
from app.logic.terms import (
    Atom, Clause, Cmp, Eq, Literal, Pred, Term, Var, iter_terms, substitute as substitute_syntax,
)


class Formula:
    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Truth(Formula):
    value: bool


TRUE = Truth(True)
FALSE = Truth(False)


@dataclass(frozen=True)
class AtomF(Formula):
    atom: Atom


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: Tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    args: Tuple[Formula, ...]


@dataclass(frozen=True)
class Forall(Formula):
    variables: Tuple[Var, ...]
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    variables: Tuple[Var, ...]
    body: Formula


Cube = Tuple[Literal, ...]

NEGATED_COMPARISON = {"<=": ">", "<": ">=", ">=": "<", ">": "<="}


# ---------------------------------------------------------------- constructors


def conj(*args: Formula) -> Formula:
    parts: List[Formula] = []
    for arg in _flatten(args):
        if isinstance(arg, And):
            parts.extend(arg.args)
        else:
            parts.append(arg)
    kept: List[Formula] = []
    for part in parts:
        if part == FALSE:
            return FALSE
        if part != TRUE and part not in kept:
            kept.append(part)
    if not kept:
        return TRUE
    if len(kept) == 1:
        return kept[0]
    return And(tuple(kept))


def disj(*args: Formula) -> Formula:
    parts: List[Formula] = []
    for arg in _flatten(args):
        if isinstance(arg, Or):
            parts.extend(arg.args)
        else:
            parts.append(arg)
    kept: List[Formula] = []
    for part in parts:
        if part == TRUE:
            return TRUE
        if part != FALSE and part not in kept:
            kept.append(part)
    if not kept:
        return FALSE
    if len(kept) == 1:
        return kept[0]
    return Or(tuple(kept))


def _flatten(args) -> Iterator[Formula]:
    for arg in args:
        if isinstance(arg, Formula):
            yield arg
        else:
            yield from _flatten(arg)


def neg(arg: Formula) -> Formula:
    if isinstance(arg, Truth):
        return Truth(not arg.value)
    if isinstance(arg, Not):
        return arg.arg
    return Not(arg)


def implies(premise: Formula, conclusion: Formula) -> Formula:
    return disj(neg(premise), conclusion)


def forall(variables: Sequence[Var], body: Formula) -> Formula:
    variables = tuple(v for v in variables if v in free_variables(body))
    return Forall(variables, body) if variables else body


def exists(variables: Sequence[Var], body: Formula) -> Formula:
    variables = tuple(v for v in variables if v in free_variables(body))
    return Exists(variables, body) if variables else body


def lit(literal: Literal) -> Formula:
    atom = AtomF(literal.atom)
    return atom if literal.positive else Not(atom)


def clause_formula(clause: Clause) -> Formula:
    return disj(*(lit(l) for l in clause))


def cube_formula(cube: Cube) -> Formula:
    return conj(*(lit(l) for l in cube))


def to_literal(formula: Formula) -> Optional[Literal]:
    if isinstance(formula, AtomF):
        return Literal(formula.atom, True)
    if isinstance(formula, Not) and isinstance(formula.arg, AtomF):
        return Literal(formula.arg.atom, False)
    return None


# ---------------------------------------------------------------- traversal


def atoms(formula: Formula) -> Iterator[Atom]:
    if isinstance(formula, AtomF):
        yield formula.atom
    elif isinstance(formula, Not):
        yield from atoms(formula.arg)
    elif isinstance(formula, (And, Or)):
        for arg in formula.args:
            yield from atoms(arg)
    elif isinstance(formula, (Forall, Exists)):
        yield from atoms(formula.body)


def formula_terms(formula: Formula) -> Iterator[Term]:
    for atom in atoms(formula):
        yield from iter_terms(atom)


def free_variables(formula: Formula) -> Tuple[Var, ...]:
    seen: Dict[Var, None] = {}
    _collect_free(formula, frozenset(), seen)
    return tuple(seen)


def _collect_free(formula: Formula, bound, seen: Dict[Var, None]) -> None:
    if isinstance(formula, AtomF):
        for term in iter_terms(formula.atom):
            if isinstance(term, Var) and term not in bound:
                seen.setdefault(term, None)
    elif isinstance(formula, Not):
        _collect_free(formula.arg, bound, seen)
    elif isinstance(formula, (And, Or)):
        for arg in formula.args:
            _collect_free(arg, bound, seen)
    elif isinstance(formula, (Forall, Exists)):
        _collect_free(formula.body, bound | set(formula.variables), seen)


def size(formula: Formula) -> int:
    if isinstance(formula, (Truth, AtomF)):
        return 1
    if isinstance(formula, Not):
        return 1 + size(formula.arg)
    if isinstance(formula, (And, Or)):
        return 1 + sum(size(a) for a in formula.args)
    return 1 + size(formula.body)


def conjuncts(formula: Formula) -> Tuple[Formula, ...]:
    if isinstance(formula, And):
        return formula.args
    if formula == TRUE:
        return ()
    return (formula,)


def substitute(formula: Formula, sigma: Mapping[Var, Term]) -> Formula:
    if isinstance(formula, Truth):
        return formula
    if isinstance(formula, AtomF):
        return AtomF(substitute_syntax(formula.atom, sigma))
    if isinstance(formula, Not):
        return neg(substitute(formula.arg, sigma))
    if isinstance(formula, And):
        return conj(*(substitute(a, sigma) for a in formula.args))
    if isinstance(formula, Or):
        return disj(*(substitute(a, sigma) for a in formula.args))
    inner = {v: t for v, t in sigma.items() if v not in formula.variables}
    return type(formula)(formula.variables, substitute(formula.body, inner))


def map_atoms(formula: Formula, fn: Callable[[Atom], Formula]) -> Formula:
    if isinstance(formula, Truth):
        return formula
    if isinstance(formula, AtomF):
        return fn(formula.atom)
    if isinstance(formula, Not):
        return neg(map_atoms(formula.arg, fn))
    if isinstance(formula, And):
        return conj(*(map_atoms(a, fn) for a in formula.args))
    if isinstance(formula, Or):
        return disj(*(map_atoms(a, fn) for a in formula.args))
    return type(formula)(formula.variables, map_atoms(formula.body, fn))


def expand_predicates(formula: Formula,
                      definitions: Mapping[str, Tuple[Tuple[Var, ...], Formula]]) -> Formula:
    """Replace defined predicate atoms by their (instantiated) definitions"""

    def expand(atom: Atom) -> Formula:
        if isinstance(atom, Pred) and atom.name in definitions:
            params, body = definitions[atom.name]
            return substitute(body, dict(zip(params, atom.args)))
        return AtomF(atom)

    return map_atoms(formula, expand)


# ---------------------------------------------------------------- normal forms


def nnf(formula: Formula, negated: bool = False) -> Formula:
    if isinstance(formula, Truth):
        return Truth(formula.value != negated)
    if isinstance(formula, AtomF):
        if not negated:
            return formula
        if isinstance(formula.atom, Cmp):
            atom = formula.atom
            return AtomF(Cmp(NEGATED_COMPARISON[atom.op], atom.lhs, atom.rhs))
        return Not(formula)
    if isinstance(formula, Not):
        return nnf(formula.arg, not negated)
    if isinstance(formula, And):
        parts = [nnf(a, negated) for a in formula.args]
        return disj(*parts) if negated else conj(*parts)
    if isinstance(formula, Or):
        parts = [nnf(a, negated) for a in formula.args]
        return conj(*parts) if negated else disj(*parts)
    if isinstance(formula, Forall):
        body = nnf(formula.body, negated)
        return Exists(formula.variables, body) if negated else Forall(formula.variables, body)
    body = nnf(formula.body, negated)
    return Forall(formula.variables, body) if negated else Exists(formula.variables, body)


def _require_quantifier_free(formula: Formula) -> None:
    if isinstance(formula, (Forall, Exists)):
        raise UnsupportedInput(f"normal form of a quantified formula requested: {formula}")
    if isinstance(formula, Not):
        _require_quantifier_free(formula.arg)
    elif isinstance(formula, (And, Or)):
        for arg in formula.args:
            _require_quantifier_free(arg)


def dnf(formula: Formula, max_cubes: Optional[int] = None) -> List[Cube]:
    """Cubes of a disjunctive normal form; an empty list means false"""
    _require_quantifier_free(formula)
    cubes = _dnf(nnf(formula), max_cubes)
    result: List[Cube] = []
    for cube in cubes:
        cube = tuple(dict.fromkeys(cube))
        if _contradictory(cube) or cube in result:
            continue
        result.append(cube)
    return result


def _dnf(formula: Formula, max_cubes: Optional[int]) -> List[Cube]:
    if formula == TRUE:
        return [()]
    if formula == FALSE:
        return []
    literal = to_literal(formula)
    if literal is not None:
        return [(literal,)]
    if isinstance(formula, Or):
        cubes: List[Cube] = []
        for arg in formula.args:
            cubes.extend(_dnf(arg, max_cubes))
            _check_bound(len(cubes), max_cubes)
        return cubes
    cubes = [()]
    for arg in formula.args:
        part = _dnf(arg, max_cubes)
        _check_bound(len(cubes) * len(part), max_cubes)
        cubes = [left + right for left, right in product(cubes, part)]
    return cubes


def _check_bound(count: int, max_cubes: Optional[int]) -> None:
    if max_cubes is not None and count > max_cubes:
        raise ResourceExhausted("DNF cubes", max_cubes)


def _contradictory(literals: Iterable[Literal]) -> bool:
    seen = set(literals)
    return any(l.negate() in seen for l in seen)


def cnf(formula: Formula, max_clauses: Optional[int] = None) -> List[Clause]:
    """Clauses of a conjunctive normal form by distribution; an empty list means true"""
    negated = dnf(neg(formula), max_clauses)
    return [tuple(l.negate() for l in cube) for cube in negated]


# ---------------------------------------------------------------- evaluation


def evaluate(formula: Formula, atom_value: Callable[[Atom], bool]) -> bool:
    if isinstance(formula, Truth):
        return formula.value
    if isinstance(formula, AtomF):
        return atom_value(formula.atom)
    if isinstance(formula, Not):
        return not evaluate(formula.arg, atom_value)
    if isinstance(formula, And):
        return all(evaluate(a, atom_value) for a in formula.args)
    if isinstance(formula, Or):
        return any(evaluate(a, atom_value) for a in formula.args)
    raise UnsupportedInput("evaluate expects a quantifier-free formula")


# ---------------------------------------------------------------- rendering


def render(formula: Formula) -> str:
    if isinstance(formula, Truth):
        return "true" if formula.value else "false"
    if isinstance(formula, AtomF):
        return str(formula.atom)
    if isinstance(formula, Not):
        if isinstance(formula.arg, AtomF) and isinstance(formula.arg.atom, Eq):
            return f"{formula.arg.atom.lhs} != {formula.arg.atom.rhs}"
        return f"NOT({render(formula.arg)})"
    if isinstance(formula, And):
        return " & ".join(_wrap(a, And) for a in formula.args)
    if isinstance(formula, Or):
        return " | ".join(_wrap(a, Or) for a in formula.args)
    keyword = "forall" if isinstance(formula, Forall) else "exists"
    names = ", ".join(v.name for v in formula.variables)
    return f"{keyword} {names}. {render(formula.body)}"


def _wrap(formula: Formula, parent) -> str:
    if isinstance(formula, (And, Or, Forall, Exists)) and not isinstance(formula, parent):
        return f"({render(formula)})"
    return render(formula)
