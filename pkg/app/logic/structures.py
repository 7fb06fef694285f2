"""Small finite structures for brute-force semantic checks"""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, FrozenSet, Iterator, Mapping, Optional, Sequence, Tuple, Union

from app.logic import formula as fm
from app.logic.errors import UsageError
from app.logic.formula import Formula
from app.logic.terms import NUM, Clause, Const, Eq, Literal, Num, Pred, Term, Var, variables

Value = Union[str, Fraction]


@dataclass
class FiniteStructure:
    """Points are named; numeric quantifiers range over ``numbers``"""

    points: Tuple[str, ...]
    functions: Dict[str, Dict[Tuple[Value, ...], Fraction]] = field(default_factory=dict)
    predicates: Dict[str, FrozenSet[Tuple[Value, ...]]] = field(default_factory=dict)
    constants: Dict[str, Value] = field(default_factory=dict)
    numbers: Tuple[Fraction, ...] = ()

    def value(self, term: Term, env: Mapping[Var, Value]) -> Value:
        if isinstance(term, Var):
            if term not in env:
                raise UsageError(f"unbound variable {term}")
            return env[term]
        if isinstance(term, Num):
            return term.value
        if isinstance(term, Const):
            if term.name not in self.constants:
                raise UsageError(f"constant {term} has no interpretation")
            return self.constants[term.name]
        args = tuple(self.value(a, env) for a in term.args)
        if term.fn == "+":
            return args[0] + args[1]
        if term.fn == "-":
            return -args[0] if len(args) == 1 else args[0] - args[1]
        if term.fn == "*":
            return args[0] * args[1]
        table = self.functions.get(term.fn)
        if table is None or args not in table:
            raise UsageError(f"{term.fn}{args} has no interpretation")
        return table[args]

    def atom_holds(self, atom, env: Mapping[Var, Value]) -> bool:
        if isinstance(atom, Pred):
            args = tuple(self.value(a, env) for a in atom.args)
            return args in self.predicates.get(atom.name, frozenset())
        lhs, rhs = self.value(atom.lhs, env), self.value(atom.rhs, env)
        if isinstance(atom, Eq):
            return lhs == rhs
        return {"<=": lhs <= rhs, "<": lhs < rhs, ">=": lhs >= rhs, ">": lhs > rhs}[atom.op]

    def holds(self, formula: Formula, env: Optional[Mapping[Var, Value]] = None,
              domains: Optional[Mapping[str, Sequence[Value]]] = None) -> bool:
        env = dict(env or {})
        domains = domains or {}
        if isinstance(formula, fm.Truth):
            return formula.value
        if isinstance(formula, fm.AtomF):
            return self.atom_holds(formula.atom, env)
        if isinstance(formula, fm.Not):
            return not self.holds(formula.arg, env, domains)
        if isinstance(formula, fm.And):
            return all(self.holds(a, env, domains) for a in formula.args)
        if isinstance(formula, fm.Or):
            return any(self.holds(a, env, domains) for a in formula.args)
        ranges = [self.domain(v, domains) for v in formula.variables]
        outcomes = (self.holds(formula.body, {**env, **dict(zip(formula.variables, values))}, domains)
                    for values in product(*ranges))
        return all(outcomes) if isinstance(formula, fm.Forall) else any(outcomes)

    def domain(self, var: Var, domains: Mapping[str, Sequence[Value]]) -> Sequence[Value]:
        if var.name in domains:
            return domains[var.name]
        return self.numbers if var.sort == NUM else self.points

    def literal_holds(self, literal: Literal, env: Mapping[Var, Value]) -> bool:
        return self.atom_holds(literal.atom, env) == literal.positive

    def satisfies(self, clauses: Sequence[Clause]) -> bool:
        """Universal closure of every clause holds"""
        for clause in clauses:
            clause_vars = variables(tuple(clause))
            for values in product(*(self.domain(v, {}) for v in clause_vars)):
                env = dict(zip(clause_vars, values))
                if not any(self.literal_holds(l, env) for l in clause):
                    return False
        return True


def point_names(count: int) -> Tuple[str, ...]:
    return tuple(f"p{i}" for i in range(1, count + 1))


def function_tables(points: Sequence[str], arity: int, grid: Sequence[Fraction]
                    ) -> Iterator[Dict[Tuple[Value, ...], Fraction]]:
    keys = list(product(points, repeat=arity))
    for values in product(grid, repeat=len(keys)):
        yield dict(zip(keys, values))


def relation_tables(points: Sequence[str], arity: int) -> Iterator[FrozenSet[Tuple[Value, ...]]]:
    keys = list(product(points, repeat=arity))
    for mask in product((False, True), repeat=len(keys)):
        yield frozenset(k for k, keep in zip(keys, mask) if keep)


def enumerate_structures(points: Sequence[str], functions: Mapping[str, int], grid: Sequence[Fraction],
                         constraints: Sequence[Clause] = (), numbers: Sequence[Fraction] = ()
                         ) -> Iterator[FiniteStructure]:
    """Every interpretation of point-argument numeric functions over ``grid`` satisfying ``constraints``"""
    names = sorted(functions)
    choices = [list(function_tables(points, functions[n], grid)) for n in names]
    for tables in product(*choices):
        structure = FiniteStructure(tuple(points), dict(zip(names, tables)), numbers=tuple(numbers))
        if structure.satisfies(constraints):
            yield structure
