"""Property-directed symbol elimination in local theory extensions.

Given a ground goal ``G`` and a set of parameter symbols, compute a universal
constraint ``Gamma`` over the parameters such that ``K + Gamma + G`` is
unsatisfiable and every other such universal constraint entails ``Gamma``.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from app.logic import formula as fm
from app.logic import linarith as la
from app.logic.errors import ResourceExhausted, UnsupportedInput
from app.logic.formula import FALSE, TRUE, Formula
from app.logic.ground_solver import GroundProblem, GroundSolver
from app.logic.limits import RunLimits
from app.logic.locality import ExtTerm, TheoryExtension, check_sat_ext, est, psi_close, reduce_to_base
from app.logic.terms import (
    NUM, POINT, App, Clause, Cmp, Const, Eq, Literal, Pred, Term, Var, constants, iter_terms,
)

logger = logging.getLogger(__name__)

REGIME_WEAKEST = "weakest"
REGIME_MODEL_COMPLETION = "sound, weakest-modulo-model-completion"
VARIABLE_POOL = ("u", "v", "w", "x", "y", "z")


class ElimMode(str, Enum):
    REFUTE = "refute-G"
    ENSURE_VALID = "ensure-valid"


@dataclass(frozen=True)
class ElimRequest:
    """``goal`` holds ground clauses, or the residue formulas in ensure-valid mode"""

    ext: TheoryExtension
    params: FrozenSet[str]
    goal: Tuple[Clause, ...] = ()
    mode: ElimMode = ElimMode.REFUTE
    residue: Tuple[Formula, ...] = ()
    extra_terms: Tuple[ExtTerm, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "params", frozenset(self.params))
        object.__setattr__(self, "goal", tuple(tuple(c) for c in self.goal))

    def ground_goal(self, max_dnf: Optional[int] = None) -> Tuple[Clause, ...]:
        if self.mode is ElimMode.REFUTE:
            return self.goal
        return residue_goal(self.residue, max_dnf)


@dataclass(frozen=True)
class Constraint:
    variables: Tuple[Var, ...]
    body: Formula
    regime: str = REGIME_WEAKEST

    def formula(self) -> Formula:
        return fm.forall(self.variables, self.body)

    @property
    def is_trivial(self) -> bool:
        return self.body == TRUE

    def __str__(self) -> str:
        return str(self.formula())


@dataclass
class Elimination:
    """Intermediate results kept for reports and traces"""

    constraint: Constraint
    kept: Tuple[Const, ...]
    eliminated: Tuple[Const, ...]
    cubes: List[Formula] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)


def residue_goal(residue: Sequence[Formula], max_dnf: Optional[int] = None) -> Tuple[Clause, ...]:
    """Ground clauses for ``exists x. phi_1(x) | ... | phi_n(x)`` with Skolem constants named after the variables"""
    sigma: Dict[Var, Term] = {}
    for phi in residue:
        for var in fm.free_variables(phi):
            sigma.setdefault(var, Const(var.name, var.sort))
    disjunction = fm.disj(*(fm.substitute(phi, sigma) for phi in residue))
    return tuple(fm.cnf(disjunction, max_dnf))


def _parameter_constants(definitions: Sequence[Tuple[Const, App]], params: FrozenSet[str],
                         goal: Sequence[Clause]) -> Tuple[Dict[Const, App], Set[Const], Set[Const]]:
    """Definitions rooted at a parameter, their argument constants and the parameter constants.

    Only the argument constants become quantified variables; parameter constants stay as they are.
    """
    rooted = {const: term for const, term in definitions if term.fn in params}
    arguments: Set[Const] = set()
    for term in rooted.values():
        arguments.update(a for a in term.args if isinstance(a, Const) and a.name not in params)
    fixed = {const for const in constants(tuple(l for c in goal for l in c)) if const.name in params}
    return rooted, arguments, fixed


def _drop_free_predicates(cube: Sequence[Literal], params: FrozenSet[str]) -> List[Literal]:
    return [l for l in cube if not (isinstance(l.atom, Pred) and l.atom.name not in params)]


def _project(cube: Sequence[Literal], eliminated: Sequence[Const], card: Optional[int],
             max_dnf: Optional[int]) -> Formula:
    formula = fm.cube_formula(tuple(cube))
    for const in eliminated:
        if const not in set(fm.formula_terms(formula)):
            continue
        if const.sort == NUM:
            formula = la.qe(const, formula, max_dnf)
        else:
            formula = la.qe_point(const, formula, card, max_dnf)
    return formula


def _variable_names(kept: Sequence[Const]) -> Dict[Const, Var]:
    names: Dict[Const, Var] = {}
    for index, const in enumerate(sorted(kept, key=lambda c: c.name)):
        base = VARIABLE_POOL[index % len(VARIABLE_POOL)]
        round_ = index // len(VARIABLE_POOL)
        names[const] = Var(base if round_ == 0 else f"{base}{round_}", const.sort)
    return names


def _replace_constants(formula: Formula, mapping: Dict[Term, Term]) -> Formula:
    def rewrite(term: Term) -> Term:
        if term in mapping:
            return mapping[term]
        if isinstance(term, App):
            return App(term.fn, tuple(rewrite(a) for a in term.args), term.sort)
        return term

    def rewrite_atom(atom):
        if isinstance(atom, Pred):
            return fm.AtomF(Pred(atom.name, tuple(rewrite(a) for a in atom.args)))
        if isinstance(atom, Eq):
            return fm.AtomF(Eq(rewrite(atom.lhs), rewrite(atom.rhs)))
        return fm.AtomF(Cmp(atom.op, rewrite(atom.lhs), rewrite(atom.rhs)))

    return fm.map_atoms(formula, rewrite_atom)


def pd_eliminate(req: ElimRequest, limits: RunLimits = RunLimits()) -> Elimination:
    """Weakest universal parameter constraint refuting the request's goal"""
    goal = req.ground_goal(limits.max_dnf)
    purification, instantiation, _ = reduce_to_base(req.ext, goal, req.extra_terms)
    rooted, arguments, fixed = _parameter_constants(purification.definitions, req.params, goal)
    kept = set(rooted) | arguments | fixed
    everything: Dict[Const, None] = {}
    for clause in purification.clauses():
        for const in constants(clause):
            everything.setdefault(const, None)
    eliminated = tuple(c for c in everything if c not in kept and c.name not in req.params)
    logger.info("keeping %s; eliminating %s", ", ".join(sorted(str(c) for c in kept)) or "nothing",
                ", ".join(str(c) for c in eliminated) or "nothing")

    card = req.ext.psort_card
    solver = GroundSolver(GroundProblem(purification.clauses(), card))
    cubes: List[Formula] = []
    while solver.check().is_sat:
        if len(cubes) >= limits.max_dnf:
            raise ResourceExhausted("ALL-SAT cubes", limits.max_dnf)
        cube = _drop_free_predicates(solver.cube(), req.params)
        projected = _project(cube, eliminated, card, limits.max_dnf)
        logger.debug("cube %d projects to %s", len(cubes) + 1, projected)
        cubes.append(projected)
        blocking = fm.cnf(fm.neg(projected), limits.max_dnf)
        if not blocking:
            break
        for clause in blocking:
            solver.add_clause(clause)

    existential = la.simplify(fm.disj(*cubes), limits.max_dnf)
    existential = _replace_constants(existential, dict(rooted))
    names = _variable_names(sorted(arguments, key=lambda c: c.name))
    body = la.simplify(fm.neg(_replace_constants(existential, dict(names))), limits.max_dnf)
    variables = tuple(v for v in names.values() if v in fm.free_variables(body))
    points_eliminated = any(c.sort == POINT for c in eliminated)
    regime = REGIME_MODEL_COMPLETION if points_eliminated and card is None else REGIME_WEAKEST
    constraint = Constraint(variables, body, regime)
    logger.info("constraint: %s", constraint)
    return Elimination(constraint, tuple(sorted(kept, key=lambda c: c.name)), eliminated, cubes,
                       list(instantiation.warnings))


def constraint_instances(constraint: Constraint, goal: Sequence[Clause], ext: TheoryExtension,
                         max_dnf: Optional[int] = None) -> List[Clause]:
    """Ground instances of the constraint over the constants of the goal and its closure"""
    terms = psi_close(ext.psi, est(ext.axioms(), goal, ext.extension_symbols), ext.distance_symbol)
    pool: Dict[Const, None] = {}
    for const in constants(tuple(l for c in goal for l in c)):
        pool.setdefault(const, None)
    for term in terms:
        for sub in iter_terms(term):
            if isinstance(sub, Const):
                pool.setdefault(sub, None)
    choices = [[c for c in pool if c.sort == v.sort] for v in constraint.variables]
    instances: List[Clause] = []
    for combination in product(*choices):
        ground = fm.substitute(constraint.body, dict(zip(constraint.variables, combination)))
        instances.extend(fm.cnf(ground, max_dnf))
    return instances


def verify_constraint(constraint: Constraint, req: ElimRequest, limits: RunLimits = RunLimits()) -> bool:
    """Whether the constraint makes the request's goal unsatisfiable"""
    goal = req.ground_goal(limits.max_dnf)
    if constraint.body == FALSE:
        return True
    try:
        instances = constraint_instances(constraint, goal, req.ext, limits.max_dnf)
        return not check_sat_ext(req.ext, tuple(goal) + tuple(instances), req.extra_terms).is_sat
    except (ResourceExhausted, UnsupportedInput) as exc:
        logger.warning("constraint could not be verified: %s", exc)
        return False
