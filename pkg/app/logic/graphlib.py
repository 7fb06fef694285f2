"""Parametric graph classes, the symmetric closures and class inclusion checks.

A class is axiomatized by inclusion, exclusion and transfer schemata whose
conditions are named predicates ``pi_*``. Eliminating the edge predicate of
a class combined with a closure gives an axiomatization of the transformed
class over the observable edge predicate.
"""
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx

from app.logic import formula as fm
from app.logic.errors import ResourceExhausted, UnsupportedInput, UsageError
from app.logic.formula import TRUE, Formula
from app.logic.hres import (
    BackgroundTheory, ConstrainedClause, SaturationResult, clause_renamings, eliminate,
)
from app.logic.limits import RunLimits
from app.logic.locality import TheoryExtension, check_sat_ext
from app.logic.ordering import Precedence
from app.logic.structures import FiniteStructure, relation_tables
from app.logic.symelim import Constraint, ElimRequest, pd_eliminate, verify_constraint
from app.logic.terms import (
    NUM, App, Clause, Cmp, Const, Eq, Literal, Num, Pred, Term, Var, clause_str, constants, variables,
)

logger = logging.getLogger(__name__)

U, V, W, X = Var("u"), Var("v"), Var("w"), Var("x")
SKOLEM_NAMES = ("a", "b", "c", "e", "f", "g")


class SchemaKind(str, Enum):
    INCLUSION = "inclusion"
    EXCLUSION = "exclusion"
    TRANSFER = "transfer"


class TransformationTag(str, Enum):
    IDENTITY = "identity"
    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True)
class PiSchema:
    kind: SchemaKind
    predicate: str
    body: Formula

    @property
    def variables(self) -> Tuple[Var, ...]:
        return (U, W, V) if self.kind is SchemaKind.TRANSFER else (U, V)

    def atom(self) -> Pred:
        return Pred(self.predicate, self.variables)


@dataclass(frozen=True)
class GraphClassSpec:
    name: str
    schemas: Tuple[PiSchema, ...] = ()
    parameters: FrozenSet[str] = frozenset()
    side_conditions: Tuple[Clause, ...] = ()
    edge: str = "E"

    def definitions(self) -> Dict[str, Tuple[Tuple[Var, ...], Formula]]:
        return {s.predicate: (s.variables, s.body) for s in self.schemas}

    def functions(self) -> FrozenSet[str]:
        names: Set[str] = set()
        for schema in self.schemas:
            for term in fm.formula_terms(schema.body):
                if isinstance(term, App) and not term.is_arithmetic:
                    names.add(term.fn)
        return frozenset(names)

    def has(self, kind: SchemaKind) -> bool:
        return any(s.kind is kind for s in self.schemas)


@dataclass(frozen=True)
class Transformation:
    tag: TransformationTag = TransformationTag.IDENTITY
    source: str = "E"
    target: str = "F"

    def clauses(self) -> List[ConstrainedClause]:
        x, y = Var("x"), Var("y")

        def e(a, b, positive=True):
            return Literal(Pred(self.source, (a, b)), positive)

        f = fm.AtomF(Pred(self.target, (x, y)))
        if self.tag is TransformationTag.MINUS:
            return [ConstrainedClause(f, (e(x, y),)),
                    ConstrainedClause(f, (e(y, x),)),
                    ConstrainedClause(fm.neg(f), (e(x, y, False), e(y, x, False)))]
        if self.tag is TransformationTag.PLUS:
            return [ConstrainedClause(fm.neg(f), (e(x, y, False),)),
                    ConstrainedClause(fm.neg(f), (e(y, x, False),)),
                    ConstrainedClause(f, (e(x, y), e(y, x)))]
        return []


@dataclass(frozen=True)
class ClassExpression:
    spec: GraphClassSpec
    transformation: Transformation = Transformation()

    def __str__(self) -> str:
        suffix = {TransformationTag.PLUS: "+", TransformationTag.MINUS: "-"}.get(self.transformation.tag, "")
        return f"({self.spec.name}){suffix}" if suffix else self.spec.name


# ---------------------------------------------------------------- class definitions


def _bound(argument: str, point: Var) -> Tuple[Term, FrozenSet[str]]:
    try:
        return Num(Fraction(argument)), frozenset()
    except ValueError:
        return App(argument, (point,)), frozenset({argument})


def _d(a: Term, b: Term, symbol: str = "d") -> App:
    return App(symbol, (a, b))


def min_dg(r: str = "r", distance: str = "d") -> GraphClassSpec:
    bound, params = _bound(r, U)
    body = fm.conj(fm.lit(Literal(Eq(U, V), False)), fm.AtomF(Cmp("<=", _d(U, V, distance), bound)))
    return GraphClassSpec(f"MinDG({r})", (PiSchema(SchemaKind.INCLUSION, "pi_i", body),), params)


def max_dg(r: str = "r", distance: str = "d") -> GraphClassSpec:
    bound, params = _bound(r, U)
    body = fm.AtomF(Cmp(">", _d(U, V, distance), bound))
    return GraphClassSpec(f"MaxDG({r})", (PiSchema(SchemaKind.EXCLUSION, "pi_e", body),), params)


def crg(distance: str = "d") -> GraphClassSpec:
    body = fm.conj(fm.lit(Literal(Eq(U, W), False)),
                   fm.AtomF(Cmp("<=", _d(U, W, distance), _d(U, V, distance))))
    return GraphClassSpec("CRG", (PiSchema(SchemaKind.TRANSFER, "pi_t", body),))


def udg(distance: str = "d") -> GraphClassSpec:
    return replace(intersect(min_dg("1", distance), max_dg("1", distance)), name="UDG")


def dtg(rbar: str = "rr", r: str = "1", distance: str = "d") -> GraphClassSpec:
    """Edge from u to v when u != v and d(u, v) <= rbar(u), none when d(u, v) > rbar(u); rbar(u) <= r"""
    own, params = _bound(rbar, U)
    bound, more = _bound(r, U)
    inclusion = fm.conj(fm.lit(Literal(Eq(U, V), False)), fm.AtomF(Cmp("<=", _d(U, V, distance), own)))
    exclusion = fm.AtomF(Cmp(">", _d(U, V, distance), own))
    side = (Literal(Cmp("<=", own, bound)),)
    return GraphClassSpec(f"DTG({rbar}, {r})",
                          (PiSchema(SchemaKind.INCLUSION, "pi_i", inclusion),
                           PiSchema(SchemaKind.EXCLUSION, "pi_e", exclusion)),
                          params | more, (side,))


def qudg(r: str = "r", distance: str = "d") -> ClassExpression:
    spec = replace(intersect(min_dg(r, distance), max_dg("1", distance)), name=f"QUDG({r})")
    return ClassExpression(spec, Transformation(TransformationTag.MINUS))


PRESETS = {
    "MinDG": min_dg,
    "MaxDG": max_dg,
    "CRG": crg,
    "UDG": udg,
    "DTG": dtg,
    "QUDG": qudg,
}


def preset(name: str, *args: str) -> ClassExpression:
    if name not in PRESETS:
        raise UsageError(f"unknown graph class {name!r}; expected one of {', '.join(PRESETS)}")
    built = PRESETS[name](*args)
    return built if isinstance(built, ClassExpression) else ClassExpression(built)


def intersect(a: GraphClassSpec, b: GraphClassSpec) -> GraphClassSpec:
    """Class whose axioms are the union of both axiom sets"""
    if a.edge != b.edge:
        raise UsageError(f"cannot intersect classes over different edge symbols {a.edge} and {b.edge}")
    schemas = list(a.schemas)
    taken = {s.predicate for s in schemas}
    for schema in b.schemas:
        if schema in schemas:
            continue
        name, counter = schema.predicate, 1
        while name in taken:
            counter += 1
            name = f"{schema.predicate}_{counter}"
        taken.add(name)
        schemas.append(replace(schema, predicate=name))
    side = tuple(dict.fromkeys(a.side_conditions + b.side_conditions))
    if not b.schemas and not b.side_conditions:
        return replace(a, parameters=a.parameters | b.parameters)
    return GraphClassSpec(f"{a.name} & {b.name}", tuple(schemas), a.parameters | b.parameters, side, a.edge)


# ---------------------------------------------------------------- axioms


def axioms(spec: GraphClassSpec, expanded: bool = False) -> List[ConstrainedClause]:
    """Constrained edge clauses of the schemata, with named or expanded conditions"""
    edge = spec.edge
    clauses: List[ConstrainedClause] = []
    for schema in spec.schemas:
        condition = schema.body if expanded else fm.AtomF(schema.atom())
        if schema.kind is SchemaKind.INCLUSION:
            literals = (Literal(Pred(edge, (U, V))),)
        elif schema.kind is SchemaKind.EXCLUSION:
            literals = (Literal(Pred(edge, (U, V)), False),)
        else:
            literals = (Literal(Pred(edge, (U, V)), False), Literal(Pred(edge, (U, W))))
        clauses.append(ConstrainedClause(condition, literals))
    return clauses


def condition_axioms(spec: GraphClassSpec) -> List[Clause]:
    """Closure properties of the named conditions under a transfer condition"""
    transfers = [s.predicate for s in spec.schemas if s.kind is SchemaKind.TRANSFER]
    if not transfers:
        return []
    inclusions = [s.predicate for s in spec.schemas if s.kind is SchemaKind.INCLUSION]
    exclusions = [s.predicate for s in spec.schemas if s.kind is SchemaKind.EXCLUSION]

    def p(name, *args, positive=True):
        return Literal(Pred(name, args), positive)

    result: List[Clause] = []
    for t in transfers:
        for i in inclusions:
            result.append((p(i, U, V, positive=False), p(t, U, W, V, positive=False), p(i, U, W)))
        for e in exclusions:
            result.append((p(e, U, W, positive=False), p(t, U, W, V, positive=False), p(e, U, V)))
        for t2 in transfers:
            result.append((p(t, U, W, V, positive=False), p(t2, U, X, W, positive=False), p(t, U, X, V)))
    return result


def expand(clause: ConstrainedClause, spec: GraphClassSpec) -> ConstrainedClause:
    return ConstrainedClause(fm.expand_predicates(clause.constraint, spec.definitions()), clause.literals, clause.id)


@dataclass
class TransformedClass:
    expression: ClassExpression
    clauses: Optional[List[ConstrainedClause]]
    saturation: Optional[SaturationResult] = None

    @property
    def converged(self) -> bool:
        return self.clauses is not None

    def expanded(self) -> List[ConstrainedClause]:
        return [expand(c, self.expression.spec) for c in self.clauses or ()]

    def formula(self) -> Formula:
        return fm.conj(*(c.as_formula() for c in self.clauses or ()))


def transformed_axiomatization(expression: ClassExpression, limits: RunLimits = RunLimits(),
                               prec: Optional[Precedence] = None) -> TransformedClass:
    """Edge-free axiomatization of the transformed class over the target edge symbol"""
    spec, transformation = expression.spec, expression.transformation
    if transformation.tag is TransformationTag.IDENTITY:
        renamed = replace(spec, edge=transformation.target)
        return TransformedClass(expression, axioms(renamed))
    if transformation.source != spec.edge:
        raise UsageError(f"transformation reads {transformation.source} but the class uses {spec.edge}")
    clauses = axioms(spec) + transformation.clauses()
    bg = BackgroundTheory(tuple(condition_axioms(spec)), None, limits.bg_depth)
    residue, saturation = eliminate(clauses, spec.edge, bg, prec, limits)
    if residue is None:
        logger.warning("saturation for %s did not terminate; try exporting constrained Horn clauses", expression)
    return TransformedClass(expression, residue, saturation)


# ---------------------------------------------------------------- inclusion


class InclusionVerdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    HOLDS_UNDER = "holds-under"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class InclusionProblem:
    left: ClassExpression
    right: ClassExpression
    theory: str = "Tm"
    parameters: FrozenSet[str] = frozenset()
    psort_card: Optional[int] = None
    assumptions: Tuple[Clause, ...] = ()


@dataclass
class DisjunctResult:
    index: int
    goal: Tuple[Literal, ...]
    satisfiable: bool
    model: List[str] = field(default_factory=list)
    constraint: Optional[Constraint] = None
    verified: Optional[bool] = None

    def goal_str(self) -> str:
        return " & ".join(str(l) for l in self.goal)


@dataclass
class InclusionResult:
    verdict: InclusionVerdict
    disjuncts: List[DisjunctResult] = field(default_factory=list)
    pruned: List[str] = field(default_factory=list)
    constraint: Formula = TRUE
    left: Optional[TransformedClass] = None
    right: Optional[TransformedClass] = None


def _ordinary(clauses: Iterable[ConstrainedClause], max_dnf: Optional[int]) -> List[Clause]:
    result: List[Clause] = []
    for clause in clauses:
        result.extend(clause.to_clauses(max_dnf))
    return result


def _is_variant(clause: Clause, others: Sequence[Clause]) -> bool:
    if not all(isinstance(l.atom, Pred) for l in clause):
        return any(set(clause) == set(o) for o in others)
    for other in others:
        if all(isinstance(l.atom, Pred) for l in other) and next(clause_renamings(other, clause), None) is not None:
            return True
    return False


def skolemize_negation(clause: Clause) -> Tuple[Literal, ...]:
    """Ground cube of the negated clause, with constants a, b, c, ..."""
    names = {var: Const(SKOLEM_NAMES[i] if i < len(SKOLEM_NAMES) else f"a{i}", var.sort)
             for i, var in enumerate(variables(clause))}
    return tuple(l.negate().substitute(names) for l in clause)


def _ground_instances(clauses: Sequence[Clause], points: Sequence[Const]) -> List[Clause]:
    instances: Dict[Clause, None] = {}
    for clause in clauses:
        clause_vars = variables(clause)
        for choice in product(points, repeat=len(clause_vars)):
            instances.setdefault(tuple(l.substitute(dict(zip(clause_vars, choice))) for l in clause), None)
    return list(instances)


def _expand_clauses(clauses: Sequence[Clause], spec: GraphClassSpec, max_dnf: Optional[int]) -> List[Clause]:
    definitions = spec.definitions()
    expanded: List[Clause] = []
    for clause in clauses:
        expanded.extend(fm.cnf(fm.expand_predicates(fm.clause_formula(clause), definitions), max_dnf))
    return expanded


def inclusion_extension(problem: InclusionProblem) -> TheoryExtension:
    symbols = problem.left.spec.functions() | problem.right.spec.functions() | {"d"}
    side = problem.left.spec.side_conditions + problem.right.spec.side_conditions + problem.assumptions
    return TheoryExtension.preset(problem.theory, side, symbols, problem.parameters, problem.psort_card)


def check_inclusion(problem: InclusionProblem, limits: RunLimits = RunLimits()) -> InclusionResult:
    """Whether every graph of the left class belongs to the right class"""
    left = transformed_axiomatization(problem.left, limits)
    right = transformed_axiomatization(problem.right, limits)
    if not left.converged or not right.converged:
        return InclusionResult(InclusionVerdict.DIVERGED, left=left, right=right)
    if problem.left.transformation.target != problem.right.transformation.target:
        raise UsageError("both classes must be observed through the same edge symbol")
    g1 = _ordinary(left.clauses, limits.max_dnf)
    g2 = _ordinary(right.clauses, limits.max_dnf)
    ext = inclusion_extension(problem)
    result = InclusionResult(InclusionVerdict.HOLDS, left=left, right=right)
    constraints: List[Formula] = []
    index = 0
    for clause in g2:
        if _is_variant(clause, g1):
            result.pruned.append(clause_str(clause))
            continue
        index += 1
        goal = skolemize_negation(clause)
        points = [c for c in dict.fromkeys(t for l in goal for t in constants(l)) if c.sort != NUM]
        if not points:
            points = [Const(SKOLEM_NAMES[0])]
        left_instances = _expand_clauses(_ground_instances(g1, points), problem.left.spec, limits.max_dnf)
        goal_clauses = _expand_clauses([(l,) for l in goal], problem.right.spec, limits.max_dnf)
        ground = tuple(left_instances) + tuple(goal_clauses)
        outcome = check_sat_ext(ext, ground)
        disjunct = DisjunctResult(index, goal, outcome.is_sat, outcome.model_lines())
        result.disjuncts.append(disjunct)
        logger.info("disjunct %d (%s): %s", index, disjunct.goal_str(), "sat" if outcome.is_sat else "unsat")
        if not outcome.is_sat:
            continue
        if not problem.parameters:
            result.verdict = InclusionVerdict.FAILS
            continue
        request = ElimRequest(ext, problem.parameters, ground)
        try:
            elimination = pd_eliminate(request, limits)
        except (ResourceExhausted, UnsupportedInput) as exc:
            logger.warning("no constraint for disjunct %d: %s", index, exc)
            result.verdict = InclusionVerdict.FAILS
            continue
        disjunct.constraint = elimination.constraint
        disjunct.verified = verify_constraint(elimination.constraint, request, limits)
        constraints.append(elimination.constraint.formula())
        if result.verdict is InclusionVerdict.HOLDS:
            result.verdict = InclusionVerdict.HOLDS_UNDER
    result.constraint = fm.conj(*constraints)
    return result


# ---------------------------------------------------------------- finite graphs


def apply_transformation(graph: nx.DiGraph, tag: TransformationTag) -> nx.DiGraph:
    result = nx.DiGraph()
    result.add_nodes_from(graph.nodes)
    for x, y in graph.edges:
        if tag is TransformationTag.IDENTITY:
            result.add_edge(x, y)
        elif tag is TransformationTag.PLUS:
            result.add_edge(x, y)
            result.add_edge(y, x)
        elif graph.has_edge(y, x):
            result.add_edge(x, y)
    return result


def in_class(graph: nx.DiGraph, spec: GraphClassSpec, structure: FiniteStructure) -> bool:
    """Whether the graph over the structure's points satisfies the class axioms"""
    edges = frozenset(graph.edges)
    world = replace(structure, predicates={**structure.predicates, spec.edge: edges})
    clauses = _ordinary([expand(c, spec) for c in axioms(spec)], None)
    return world.satisfies(clauses) and world.satisfies(spec.side_conditions)


def class_family(expression: ClassExpression, structure: FiniteStructure) -> Set[FrozenSet]:
    """Edge sets of every transformed graph of the class over the structure's points"""
    family: Set[FrozenSet] = set()
    for graph in iter_graphs(structure.points):
        if in_class(graph, expression.spec, structure):
            family.add(frozenset(apply_transformation(graph, expression.transformation.tag).edges))
    return family


def iter_graphs(points: Sequence[str]) -> Iterator[nx.DiGraph]:
    """Every directed graph over the points, loops included"""
    for relation in relation_tables(points, 2):
        graph = nx.DiGraph()
        graph.add_nodes_from(points)
        graph.add_edges_from(relation)
        yield graph
