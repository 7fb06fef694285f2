from fractions import Fraction
from itertools import product

import networkx as nx
import pytest

from app.logic import formula as fm
from app.logic.errors import UsageError
from app.logic.formula import AtomF
from app.logic.graphlib import (
    ClassExpression, GraphClassSpec, InclusionProblem, InclusionVerdict, SchemaKind, Transformation,
    TransformationTag, apply_transformation, axioms, check_inclusion, class_family, condition_axioms, crg, in_class,
    intersect, iter_graphs, max_dg, min_dg, preset, qudg, transformed_axiomatization, udg,
)
from app.logic.structures import FiniteStructure, relation_tables
from app.logic.terms import App, Cmp, Eq, Num, Var

POINTS = ("p1", "p2")


def test_min_dg_axiom():
    [clause] = axioms(min_dg("r"))
    assert str(clause) == "pi_i(u, v) || E(u, v)"
    [expanded] = axioms(min_dg("r"), expanded=True)
    assert str(expanded) == "u != v & d(u, v) <= r(u) || E(u, v)"
    assert min_dg("r").parameters == frozenset({"r"})


def test_max_dg_with_numeric_bound():
    [expanded] = axioms(max_dg("1"), expanded=True)
    assert str(expanded) == "d(u, v) > 1 || NOT(E(u, v))"
    assert max_dg("1").parameters == frozenset()


def test_class_without_conditions_has_no_axioms():
    assert axioms(GraphClassSpec("Any")) == []


def test_unit_disk_graphs_intersect_both_bounds():
    spec = udg()
    assert [s.kind for s in spec.schemas] == [SchemaKind.INCLUSION, SchemaKind.EXCLUSION]
    assert len(axioms(spec)) == 2


def test_intersection_laws():
    a = min_dg("r")
    assert intersect(a, GraphClassSpec("Any")).schemas == a.schemas
    assert intersect(a, a).schemas == a.schemas
    with pytest.raises(UsageError):
        intersect(a, GraphClassSpec("Other", edge="G"))


def test_transfer_condition_axioms():
    spec = intersect(intersect(min_dg("r"), max_dg("1")), crg())
    assert len(condition_axioms(spec)) == 3
    assert condition_axioms(min_dg("r")) == []


def test_unknown_class_name():
    with pytest.raises(UsageError):
        preset("Planar")
    assert str(preset("QUDG", "r")) == "(QUDG(r))-"


def test_closures_on_finite_graphs():
    graph = nx.DiGraph([("p1", "p2")])
    graph.add_node("p3")
    assert set(apply_transformation(graph, TransformationTag.PLUS).edges) == {("p1", "p2"), ("p2", "p1")}
    assert set(apply_transformation(graph, TransformationTag.MINUS).edges) == set()
    assert set(apply_transformation(graph, TransformationTag.IDENTITY).edges) == {("p1", "p2")}


def test_every_graph_over_two_points():
    graphs = list(iter_graphs(POINTS))
    assert len(graphs) == 16
    assert all(set(g.nodes) == set(POINTS) for g in graphs)
    assert len({frozenset(g.edges) for g in graphs}) == 16


def test_identity_transformation_renames_edges():
    result = transformed_axiomatization(ClassExpression(min_dg("r")))
    assert result.converged
    assert [str(c) for c in result.clauses] == ["pi_i(u, v) || F(u, v)"]


# ---------------------------------------------------------------- transformed classes on two points

DISTANCES = [Fraction(1, 2), Fraction(1), Fraction(3, 2)]
RANGES = [Fraction(1, 2), Fraction(1), Fraction(2)]


def _structures():
    for far, r1, r2 in product(DISTANCES, RANGES, RANGES):
        d = {("p1", "p1"): Fraction(0), ("p2", "p2"): Fraction(0), ("p1", "p2"): far, ("p2", "p1"): far}
        yield FiniteStructure(POINTS, {"d": d, "r": {("p1",): r1, ("p2",): r2}})


def _observed_clauses(transformed):
    clauses = []
    for clause in transformed.expanded():
        clauses.extend(clause.to_clauses())
    return clauses


@pytest.mark.parametrize("tag", [TransformationTag.MINUS, TransformationTag.PLUS])
def test_transformed_axioms_describe_the_transformed_graphs(tag):
    spec = intersect(min_dg("r"), max_dg("1"))
    expression = ClassExpression(spec, Transformation(tag))
    transformed = transformed_axiomatization(expression)
    assert transformed.converged
    clauses = _observed_clauses(transformed)
    for structure in _structures():
        family = class_family(expression, structure)
        for relation in relation_tables(POINTS, 2):
            world = FiniteStructure(structure.points, structure.functions, {"F": relation})
            assert world.satisfies(clauses) == (relation in family), (structure.functions, sorted(relation))


def test_quasi_unit_disk_closure_is_symmetric():
    transformed = transformed_axiomatization(qudg("r"))
    assert transformed.converged
    clauses = _observed_clauses(transformed)
    asymmetric = FiniteStructure(POINTS, next(_structures()).functions, {"F": frozenset({("p1", "p2")})})
    assert not asymmetric.satisfies(clauses)


# ---------------------------------------------------------------- inclusion


def test_class_is_included_in_itself():
    expression = ClassExpression(min_dg("r"))
    result = check_inclusion(InclusionProblem(expression, expression, parameters=frozenset({"r"})))
    assert result.verdict is InclusionVerdict.HOLDS
    assert result.disjuncts == []
    assert len(result.pruned) == 1


def test_membership_of_concrete_graphs():
    near = {("p1", "p1"): Fraction(0), ("p2", "p2"): Fraction(0),
            ("p1", "p2"): Fraction(1, 2), ("p2", "p1"): Fraction(1, 2)}
    structure = FiniteStructure(POINTS, {"d": near, "r": {("p1",): Fraction(1), ("p2",): Fraction(1)}})
    complete = nx.DiGraph([("p1", "p2"), ("p2", "p1")])
    one_way = nx.DiGraph([("p1", "p2")])
    one_way.add_node("p2")
    assert in_class(complete, min_dg("r"), structure)
    assert not in_class(one_way, min_dg("r"), structure)
    assert not in_class(complete, max_dg("1/4"), structure)


# ---------------------------------------------------------------- quasi unit disk graphs and closed unit disk graphs

THEORIES = ["Tu", "Tp", "Ts", "Tm"]
x, y = Var("x"), Var("y")


def _plus():
    return ClassExpression(intersect(min_dg("r"), max_dg("1")), Transformation(TransformationTag.PLUS))


def _needs_parameters(goal):
    """Goals asking for an inclusion edge to be missing, the ones only the parameters can refute"""
    named = [(l, getattr(l.atom, "name", None)) for l in goal]
    included = {l.atom.args for l, name in named if l.positive and name == "pi_i"}
    missing_edge = any(not l.positive and name == "F" for l, name in named)
    excluded = any(name == "pi_e" for _, name in named)
    both_ways = any((b, a) in included for a, b in included)
    return bool(included) and missing_edge and not excluded and not both_ways


def _dist(a, b):
    return App("d", (a, b))


def _range(a):
    return App("r", (a,))


def _cmp(op, lhs, rhs):
    return AtomF(Cmp(op, lhs, rhs))


def _distinct(a, b):
    return fm.neg(AtomF(Eq(a, b)))


def _arbitrary_distances():
    keys = list(product(POINTS, repeat=2))
    for values in product(DISTANCES, repeat=len(keys)):
        d = dict(zip(keys, values))
        for r1, r2 in product(RANGES, RANGES):
            yield FiniteStructure(POINTS, {"d": d, "r": {("p1",): r1, ("p2",): r2}})


def _ranges_only():
    for r1, r2 in product(RANGES, RANGES):
        yield FiniteStructure(POINTS, {"r": {("p1",): r1, ("p2",): r2}})


@pytest.mark.parametrize("theory", THEORIES)
def test_quasi_unit_disk_graphs_need_a_constraint(theory):
    result = check_inclusion(InclusionProblem(qudg("r"), _plus(), theory=theory))
    assert result.verdict is InclusionVerdict.FAILS
    assert any(d.satisfiable for d in result.disjuncts)
    assert sum(not d.satisfiable for d in result.disjuncts) >= 3
    for disjunct in result.disjuncts:
        assert disjunct.satisfiable == _needs_parameters(disjunct.goal), disjunct.goal_str()


def test_metric_constraint_on_distances_and_ranges():
    problem = InclusionProblem(qudg("r"), _plus(), theory="Tm", parameters=frozenset({"d", "r"}))
    result = check_inclusion(problem)
    assert result.verdict is InclusionVerdict.HOLDS_UNDER
    assert all(d.verified for d in result.disjuncts if d.satisfiable)
    expected = fm.forall((x, y), fm.implies(
        fm.conj(_distinct(x, y), _cmp("<=", _dist(x, y), Num(1)), _cmp("<=", _dist(x, y), _range(x))),
        _cmp("<=", _dist(y, x), _range(y))))
    for structure in _structures():
        assert structure.holds(result.constraint) == structure.holds(expected), structure.functions


def test_symmetric_constraint_on_ranges():
    problem = InclusionProblem(qudg("r"), _plus(), theory="Ts", parameters=frozenset({"r"}))
    result = check_inclusion(problem)
    assert result.verdict is InclusionVerdict.HOLDS_UNDER
    constraints = [str(d.constraint) for d in result.disjuncts if d.constraint is not None]
    assert "forall u, v. u = v | r(u) - r(v) <= 0 | r(v) >= 1" in constraints
    expected = fm.forall((x, y), fm.implies(
        fm.conj(_cmp("<", _range(y), Num(1)), _distinct(x, y)), _cmp(">=", _range(y), _range(x))))
    for structure in _ranges_only():
        assert structure.holds(result.constraint) == structure.holds(expected), structure.functions


@pytest.mark.parametrize("theory", ["Ts", "Tm"])
def test_closed_unit_disk_graphs_are_quasi_unit_disk_graphs(theory):
    result = check_inclusion(InclusionProblem(_plus(), qudg("r"), theory=theory))
    assert result.verdict is InclusionVerdict.HOLDS
    assert not any(d.satisfiable for d in result.disjuncts)


@pytest.mark.parametrize("theory", ["Tu", "Tp"])
def test_reverse_inclusion_without_symmetry_needs_a_constraint(theory):
    problem = InclusionProblem(_plus(), qudg("r"), theory=theory, parameters=frozenset({"d", "r"}))
    result = check_inclusion(problem)
    assert result.verdict is InclusionVerdict.HOLDS_UNDER
    expected = fm.forall((x, y), fm.disj(
        _cmp(">", _dist(y, x), Num(1)), _cmp("<=", _dist(x, y), Num(1)),
        _cmp("<=", _dist(x, y), _range(x)), AtomF(Eq(x, y))))
    for structure in _arbitrary_distances():
        assert structure.holds(result.constraint) == structure.holds(expected), structure.functions
