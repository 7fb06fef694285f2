from fractions import Fraction

import pytest

from app.logic.errors import ParseError
from app.logic.graphlib import TransformationTag
from app.logic.parser import StatementKind, parse_extra_terms, parse_problem
from app.logic.terms import NUM, POINT, App, Const, Eq, Num

from tests.conftest import problem_text


def test_sections_and_declarations():
    problem = parse_problem(problem_text("a1_c1.loc"))
    assert problem.sections == ("Base_functions", "Extension_functions", "Relations", "Clauses", "Query")
    assert [d.name for d in problem.base_functions] == ["+", "-", "*"]
    assert {d.name: d.arity for d in problem.extension_functions} == {"r1": 1, "d": 2}
    assert [s.kind for s in problem.clauses] == [StatementKind.IMPLICATION, StatementKind.IMPLICATION]
    assert len(problem.query) == 5
    assert problem.theory is None
    assert problem.predicates == {}


def test_query_constants_get_their_sorts():
    problem = parse_problem(problem_text("ranges.loc"))
    assert problem.parameters == ("r1", "r2")
    goal = problem.goal()
    assert [str(clause[0]) for clause in goal] == ["u != v", "d(u, v) <= r1(u)", "d(u, v) > r2(u)"]
    assert goal[0][0].atom == Eq(Const("u", POINT), Const("v", POINT))
    assert goal[1][0].atom.rhs == App("r1", (Const("u", POINT),))


def test_predicate_positions_take_numeric_sort_from_arithmetic():
    problem = parse_problem(problem_text("reach.loc"))
    assert {v.sort for s in problem.clauses for v in s.variables} == {NUM}
    assert all(s.kind is StatementKind.CONSTRAINED for s in problem.clauses)


def test_constrained_statements_split_from_background():
    problem = parse_problem(problem_text("graph_closed.loc"))
    assert problem.clause_predicates() == frozenset({"E"})
    constrained, background = problem.split_clauses()
    assert [str(c) for c in constrained] == [
        "pi(u, v) || E(u, v)",
        "pt(u, w, v) || NOT(E(u, v)) | E(u, w)",
        "pe(u, v) || NOT(E(u, v))",
    ]
    assert len(background) == 3


def test_numerals_and_comments():
    problem = parse_problem("""
        Extension_functions := {(r, 1, 1)}   # one range per point
        Query := r(a) <= _1/2; r(a) > _-3;
    """)
    first, second = (clause[0].atom for clause in problem.goal())
    assert first.rhs == Num(Fraction(1, 2))
    assert second.rhs == Num(Fraction(-3))


def test_extension_functions_tested_against_zero_and_one_are_predicates():
    problem = parse_problem("""
        Extension_functions := {(R, 2, 1), (d, 2, 1)}
        Clauses := (FORALL x, y). R(x, y) = _1 --> R(y, x) = _1;
                   (FORALL x, y). R(x, y) = _0 --> d(x, y) > _1;
    """)
    assert problem.encoded_predicates == frozenset({"R"})
    assert problem.predicates == {"R": 2}
    assert problem.extension_symbols == frozenset({"R", "d"})


def test_numeric_use_keeps_function_numeric():
    problem = parse_problem("""
        Extension_functions := {(R, 2, 1)}
        Clauses := (FORALL x, y). R(x, y) = _1 --> R(y, x) <= _2;
    """)
    assert problem.encoded_predicates == frozenset()


def test_ground_query_extension_terms_are_collected():
    problem = parse_problem("""
        Extension_functions := {(r, 1, 1)}
        Query := r(a) = r(a); r(b) > _0;
    """)
    assert problem.extra_terms == (App("r", (Const("a"),)),)


def test_extra_terms_read_against_declarations():
    problem = parse_problem(problem_text("ranges.loc"))
    terms = parse_extra_terms("d(v, u); r1(v)", problem)
    v, u = Const("v"), Const("u")
    assert terms == (App("d", (v, u)), App("r1", (v,)))
    assert parse_extra_terms("  ", problem) == ()


def test_classes():
    problem = parse_problem(problem_text("classes.loc"))
    assert [d.name for d in problem.classes] == ["A", "B", "Q"]
    assert problem.class_named("A").transformation.tag is TransformationTag.IDENTITY
    assert problem.class_named("B").transformation.tag is TransformationTag.PLUS
    assert problem.class_named("Q").transformation.tag is TransformationTag.MINUS
    assert problem.class_named("B").spec.parameters == frozenset({"r"})
    with pytest.raises(ParseError, match="defined classes: A, B, Q"):
        problem.class_named("C")


@pytest.mark.parametrize("text", [
    "Query := a = b;\nClauses := a = b;",
    "Relations := {(E, 2)}\nRelations := {(F, 2)}",
    "Base_functions := {(f, 1)}",
    "Extension_functions := {(d, 2, 1)}\nQuery := (FORALL x). d(x, x) >= _0;",
    "Extension_functions := {(d, 2, 1)}\nClauses := (FORALL x). d(x, x) > x;",
    "Extension_functions := {(d, 2, 1)}\nQuery := d(a) >= _0;",
    "Query := f(a) >= _0;",
    "Clauses := (FORALL x). x * x > _0;",
    "Relations := {(E, 2)}\nClauses := (FORALL x). x > _0 || x > _1;",
    "Clauses := (FORALL x. x > _0;",
    "Classes := A := MinDG(r); A := MaxDG(1);",
    "Classes := A := Planar;",
    "Classes := A := (QUDG(r))+;",
])
def test_malformed_problems(text):
    with pytest.raises(ParseError):
        parse_problem(text)


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as info:
        parse_problem("Extension_functions := {(d, 2, 1)}\nQuery :=\n    d(a, b, c) >= _0;")
    assert info.value.line == 3
