import itertools
import random
from fractions import Fraction

import pytest

from app.logic.errors import UnsupportedInput, UsageError
from app.logic.ground_solver import GroundProblem, GroundSolver, check_ground, congruence_clauses
from app.logic.terms import NUM, App, Cmp, Const, Eq, Literal, Num, Pred, Var

a, b, c = Const("a"), Const("b"), Const("c")
n = Const("n", NUM)


def pos(atom):
    return Literal(atom)


def negl(atom):
    return Literal(atom, False)


def test_reflexive_equation_is_sat():
    result = check_ground(GroundProblem(((pos(Eq(a, a)),),)))
    assert result.is_sat


def test_disequality_model_has_two_classes():
    result = check_ground(GroundProblem(((negl(Eq(a, b)),),)))
    assert result.is_sat
    assert result.model.lines() == ["class 1: a", "class 2: b"]


def test_empty_problem_has_empty_model():
    result = check_ground(GroundProblem(()))
    assert result.is_sat
    assert result.model.lines() == []


def test_empty_clause_is_unsat():
    assert not check_ground(GroundProblem(((),))).is_sat


def test_model_extraction_requires_sat():
    solver = GroundSolver(GroundProblem(((pos(Eq(a, b)),), (negl(Eq(a, b)),))))
    assert not solver.check().is_sat
    with pytest.raises(UsageError):
        solver.extract_model()


def test_non_ground_input_is_rejected():
    with pytest.raises(UnsupportedInput):
        GroundSolver(GroundProblem(((pos(Pred("P", (Var("x"),))),),)))


def test_congruence_of_numeric_applications():
    dab, dba = App("d", (a, b)), App("d", (b, a))
    extra = congruence_clauses([(pos(Cmp("<", dab, dba)),)])
    assert len(extra) == 1
    clauses = ((pos(Eq(a, b)),), (pos(Cmp("<", dab, dba)),))
    assert not check_ground(GroundProblem(clauses)).is_sat


def test_transitivity_conflict():
    clauses = ((pos(Eq(a, b)),), (pos(Eq(b, c)),), (negl(Eq(a, c)),))
    assert not check_ground(GroundProblem(clauses)).is_sat


def test_cardinality_bounds_distinct_constants():
    clauses = ((negl(Eq(a, b)),), (negl(Eq(b, c)),), (negl(Eq(a, c)),))
    assert check_ground(GroundProblem(clauses)).is_sat
    assert not check_ground(GroundProblem(clauses, psort_card=2)).is_sat
    assert check_ground(GroundProblem(clauses, psort_card=3)).is_sat


def test_arithmetic_and_predicates_mix():
    clauses = (
        (pos(Cmp("<=", n, Num(0))), pos(Pred("P", (a,)))),
        (pos(Cmp(">=", n, Num(1))),),
        (negl(Pred("P", (b,))),),
        (pos(Eq(a, b)), pos(Cmp("<", n, Num(1)))),
    )
    assert not check_ground(GroundProblem(clauses)).is_sat
    relaxed = clauses[:3]
    result = check_ground(GroundProblem(relaxed))
    assert result.is_sat
    assert all(result.model.satisfies(clause) for clause in relaxed)
    assert result.model.value(n) >= 1


# ---------------------------------------------------------------- brute force agreement

ATOMS = [
    Eq(a, b), Eq(a, c), Eq(b, c),
    Pred("P", (a,)), Pred("P", (b,)), Pred("P", (c,)),
    Cmp("<=", n, Num(0)), Cmp("<", n, Num(1)), Cmp(">", n, Num(0)),
]
NUMERIC_REPRESENTATIVES = [Fraction(-1), Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2)]


def _random_problem(rng):
    return tuple(
        tuple(Literal(rng.choice(ATOMS), rng.random() < 0.5) for _ in range(rng.randint(1, 3)))
        for _ in range(rng.randint(1, 6))
    )


def _holds(literal, points, table, value):
    atom = literal.atom
    if isinstance(atom, Eq):
        truth = points[atom.lhs.name] == points[atom.rhs.name]
    elif isinstance(atom, Pred):
        truth = table[points[atom.args[0].name]]
    else:
        bound = atom.rhs.value
        truth = {"<=": value <= bound, "<": value < bound, ">": value > bound, ">=": value >= bound}[atom.op]
    return truth == literal.positive


def _brute_force(clauses, card):
    size = 3 if card is None else card
    for values in itertools.product(range(size), repeat=3):
        points = dict(zip("abc", values))
        for table in itertools.product([False, True], repeat=size):
            for value in NUMERIC_REPRESENTATIVES:
                if all(any(_holds(l, points, table, value) for l in clause) for clause in clauses):
                    return True
    return False


def test_agrees_with_brute_force():
    rng = random.Random(17)
    for _ in range(500):
        clauses = _random_problem(rng)
        card = rng.choice([None, 1, 2])
        result = check_ground(GroundProblem(clauses, card))
        assert result.is_sat == _brute_force(clauses, card), clauses
        if result.is_sat:
            assert all(result.model.satisfies(clause) for clause in clauses)


def test_adding_clauses_keeps_unsat():
    rng = random.Random(23)
    for _ in range(100):
        clauses = _random_problem(rng)
        if check_ground(GroundProblem(clauses)).is_sat:
            continue
        extended = clauses + _random_problem(rng)
        assert not check_ground(GroundProblem(extended)).is_sat
