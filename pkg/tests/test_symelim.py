from fractions import Fraction

from app.logic import formula as fm
from app.logic.formula import TRUE, AtomF
from app.logic.locality import TheoryExtension
from app.logic.structures import FiniteStructure, enumerate_structures
from app.logic.symelim import (
    REGIME_MODEL_COMPLETION, REGIME_WEAKEST, Constraint, ElimMode, ElimRequest, pd_eliminate, residue_goal,
    verify_constraint,
)
from app.logic.terms import NUM, App, Cmp, Const, Eq, Literal, Num, Var

u, v = Const("u"), Const("v")
SYMBOLS = {"d", "r1", "r2"}


def d(s, t):
    return App("d", (s, t))


def r(name, s):
    return App(name, (s,))


def unit(atom, positive=True):
    return (Literal(atom, positive),)


# two distinct points within range r1 but outside range r2
GOAL = (
    unit(Eq(u, v), False),
    unit(Cmp("<=", d(u, v), r("r1", u))),
    unit(Cmp(">", d(u, v), r("r2", u))),
)


def _request(card=None, goal=GOAL):
    ext = TheoryExtension.preset("Tu", extension_symbols=SYMBOLS, parameters={"r1", "r2"}, psort_card=card)
    return ElimRequest(ext, frozenset({"r1", "r2"}), goal)


def test_ranges_must_be_ordered():
    result = pd_eliminate(_request())
    assert str(result.constraint) == "forall u. r1(u) - r2(u) <= 0"
    assert result.constraint.regime == REGIME_MODEL_COMPLETION
    assert v in result.eliminated


def test_constraint_refutes_goal():
    request = _request()
    assert verify_constraint(pd_eliminate(request).constraint, request)


def test_trivial_constraint_does_not_refute_satisfiable_goal():
    assert not verify_constraint(Constraint((), TRUE), _request())


def test_single_point_makes_goal_unsatisfiable():
    result = pd_eliminate(_request(card=1))
    assert result.constraint.is_trivial
    assert result.constraint.regime == REGIME_WEAKEST


def test_unsatisfiable_goal_needs_no_constraint():
    result = pd_eliminate(_request(goal=(unit(Eq(u, u), False),)))
    assert result.constraint.is_trivial
    assert result.cubes == []


def test_ensure_valid_mode_uses_existential_residue():
    x = Var("x")
    residue = (Cmp(">", App("r1", (x,)), Num(1)),)
    formulas = tuple(AtomF(a) for a in residue)
    assert [[str(l) for l in c] for c in residue_goal(formulas)] == [["r1(x) > 1"]]
    ext = TheoryExtension.preset("Tu", extension_symbols=SYMBOLS)
    request = ElimRequest(ext, frozenset({"r1"}), mode=ElimMode.ENSURE_VALID, residue=formulas)
    result = pd_eliminate(request)
    assert result.constraint.variables == (Var("u"),)
    assert verify_constraint(result.constraint, request)


def test_parameter_constant_stays_free():
    a, b, c = Const("a"), Const("b"), Const("c", NUM)
    goal = (unit(Cmp("<=", d(a, b), c)), unit(Cmp(">", d(a, b), Num(1))))
    ext = TheoryExtension.preset("Tu", extension_symbols={"d"}, parameters={"c"})
    request = ElimRequest(ext, frozenset({"c"}), goal)
    constraint = pd_eliminate(request).constraint
    assert constraint.variables == ()
    assert str(constraint) == "c <= 1"
    assert verify_constraint(constraint, request)
    candidates = [Cmp("<=", c, Num(bound)) for bound in (0, 1, 2)]
    refuting = [atom for atom in candidates if verify_constraint(Constraint((), AtomF(atom)), request)]
    assert len(refuting) == 2
    for value in (Fraction(n, 2) for n in range(-2, 7)):
        world = FiniteStructure((), constants={"c": value})
        for atom in refuting:
            if world.holds(AtomF(atom)):
                assert world.holds(constraint.formula())


def test_refuting_constraints_imply_the_computed_one():
    x = Var("x")
    request = _request()
    weakest = pd_eliminate(request).constraint.formula()
    difference = App("-", (r("r1", x), r("r2", x)))
    bodies = [
        AtomF(Cmp("<=", difference, Num(-1))),
        AtomF(Cmp("<=", difference, Num(1))),
        fm.conj(AtomF(Cmp("<=", r("r1", x), Num(0))), AtomF(Cmp(">=", r("r2", x), Num(0)))),
        AtomF(Cmp("<", r("r1", x), r("r2", x))),
        AtomF(Cmp(">=", r("r2", x), Num(1))),
        TRUE,
    ]
    refuting = [Constraint((x,), body) for body in bodies if verify_constraint(Constraint((x,), body), request)]
    assert len(refuting) == 3
    grid = tuple(Fraction(n) for n in (-1, 0, 1))
    for world in enumerate_structures(("p1", "p2"), {"r1": 1, "r2": 1}, grid):
        for candidate in refuting:
            if world.holds(candidate.formula()):
                assert world.holds(weakest), str(candidate)
