import itertools
import random
from fractions import Fraction

import pytest

from app.logic import formula as fm
from app.logic import linarith as la
from app.logic.chc import (
    ChcVerdict, accelerate_unit, emit_chc, interpret_external_model, parse_chc, render_smtlib, saturate_pure,
)
from app.logic.errors import ParseError, UnsupportedInput
from app.logic.formula import TRUE, AtomF
from app.logic.hres import ConstrainedClause, Diverged
from app.logic.limits import RunLimits
from app.logic.terms import NUM, Cmp, Eq, Literal, Num, Pred, Var, plus

x, y, z = Var("x", NUM), Var("y", NUM), Var("z", NUM)


def P(s, t, positive=True):
    return Literal(Pred("P", (s, t)), positive)


def n(s, t):
    return AtomF(Pred("n", (s, t)))


# reachability by unit steps, refuted by n
START = ConstrainedClause(AtomF(Eq(x, y)), (P(x, y),))
STEP = ConstrainedClause(AtomF(Eq(y, plus(x, Num(1)))), (P(y, z, False), P(x, z)))
BLOCK = ConstrainedClause(n(x, y), (P(x, y, False),))
CLAUSES = [START, STEP, BLOCK]
PARTS = [c.literals for c in CLAUSES]


def test_pure_saturation_adds_only_the_empty_part():
    result = saturate_pure(PARTS, "P")
    assert len(result.clauses) == 4
    assert result.bottom == 4
    shapes = sorted((s.premises, s.conclusion) for s in result.inferences)
    assert shapes == [((1, 2), 1), ((1, 3), 4), ((2, 2), 2), ((2, 3), 3)]


def test_positive_unit_has_no_empty_part():
    result = saturate_pure([(P(x, y),)], "P")
    assert result.bottom is None
    assert emit_chc([ConstrainedClause(TRUE, (P(x, y),))], result) is None


def test_complementary_units_derive_empty_part():
    result = saturate_pure([(P(x, y),), (P(x, y, False),)], "P")
    assert result.bottom == 3


def test_pure_saturation_respects_clause_limit():
    result = saturate_pure(PARTS, "P", limits=RunLimits(max_clauses=3))
    assert isinstance(result, Diverged)


def test_pure_saturation_rejects_term_arguments():
    with pytest.raises(UnsupportedInput):
        saturate_pure([(Literal(Pred("P", (Num(1), x))),)], "P")


def test_horn_system_has_seven_rules():
    system = emit_chc(CLAUSES, saturate_pure(PARTS, "P"))
    assert len(system.rules) == 7
    assert system.query == 4
    assert str(system.rules[0]) == "x = y -> mu_1(x, y)"
    assert str(system.rules[2]) == "n(x, y) -> mu_3(x, y)"
    assert system.number_sort == "Int"
    bodies = sorted(tuple(a.index for a in rule.body) for rule in system.rules[3:])
    assert bodies == [(1, 2), (1, 3), (2, 2), (2, 3)]


def test_smtlib_text_reads_back():
    system = emit_chc(CLAUSES, saturate_pure(PARTS, "P"))
    text = render_smtlib(system)
    assert text.startswith("(set-logic HORN)\n")
    assert "(declare-fun n (Int Int) Bool)" in text
    assert "(assert (forall ((x Int) (y Int)) (=> (= x y) (mu_1 x y))))" in text
    assert text.rstrip().endswith("(check-sat)")
    parsed = parse_chc(text)
    assert parsed.rules == system.rules
    assert parsed.query == system.query
    assert parsed.signatures == system.signatures
    assert render_smtlib(parsed) == text


def test_malformed_system_text():
    with pytest.raises(ParseError):
        parse_chc("(set-logic HORN")
    with pytest.raises(ParseError):
        parse_chc("(set-logic HORN)\n(check-sat)\n")


# ---------------------------------------------------------------- external answers

MODEL = """sat
(
  (define-fun mu_1 ((x Int) (y Int)) Bool (<= x y))
  (define-fun mu_3 ((x Int) (y Int)) Bool (> x y))
  (define-fun mu_4 () Bool false)
)
"""


def test_solver_model_is_echoed():
    system = emit_chc(CLAUSES, saturate_pure(PARTS, "P"))
    answer = interpret_external_model(MODEL, system)
    assert answer.verdict is ChcVerdict.SATISFIABLE
    assert answer.model == ["mu_1(x, y) = (<= x y)", "mu_3(x, y) = (> x y)", "mu_4 = false"]


def test_wrapped_model_and_other_verdicts():
    system = emit_chc(CLAUSES, saturate_pure(PARTS, "P"))
    wrapped = "sat\n(model (define-fun mu_4 () Bool false))\n"
    assert interpret_external_model(wrapped, system).model == ["mu_4 = false"]
    assert interpret_external_model("unknown\n", system).verdict is ChcVerdict.INCONCLUSIVE
    assert interpret_external_model("unsat", system).verdict is ChcVerdict.UNSATISFIABLE


def test_missing_system_is_trivially_satisfiable():
    assert interpret_external_model("", None).verdict is ChcVerdict.SATISFIABLE


def test_malformed_solver_answer():
    with pytest.raises(ParseError):
        interpret_external_model("maybe\n", emit_chc(CLAUSES, saturate_pure(PARTS, "P")))
    with pytest.raises(ParseError):
        interpret_external_model("", emit_chc(CLAUSES, saturate_pure(PARTS, "P")))


# ---------------------------------------------------------------- acceleration


def _bottom_holds_somewhere(constraint, relation):
    names = fm.free_variables(constraint)
    for values in itertools.product(range(-3, 4), repeat=len(names)):
        point = {var: Fraction(value) for var, value in zip(names, values)}

        def value(atom):
            if isinstance(atom, Pred):
                return relation(point[atom.args[0]], point[atom.args[1]])
            return la.from_literal(Literal(atom)).holds(point)

        if fm.evaluate(constraint, value):
            return True
    return False


def test_translation_family_is_accelerated():
    result = accelerate_unit(CLAUSES, "P")
    assert result.pattern.position == 0
    assert result.pattern.offset == 1
    assert len(result.clauses) == 4
    assert [len(c.literals) for c in result.clauses] == [1, 2, 1, 0]
    for clause in result.clauses[:3]:
        assert "k" in {v.name for v in fm.free_variables(clause.constraint)}
    bottom = result.clauses[-1].constraint
    assert not _bottom_holds_somewhere(bottom, lambda a, b: a > b)
    assert _bottom_holds_somewhere(bottom, lambda a, b: a < b)


def _least_relation(window):
    """Least P over the window closed under the start and step clauses"""
    relation = {(a, a) for a in window}
    frontier = list(relation)
    while frontier:
        a, b = frontier.pop()
        if a - 1 in window and (a - 1, b) not in relation:
            relation.add((a - 1, b))
            frontier.append((a - 1, b))
    return relation


def _has_relation(blocked, window):
    """Some P over the window satisfies all three clauses, tried table by table"""
    cells = list(itertools.product(window, repeat=2))
    for chosen in itertools.product((False, True), repeat=len(cells)):
        relation = {cell for cell, keep in zip(cells, chosen) if keep}
        if any((a, a) not in relation for a in window):
            continue
        if any((a + 1, b) in relation and (a, b) not in relation for a, b in cells if a + 1 in window):
            continue
        if not relation & blocked:
            return True
    return False


def _accelerated_refutes(bottom, blocked, window, bound=10):
    """Whether the empty-clause constraint holds for some pair of the blocking relation"""
    [pair] = [a.args for a in fm.atoms(bottom) if isinstance(a, Pred)]
    others = [var for var in fm.free_variables(bottom) if var not in pair]
    ranges = [range(bound + 1) if var.name.startswith("k") else window for var in others]
    for first, second in blocked:
        for values in itertools.product(*ranges):
            point = {pair[0]: Fraction(first), pair[1]: Fraction(second)}
            point.update((var, Fraction(value)) for var, value in zip(others, values))

            def value(atom):
                if isinstance(atom, Pred):
                    return (int(point[atom.args[0]]), int(point[atom.args[1]])) in blocked
                return la.from_literal(Literal(atom)).holds(point)

            if fm.evaluate(bottom, value):
                return True
    return False


def test_acceleration_agrees_with_relation_search():
    bottom = accelerate_unit(CLAUSES, "P").clauses[-1].constraint
    window = range(0, 3)
    cells = list(itertools.product(window, repeat=2))
    tables = [set()] + [{c} for c in cells] + [set(pair) for pair in itertools.combinations(cells, 2)]
    for blocked in tables:
        assert _has_relation(blocked, window) == (not _accelerated_refutes(bottom, blocked, window)), blocked


def test_acceleration_agrees_with_least_relation_on_integers():
    bottom = accelerate_unit(CLAUSES, "P").clauses[-1].constraint
    window = range(-5, 6)
    least = _least_relation(window)
    rng = random.Random(71)
    cells = list(itertools.product(window, repeat=2))
    tables = [{(2, -1)}, {(-1, 2)}, {(-5, 5)}, {(0, 0)}]
    tables += [set(rng.sample(cells, rng.randint(1, 3))) for _ in range(60)]
    outcomes = set()
    for blocked in tables:
        consistent = not least & blocked
        outcomes.add(consistent)
        assert consistent == (not _accelerated_refutes(bottom, blocked, window)), blocked
    assert outcomes == {True, False}


def test_zero_offset_drops_the_step():
    still = ConstrainedClause(AtomF(Eq(y, x)), STEP.literals)
    result = accelerate_unit([START, still, BLOCK], "P")
    assert result.pattern.offset == 0
    assert result.clauses == [START, BLOCK]
    assert result.criterion == TRUE


def test_steps_moving_two_arguments_are_rejected():
    w = Var("w", NUM)
    moving = ConstrainedClause(AtomF(Eq(y, plus(x, Num(1)))), (P(y, w, False), P(x, z)))
    with pytest.raises(UnsupportedInput):
        accelerate_unit([START, moving, BLOCK], "P")


def test_non_translation_step_is_rejected():
    scaled = ConstrainedClause(AtomF(Cmp("<=", y, x)), STEP.literals)
    with pytest.raises(UnsupportedInput):
        accelerate_unit([START, scaled, BLOCK], "P")
