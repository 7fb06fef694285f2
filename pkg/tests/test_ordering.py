import random

from app.logic.ordering import Order, Precedence, compare, is_well_founded, maximal_literals, strictly_maximal
from app.logic.terms import App, Cmp, Const, Literal, Num, Pred, Var

PREC = Precedence(eliminable=frozenset({"P", "E"}), extension=frozenset({"d", "f"}))
a, b = Const("a"), Const("b")
x, y = Var("x"), Var("y")


def _ground_term(rng, depth):
    if depth == 0 or rng.random() < 0.4:
        return rng.choice([a, b, Num(rng.randint(-3, 3))])
    if rng.random() < 0.5:
        return App("f", (_ground_term(rng, depth - 1),))
    return App("g", (_ground_term(rng, depth - 1), _ground_term(rng, depth - 1)))


def _open_term(rng, depth):
    if depth == 0 or rng.random() < 0.4:
        return rng.choice([a, x, y, Num(rng.randint(0, 2))])
    return App("f", (_open_term(rng, depth - 1),))


def test_terms_dominate_numerals():
    assert compare(Pred("P", (a,)), Num(5), PREC) is Order.GREATER
    assert compare(a, Num(100), PREC) is Order.GREATER
    assert compare(Num(2), Num(1), PREC) is Order.GREATER


def test_equal_terms():
    term = App("f", (a,))
    assert compare(term, App("f", (a,)), PREC) is Order.EQUAL


def test_subterm_property():
    assert compare(App("f", (x,)), x, PREC) is Order.GREATER
    assert compare(x, y, PREC) is Order.INCOMPARABLE


def test_ground_totality():
    rng = random.Random(3)
    for _ in range(200):
        s, t = _ground_term(rng, 3), _ground_term(rng, 3)
        assert compare(s, t, PREC) is not Order.INCOMPARABLE
        assert compare(s, t, PREC) is compare(t, s, PREC).flip()


def test_greater_is_stable_under_grounding():
    rng = random.Random(5)
    checked = 0
    for _ in range(300):
        s, t = _open_term(rng, 3), _open_term(rng, 3)
        if compare(s, t, PREC) is not Order.GREATER:
            continue
        for _ in range(5):
            sigma = {x: rng.choice([a, b]), y: rng.choice([a, b])}
            assert compare(s.substitute(sigma), t.substitute(sigma), PREC) is Order.GREATER
            checked += 1
    assert checked > 0


def test_run_terms_are_well_founded():
    rng = random.Random(9)
    terms = [_ground_term(rng, 3) for _ in range(40)]
    assert is_well_founded(terms, PREC)


def test_singleton_literal_is_strictly_maximal():
    clause = (Literal(Pred("P", (x,))),)
    assert maximal_literals(clause, PREC) == (0,)
    assert strictly_maximal(0, clause, PREC)


def test_duplicate_literal_is_not_strictly_maximal():
    clause = (Literal(Pred("P", (x,))), Literal(Pred("P", (x,))))
    assert maximal_literals(clause, PREC) == (0, 1)
    assert not strictly_maximal(0, clause, PREC)


def test_eliminable_literals_dominate():
    big = Literal(Cmp("<=", App("d", (App("f", (a,)), b)), Num(1)))
    small = Literal(Pred("E", (a, b)), False)
    assert compare(small, big, PREC) is Order.GREATER
    assert maximal_literals((big, small), PREC) == (1,)


def test_negative_literal_is_larger_on_equal_atoms():
    atom = Pred("P", (a,))
    assert compare(Literal(atom, False), Literal(atom), PREC) is Order.GREATER


def test_explicit_precedence_overrides_levels():
    prec = Precedence.parse("g > f")
    assert prec.greater("g", "f")
    assert compare(App("g", (a,)), App("f", (App("f", (a,)),)), prec) is Order.GREATER
