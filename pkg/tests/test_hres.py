import functools
import itertools
import operator
import random
import time

import pytest

from app.logic import formula as fm
from app.logic.errors import SoqeError
from app.logic.formula import TRUE, AtomF
from app.logic.graphlib import Transformation, TransformationTag
from app.logic.hres import (
    BackgroundTheory, ConstrainedClause, DeadlinePassed, canonical_rename, consistent_on, eliminate, eliminate_seq,
    entails, factor, is_tautology, redundant, resolve, satisfiable, saturate, to_constrained,
)
from app.logic.limits import RunLimits
from app.logic.ordering import Precedence
from app.logic.terms import Const, Eq, Literal, Pred, Var

u, v, w, x, y, z = (Var(name) for name in "uvwxyz")
PREC = Precedence(eliminable=frozenset({"E", "P"}))


def atom(name, *args):
    return AtomF(Pred(name, args))


def E(s, t, positive=True):
    return Literal(Pred("E", (s, t)), positive)


def P(*args, positive=True):
    return Literal(Pred("P", args), positive)


def negated(*literals):
    return tuple(Literal(l.atom, not l.positive) for l in literals)


# the three graph clauses with their axioms on the constraint predicates
CLAUSE_1 = ConstrainedClause(atom("pi", u, v), (E(u, v),))
CLAUSE_2 = ConstrainedClause(atom("pt", u, w, v), (E(u, v, False), E(u, w)))
CLAUSE_3 = ConstrainedClause(atom("pe", u, v), (E(u, v, False),))
GRAPH = [CLAUSE_1, CLAUSE_2, CLAUSE_3]

C1 = negated(Literal(Pred("pi", (u, v))), Literal(Pred("pt", (u, w, v))), Literal(Pred("pi", (u, w)), False))
C2 = negated(Literal(Pred("pe", (u, w))), Literal(Pred("pt", (u, w, v))), Literal(Pred("pe", (u, v)), False))
C3 = negated(Literal(Pred("pt", (u, w, v))), Literal(Pred("pt", (u, x, w))), Literal(Pred("pt", (u, x, v)), False))
AXIOMS = BackgroundTheory(axioms=(C1, C2, C3))


# ---------------------------------------------------------------- inferences


def test_resolution_conjoins_constraints():
    [conclusion] = resolve(CLAUSE_1, CLAUSE_3, PREC)
    assert conclusion.clause.is_empty
    assert str(canonical_rename(conclusion.clause)) == "pi(u, v) & pe(u, v) || _|_"
    assert conclusion.rule == "resolution"


def test_resolution_needs_complementary_pair():
    assert resolve(CLAUSE_1, CLAUSE_1, PREC) == []
    assert resolve(CLAUSE_3, CLAUSE_1, PREC) == []


def test_resolution_with_equality_constraint():
    left = ConstrainedClause(AtomF(Eq(x, y)), (P(x, y),))
    right = ConstrainedClause(atom("n", x, y), (P(x, y, positive=False),))
    [conclusion] = resolve(left, right, PREC)
    assert str(canonical_rename(conclusion.clause)) == "u = v & n(u, v) || _|_"


def test_factoring_merges_identical_literals():
    [conclusion] = factor(ConstrainedClause(atom("q", x), (P(x), P(x))), PREC)
    assert conclusion.clause.literals == (P(x),)
    assert conclusion.rule == "factoring"


def test_factoring_unifies_swapped_arguments():
    [conclusion] = factor(ConstrainedClause(TRUE, (P(x, y), P(y, x))), PREC)
    [literal] = conclusion.clause.literals
    assert literal.atom.args[0] == literal.atom.args[1]


def test_single_literal_clause_has_no_factors():
    assert factor(CLAUSE_1, PREC) == []


def test_tautologies_are_recognised():
    assert is_tautology(ConstrainedClause(TRUE, (P(x), P(x, positive=False))))
    assert not is_tautology(CLAUSE_2)


def test_to_constrained_abstracts_arguments():
    clause = (Literal(Pred("q", (x,)), False), Literal(Pred("P", (x, Const("c")))))
    constrained = to_constrained(clause, {"P"})
    assert str(constrained.constraint) == "q(x) & z1 = c"
    assert constrained.literals == (P(x, Var("z1")),)


# ---------------------------------------------------------------- redundancy


def _two_two_resolvent():
    return ConstrainedClause(fm.conj(atom("pt", u, w, v), atom("pt", u, x, w)), (E(u, v, False), E(u, x)))


def test_clause_is_redundant_against_itself():
    assert redundant(CLAUSE_2, [CLAUSE_2], BackgroundTheory()) is not None


def test_transitivity_makes_chained_resolvent_redundant():
    assert redundant(_two_two_resolvent(), [CLAUSE_2], AXIOMS) is not None


def test_chained_resolvent_is_kept_without_transitivity():
    bg = BackgroundTheory(axioms=(C1, C2))
    assert redundant(_two_two_resolvent(), [CLAUSE_2], bg) is None


def test_entailment_and_satisfiability():
    assert entails(AXIOMS, fm.conj(atom("pi", u, v), atom("pt", u, w, v)), atom("pi", u, w))
    assert not entails(BackgroundTheory(), atom("pi", u, v), atom("pe", u, v))
    assert not satisfiable(fm.conj(atom("pi", u, v), fm.neg(atom("pi", u, v))), BackgroundTheory())


# ---------------------------------------------------------------- saturation


def test_graph_clauses_saturate_with_one_new_clause():
    result = saturate(GRAPH, AXIOMS, PREC)
    assert result.is_saturated
    assert len(result.clauses) == 4
    new = result.clauses[-1]
    assert new.is_empty
    assert str(new) == "pi(u, v) & pe(u, v) || _|_"
    kept = [line for line in result.trace if not line.startswith("- ")]
    assert len(kept) == 1
    assert kept[0].startswith("4 resolution 1,3 ")


def test_saturated_set_is_closed_under_inferences():
    result = saturate(GRAPH, AXIOMS, PREC)
    clauses = result.clauses
    for first, second in itertools.product(clauses, repeat=2):
        for conclusion in resolve(first, second, PREC) + factor(first, PREC):
            derived = canonical_rename(conclusion.clause)
            if is_tautology(derived) or not satisfiable(derived.constraint, AXIOMS):
                continue
            assert redundant(derived, clauses, AXIOMS) is not None, str(derived)


def test_empty_set_is_saturated():
    result = saturate([], BackgroundTheory(), PREC)
    assert result.is_saturated
    assert result.clauses == []


def test_free_constraint_predicates_diverge():
    result = saturate(GRAPH, BackgroundTheory(), PREC, RunLimits(max_clauses=12))
    assert not result.is_saturated
    assert result.reason == "clause limit"
    assert len(result.partial) > 3


def test_saturation_is_deterministic():
    first = saturate(GRAPH, AXIOMS, PREC)
    second = saturate(GRAPH, AXIOMS, PREC)
    assert [str(c) for c in first.clauses] == [str(c) for c in second.clauses]
    assert first.trace == second.trace


def test_trace_flags_redundancy_by_conjunct_count():
    result = saturate(GRAPH, AXIOMS, PREC)
    flagged = [line for line in result.trace if line.startswith("- ")]
    assert flagged
    assert all(line.endswith("(smaller by conjunct count)") for line in flagged)
    assert any(line.startswith("- resolution 2,2 ") for line in flagged)


def test_subsumed_constraint_is_not_flagged():
    found = redundant(CLAUSE_2, [CLAUSE_2], BackgroundTheory())
    assert not found.approximated
    found = redundant(_two_two_resolvent(), [CLAUSE_2], AXIOMS)
    assert found.approximated


def test_redundancy_check_stops_at_the_deadline():
    with pytest.raises(DeadlinePassed):
        redundant(CLAUSE_2, [CLAUSE_2], AXIOMS, deadline=time.monotonic() - 1)


def test_saturation_keeps_to_its_time_limit():
    started = time.monotonic()
    result = saturate(GRAPH, BackgroundTheory(), PREC, RunLimits(max_clauses=100000, timeout=1.0))
    assert not result.is_saturated
    assert result.reason == "timeout"
    assert time.monotonic() - started < 3.0


# ---------------------------------------------------------------- elimination


def test_eliminating_edges_leaves_disjointness():
    outcome, result = eliminate(GRAPH, "E", AXIOMS, PREC)
    assert result.is_saturated
    assert [str(c) for c in outcome] == ["pi(u, v) & pe(u, v) || _|_"]


def test_elimination_without_occurrences_is_identity():
    clauses = [ConstrainedClause(atom("pi", u, v), ())]
    outcome, _ = eliminate(clauses, "E", AXIOMS)
    assert outcome == clauses


def test_divergent_elimination_has_no_result():
    outcome, result = eliminate(GRAPH, "E", BackgroundTheory(), PREC, RunLimits(max_clauses=12))
    assert outcome is None
    assert not result.is_saturated


def test_sequential_elimination():
    outcome, results = eliminate_seq(GRAPH, [], AXIOMS)
    assert outcome == GRAPH and results == []
    single, _ = eliminate(GRAPH, "E", AXIOMS, PREC)
    folded, results = eliminate_seq(GRAPH, ["E"], AXIOMS, PREC)
    assert [str(c) for c in folded] == [str(c) for c in single]
    assert len(results) == 1
    with pytest.raises(SoqeError):
        eliminate_seq(GRAPH, ["E", "E"], AXIOMS)


def test_residue_consistency_on_small_domains():
    outcome, _ = eliminate(GRAPH, "E", AXIOMS, PREC)
    assert consistent_on(outcome, AXIOMS, 2)
    assert not consistent_on([ConstrainedClause(TRUE, ())], BackgroundTheory(), 2)


# ---------------------------------------------------------------- two-point structures

DOMAIN = (0, 1)
VARIABLES = (x, y, z)


def _random_clause(rng, arity):
    literals = tuple(Literal(Pred("P", tuple(rng.choice(VARIABLES) for _ in range(arity))), rng.random() < 0.5)
                     for _ in range(rng.randint(1, 2)))
    options = [TRUE, atom("q", rng.choice(VARIABLES)), fm.neg(atom("q", rng.choice(VARIABLES))),
               AtomF(Eq(rng.choice(VARIABLES), rng.choice(VARIABLES))),
               fm.neg(AtomF(Eq(rng.choice(VARIABLES), rng.choice(VARIABLES))))]
    return ConstrainedClause(rng.choice(options), literals)


def _holds(clause, tables):
    clause_vars = clause.variables()
    body = fm.implies(clause.constraint, fm.clause_formula(clause.literals))
    for values in itertools.product(DOMAIN, repeat=len(clause_vars)):
        point = dict(zip(clause_vars, values))

        def value(a):
            if isinstance(a, Eq):
                return point[a.lhs] == point[a.rhs]
            return tuple(point[arg] for arg in a.args) in tables[a.name]

        if not fm.evaluate(body, value):
            return False
    return True


def _tables(arity):
    cells = list(itertools.product(DOMAIN, repeat=arity))
    for chosen in itertools.product([False, True], repeat=len(cells)):
        yield {cell for cell, keep in zip(cells, chosen) if keep}


def _q_tables():
    return list(_tables(1))


def test_inferences_are_sound_on_two_points():
    rng = random.Random(61)
    structures = [{"P": p, "q": q} for p in _tables(2) for q in _q_tables()]
    for _ in range(150):
        first, second = _random_clause(rng, 2), _random_clause(rng, 2)
        conclusions = resolve(first, second, PREC) + factor(first, PREC)
        for structure in structures:
            if not (_holds(first, structure) and _holds(second, structure)):
                continue
            for conclusion in conclusions:
                assert _holds(conclusion.clause, structure), (str(first), str(second), str(conclusion.clause))


def test_elimination_matches_predicate_search_on_two_points():
    rng = random.Random(67)
    limits = RunLimits(max_clauses=50, timeout=5.0)
    checked = {1: 0, 2: 0}
    for attempt in range(600):
        if sum(checked.values()) >= 100:
            break
        arity = 1 + attempt % 2
        clauses = [_random_clause(rng, arity) for _ in range(3)]
        outcome, _ = eliminate(clauses, "P", BackgroundTheory(), PREC, limits)
        if outcome is None:
            continue
        checked[arity] += 1
        for q in _q_tables():
            expected = any(all(_holds(c, {"P": p, "q": q}) for c in clauses) for p in _tables(arity))
            actual = all(_holds(c, {"P": set(), "q": q}) for c in outcome)
            assert actual == expected, [str(c) for c in clauses]
    assert sum(checked.values()) >= 100
    assert checked[2] > 0


# ---------------------------------------------------------------- symmetric subgraph on two points

# ground atoms over the points 0 and 1: pi, pe, pt then F, one bit each
OFFSETS = {"pi": 0, "pe": 4, "pt": 8, "F": 16}
POINT_CONSTS = (Const("0"), Const("1"))
PI_STATES = 1 << 16
F_TABLES = 16


def _bit(pred):
    index = 0
    for arg in pred.args:
        index = 2 * index + int(arg.name)
    return 1 << (OFFSETS[pred.name] + index)


def _violations(formula):
    """(true, false) bit masks of the ground cubes of ``formula``"""
    patterns = set()
    free = fm.free_variables(formula)
    for values in itertools.product(POINT_CONSTS, repeat=len(free)):
        ground = fm.substitute(formula, dict(zip(free, values)))
        for cube in fm.dnf(ground):
            true = false = 0
            possible = True
            for literal in cube:
                if isinstance(literal.atom, Eq):
                    possible &= (literal.atom.lhs == literal.atom.rhs) == literal.positive
                elif literal.positive:
                    true |= _bit(literal.atom)
                else:
                    false |= _bit(literal.atom)
            if possible and not true & false:
                patterns.add((true, false))
    return patterns


def _forbidden_f_tables(formulas):
    """For every pi/pe/pt state the F tables some formula holds in, as a mask over tables"""
    grouped = {}
    for formula in formulas:
        for true, false in _violations(formula):
            on, off = true >> 16, false >> 16
            tables = sum(1 << g for g in range(F_TABLES) if g & on == on and not g & off)
            key = (true & 0xFFFF, false & 0xFFFF)
            grouped[key] = grouped.get(key, 0) | tables
    return lambda state: functools.reduce(
        operator.or_, (mask for (on, off), mask in grouped.items() if state & on == on and not state & off), 0)


def _axiom_states():
    axioms = set()
    for clause in (C1, C2, C3):
        axioms |= _violations(fm.conj(*(fm.lit(l.negate()) for l in clause)))
    return [s for s in range(PI_STATES) if not any(s & t == t and not s & f for t, f in axioms)]


def _symmetric_part(edges):
    pairs = [(a, b) for a in (0, 1) for b in (0, 1)]
    table = 0
    for a, b in pairs:
        if edges >> (2 * a + b) & 1 and edges >> (2 * b + a) & 1:
            table |= 1 << (2 * a + b)
    return table


def _edge_sets(state):
    """Edge relations meeting the graph clauses in the given state"""
    def has(offset, index):
        return state >> (offset + index) & 1

    for edges in range(16):
        def edge(a, b):
            return edges >> (2 * a + b) & 1

        if any(has(0, i) and not edges >> i & 1 for i in range(4)):
            continue
        if any(has(4, i) and edges >> i & 1 for i in range(4)):
            continue
        if any(has(8, 4 * a + 2 * b + c) and edge(a, c) and not edge(a, b)
               for a, b, c in itertools.product((0, 1), repeat=3)):
            continue
        yield edges


def _expected_constraints():
    return [
        fm.conj(atom("pi", x, y), atom("pe", x, y)),
        fm.conj(atom("F", x, y), fm.neg(atom("F", y, x))),
        fm.conj(atom("F", y, x), atom("pe", x, y)),
        fm.conj(atom("F", x, y), atom("pe", x, y)),
        fm.conj(atom("pi", x, y), atom("pi", y, x), fm.neg(atom("F", y, x))),
        fm.conj(atom("pi", x, y), atom("pt", y, x, z), atom("F", y, z), fm.neg(atom("F", x, y))),
        fm.conj(atom("pt", x, y, z), atom("F", x, z), atom("pt", y, x, u), atom("F", y, u),
                fm.neg(atom("F", y, x))),
    ]


def test_symmetric_subgraph_elimination_on_two_points():
    clauses = GRAPH + Transformation(TransformationTag.MINUS).clauses()
    outcome, result = eliminate(clauses, "E", AXIOMS, PREC, RunLimits(max_clauses=1000, timeout=300.0))
    assert result.is_saturated
    assert outcome and all(c.is_empty for c in outcome)
    derived = _forbidden_f_tables([c.constraint for c in outcome])
    expected = _forbidden_f_tables(_expected_constraints())
    everything = (1 << F_TABLES) - 1
    for state in _axiom_states():
        allowed = functools.reduce(operator.or_, (1 << _symmetric_part(e) for e in _edge_sets(state)), 0)
        assert derived(state) == everything & ~allowed, state
        assert expected(state) == derived(state), state
