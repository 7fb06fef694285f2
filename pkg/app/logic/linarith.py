"""Exact linear rational arithmetic.

Linear atoms are kept in the normalized shape ``expr rel 0``. Satisfiability
of conjunctions and quantifier elimination both go through Fourier-Motzkin
on rows that remember the nonnegative combination of input atoms they were
derived from, so every Unsat verdict comes with a checkable refutation.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from app.logic import formula as fm
from app.logic.errors import ResourceExhausted, SortError, UnsupportedInput
from app.logic.formula import FALSE, TRUE, AtomF, Formula
from app.logic.terms import (
    NUM, POINT, App, Atom, Cmp, Const, Eq, Literal, Num, Pred, Term, Var, format_number, iter_terms, minus, plus,
    times,
)

logger = logging.getLogger(__name__)

RELATIONS = ("<=", "<", "=", "!=")


def _key(term: Term) -> Tuple[str, str]:
    return (str(term), type(term).__name__)


@dataclass(frozen=True)
class LinExpr:
    """sum(coefficient * term) + const over opaque numeric terms"""

    items: Tuple[Tuple[Term, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    @staticmethod
    def build(coefficients: Mapping[Term, Fraction], const=Fraction(0)) -> "LinExpr":
        items = tuple(sorted(((t, Fraction(c)) for t, c in coefficients.items() if c != 0), key=lambda kv: _key(kv[0])))
        return LinExpr(items, Fraction(const))

    @property
    def coefficients(self) -> Dict[Term, Fraction]:
        return dict(self.items)

    def coefficient(self, term: Term) -> Fraction:
        return self.coefficients.get(term, Fraction(0))

    @property
    def is_constant(self) -> bool:
        return not self.items

    def __add__(self, other: "LinExpr") -> "LinExpr":
        coefficients = self.coefficients
        for term, c in other.items:
            coefficients[term] = coefficients.get(term, Fraction(0)) + c
        return LinExpr.build(coefficients, self.const + other.const)

    def scale(self, factor) -> "LinExpr":
        factor = Fraction(factor)
        return LinExpr.build({t: c * factor for t, c in self.items}, self.const * factor)

    def __neg__(self) -> "LinExpr":
        return self.scale(-1)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self + (-other)

    def drop(self, term: Term) -> "LinExpr":
        return LinExpr.build({t: c for t, c in self.items if t != term}, self.const)

    def substitute(self, term: Term, replacement: "LinExpr") -> "LinExpr":
        c = self.coefficient(term)
        if c == 0:
            return self
        return self.drop(term) + replacement.scale(c)

    def value(self, model: Mapping[Term, Fraction]) -> Fraction:
        return self.const + sum((c * model.get(t, Fraction(0)) for t, c in self.items), Fraction(0))

    def to_term(self) -> Term:
        """Render the non-constant part as a term (callers add the constant separately)"""
        result: Optional[Term] = None
        for term, c in self.items:
            magnitude = abs(c)
            piece = term if magnitude == 1 else times(magnitude, term)
            if result is None:
                result = piece if c > 0 else App("-", (piece,))
            elif c > 0:
                result = plus(result, piece)
            else:
                result = minus(result, piece)
        return result if result is not None else Num(0)

    def __str__(self) -> str:
        if self.is_constant:
            return format_number(self.const)
        text = str(self.to_term())
        if self.const > 0:
            return f"{text} + {format_number(self.const)}"
        if self.const < 0:
            return f"{text} - {format_number(-self.const)}"
        return text


def linearize(term: Term) -> LinExpr:
    if term.sort != NUM:
        raise SortError(f"{term} is not numeric")
    if isinstance(term, Num):
        return LinExpr.build({}, term.value)
    if isinstance(term, App) and term.is_arithmetic:
        if term.fn == "+":
            return linearize(term.args[0]) + linearize(term.args[1])
        if term.fn == "-" and len(term.args) == 2:
            return linearize(term.args[0]) - linearize(term.args[1])
        if term.fn == "-":
            return -linearize(term.args[0])
        return linearize(term.args[1]).scale(term.args[0].value)
    return LinExpr.build({term: Fraction(1)})


@dataclass(frozen=True)
class LinAtom:
    """``expr rel 0``"""

    expr: LinExpr
    rel: str

    def normalized(self) -> "LinAtom":
        if self.expr.is_constant:
            return self
        first = self.expr.items[0][1]
        factor = 1 / abs(first)
        if self.rel in ("=", "!=") and first < 0:
            factor = -factor
        return LinAtom(self.expr.scale(factor), self.rel)

    def negate(self) -> "LinAtom":
        if self.rel == "<":
            return LinAtom(-self.expr, "<=")
        if self.rel == "<=":
            return LinAtom(-self.expr, "<")
        return LinAtom(self.expr, "!=" if self.rel == "=" else "=")

    def truth(self) -> Optional[bool]:
        """Truth value of a closed atom, ``None`` when terms remain"""
        if not self.expr.is_constant:
            return None
        return _compare(self.expr.const, self.rel)

    def holds(self, model: Mapping[Term, Fraction]) -> bool:
        return _compare(self.expr.value(model), self.rel)

    def terms(self) -> Tuple[Term, ...]:
        return tuple(t for t, _ in self.expr.items)

    def to_literal(self) -> Literal:
        atom = self.normalized()
        if atom.expr.is_constant:
            raise ValueError("closed atoms have no literal form")
        expr, op = atom.expr, atom.rel
        if op in ("<=", "<") and expr.items[0][1] < 0:
            expr = -expr
            op = ">=" if op == "<=" else ">"
        lhs = LinExpr(expr.items).to_term()
        rhs = Num(-expr.const)
        if op == "=":
            return Literal(Eq(lhs, rhs))
        if op == "!=":
            return Literal(Eq(lhs, rhs), False)
        return Literal(Cmp(op, lhs, rhs))

    def to_formula(self) -> Formula:
        value = self.truth()
        if value is not None:
            return TRUE if value else FALSE
        return fm.lit(self.to_literal())

    def __str__(self) -> str:
        value = self.truth()
        if value is not None:
            return "true" if value else "false"
        return str(self.to_literal())


def _compare(value: Fraction, rel: str) -> bool:
    if rel == "<=":
        return value <= 0
    if rel == "<":
        return value < 0
    if rel == "=":
        return value == 0
    return value != 0


def is_arithmetic(atom: Atom) -> bool:
    if isinstance(atom, Cmp):
        return True
    return isinstance(atom, Eq) and atom.lhs.sort == NUM


def from_literal(literal: Literal) -> LinAtom:
    atom = literal.atom
    if isinstance(atom, Cmp):
        difference = linearize(atom.lhs) - linearize(atom.rhs)
        linear = {
            "<=": LinAtom(difference, "<="),
            "<": LinAtom(difference, "<"),
            ">=": LinAtom(-difference, "<="),
            ">": LinAtom(-difference, "<"),
        }[atom.op]
    elif isinstance(atom, Eq) and atom.lhs.sort == NUM:
        linear = LinAtom(linearize(atom.lhs) - linearize(atom.rhs), "=")
    else:
        raise UnsupportedInput(f"{literal} is not an arithmetic literal")
    linear = linear if literal.positive else linear.negate()
    return linear.normalized()


# ---------------------------------------------------------------- satisfiability


@dataclass(frozen=True)
class Refutation:
    """Combination of input atoms deriving a closed contradiction.

    ``branches`` records the side chosen for each split disequality: +1 for
    ``e < 0`` and -1 for ``-e < 0``.
    """

    multipliers: Dict[int, Fraction]
    branches: Dict[int, int] = field(default_factory=dict)

    def used(self) -> Tuple[int, ...]:
        indices = {i for i, m in self.multipliers.items() if m != 0} | set(self.branches)
        return tuple(sorted(indices))


@dataclass(frozen=True)
class Sat:
    model: Dict[Term, Fraction]

    @property
    def is_sat(self) -> bool:
        return True


@dataclass(frozen=True)
class Unsat:
    refutations: Tuple[Refutation, ...]

    @property
    def is_sat(self) -> bool:
        return False

    @property
    def core(self) -> Tuple[int, ...]:
        indices = set()
        for refutation in self.refutations:
            indices.update(refutation.used())
        return tuple(sorted(indices))


@dataclass
class _Row:
    expr: LinExpr
    strict: bool
    origin: Dict[int, Fraction]

    def combine(self, factor: Fraction, other: "_Row", other_factor: Fraction) -> "_Row":
        origin = {i: m * factor for i, m in self.origin.items()}
        for i, m in other.origin.items():
            origin[i] = origin.get(i, Fraction(0)) + m * other_factor
        return _Row(self.expr.scale(factor) + other.expr.scale(other_factor), self.strict or other.strict,
                    {i: m for i, m in origin.items() if m != 0})

    def contradiction(self) -> bool:
        if not self.expr.is_constant:
            return False
        return self.expr.const > 0 or (self.expr.const == 0 and self.strict)


def lra_sat(atoms: Sequence[LinAtom]) -> Union[Sat, Unsat]:
    """Decide a conjunction of linear atoms over the rationals"""
    atoms = [a.normalized() for a in atoms]
    equalities: List[_Row] = []
    rows: List[_Row] = []
    pending: List[int] = []
    for index, atom in enumerate(atoms):
        row = _Row(atom.expr, atom.rel == "<", {index: Fraction(1)})
        if atom.rel == "=":
            equalities.append(row)
        elif atom.rel == "!=":
            pending.append(index)
        else:
            rows.append(row)
    terms: Dict[Term, None] = {}
    for atom in atoms:
        for term in atom.terms():
            terms.setdefault(term, None)
    return _branch(atoms, equalities, rows, pending, {}, tuple(terms))


def _branch(atoms, equalities, rows, pending, branches, terms) -> Union[Sat, Unsat]:
    outcome = _solve(equalities, rows)
    if isinstance(outcome, _Row):
        return Unsat((Refutation(outcome.origin, dict(branches)),))
    model = {term: outcome.get(term, Fraction(0)) for term in terms}
    violated = next((i for i in pending if not atoms[i].holds(model)), None)
    if violated is None:
        return Sat(model)
    remaining = [i for i in pending if i != violated]
    refutations: List[Refutation] = []
    for sign in (1, -1):
        expr = atoms[violated].expr.scale(sign)
        split = _Row(expr, True, {violated: Fraction(1)})
        result = _branch(atoms, equalities, rows + [split], remaining, {**branches, violated: sign}, terms)
        if result.is_sat:
            return result
        refutations.extend(result.refutations)
    return Unsat(tuple(refutations))


def _solve(equalities: List[_Row], rows: List[_Row]) -> Union[Dict[Term, Fraction], _Row]:
    """Model of the rows, or a contradictory derived row"""
    equalities = list(equalities)
    rows = list(rows)
    solved: List[Tuple[Term, _Row]] = []
    while equalities:
        row = equalities.pop(0)
        if row.expr.is_constant:
            if row.expr.const != 0:
                # orient so that the closed value is positive
                return row if row.expr.const > 0 else row.combine(Fraction(-1), row, Fraction(0))
            continue
        pivot, c = row.expr.items[0]
        solved.append((pivot, row))
        equalities = [_eliminate_with(other, pivot, row, c) for other in equalities]
        rows = [_eliminate_with(other, pivot, row, c) for other in rows]
    for row in rows:
        if row.contradiction():
            return row
    eliminated: List[Tuple[Term, List[_Row]]] = []
    while True:
        rows = _dedupe(rows)
        candidates = sorted({t for row in rows for t, _ in row.expr.items}, key=_key)
        if not candidates:
            break
        pivot = min(candidates, key=lambda t: (_fm_cost(rows, t), _key(t)))
        upper = [r for r in rows if r.expr.coefficient(pivot) > 0]
        lower = [r for r in rows if r.expr.coefficient(pivot) < 0]
        kept = [r for r in rows if r.expr.coefficient(pivot) == 0]
        eliminated.append((pivot, upper + lower))
        for up, low in product(upper, lower):
            a = up.expr.coefficient(pivot)
            b = -low.expr.coefficient(pivot)
            combined = up.combine(1 / a, low, 1 / b)
            if combined.contradiction():
                return combined
            if not combined.expr.is_constant:
                kept.append(combined)
        rows = kept
    model: Dict[Term, Fraction] = {}
    for pivot, bounding in reversed(eliminated):
        model[pivot] = _pick_value(pivot, bounding, model)
    for pivot, row in reversed(solved):
        c = row.expr.coefficient(pivot)
        model[pivot] = -row.expr.drop(pivot).value(model) / c
    return model


def _eliminate_with(other: _Row, pivot: Term, equality: _Row, c: Fraction) -> _Row:
    a = other.expr.coefficient(pivot)
    if a == 0:
        return other
    return other.combine(Fraction(1), equality, -a / c)


def _fm_cost(rows: List[_Row], pivot: Term) -> int:
    up = sum(1 for r in rows if r.expr.coefficient(pivot) > 0)
    low = sum(1 for r in rows if r.expr.coefficient(pivot) < 0)
    return up * low - up - low


def _dedupe(rows: List[_Row]) -> List[_Row]:
    seen = set()
    result = []
    for row in rows:
        key = (row.expr, row.strict)
        if key not in seen:
            seen.add(key)
            result.append(row)
    return result


def _pick_value(pivot: Term, rows: List[_Row], model: Dict[Term, Fraction]) -> Fraction:
    lower: Optional[Tuple[Fraction, bool]] = None
    upper: Optional[Tuple[Fraction, bool]] = None
    for row in rows:
        a = row.expr.coefficient(pivot)
        bound = -row.expr.drop(pivot).value(model) / a
        if a > 0:
            if upper is None or bound < upper[0] or (bound == upper[0] and row.strict):
                upper = (bound, row.strict)
        else:
            if lower is None or bound > lower[0] or (bound == lower[0] and row.strict):
                lower = (bound, row.strict)
    if lower is not None and upper is not None:
        if lower[0] == upper[0]:
            return lower[0]
        return (lower[0] + upper[0]) / 2
    if lower is not None:
        return lower[0] + 1
    if upper is not None:
        return upper[0] - 1
    return Fraction(0)


def check_refutation(atoms: Sequence[LinAtom], refutation: Refutation) -> bool:
    """Re-derive the contradiction recorded in a refutation"""
    total = LinExpr()
    strict = False
    for index, multiplier in refutation.multipliers.items():
        atom = atoms[index].normalized()
        if index in refutation.branches:
            expr, rel = atom.expr.scale(refutation.branches[index]), "<"
        else:
            expr, rel = atom.expr, atom.rel
        if rel != "=" and multiplier < 0:
            return False
        total = total + expr.scale(multiplier)
        strict = strict or (rel == "<" and multiplier > 0)
    if not total.is_constant:
        return False
    return total.const > 0 or (total.const == 0 and strict)


# ---------------------------------------------------------------- quantifier elimination


def _occurrences_ok(target: Term, atom: Atom) -> bool:
    """``target`` may only occur as a maximal operand of arithmetic or equality"""
    if isinstance(atom, Pred):
        return target not in tuple(iter_terms(atom))
    for term in iter_terms(atom):
        if isinstance(term, App) and not term.is_arithmetic and target in tuple(iter_terms(term.args)):
            return False
    return True


def _mentions(literal: Literal, target: Term) -> bool:
    return target in tuple(iter_terms(literal.atom))


def qe(x: Term, formula: Formula, max_cubes: Optional[int] = None) -> Formula:
    """Quantifier-free equivalent of ``exists x. formula`` over the rationals"""
    if x.sort != NUM:
        raise SortError(f"qe eliminates numeric terms, got {x}:{x.sort}")
    for atom in fm.atoms(formula):
        if not _occurrences_ok(x, atom):
            raise UnsupportedInput(f"{x} occurs below an uninterpreted symbol in {atom}")
    cubes = fm.dnf(formula, max_cubes)
    results: List[Formula] = []
    for cube in cubes:
        results.extend(_qe_cube(x, cube, max_cubes))
        if max_cubes is not None and len(results) > max_cubes:
            raise ResourceExhausted("DNF cubes", max_cubes)
    return simplify(fm.disj(*results), max_cubes)


def _qe_cube(x: Term, cube, max_cubes) -> List[Formula]:
    rest = [fm.lit(l) for l in cube if not _mentions(l, x)]
    linear = [from_literal(l) for l in cube if _mentions(l, x)]
    linear = [a for a in linear if a.expr.coefficient(x) != 0 or a.truth() is not True]
    equality = next((a for a in linear if a.rel == "=" and a.expr.coefficient(x) != 0), None)
    if equality is not None:
        c = equality.expr.coefficient(x)
        solution = equality.expr.drop(x).scale(-1 / c)
        substituted = [LinAtom(a.expr.substitute(x, solution), a.rel).to_formula() for a in linear if a is not equality]
        return [fm.conj(*rest, *substituted)]
    disequalities = [a for a in linear if a.rel == "!=" and a.expr.coefficient(x) != 0]
    others = [a for a in linear if a not in disequalities]
    if max_cubes is not None and 2 ** len(disequalities) > max_cubes:
        raise ResourceExhausted("DNF cubes", max_cubes)
    results = []
    for signs in product((1, -1), repeat=len(disequalities)):
        split = [LinAtom(a.expr.scale(s), "<") for a, s in zip(disequalities, signs)]
        results.append(fm.conj(*rest, *_fm_step(x, others + split)))
    return results


def _fm_step(x: Term, atoms: Sequence[LinAtom]) -> List[Formula]:
    upper = [a for a in atoms if a.expr.coefficient(x) > 0]
    lower = [a for a in atoms if a.expr.coefficient(x) < 0]
    result = [a.to_formula() for a in atoms if a.expr.coefficient(x) == 0]
    for up, low in product(upper, lower):
        a = up.expr.coefficient(x)
        b = -low.expr.coefficient(x)
        expr = up.expr.scale(1 / a) + low.expr.scale(1 / b)
        strict = up.rel == "<" or low.rel == "<"
        result.append(LinAtom(expr, "<" if strict else "<=").normalized().to_formula())
    return result


def _set_partitions(items: List[Term], max_blocks: int) -> Iterator[List[List[Term]]]:
    if not items:
        yield []
        return
    head, tail = items[0], items[1:]
    for partition in _set_partitions(tail, max_blocks):
        for i in range(len(partition)):
            yield partition[:i] + [[head] + partition[i]] + partition[i + 1:]
        if len(partition) < max_blocks:
            yield [[head]] + partition


def qe_point(x: Term, formula: Formula, card: Optional[int] = None, max_cubes: Optional[int] = None) -> Formula:
    """Eliminate ``exists x`` for a point-sort ``x`` occurring only in (dis)equalities.

    ``card=None`` reads the point sort as infinite; otherwise it has exactly
    ``card`` elements.
    """
    if x.sort == NUM:
        raise SortError(f"qe_point eliminates point terms, got {x}")
    for atom in fm.atoms(formula):
        if x in tuple(iter_terms(atom)) and not (isinstance(atom, Eq) and x in (atom.lhs, atom.rhs)):
            raise UnsupportedInput(f"{x} occurs below a function or predicate symbol in {atom}")
    results: List[Formula] = []
    for cube in fm.dnf(formula, max_cubes):
        results.append(_qe_point_cube(x, cube, card, max_cubes))
    return simplify(fm.disj(*results), max_cubes)


def _other_side(atom: Eq, x: Term) -> Term:
    return atom.rhs if atom.lhs == x else atom.lhs


def _qe_point_cube(x: Term, cube, card, max_cubes) -> Formula:
    rest = [fm.lit(l) for l in cube if not _mentions(l, x)]
    equalities: List[Term] = []
    disequalities: List[Term] = []
    for literal in cube:
        if not _mentions(literal, x):
            continue
        other = _other_side(literal.atom, x)
        if other == x:
            if literal.positive:
                continue
            return FALSE
        (equalities if literal.positive else disequalities).append(other)
    if equalities:
        witness = equalities[0]
        bound = [fm.lit(Literal(Eq(witness, t))) for t in equalities[1:]]
        bound += [fm.lit(Literal(Eq(witness, t), False)) for t in disequalities]
        return fm.conj(*rest, *bound)
    distinct = list(dict.fromkeys(disequalities))
    if card is None or len(distinct) < card:
        return fm.conj(*rest)
    if card <= 1:
        return FALSE
    options: List[Formula] = []
    for partition in _set_partitions(distinct, card - 1):
        options.append(fm.conj(*(fm.AtomF(Eq(block[0], t)) for block in partition for t in block[1:])))
        if max_cubes is not None and len(options) > max_cubes:
            raise ResourceExhausted("DNF cubes", max_cubes)
    return fm.conj(*rest, fm.disj(*options))


# ---------------------------------------------------------------- simplification


def canonical_literal(literal: Literal) -> Formula:
    atom = literal.atom
    if is_arithmetic(atom):
        return from_literal(literal).to_formula()
    if isinstance(atom, Eq):
        lhs, rhs = sorted((atom.lhs, atom.rhs), key=_key)
        if lhs == rhs:
            return TRUE if literal.positive else FALSE
        return fm.lit(Literal(Eq(lhs, rhs), literal.positive))
    return fm.lit(literal)


def canonical(formula: Formula) -> Formula:
    """NNF with canonical atoms and folded constants, without distribution"""
    formula = fm.nnf(formula)
    if isinstance(formula, (fm.Forall, fm.Exists)):
        return type(formula)(formula.variables, canonical(formula.body))
    if isinstance(formula, fm.And):
        return fm.conj(*(canonical(a) for a in formula.args))
    if isinstance(formula, fm.Or):
        return fm.disj(*(canonical(a) for a in formula.args))
    literal = fm.to_literal(formula)
    if literal is not None:
        return canonical_literal(literal)
    return formula


def _cube_consistent(cube: Tuple[Literal, ...]) -> bool:
    arithmetic = [from_literal(l) for l in cube if is_arithmetic(l.atom)]
    if arithmetic and not lra_sat(arithmetic).is_sat:
        return False
    return True


def simplify(formula: Formula, max_cubes: Optional[int] = None) -> Formula:
    """Canonical DNF with contradictory and subsumed cubes removed.

    Falls back to the undistributed canonical form when the DNF would exceed
    ``max_cubes``.
    """
    base = canonical(formula)
    if isinstance(base, (fm.Forall, fm.Exists)):
        return base
    try:
        cubes = fm.dnf(base, max_cubes)
    except ResourceExhausted:
        return base
    kept: List[Tuple[Literal, ...]] = []
    for cube in cubes:
        if not _cube_consistent(cube):
            continue
        kept.append(cube)
    kept.sort(key=len)
    minimal: List[Tuple[Literal, ...]] = []
    for cube in kept:
        if any(set(smaller) <= set(cube) for smaller in minimal):
            continue
        minimal.append(cube)
    return fm.disj(*(fm.cube_formula(c) for c in minimal))
