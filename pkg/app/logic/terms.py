"""Many-sorted terms, atoms, literals and clauses plus substitutions and unification.

Everything here is an immutable value. Clauses are plain tuples of
``Literal`` with an implicit universal closure over their variables.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple, Union

from app.logic.errors import NonlinearTermError, SortError


@dataclass(frozen=True)
class Sort:
    name: str
    interpreted: bool = False

    def __str__(self) -> str:
        return self.name


NUM = Sort("num", True)
POINT = Sort("p", False)

ARITH_SYMBOLS = frozenset({"+", "-", "*"})
COMPARISONS = ("<=", "<", ">=", ">")


def format_number(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class Term:
    """Common protocol of the four term kinds"""

    sort: Sort

    def substitute(self, sigma: Mapping["Var", "Term"]) -> "Term":
        raise NotImplementedError

    def iter_subterms(self) -> Iterator["Term"]:
        yield self


@dataclass(frozen=True)
class Var(Term):
    name: str
    sort: Sort = POINT

    def substitute(self, sigma):
        return sigma.get(self, self)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const(Term):
    name: str
    sort: Sort = POINT

    def substitute(self, sigma):
        return self

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Num(Term):
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))

    @property
    def sort(self) -> Sort:
        return NUM

    def substitute(self, sigma):
        return self

    def __str__(self) -> str:
        return format_number(self.value)


@dataclass(frozen=True)
class App(Term):
    fn: str
    args: Tuple[Term, ...]
    sort: Sort = NUM

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        if self.fn == "*":
            if len(self.args) != 2 or not isinstance(self.args[0], Num):
                raise NonlinearTermError(f"product needs a numeral coefficient: {self.fn}{self.args}")

    def substitute(self, sigma):
        return App(self.fn, tuple(a.substitute(sigma) for a in self.args), self.sort)

    def iter_subterms(self):
        yield self
        for arg in self.args:
            yield from arg.iter_subterms()

    @property
    def is_arithmetic(self) -> bool:
        return self.fn in ARITH_SYMBOLS

    def __str__(self) -> str:
        if self.fn == "+":
            return f"{self.args[0]} + {self.args[1]}"
        if self.fn == "-" and len(self.args) == 2:
            return f"{self.args[0]} - {_wrap_sum(self.args[1])}"
        if self.fn == "-":
            return f"-{_wrap_sum(self.args[0])}"
        if self.fn == "*":
            return f"{self.args[0]}*{_wrap_sum(self.args[1])}"
        if not self.args:
            return self.fn
        return f"{self.fn}({', '.join(str(a) for a in self.args)})"


def _wrap_sum(term: Term) -> str:
    if isinstance(term, App) and term.fn in ("+", "-"):
        return f"({term})"
    if isinstance(term, Num) and term.value < 0:
        return f"({term})"
    return str(term)


def plus(a: Term, b: Term) -> App:
    return App("+", (a, b))


def minus(a: Term, b: Term) -> App:
    return App("-", (a, b))


def times(coefficient, term: Term) -> App:
    return App("*", (Num(Fraction(coefficient)), term))


# ---------------------------------------------------------------- atoms


class Atom:
    def substitute(self, sigma: Mapping[Var, Term]) -> "Atom":
        raise NotImplementedError

    def terms(self) -> Tuple[Term, ...]:
        raise NotImplementedError


@dataclass(frozen=True)
class Pred(Atom):
    name: str
    args: Tuple[Term, ...] = ()

    def __post_init__(self):
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))

    def substitute(self, sigma):
        return Pred(self.name, tuple(a.substitute(sigma) for a in self.args))

    def terms(self):
        return self.args

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Eq(Atom):
    lhs: Term
    rhs: Term

    def __post_init__(self):
        if self.lhs.sort != self.rhs.sort:
            raise SortError(f"equation between sorts {self.lhs.sort} and {self.rhs.sort}: {self.lhs} = {self.rhs}")

    def substitute(self, sigma):
        return Eq(self.lhs.substitute(sigma), self.rhs.substitute(sigma))

    def terms(self):
        return (self.lhs, self.rhs)

    def __str__(self) -> str:
        return f"{self.lhs} = {self.rhs}"


@dataclass(frozen=True)
class Cmp(Atom):
    op: str
    lhs: Term
    rhs: Term

    def __post_init__(self):
        if self.op not in COMPARISONS:
            raise ValueError(f"unknown comparison {self.op}")
        for side in (self.lhs, self.rhs):
            if side.sort != NUM:
                raise SortError(f"comparison operand {side} has sort {side.sort}")

    def substitute(self, sigma):
        return Cmp(self.op, self.lhs.substitute(sigma), self.rhs.substitute(sigma))

    def terms(self):
        return (self.lhs, self.rhs)

    def __str__(self) -> str:
        return f"{self.lhs} {self.op} {self.rhs}"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def substitute(self, sigma) -> "Literal":
        return Literal(self.atom.substitute(sigma), self.positive)

    def __str__(self) -> str:
        if self.positive:
            return str(self.atom)
        if isinstance(self.atom, Eq):
            return f"{self.atom.lhs} != {self.atom.rhs}"
        return f"NOT({self.atom})"


Clause = Tuple[Literal, ...]
Syntax = Union[Term, Atom, Literal, Sequence[Literal]]


def clause_str(clause: Clause) -> str:
    if not clause:
        return "_|_"
    return " | ".join(str(lit) for lit in clause)


# ---------------------------------------------------------------- traversal


def iter_terms(obj: Syntax) -> Iterator[Term]:
    """Every subterm occurrence, outermost first"""
    if isinstance(obj, Term):
        yield from obj.iter_subterms()
    elif isinstance(obj, Atom):
        for term in obj.terms():
            yield from term.iter_subterms()
    elif isinstance(obj, Literal):
        yield from iter_terms(obj.atom)
    else:
        for item in obj:
            yield from iter_terms(item)


def variables(obj: Syntax) -> Tuple[Var, ...]:
    seen: Dict[Var, None] = {}
    for term in iter_terms(obj):
        if isinstance(term, Var):
            seen.setdefault(term, None)
    return tuple(seen)


def constants(obj: Syntax) -> Tuple[Const, ...]:
    seen: Dict[Const, None] = {}
    for term in iter_terms(obj):
        if isinstance(term, Const):
            seen.setdefault(term, None)
    return tuple(seen)


def is_ground(obj: Syntax) -> bool:
    return not variables(obj)


def substitute(obj, sigma: Mapping[Var, Term]):
    if isinstance(obj, (Term, Atom, Literal)):
        return obj.substitute(sigma)
    return tuple(item.substitute(sigma) for item in obj)


def applications(obj: Syntax, symbols: Iterable[str]) -> Tuple[App, ...]:
    """Distinct applications of the given function symbols, in first-occurrence order"""
    wanted = set(symbols)
    seen: Dict[App, None] = {}
    for term in iter_terms(obj):
        if isinstance(term, App) and term.fn in wanted:
            seen.setdefault(term, None)
    return tuple(seen)


# ---------------------------------------------------------------- substitutions


class Substitution(Mapping[Var, Term]):
    """Finite sort-preserving map from variables to terms"""

    def __init__(self, bindings: Optional[Mapping[Var, Term]] = None):
        self._bindings: Dict[Var, Term] = {}
        for var, term in (bindings or {}).items():
            if var.sort != term.sort:
                raise SortError(f"cannot bind {var}:{var.sort} to {term}:{term.sort}")
            if term != var:
                self._bindings[var] = term

    def __getitem__(self, var: Var) -> Term:
        return self._bindings[var]

    def __iter__(self):
        return iter(self._bindings)

    def __len__(self) -> int:
        return len(self._bindings)

    def __hash__(self) -> int:
        return hash(frozenset(self._bindings.items()))

    def __eq__(self, other) -> bool:
        if isinstance(other, Substitution):
            return self._bindings == other._bindings
        return NotImplemented

    def apply(self, obj):
        return substitute(obj, self._bindings)

    def compose(self, other: "Substitution") -> "Substitution":
        """Substitution applying ``self`` first and ``other`` afterwards"""
        bindings = {var: term.substitute(other) for var, term in self._bindings.items()}
        for var, term in other.items():
            bindings.setdefault(var, term)
        return Substitution(bindings)

    def normalize(self) -> "Substitution":
        """Resolve chains so that applying the result twice equals applying it once"""
        bindings = dict(self._bindings)
        for _ in range(len(bindings) + 1):
            resolved = {var: term.substitute(bindings) for var, term in bindings.items()}
            if resolved == bindings:
                break
            bindings = resolved
        return Substitution(bindings)

    def __str__(self) -> str:
        if not self._bindings:
            return "{}"
        items = sorted(self._bindings.items(), key=lambda kv: kv[0].name)
        return "{" + ", ".join(f"{var}->{term}" for var, term in items) + "}"

    __repr__ = __str__


EMPTY = Substitution()


# ---------------------------------------------------------------- unification


def _walk(term: Term, bindings: Dict[Var, Term]) -> Term:
    while isinstance(term, Var) and term in bindings:
        term = bindings[term]
    return term


def _occurs(var: Var, term: Term, bindings: Dict[Var, Term]) -> bool:
    term = _walk(term, bindings)
    if term == var:
        return True
    if isinstance(term, App):
        return any(_occurs(var, arg, bindings) for arg in term.args)
    return False


def unify_terms(pairs: Iterable[Tuple[Term, Term]],
                bindings: Optional[Dict[Var, Term]] = None) -> Optional[Dict[Var, Term]]:
    bindings = dict(bindings or {})
    stack = list(pairs)
    while stack:
        left, right = stack.pop()
        left, right = _walk(left, bindings), _walk(right, bindings)
        if left == right:
            continue
        if left.sort != right.sort:
            return None
        if isinstance(left, Var):
            if _occurs(left, right, bindings):
                return None
            bindings[left] = right
        elif isinstance(right, Var):
            if _occurs(right, left, bindings):
                return None
            bindings[right] = left
        elif isinstance(left, App) and isinstance(right, App):
            if left.fn != right.fn or len(left.args) != len(right.args):
                return None
            stack.extend(reversed(list(zip(left.args, right.args))))
        else:
            return None
    return bindings


def _atom_pairs(a1: Atom, a2: Atom) -> Optional[List[Tuple[Term, Term]]]:
    if type(a1) is not type(a2):
        return None
    if isinstance(a1, Pred):
        if a1.name != a2.name or len(a1.args) != len(a2.args):
            return None
    elif isinstance(a1, Cmp) and a1.op != a2.op:
        return None
    return list(zip(a1.terms(), a2.terms()))


def mgu(a1: Union[Atom, Term], a2: Union[Atom, Term]) -> Optional[Substitution]:
    """Most general unifier of two atoms (or terms), ``None`` when they do not unify"""
    if isinstance(a1, Term) and isinstance(a2, Term):
        pairs = [(a1, a2)]
    else:
        pairs = _atom_pairs(a1, a2)
        if pairs is None:
            return None
    # pairs are popped from the end
    bindings = unify_terms(list(reversed(pairs)))
    if bindings is None:
        return None
    return Substitution(bindings).normalize()


def match(pattern: Atom, target: Atom, bindings: Optional[Mapping[Var, Term]] = None) -> Optional[Dict[Var, Term]]:
    """One-sided matching: a substitution binding only pattern variables"""
    pairs = _atom_pairs(pattern, target)
    if pairs is None:
        return None
    result = dict(bindings or {})
    for left, right in pairs:
        if not _match_term(left, right, result):
            return None
    return result


def _match_term(pattern: Term, target: Term, bindings: Dict[Var, Term]) -> bool:
    if isinstance(pattern, Var):
        if pattern.sort != target.sort:
            return False
        bound = bindings.get(pattern)
        if bound is None:
            bindings[pattern] = target
            return True
        return bound == target
    if isinstance(pattern, App):
        if not isinstance(target, App) or pattern.fn != target.fn or len(pattern.args) != len(target.args):
            return False
        return all(_match_term(p, t, bindings) for p, t in zip(pattern.args, target.args))
    return pattern == target


# ---------------------------------------------------------------- renaming


class FreshVariables:
    """Monotone counter producing reproducible fresh variable names"""

    def __init__(self, taken: Iterable[str] = ()):
        self.counter = 0
        self.taken: Set[str] = set(taken)

    def fresh(self, var: Var) -> Var:
        base = var.name
        while True:
            self.counter += 1
            name = f"{base}_{self.counter}"
            if name not in self.taken:
                self.taken.add(name)
                return Var(name, var.sort)

    def reserve(self, obj: Syntax) -> None:
        self.taken.update(v.name for v in variables(obj))


def rename_apart(c1: Clause, c2: Clause, fresh: Optional[FreshVariables] = None) -> Tuple[Clause, Clause]:
    """Variable-disjoint variants; only the clashing variables of ``c2`` are renamed"""
    fresh = fresh or FreshVariables()
    fresh.reserve(c1)
    fresh.reserve(c2)
    clashing = set(variables(c1)) & set(variables(c2))
    if not clashing:
        return tuple(c1), tuple(c2)
    sigma = {var: fresh.fresh(var) for var in variables(c2) if var in clashing}
    return tuple(c1), substitute(tuple(c2), sigma)


# ---------------------------------------------------------------- flatness


def _extension_occurrences(clause: Sequence[Literal], symbols: Set[str]) -> List[Union[App, Pred]]:
    found: List[Union[App, Pred]] = []
    for literal in clause:
        if isinstance(literal.atom, Pred) and literal.atom.name in symbols:
            found.append(literal.atom)
        for term in iter_terms(literal):
            if isinstance(term, App) and term.fn in symbols:
                found.append(term)
    return found


def is_flat_linear(clause: Sequence[Literal], extension_symbols: Iterable[str]) -> Tuple[bool, bool]:
    symbols = set(extension_symbols)
    occurrences = _extension_occurrences(clause, symbols)
    ground = is_ground(tuple(clause))
    for occurrence in occurrences:
        for arg in occurrence.args:
            if ground:
                if not isinstance(arg, (Const, Num)):
                    return False, False
            elif not isinstance(arg, Var):
                return False, False

    distinct = list(dict.fromkeys(occurrences))
    for occurrence in distinct:
        arg_vars = [a for a in occurrence.args if isinstance(a, Var)]
        if len(arg_vars) != len(set(arg_vars)):
            return True, False
    owner: Dict[Var, Union[App, Pred]] = {}
    for occurrence in distinct:
        for arg in occurrence.args:
            if isinstance(arg, Var):
                if arg in owner and owner[arg] != occurrence:
                    return True, False
                owner[arg] = occurrence
    return True, True
