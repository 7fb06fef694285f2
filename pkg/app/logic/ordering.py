"""Lexicographic path ordering on terms and literals"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Optional, Sequence, Tuple, Union

import networkx as nx

from app.logic.terms import App, Atom, Cmp, Const, Eq, Literal, Num, Pred, Term, Var, iter_terms


class Order(str, Enum):
    GREATER = "greater"
    LESS = "less"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"

    def flip(self) -> "Order":
        if self is Order.GREATER:
            return Order.LESS
        if self is Order.LESS:
            return Order.GREATER
        return self


# levels of the default precedence, highest first
LEVEL_ELIMINABLE = 4
LEVEL_EXPLICIT = 3
LEVEL_EXTENSION = 2
LEVEL_BASE = 1
LEVEL_CONSTANT = 0


@dataclass(frozen=True)
class Precedence:
    """Total order on symbols; numerals sit below every symbol.

    ``explicit`` lists symbols highest first and overrides the level defaults.
    """

    eliminable: FrozenSet[str] = frozenset()
    extension: FrozenSet[str] = frozenset()
    explicit: Tuple[str, ...] = ()
    constants: FrozenSet[str] = frozenset()

    @classmethod
    def parse(cls, text: str, **kwargs) -> "Precedence":
        symbols = tuple(s.strip() for s in text.split(">") if s.strip())
        return cls(explicit=symbols, **kwargs)

    def rank(self, symbol: str) -> Tuple[int, int, str]:
        if symbol in self.eliminable:
            level = LEVEL_ELIMINABLE
        elif symbol in self.explicit:
            return (LEVEL_EXPLICIT, len(self.explicit) - self.explicit.index(symbol), "")
        elif symbol in self.extension:
            level = LEVEL_EXTENSION
        elif symbol in self.constants:
            level = LEVEL_CONSTANT
        else:
            level = LEVEL_BASE
        return (level, 0, symbol)

    def greater(self, f: str, g: str) -> bool:
        return self.rank(f) > self.rank(g)


Node = Union[Term, Atom]


def _head(node: Node) -> Tuple[str, Tuple[Term, ...]]:
    if isinstance(node, App):
        return node.fn, node.args
    if isinstance(node, Const):
        return node.name, ()
    if isinstance(node, Pred):
        return node.name, node.args
    if isinstance(node, Eq):
        return "=", (node.lhs, node.rhs)
    if isinstance(node, Cmp):
        return node.op, (node.lhs, node.rhs)
    raise TypeError(f"no head symbol for {node!r}")


def _occurs(var: Var, node: Node) -> bool:
    return any(t == var for t in iter_terms(node))


def _gt(s: Node, t: Node, prec: Precedence) -> bool:
    if s == t or isinstance(s, Var):
        return False
    if isinstance(t, Var):
        return _occurs(t, s)
    if isinstance(s, Num):
        return isinstance(t, Num) and s.value > t.value
    if isinstance(t, Num):
        return True
    f, s_args = _head(s)
    g, t_args = _head(t)
    if any(a == t or _gt(a, t, prec) for a in s_args):
        return True
    if not all(_gt(s, b, prec) for b in t_args):
        return False
    if f != g:
        return prec.greater(f, g)
    for a, b in zip(s_args, t_args):
        if a == b:
            continue
        return _gt(a, b, prec)
    return len(s_args) > len(t_args)


def compare(s: Union[Node, Literal], t: Union[Node, Literal], prec: Precedence) -> Order:
    if isinstance(s, Literal) and isinstance(t, Literal):
        return compare_literals(s, t, prec)
    if s == t:
        return Order.EQUAL
    if _gt(s, t, prec):
        return Order.GREATER
    if _gt(t, s, prec):
        return Order.LESS
    return Order.INCOMPARABLE


def _eliminable(literal: Literal, prec: Precedence) -> bool:
    return isinstance(literal.atom, Pred) and literal.atom.name in prec.eliminable


def compare_literals(l1: Literal, l2: Literal, prec: Precedence) -> Order:
    e1, e2 = _eliminable(l1, prec), _eliminable(l2, prec)
    if e1 != e2:
        return Order.GREATER if e1 else Order.LESS
    verdict = compare(l1.atom, l2.atom, prec)
    if verdict is not Order.EQUAL:
        return verdict
    if l1.positive == l2.positive:
        return Order.EQUAL
    # same atom: the negative literal is the larger one
    return Order.LESS if l1.positive else Order.GREATER


def maximal_literals(clause: Sequence[Literal], prec: Precedence) -> Tuple[int, ...]:
    return tuple(
        i for i, literal in enumerate(clause)
        if not any(j != i and compare_literals(other, literal, prec) is Order.GREATER
                   for j, other in enumerate(clause))
    )


def is_maximal(index: int, clause: Sequence[Literal], prec: Precedence) -> bool:
    return index in maximal_literals(clause, prec)


def strictly_maximal(index: int, clause: Sequence[Literal], prec: Precedence) -> bool:
    if not is_maximal(index, clause, prec):
        return False
    literal = clause[index]
    return not any(j != index and compare_literals(other, literal, prec) is Order.EQUAL
                   for j, other in enumerate(clause))


def _ordering_graph(nodes: Iterable[Node], prec: Precedence) -> nx.DiGraph:
    """Edges s -> t for every pair with s greater than t"""
    nodes = list(dict.fromkeys(nodes))
    graph = nx.DiGraph()
    graph.add_nodes_from(range(len(nodes)))
    for i, s in enumerate(nodes):
        for j, t in enumerate(nodes):
            if i != j and compare(s, t, prec) is Order.GREATER:
                graph.add_edge(i, j)
    return graph


def is_well_founded(nodes: Iterable[Node], prec: Precedence) -> bool:
    return nx.is_directed_acyclic_graph(_ordering_graph(nodes, prec))
