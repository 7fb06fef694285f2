"""Render problems, formulas and constraints in the tool-listing syntax read by the parser"""
from typing import FrozenSet, Iterable, List, Sequence

from app.logic import formula as fm
from app.logic.formula import Formula
from app.logic.parser import (
    ClassCall, ClassMeet, ClassSyntax, Declaration, ProblemFile, Statement, StatementKind,
)
from app.logic.terms import App, Atom, Clause, Eq, Num, Pred, Term, Var, format_number, variables

INDENT = "    "


def numeral(value) -> str:
    return f"_{format_number(value)}"


def term_str(term: Term) -> str:
    if isinstance(term, Num):
        return numeral(term.value)
    if not isinstance(term, App):
        return str(term)
    if term.fn in ("+", "-") and len(term.args) == 2:
        return f"{term_str(term.args[0])} {term.fn} {_operand(term.args[1])}"
    if term.fn == "-":
        return f"-{_operand(term.args[0])}"
    if term.fn == "*":
        return f"{_operand(term.args[0])} * {_operand(term.args[1])}"
    if not term.args:
        return term.fn
    return f"{term.fn}({', '.join(term_str(a) for a in term.args)})"


def _operand(term: Term) -> str:
    if isinstance(term, App) and term.is_arithmetic:
        return f"({term_str(term)})"
    return term_str(term)


def atom_str(atom: Atom, encoded: FrozenSet[str] = frozenset(), positive: bool = True) -> str:
    if isinstance(atom, Pred):
        if atom.name in encoded:
            return f"{atom.name}({', '.join(term_str(a) for a in atom.args)}) = {numeral(1 if positive else 0)}"
        text = atom.name if not atom.args else f"{atom.name}({', '.join(term_str(a) for a in atom.args)})"
        return text if positive else f"NOT({text})"
    op = "=" if isinstance(atom, Eq) else atom.op
    text = f"{term_str(atom.lhs)} {op} {term_str(atom.rhs)}"
    return text if positive else f"NOT({text})"


def formula_str(formula: Formula, encoded: FrozenSet[str] = frozenset()) -> str:
    if isinstance(formula, fm.Truth):
        return "TRUE" if formula.value else "FALSE"
    if isinstance(formula, fm.AtomF):
        return atom_str(formula.atom, encoded)
    if isinstance(formula, fm.Not):
        if isinstance(formula.arg, fm.AtomF):
            return atom_str(formula.arg.atom, encoded, positive=False)
        return f"NOT({formula_str(formula.arg, encoded)})"
    if isinstance(formula, (fm.And, fm.Or)):
        keyword = "AND" if isinstance(formula, fm.And) else "OR"
        return f"{keyword}({', '.join(formula_str(a, encoded) for a in formula.args)})"
    names = ", ".join(v.name for v in formula.variables)
    return f"({'FORALL' if isinstance(formula, fm.Forall) else 'EXISTS'} {names}). {formula_str(formula.body, encoded)}"


def quantified(variables: Sequence[Var], body: str) -> str:
    if not variables:
        return body
    return f"(FORALL {', '.join(v.name for v in variables)}). {body}"


def statement_str(statement: Statement, encoded: FrozenSet[str] = frozenset()) -> str:
    def join(parts):
        return ", ".join(formula_str(p, encoded) for p in parts)

    if statement.kind is StatementKind.IMPLICATION:
        body = f"{join(statement.left)} --> {join(statement.right)}".strip()
    elif statement.kind is StatementKind.CONSTRAINED:
        body = f"{formula_str(statement.left[0], encoded)} || {join(statement.right) or '_|_'}"
    else:
        body = formula_str(statement.left[0], encoded)
    return quantified(statement.variables, body) + ";"


def clause_statement(clause: Clause) -> str:
    """A clause as a FORALL statement with every literal after the arrow"""
    literals = ", ".join(atom_str(l.atom, positive=l.positive) for l in clause)
    return quantified(variables(clause), f"--> {literals}" if literals else "-->") + ";"


def constraint_listing(variables: Sequence[Var], body: Formula) -> str:
    """``(FORALL u). r1(u) - r2(u) <= _0`` style line for a synthesized constraint"""
    return quantified(variables, formula_str(body))


def class_str(syntax: ClassSyntax) -> str:
    if isinstance(syntax, ClassCall):
        return f"{syntax.name}({', '.join(syntax.args)})" if syntax.args else syntax.name
    if isinstance(syntax, ClassMeet):
        return " & ".join(class_str(p) for p in syntax.parts)
    return f"({class_str(syntax.inner)}){syntax.closure or ''}"


def _signature_set(declarations: Iterable[Declaration]) -> str:
    items = [f"({d.name}, {', '.join(str(n) for n in d.numbers)})" for d in declarations]
    return "{" + ", ".join(items) + "}"


def print_problem(problem: ProblemFile) -> str:
    encoded = problem.encoded_predicates
    lines: List[str] = []
    for section in problem.sections:
        if section == "Base_functions":
            lines.append(f"Base_functions := {_signature_set(problem.base_functions)}")
        elif section == "Extension_functions":
            lines.append(f"Extension_functions := {_signature_set(problem.extension_functions)}")
        elif section == "Parameters":
            lines.append(f"Parameters := {{{', '.join(problem.parameters)}}}")
        elif section == "Relations":
            lines.append(f"Relations := {_signature_set(problem.relations)}")
        elif section == "Theory":
            lines.append(f"Theory := {problem.theory};")
        elif section in ("Clauses", "Query"):
            lines.append("")
            lines.append(f"{section} :=")
            statements = problem.clauses if section == "Clauses" else problem.query
            lines.extend(INDENT + statement_str(s, encoded) for s in statements)
        else:
            lines.append("")
            lines.append("Classes :=")
            lines.extend(f"{INDENT}{d.name} := {class_str(d.syntax)};" for d in problem.classes)
    return "\n".join(lines) + "\n"
