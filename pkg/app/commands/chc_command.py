from typing import List

from app.commands.base_command import BaseCommand, EXIT_DEFINITIVE, EXIT_INCONCLUSIVE
from app.config import Settings
from app.logic.chc import ChcVerdict, emit_chc, interpret_external_model, part_str, render_smtlib, saturate_pure
from app.logic.errors import UsageError
from app.logic.hres import Diverged
from app.logic.parser import ProblemFile
from app.models.command import CommandOptions, CommandResult, CommandType
from app.services.chc_solver import ChcSolverService


class EmitChcCommand(BaseCommand):
    """Export the constraints of a pure saturation as constrained Horn clauses"""

    def __init__(self, settings: Settings):
        super().__init__(CommandType.EMIT_CHC, settings)

    def execute(self, problem: ProblemFile, arguments: List[str], options: CommandOptions) -> CommandResult:
        if len(arguments) != 1:
            raise UsageError("emit-chc needs exactly one predicate")
        predicate = arguments[0]
        if predicate not in problem.predicates:
            raise UsageError(f"undeclared predicate: {predicate}")
        limits = self.limits(options)
        clauses, _ = problem.split_clauses([predicate], limits.max_dnf)
        prec = self.precedence(options, [predicate], (d.name for d in problem.extension_functions))
        saturation = self._measure_execution("saturate", saturate_pure, [c.literals for c in clauses],
                                             predicate, prec, limits)
        if isinstance(saturation, Diverged):
            lines = [f"diverged: {saturation.reason} after {len(saturation.partial)} clause parts"]
            return CommandResult(verdict="diverged", exit_code=EXIT_INCONCLUSIVE, lines=lines, timings=self.timings)

        parts = [f"  [{i}] {part_str(part)}"
                 for i, part in enumerate(saturation.clauses, start=1)]
        system = emit_chc(clauses, saturation)
        if system is None:
            lines = [f"clause parts: {len(saturation.clauses)}", *parts,
                     f"verdict: exists {predicate}. N is equivalent to true"]
            return CommandResult(verdict="true", exit_code=EXIT_DEFINITIVE, lines=lines, timings=self.timings)

        smtlib = render_smtlib(system)
        lines = [f"clause parts: {len(saturation.clauses)}", *parts,
                 f"rules: {len(system.rules)}", f"query: mu_{system.query}", "chc:"]
        lines.extend(f"  {line}" for line in smtlib.splitlines())

        solver_command = options.solve_chc or self.settings.SOLVE_CHC
        if not solver_command:
            return CommandResult(verdict="emitted", exit_code=EXIT_DEFINITIVE, lines=lines,
                                 timings=self.timings, details={"smtlib": smtlib})

        solver = ChcSolverService(solver_command, self.settings.CHC_SOLVER_TIMEOUT)
        output = self._measure_execution("solve", solver.solve, smtlib)
        answer = interpret_external_model(output, system)
        lines.append(f"solver: {answer.verdict.value}")
        lines.append(f"verdict: {answer.summary}")
        lines.extend(f"  {line}" for line in answer.model)
        exit_code = EXIT_INCONCLUSIVE if answer.verdict is ChcVerdict.INCONCLUSIVE else EXIT_DEFINITIVE
        return CommandResult(verdict=answer.verdict.value, exit_code=exit_code, lines=lines,
                             timings=self.timings, details={"smtlib": smtlib})
