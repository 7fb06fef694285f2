from typing import List

from app.commands.base_command import BaseCommand
from app.config import Settings
from app.logic.errors import UsageError
from app.logic.hres import consistent_on, eliminate_seq
from app.logic.parser import ProblemFile
from app.models.command import CommandOptions, CommandResult, CommandType

DEFAULT_POINTS = 2


class EliminateCommand(BaseCommand):
    """Eliminate the named predicates one after the other"""

    def __init__(self, settings: Settings):
        super().__init__(CommandType.ELIMINATE, settings)

    def execute(self, problem: ProblemFile, arguments: List[str], options: CommandOptions) -> CommandResult:
        if not arguments:
            raise UsageError("eliminate needs at least one predicate")
        unknown = [p for p in arguments if p not in problem.predicates]
        if unknown:
            raise UsageError(f"undeclared predicates: {', '.join(unknown)}")
        limits = self.limits(options)
        clauses, background = problem.split_clauses(arguments, limits.max_dnf)
        prec = self.precedence(options, arguments, (d.name for d in problem.extension_functions))
        bg = self.background(problem, options, background)
        residue, results = self._measure_execution("eliminate", eliminate_seq, clauses, arguments, bg, prec, limits)
        trace = [line for r in results for line in r.trace]

        if residue is None:
            lines, exit_code = self.saturation_lines(results[-1])
            lines.insert(0, f"eliminating: {' '.join(arguments[:len(results)])}")
            return CommandResult(verdict="diverged", exit_code=exit_code, lines=lines,
                                 clauses=[str(c) for c in results[-1].partial], trace=trace, timings=self.timings)

        points = limits.psort_card or DEFAULT_POINTS
        consistent = self._measure_execution("consistency", consistent_on, residue, bg, points, limits.max_dnf)
        lines = [f"eliminated: {' '.join(arguments)}", f"remaining: {len(residue)} clauses"]
        lines.extend(self.clause_lines(residue))
        lines.append(f"consistent on {points} points: {'yes' if consistent else 'no'}")
        return CommandResult(verdict="eliminated", exit_code=0, lines=lines,
                             clauses=[str(c) for c in residue], trace=trace, timings=self.timings,
                             details={"consistent": consistent})
