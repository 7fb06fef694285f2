from typing import List

from app.commands.base_command import BaseCommand
from app.config import Settings
from app.logic.hres import saturate
from app.logic.parser import ProblemFile
from app.models.command import CommandOptions, CommandResult, CommandType


class SaturateCommand(BaseCommand):
    def __init__(self, settings: Settings):
        super().__init__(CommandType.SATURATE, settings)

    def execute(self, problem: ProblemFile, arguments: List[str], options: CommandOptions) -> CommandResult:
        limits = self.limits(options)
        clauses, background = problem.split_clauses(arguments or None, limits.max_dnf)
        eliminable = arguments or sorted({p for c in clauses for p in c.predicates()} & set(problem.predicates))
        prec = self.precedence(options, eliminable, (d.name for d in problem.extension_functions))
        bg = self.background(problem, options, background)
        result = self._measure_execution("saturate", saturate, clauses, bg, prec, limits)

        lines, exit_code = self.saturation_lines(result)
        final = result.clauses if result.is_saturated else result.partial
        return CommandResult(
            verdict="saturated" if result.is_saturated else "diverged",
            exit_code=exit_code,
            lines=lines,
            clauses=[str(c) for c in final],
            trace=result.trace,
            timings=self.timings,
        )
