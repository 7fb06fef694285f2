from typing import List

from app.commands.base_command import BaseCommand, EXIT_DEFINITIVE
from app.config import Settings
from app.logic.chc import accelerate_unit
from app.logic.errors import UsageError
from app.logic.parser import ProblemFile
from app.models.command import CommandOptions, CommandResult, CommandType


class AccelerateCommand(BaseCommand):
    def __init__(self, settings: Settings):
        super().__init__(CommandType.ACCELERATE, settings)

    def execute(self, problem: ProblemFile, arguments: List[str], options: CommandOptions) -> CommandResult:
        if len(arguments) != 1:
            raise UsageError("accelerate needs exactly one predicate")
        predicate = arguments[0]
        clauses, _ = problem.split_clauses([predicate], self.limits(options).max_dnf)
        acceleration = self._measure_execution("accelerate", accelerate_unit, clauses, predicate)

        lines = [f"accelerated: {len(acceleration.clauses)} clauses"]
        lines.extend(self.clause_lines(acceleration.clauses))
        lines.append(f"criterion: {acceleration.criterion}")
        return CommandResult(verdict="accelerated", exit_code=EXIT_DEFINITIVE, lines=lines,
                             clauses=[str(c) for c in acceleration.clauses],
                             constraint=str(acceleration.criterion), timings=self.timings)
