from typing import List

from app.commands.base_command import BaseCommand, EXIT_DEFINITIVE
from app.config import Settings
from app.logic.locality import check_sat_ext
from app.logic.parser import ProblemFile, parse_extra_terms
from app.models.command import CommandOptions, CommandResult, CommandType


class CheckSatCommand(BaseCommand):
    """Satisfiability of the query modulo the clauses, by hierarchical reduction"""

    def __init__(self, settings: Settings):
        super().__init__(CommandType.CHECKSAT, settings)

    def execute(self, problem: ProblemFile, arguments: List[str], options: CommandOptions) -> CommandResult:
        limits = self.limits(options)
        ext = self.extension(problem, options)
        goal = problem.goal(limits.max_dnf)
        extra = problem.extra_terms
        if options.extra_terms:
            extra = extra + parse_extra_terms(options.extra_terms, problem)
        outcome = self._measure_execution("check", check_sat_ext, ext, goal, extra)

        verdict = "sat" if outcome.is_sat else "unsat"
        lines = [f"verdict: {verdict}",
                 f"theory: {self.theory(problem, options)}",
                 f"instances: {len(outcome.instances)}"]
        lines.extend(f"warning: {w}" for w in outcome.warnings)
        if outcome.is_sat:
            lines.append("model:")
            lines.extend(f"  {line}" for line in outcome.model_lines())
        return CommandResult(verdict=verdict, exit_code=EXIT_DEFINITIVE, lines=lines, timings=self.timings)
