from typing import List

from app.commands.base_command import BaseCommand, EXIT_DEFINITIVE, EXIT_INCONCLUSIVE
from app.config import Settings
from app.logic.errors import UsageError
from app.logic.graphlib import InclusionProblem, InclusionVerdict, check_inclusion
from app.logic.parser import ProblemFile
from app.models.command import CommandOptions, CommandResult, CommandType

INCLUSION_THEORY = "Tm"


class InclusionCommand(BaseCommand):
    """Decide whether the first named class is contained in the second"""

    def __init__(self, settings: Settings):
        super().__init__(CommandType.INCLUSION, settings)

    def execute(self, problem: ProblemFile, arguments: List[str], options: CommandOptions) -> CommandResult:
        if len(arguments) != 2:
            raise UsageError("inclusion needs two class names")
        limits = self.limits(options)
        left, right = (problem.class_named(name) for name in arguments)
        params = set(options.params or problem.parameters) | left.spec.parameters | right.spec.parameters
        inclusion = InclusionProblem(
            left, right,
            theory=options.theory or problem.theory or INCLUSION_THEORY,
            parameters=frozenset(params),
            psort_card=limits.psort_card,
            assumptions=tuple(problem.clause_set(limits.max_dnf)),
        )
        result = self._measure_execution("inclusion", check_inclusion, inclusion, limits)

        lines = [f"verdict: {result.verdict.value}", f"left: {left}", f"right: {right}"]
        if result.verdict is InclusionVerdict.DIVERGED:
            stuck = [side for side in (result.left, result.right) if side is not None and not side.converged]
            lines.extend(f"diverged: {side.expression}" for side in stuck)
            lines.append("hint: the emit-chc command exports the saturation as constrained Horn clauses")
            return CommandResult(verdict=result.verdict.value, exit_code=EXIT_INCONCLUSIVE, lines=lines,
                                 timings=self.timings)

        lines.extend(f"pruned: {clause}" for clause in result.pruned)
        for disjunct in result.disjuncts:
            status = "sat" if disjunct.satisfiable else "unsat"
            lines.append(f"disjunct {disjunct.index}: {disjunct.goal_str()}: {status}")
            if disjunct.constraint is not None:
                lines.append(f"  constraint: {disjunct.constraint}")
                lines.append(f"  verified: {'yes' if disjunct.verified else 'no'}")
        constraint = None
        if result.verdict is InclusionVerdict.HOLDS_UNDER:
            constraint = str(result.constraint)
            lines.append(f"constraint: {constraint}")
        return CommandResult(verdict=result.verdict.value, exit_code=EXIT_DEFINITIVE, lines=lines,
                             constraint=constraint, timings=self.timings)
