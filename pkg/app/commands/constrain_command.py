from typing import List

from app.commands.base_command import BaseCommand, EXIT_DEFINITIVE
from app.config import Settings
from app.logic import formula as fm
from app.logic.errors import UsageError
from app.logic.parser import ProblemFile, StatementKind, parse_extra_terms
from app.logic.printer import constraint_listing
from app.logic.symelim import ElimMode, ElimRequest, pd_eliminate, verify_constraint
from app.models.command import CommandOptions, CommandResult, CommandType


class ConstrainCommand(BaseCommand):
    """Weakest universal constraint on the parameters that makes the query unsatisfiable.

    With ``ensure_valid`` the residue is read from the ``||`` statements
    instead: the constraint then guarantees that every clause holds.
    """

    def __init__(self, settings: Settings):
        super().__init__(CommandType.CONSTRAIN, settings)

    def execute(self, problem: ProblemFile, arguments: List[str], options: CommandOptions) -> CommandResult:
        params = tuple(options.params or arguments or problem.parameters)
        if not params:
            raise UsageError("constrain needs parameters, either declared or given with --params")
        limits = self.limits(options)
        ext = self.extension(problem, options, params)
        extra = problem.extra_terms
        if options.extra_terms:
            extra = extra + parse_extra_terms(options.extra_terms, problem)

        if options.ensure_valid:
            residue = tuple(
                fm.conj(s.left[0], fm.neg(fm.disj(*s.right)))
                for s in problem.clauses if s.kind is StatementKind.CONSTRAINED
            )
            if not residue:
                raise UsageError("--ensure-valid needs at least one constrained (||) statement")
            request = ElimRequest(ext, frozenset(params), mode=ElimMode.ENSURE_VALID, residue=residue,
                                  extra_terms=extra)
        else:
            request = ElimRequest(ext, frozenset(params), tuple(problem.goal(limits.max_dnf)), extra_terms=extra)

        elimination = self._measure_execution("eliminate", pd_eliminate, request, limits)
        verified = self._measure_execution("verify", verify_constraint, elimination.constraint, request, limits)
        constraint = elimination.constraint

        lines = [
            f"parameters: {' '.join(params)}",
            f"constraint: {constraint}",
            f"listing: {constraint_listing(constraint.variables, constraint.body)}",
            f"regime: {constraint.regime}",
            f"verified: {'yes' if verified else 'no'}",
        ]
        lines.extend(f"warning: {w}" for w in elimination.warnings)
        return CommandResult(
            verdict="constrained",
            exit_code=EXIT_DEFINITIVE,
            lines=lines,
            constraint=str(constraint),
            timings=self.timings,
            details={"kept": [str(c) for c in elimination.kept], "cubes": len(elimination.cubes)},
        )
