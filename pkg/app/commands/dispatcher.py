import logging
import time
from pathlib import Path
from typing import Any, Dict, List

from app.commands.accelerate_command import AccelerateCommand
from app.commands.base_command import BaseCommand, EXIT_INCONCLUSIVE, EXIT_USAGE
from app.commands.chc_command import EmitChcCommand
from app.commands.checksat_command import CheckSatCommand
from app.commands.constrain_command import ConstrainCommand
from app.commands.eliminate_command import EliminateCommand
from app.commands.inclusion_command import InclusionCommand
from app.commands.saturate_command import SaturateCommand
from app.config import Settings
from app.logic.errors import ParseError, SoqeError, SortError, UsageError
from app.logic.parser import ProblemFile, parse_problem
from app.models.command import CommandRequest, CommandResult, CommandType, ExecutionPlan, PlanStep
from app.models.report import Report

logger = logging.getLogger(__name__)

COMMANDS = {
    CommandType.CHECKSAT: CheckSatCommand,
    CommandType.SATURATE: SaturateCommand,
    CommandType.ELIMINATE: EliminateCommand,
    CommandType.CONSTRAIN: ConstrainCommand,
    CommandType.INCLUSION: InclusionCommand,
    CommandType.EMIT_CHC: EmitChcCommand,
    CommandType.ACCELERATE: AccelerateCommand,
}

# sections a command cannot run without
REQUIRED_SECTIONS = {
    CommandType.SATURATE: ("Clauses",),
    CommandType.ELIMINATE: ("Clauses",),
    CommandType.INCLUSION: ("Classes",),
    CommandType.EMIT_CHC: ("Clauses",),
    CommandType.ACCELERATE: ("Clauses",),
}

STAGES = {
    CommandType.CHECKSAT: [("check", "Instantiate, purify and decide the ground reduction")],
    CommandType.SATURATE: [("saturate", "Saturate the constrained clauses")],
    CommandType.ELIMINATE: [("eliminate", "Eliminate the predicates in order"),
                            ("consistency", "Check the residue on small domains")],
    CommandType.CONSTRAIN: [("eliminate", "Project the ground reduction onto the parameters"),
                            ("verify", "Check that the constraint refutes the goal")],
    CommandType.INCLUSION: [("inclusion", "Saturate both classes and test each disjunct")],
    CommandType.EMIT_CHC: [("saturate", "Saturate the clause parts"),
                           ("emit", "Build the Horn system")],
    CommandType.ACCELERATE: [("accelerate", "Accelerate the translation step")],
}


class Dispatcher:
    """Parses a request, runs the matching command and renders the report"""

    def __init__(self, settings: Settings):
        self.settings = settings

    def analyze_request(self, request: CommandRequest) -> Dict[str, Any]:
        problem = parse_problem(request.problem)
        missing = [s for s in REQUIRED_SECTIONS.get(request.command, ()) if s not in problem.sections]
        if missing:
            raise UsageError(f"{request.command.value} needs a {', '.join(missing)} section")
        if request.command is CommandType.CONSTRAIN and not request.options.ensure_valid and not problem.query:
            raise UsageError("constrain needs a Query section unless --ensure-valid is given")
        logger.info("problem has %d clause statements, %d query statements, %d classes",
                    len(problem.clauses), len(problem.query), len(problem.classes))
        return {"problem": problem, "sections": problem.sections}

    def create_execution_plan(self, request: CommandRequest) -> ExecutionPlan:
        steps = [PlanStep(id=1, stage="parse", action="Parse and sort-check the problem file")]
        for stage, action in STAGES[request.command]:
            steps.append(PlanStep(id=len(steps) + 1, stage=stage, action=action, depends_on=[len(steps)]))
        return ExecutionPlan(command=request.command, steps=steps)

    def execute_plan(self, plan: ExecutionPlan, problem: ProblemFile, request: CommandRequest) -> CommandResult:
        command: BaseCommand = COMMANDS[plan.command](self.settings)
        logger.info("running %s in %d stages", plan.command.value, len(plan.steps))
        return command.execute(problem, list(request.arguments), request.options)

    def synthesize_results(self, result: CommandResult, request: CommandRequest) -> Report:
        trace_path = request.options.trace_path
        if trace_path:
            Path(trace_path).write_text("".join(f"{line}\n" for line in result.trace), encoding="utf-8")
        return Report(
            header=self.settings.REPORT_HEADER,
            command=request.command.value,
            verdict=result.verdict,
            exit_code=result.exit_code,
            lines=result.lines,
            clauses=result.clauses,
            constraint=result.constraint,
            trace_path=trace_path,
            timings=result.timings,
        )

    def execute(self, request: CommandRequest) -> Report:
        """Run one request; errors propagate to the caller"""
        start_time = time.time()
        analysis = self.analyze_request(request)
        plan = self.create_execution_plan(request)
        result = self.execute_plan(plan, analysis["problem"], request)
        report = self.synthesize_results(result, request)
        logger.info("%s finished in %.3fs with exit code %d", request.command.value,
                    time.time() - start_time, report.exit_code)
        return report

    def run(self, request: CommandRequest) -> Report:
        """Like ``execute`` but turns errors into an error report with the matching exit code"""
        try:
            return self.execute(request)
        except SoqeError as exc:
            return self.error_report(request.command.value, exc)

    def error_report(self, command: str, exc: SoqeError) -> Report:
        exit_code = exit_code_for(exc)
        logger.error("%s failed: %s", command, exc)
        lines: List[str] = [f"error: {type(exc).__name__}: {exc}"]
        return Report(header=self.settings.REPORT_HEADER, command=command, verdict="error",
                      exit_code=exit_code, lines=lines)


def exit_code_for(exc: SoqeError) -> int:
    """Input mistakes exit with 1; anything that ran out of room or left the fragment with 2"""
    if isinstance(exc, (ParseError, SortError, UsageError)):
        return EXIT_USAGE
    return EXIT_INCONCLUSIVE
