from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Tuple
import logging
import time

from app.config import Settings
from app.logic.hres import BackgroundTheory, ConstrainedClause, SaturationResult
from app.logic.limits import RunLimits
from app.logic.locality import TheoryExtension
from app.logic.ordering import Precedence
from app.logic.parser import ProblemFile
from app.models.command import CommandOptions, CommandResult, CommandType

logger = logging.getLogger(__name__)

EXIT_DEFINITIVE = 0
EXIT_USAGE = 1
EXIT_INCONCLUSIVE = 2


class BaseCommand(ABC):
    def __init__(self, command_type: CommandType, settings: Settings):
        self.command_type = command_type
        self.settings = settings
        self.timings: Dict[str, float] = {}

    @abstractmethod
    def execute(self, problem: ProblemFile, arguments: List[str], options: CommandOptions) -> CommandResult:
        """Run the command on a parsed problem"""
        pass

    def _measure_execution(self, stage: str, func, *args, **kwargs) -> Any:
        """Run one stage and record its duration"""
        start = time.time()
        result = func(*args, **kwargs)
        self.timings[stage] = round(time.time() - start, 6)
        logger.info("%s: %s took %.3fs", self.command_type.value, stage, self.timings[stage])
        return result

    # shared helpers

    def limits(self, options: CommandOptions) -> RunLimits:
        base = self.settings.limits()
        return RunLimits(
            max_clauses=options.max_clauses or base.max_clauses,
            max_dnf=options.max_dnf or base.max_dnf,
            bg_depth=options.bg_depth or base.bg_depth,
            psort_card=options.psort_card if options.psort_card is not None else base.psort_card,
            timeout=base.timeout,
        )

    def theory(self, problem: ProblemFile, options: CommandOptions) -> str:
        return options.theory or problem.theory or self.settings.THEORY

    def extension(self, problem: ProblemFile, options: CommandOptions,
                  parameters: Tuple[str, ...] = ()) -> TheoryExtension:
        limits = self.limits(options)
        return problem.extension(self.theory(problem, options), limits.psort_card, parameters, limits.max_dnf)

    def precedence(self, options: CommandOptions, eliminable, extension) -> Optional[Precedence]:
        text = options.precedence or self.settings.PRECEDENCE
        if text:
            return Precedence.parse(text, eliminable=frozenset(eliminable), extension=frozenset(extension))
        return Precedence(eliminable=frozenset(eliminable), extension=frozenset(extension))

    def background(self, problem: ProblemFile, options: CommandOptions, clauses) -> BackgroundTheory:
        """Predicate-free clauses as background; extension functions go through the local extension"""
        limits = self.limits(options)
        functions = frozenset(d.name for d in problem.extension_functions) - problem.encoded_predicates
        if functions or options.theory or problem.theory:
            ext = TheoryExtension.preset(self.theory(problem, options), tuple(clauses), functions,
                                         problem.parameters, limits.psort_card)
            return BackgroundTheory((), ext, limits.bg_depth)
        return BackgroundTheory(tuple(clauses), None, limits.bg_depth)

    def clause_lines(self, clauses: List[ConstrainedClause]) -> List[str]:
        return [f"  [{c.id}] {c}" for c in clauses]

    def saturation_lines(self, result: SaturationResult) -> Tuple[List[str], int]:
        if result.is_saturated:
            return [f"saturated: {len(result.clauses)} clauses"] + self.clause_lines(result.clauses), EXIT_DEFINITIVE
        return ([f"diverged: {result.reason} after {len(result.partial)} clauses",
                 "hint: the emit-chc command exports the saturation as constrained Horn clauses"],
                EXIT_INCONCLUSIVE)
