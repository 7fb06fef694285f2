import logging
import shlex
import subprocess
from typing import Optional

from app.config import settings
from app.logic.errors import UsageError

logger = logging.getLogger(__name__)


class ChcSolverService:
    """Pipe an exported Horn system into a user-supplied fixpoint engine"""

    def __init__(self, command: Optional[str] = None, timeout: Optional[float] = None):
        self.command = command or settings.SOLVE_CHC
        self.timeout = timeout or settings.CHC_SOLVER_TIMEOUT

    def solve(self, smtlib: str) -> str:
        """Raw solver output; the caller interprets it"""
        if not self.command:
            raise UsageError("no CHC solver command configured")
        argv = shlex.split(self.command)
        logger.info("running CHC solver: %s", " ".join(argv))
        try:
            completed = subprocess.run(
                argv,
                input=smtlib,
                capture_output=True,
                text=True,
                timeout=self.timeout,
                check=False,
            )
        except FileNotFoundError as exc:
            raise UsageError(f"CHC solver not found: {argv[0]}") from exc
        except subprocess.TimeoutExpired:
            logger.warning("CHC solver timed out after %.0fs", self.timeout)
            return "unknown"
        if completed.returncode != 0 and not completed.stdout.strip():
            logger.warning("CHC solver exited with %d: %s", completed.returncode, completed.stderr.strip())
            return "unknown"
        return completed.stdout
