import logging
from pathlib import Path

import pytest

from app import cli

PROBLEMS_DIR = Path(__file__).resolve().parent / "problems"


def problem_path(name: str) -> Path:
    return PROBLEMS_DIR / name


def problem_text(name: str) -> str:
    return problem_path(name).read_text(encoding="utf-8")


@pytest.fixture
def run_cli(capsys):
    """Run the command line and return its exit code and standard output"""

    def run(*argv):
        code = cli.main([str(arg) for arg in argv])
        return code, capsys.readouterr().out

    yield run
    # the command line points the root handler at the captured stderr
    logging.getLogger().handlers.clear()
