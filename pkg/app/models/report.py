from pathlib import Path
from typing import Dict, List, Optional

from jinja2 import Environment, FileSystemLoader, StrictUndefined
from pydantic import BaseModel

TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"
MIRROR_KEYS = {"verdict", "clauses", "constraint", "trace_path", "timings"}

_environment = Environment(
    loader=FileSystemLoader(str(TEMPLATE_DIR)),
    undefined=StrictUndefined,
    keep_trailing_newline=True,
    trim_blocks=True,
    lstrip_blocks=True,
)


class Report(BaseModel):
    header: str
    command: str
    verdict: str
    exit_code: int = 0
    lines: List[str] = []
    clauses: List[str] = []
    constraint: Optional[str] = None
    trace_path: Optional[str] = None
    timings: Dict[str, float] = {}

    def render(self) -> str:
        """Text report; timings are left out so identical runs give identical bytes"""
        return _environment.get_template("report.txt.j2").render(report=self)

    def mirror_json(self) -> str:
        return self.model_dump_json(include=MIRROR_KEYS, indent=2)
