from pydantic import BaseModel, Field
from typing import List, Optional, Dict, Any
from enum import Enum


class CommandType(str, Enum):
    CHECKSAT = "checksat"
    SATURATE = "saturate"
    ELIMINATE = "eliminate"
    CONSTRAIN = "constrain"
    INCLUSION = "inclusion"
    EMIT_CHC = "emit-chc"
    ACCELERATE = "accelerate"


class PlanStep(BaseModel):
    id: int
    stage: str
    action: str
    depends_on: List[int] = []


class ExecutionPlan(BaseModel):
    command: CommandType
    steps: List[PlanStep]


class CommandOptions(BaseModel):
    """Per-run flags; unset values fall back to the settings"""
    theory: Optional[str] = None
    psort_card: Optional[int] = None
    max_clauses: Optional[int] = None
    max_dnf: Optional[int] = None
    bg_depth: Optional[int] = None
    precedence: Optional[str] = None
    params: List[str] = []
    ensure_valid: bool = False
    solve_chc: Optional[str] = None
    extra_terms: Optional[str] = None
    trace_path: Optional[str] = None


class CommandRequest(BaseModel):
    problem: str
    command: CommandType
    arguments: List[str] = []
    options: CommandOptions = Field(default_factory=CommandOptions)


class CommandResult(BaseModel):
    verdict: str
    exit_code: int = 0
    lines: List[str] = []
    clauses: List[str] = []
    constraint: Optional[str] = None
    trace: List[str] = []
    timings: Dict[str, float] = {}
    details: Dict[str, Any] = {}
