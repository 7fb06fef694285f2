from dataclasses import dataclass
from typing import Optional


@dataclass(frozen=True)
class RunLimits:
    """Resource bounds handed to the reasoning core"""

    max_clauses: int = 200
    max_dnf: int = 10000
    bg_depth: int = 2
    psort_card: Optional[int] = None
    timeout: Optional[float] = 30.0
