from typing import Optional, Sequence


class SoqeError(Exception):
    """Base class for every error raised by the reasoning core"""


class UnsupportedInput(SoqeError):
    """Input is outside the supported fragment (quasi-flat clauses, unknown presets, ...)"""


class NonlinearTermError(SoqeError):
    """A product of two non-constant terms was found"""


class ResourceExhausted(SoqeError):
    """A configured bound (DNF cubes, clauses, instances) was exceeded"""

    def __init__(self, resource: str, limit: int):
        super().__init__(f"{resource} exceeded the configured limit of {limit}")
        self.resource = resource
        self.limit = limit


class PreconditionError(SoqeError):
    """An operation was called on data violating its documented precondition"""

    def __init__(self, message: str, axiom: Optional[str] = None, witnesses: Sequence[str] = ()):
        super().__init__(message)
        self.axiom = axiom
        self.witnesses = tuple(witnesses)


class UsageError(SoqeError):
    """Operations were invoked in the wrong order or with bad arguments"""


class SortError(SoqeError):
    """Ill-sorted term or atom"""


class ParseError(SoqeError):
    """Problem or CHC text could not be parsed"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        location = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{location}")
        self.line = line
        self.column = column
