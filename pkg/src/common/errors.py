"""Exception hierarchy shared by every subsystem."""

from typing import Any, Dict, List, Optional


class VerificationError(Exception):
    """Base class for all errors raised by the verification engine."""

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": str(self)}


class IngestionError(VerificationError):
    """A record or schema could not be ingested."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["line"] = self.line
        return data


class DecompositionError(VerificationError):
    """The oracle returned output that is not a list of claims."""

    def __init__(self, message: str, raw_output: str = ""):
        self.raw_output = raw_output
        super().__init__(message)

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["raw_output"] = self.raw_output
        return data


class DslError(VerificationError):
    """Base class for DSL errors; carries the offending token and position."""

    def __init__(self, message: str, token: str = "", line: Optional[int] = None, column: Optional[int] = None):
        self.token = token
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        near = f" near {token!r}" if token else ""
        super().__init__(f"{message}{near}{where}")

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data.update({"token": self.token, "line": self.line, "column": self.column})
        return data


class DslSyntaxError(DslError):
    pass


class DslNameError(DslError):
    pass


class DslTypeError(DslError):
    pass


class CompilationError(VerificationError):
    """Every compilation attempt failed."""

    def __init__(self, message: str, attempts: Optional[List[Dict[str, str]]] = None):
        self.attempts = attempts or []
        super().__init__(message)

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["attempts"] = self.attempts
        return data


class UnsupportedShapeError(VerificationError):
    """A plan does not match any supported claim structure."""

    def __init__(self, message: str, node: str = ""):
        self.node = node
        super().__init__(f"{message}: {node}" if node else message)


class ExecutionError(VerificationError):
    """Execution aborted; partial statistics are attached."""

    def __init__(self, message: str, stats: Any = None):
        self.stats = stats
        super().__init__(message)

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        if self.stats is not None and hasattr(self.stats, "model_dump"):
            data["stats"] = self.stats.model_dump()
        return data


class OracleError(VerificationError):
    pass


class OracleTypeError(OracleError):
    """A response could not be parsed into the expected type."""

    def __init__(self, message: str, raw: str = ""):
        self.raw = raw
        super().__init__(message)


class OracleTransportError(OracleError):
    """The backend failed after all retries."""


class UnknownTemplateError(OracleError):
    """The scripted backend has no rule for a prompt template."""


class InvariantError(VerificationError):
    """An internal invariant was violated (for example a non-contiguous group)."""


class NeedsTotalError(VerificationError):
    """Without-replacement estimation was requested without a population size."""


class ProvenanceSizeError(VerificationError):
    """The brute-force polynomial was requested for a relation that is too large."""
