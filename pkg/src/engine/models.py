"""
Engine Data Models
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from src.claims.models import Comparison
from src.provenance.models import ProvToken
from src.relation.models import TupleRow


class AccState(Enum):
    RUNNING = "running"
    RESOLVED = "resolved"
    EXHAUSTED = "exhausted"


class ResolvedBy(Enum):
    """Which rule ended an accumulator"""
    WITNESS = "witness"          # witness / counterexample
    RUNNING_COUNT = "running_count"
    BOUNDS = "bounds"            # max-achievable / min-guaranteed against n_total
    ESTIMATE = "estimate"        # confidence sequence
    EXHAUSTED = "exhausted"


class ResolutionKind(Enum):
    DETERMINISTIC = "deterministic"
    ESTIMATED = "estimated"
    FULL_SCAN = "full_scan"


class Resolution(BaseModel):
    kind: ResolutionKind = ResolutionKind.FULL_SCAN
    alpha_used: float = 0.0

    def __str__(self) -> str:
        if self.kind == ResolutionKind.ESTIMATED:
            return f"estimated(alpha={self.alpha_used:.4g})"
        return self.kind.value


class ExecutionStats(BaseModel):
    """Counters for one execution"""
    oracle_calls: int = 0
    cache_hits: int = 0
    input_tokens: int = 0
    output_tokens: int = 0
    cost_usd: float = 0.0
    tuples_processed: int = 0
    tuples_skipped: int = 0
    tuples_prefiltered: int = 0
    tuples_failed: int = 0
    groups_processed: int = 0
    wall_time_s: float = 0.0
    simulated_latency_s: float = 0.0

    @property
    def latency_s(self) -> float:
        return self.wall_time_s + self.simulated_latency_s


class Verdict(BaseModel):
    """Outcome of verifying one claim"""
    value: bool
    tokens: List[ProvToken] = Field(default_factory=list)
    stats: ExecutionStats = Field(default_factory=ExecutionStats)
    resolution: Resolution = Field(default_factory=Resolution)
    formulas: Dict[str, str] = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        data = self.model_dump(mode="json")
        data["resolution"] = str(self.resolution)
        return data


@dataclass(frozen=True)
class Resolved:
    """Aggregate output value together with the outcome of its pushed-down hint"""
    value: Any
    outcome: Optional[bool] = None
    hint: Optional[Comparison] = None


@dataclass
class ExecRow:
    """A row flowing through the pipeline: a tuple or a group result"""
    values: Dict[str, Any]
    row: Optional[TupleRow] = None
    row_id: Optional[int] = None
    args: List[bool] = field(default_factory=list)
    origin: Any = None

    @classmethod
    def of(cls, row: TupleRow) -> "ExecRow":
        return cls(values=dict(row.attrs), row=row, row_id=row.row_id)

    def variables(self) -> Dict[str, Any]:
        """Template variables: plain values only."""
        return {k: v for k, v in self.values.items() if not isinstance(v, Resolved)}

    def key(self, keys) -> Optional[tuple]:
        if any(k not in self.values for k in keys):
            return None
        return tuple(self.values[k] for k in keys)
