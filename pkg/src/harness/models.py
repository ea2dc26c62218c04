"""
Harness Data Models
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from src.claims.models import Claim
from src.relation.models import Relation


@dataclass
class Dataset:
    """A benchmark dataset: relation, claims and the scripted rule table"""
    name: str
    directory: Path
    relation: Relation
    claims: List[Claim] = field(default_factory=list)
    rules_path: Optional[Path] = None


class ClaimRow(BaseModel):
    """One claim of one trial"""
    dataset: str
    claim_id: str
    claim_type: str = ""
    text: str
    grounded: Optional[bool] = None
    verdict: Optional[bool] = None
    resolution: str = ""
    tokens_cited: int = 0
    oracle_calls: int = 0
    cache_hits: int = 0
    cost_usd: float = 0.0
    latency_s: float = 0.0
    simulated_latency_s: float = 0.0
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


class Metrics(BaseModel):
    """Aggregate metrics of one trial (ungrounded claims are the positive class)"""
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    accuracy: float = 0.0
    mean_cost_usd: float = 0.0
    mean_latency_s: float = 0.0
    total_oracle_calls: int = 0
    total_cost_usd: float = 0.0
    total_latency_s: float = 0.0
    errors: int = 0


class TrialResult(BaseModel):
    trial: int
    seed: int
    rows: List[ClaimRow] = Field(default_factory=list)
    metrics: Metrics = Field(default_factory=Metrics)


class MetricSpread(BaseModel):
    mean: float
    min: float
    max: float


class RunReport(BaseModel):
    """Result of a benchmark run"""
    config: Dict[str, Any] = Field(default_factory=dict)
    trials: List[TrialResult] = Field(default_factory=list)
    summary: Dict[str, MetricSpread] = Field(default_factory=dict)

    def deterministic(self) -> Dict[str, Any]:
        """The report without wall-clock measurements."""
        data = self.model_dump(mode="json")
        for trial in data["trials"]:
            for row in trial["rows"]:
                row["latency_s"] = row["simulated_latency_s"]
            trial["metrics"].pop("mean_latency_s", None)
            trial["metrics"].pop("total_latency_s", None)
        for name in ("mean_latency_s", "total_latency_s"):
            data["summary"].pop(name, None)
        return data


class AblationReport(BaseModel):
    """Full configuration plus leave-one-out configurations, with multipliers"""
    baseline: str = "full"
    runs: Dict[str, RunReport] = Field(default_factory=dict)
    multipliers: Dict[str, Dict[str, float]] = Field(default_factory=dict)
