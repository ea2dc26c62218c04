"""
Oracle Data Models
"""
from __future__ import annotations

import hashlib
import json
import math
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from src.common.config_loader import ConfigLoader, get_config_loader


class ReturnKind(Enum):
    """Expected answer types"""
    BOOL = "bool"
    INT = "int"
    REAL = "real"
    ENUM = "enum"
    TEXT = "text"
    JSON = "json"


class ReturnType(BaseModel):
    """Expected answer type (labels only for ENUM)"""
    model_config = ConfigDict(frozen=True)

    kind: ReturnKind = ReturnKind.BOOL
    labels: Tuple[str, ...] = ()

    @classmethod
    def boolean(cls) -> "ReturnType":
        return cls(kind=ReturnKind.BOOL)

    @classmethod
    def text(cls) -> "ReturnType":
        return cls(kind=ReturnKind.TEXT)

    @classmethod
    def enum(cls, *labels: str) -> "ReturnType":
        return cls(kind=ReturnKind.ENUM, labels=tuple(labels))


class FusedPart(BaseModel):
    """One question inside a fused request"""
    model_config = ConfigDict(frozen=True)

    template_id: str
    expected: ReturnType


class OracleRequest(BaseModel):
    """A rendered request to the oracle"""
    model_config = ConfigDict(frozen=True)

    model: str
    prompt: str
    template_id: str
    variables: Dict[str, Any] = Field(default_factory=dict)
    expected: ReturnType = Field(default_factory=ReturnType)
    temperature: float = 0.0
    parts: Tuple[FusedPart, ...] = ()

    @property
    def is_fused(self) -> bool:
        return len(self.parts) > 0

    def cache_key(self) -> "CacheKey":
        return CacheKey(model=self.model, temperature=self.temperature, prompt=self.prompt)


class CacheKey(BaseModel):
    """(model, temperature, rendered prompt)"""
    model_config = ConfigDict(frozen=True)

    model: str
    temperature: float
    prompt: str

    @property
    def digest(self) -> str:
        payload = json.dumps([self.model, self.temperature, self.prompt], ensure_ascii=False)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class BackendReply(BaseModel):
    """Raw reply from a backend"""
    text: str
    input_tokens: int = 0
    output_tokens: int = 0


class OracleResponse(BaseModel):
    """Parsed, typed response"""
    value: Any = None
    raw: str = ""
    input_tokens: int = 0
    output_tokens: int = 0
    cached: bool = False
    model: str = ""


def estimate_tokens(text: str) -> int:
    """Token count approximation: ceil(characters / 4)."""
    return math.ceil(len(text) / 4)


class ModelUsage(BaseModel):
    calls: int = 0
    cache_hits: int = 0
    input_tokens: int = 0
    output_tokens: int = 0


class CostLedger(BaseModel):
    """Per-model token usage and cost accounting"""
    usage: Dict[str, ModelUsage] = Field(default_factory=dict)

    def record(self, model: str, input_tokens: int, output_tokens: int) -> None:
        entry = self.usage.setdefault(model, ModelUsage())
        entry.calls += 1
        entry.input_tokens += input_tokens
        entry.output_tokens += output_tokens

    def record_hit(self, model: str) -> None:
        self.usage.setdefault(model, ModelUsage()).cache_hits += 1

    @property
    def calls(self) -> int:
        return sum(u.calls for u in self.usage.values())

    @property
    def cache_hits(self) -> int:
        return sum(u.cache_hits for u in self.usage.values())

    @property
    def input_tokens(self) -> int:
        return sum(u.input_tokens for u in self.usage.values())

    @property
    def output_tokens(self) -> int:
        return sum(u.output_tokens for u in self.usage.values())

    def cost(self, rates: "RateTable") -> float:
        """Estimated USD cost."""
        total = 0.0
        for model, entry in self.usage.items():
            rate = rates.for_model(model)
            total += entry.input_tokens * rate.input / 1_000_000
            total += entry.output_tokens * rate.output / 1_000_000
        return total

    def snapshot(self) -> "CostLedger":
        return self.model_copy(deep=True)

    def since(self, earlier: "CostLedger") -> "CostLedger":
        """Usage accumulated after an earlier snapshot."""
        diff = CostLedger()
        for model, entry in self.usage.items():
            before = earlier.usage.get(model, ModelUsage())
            diff.usage[model] = ModelUsage(
                calls=entry.calls - before.calls,
                cache_hits=entry.cache_hits - before.cache_hits,
                input_tokens=entry.input_tokens - before.input_tokens,
                output_tokens=entry.output_tokens - before.output_tokens,
            )
        return diff


class Rate(BaseModel):
    input: float
    output: float


class RateTable(BaseModel):
    """USD per million tokens"""
    rates: Dict[str, Rate] = Field(default_factory=dict)
    default: Rate = Field(default_factory=lambda: Rate(input=5.0, output=25.0))

    def for_model(self, model: str) -> Rate:
        return self.rates.get(model, self.default)

    @classmethod
    def from_config(cls, data: Dict[str, Any], default: Optional[Dict[str, float]] = None) -> "RateTable":
        table = cls(rates={m: Rate(**r) for m, r in data.items()})
        if default:
            table.default = Rate(**default)
        return table


def load_rate_table(loader: Optional[ConfigLoader] = None) -> RateTable:
    """Rate table from config/oracle/rates.yaml."""
    raw = (loader or get_config_loader()).load_yaml("oracle/rates.yaml")
    return RateTable.from_config(raw.get("rates", {}), raw.get("default"))
