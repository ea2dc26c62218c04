"""执行引擎配置 (config/engine.yaml)"""
from typing import Literal, Optional

from pydantic import BaseModel, Field

from src.common.config_loader import ConfigLoader, get_config_loader
from src.stats.models import CSMethod

FLAG_NAMES = (
    "early_stopping",
    "relevance_sorting",
    "estimation",
    "fusion",
    "similarity_filter",
    "caching",
)


class OptimizationFlags(BaseModel):
    """Independently switchable optimizations (ablation study)"""
    early_stopping: bool = True
    relevance_sorting: bool = True
    estimation: bool = True
    fusion: bool = True
    similarity_filter: bool = True
    caching: bool = True

    @classmethod
    def all_disabled(cls) -> "OptimizationFlags":
        return cls(**{name: False for name in FLAG_NAMES})

    def without(self, *names: str) -> "OptimizationFlags":
        unknown = [n for n in names if n not in FLAG_NAMES]
        if unknown:
            raise ValueError(f"unknown optimization flag(s): {', '.join(unknown)}")
        return self.model_copy(update={name: False for name in names})

    def enabled(self):
        return [name for name in FLAG_NAMES if getattr(self, name)]


class EngineConfig(BaseModel):
    """Execution and optimization parameters"""
    batch_size: int = Field(default=32, ge=1)
    error_policy: Literal["abort", "skip"] = "abort"
    alpha: float = Field(default=0.05, gt=0.0, lt=1.0)
    epsilon: float = Field(default=0.05, ge=0.0, lt=1.0)
    similarity_threshold: float = 0.15
    shuffle_seed: int = 0
    low_k: int = Field(default=10, ge=0)
    cs_method: CSMethod = CSMethod.BETTING
    cs_grid_size: int = Field(default=1000, ge=10)
    simulated_call_latency_s: float = Field(default=0.5, ge=0.0)
    flags: OptimizationFlags = Field(default_factory=OptimizationFlags)

    @classmethod
    def from_config(cls, loader: Optional[ConfigLoader] = None, **overrides) -> "EngineConfig":
        """Defaults from engine.yaml, then keyword overrides."""
        data = dict((loader or get_config_loader()).load_engine_defaults())
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(data)

    def with_flags(self, flags: OptimizationFlags) -> "EngineConfig":
        return self.model_copy(update={"flags": flags})
