"""
执行引擎模块

提供:
- 引擎配置与优化开关
- 提前终止累加器
- 按组流式聚合
- 批量语义算子与算子融合
- 稠密排名
- 物理计划执行 (Verdict + 溯源)
"""

from .config import FLAG_NAMES, EngineConfig, OptimizationFlags
from .models import (
    AccState,
    ExecRow,
    ExecutionStats,
    Resolution,
    ResolutionKind,
    Resolved,
    ResolvedBy,
    Verdict,
)
from .accumulator import Accumulator, accumulate, finalize
from .grouping import GroupResult, streaming_group_aggregate
from .rank import dense_rank
from .expressions import compare, evaluate, truthy
from .fusion import fused_semantic_eval, interpret_fused
from .operators import BatchSource, ExecContext, group_sort
from .executor import Executor, execute

__all__ = [
    "FLAG_NAMES",
    "EngineConfig",
    "OptimizationFlags",
    "AccState",
    "ExecRow",
    "ExecutionStats",
    "Resolution",
    "ResolutionKind",
    "Resolved",
    "ResolvedBy",
    "Verdict",
    "Accumulator",
    "accumulate",
    "finalize",
    "GroupResult",
    "streaming_group_aggregate",
    "dense_rank",
    "compare",
    "evaluate",
    "truthy",
    "fused_semantic_eval",
    "interpret_fused",
    "BatchSource",
    "ExecContext",
    "group_sort",
    "Executor",
    "execute",
]
