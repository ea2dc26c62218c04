"""
优化器模块

提供:
- 物理计划节点与聚合注解
- 基于规则的逻辑到物理改写
- 检索提示 (SearchSpec) 生成
- 物理计划展示
"""

from .models import (
    AggAnnotation,
    CountScan,
    FusedPartSpec,
    FusedSemantic,
    GroupSort,
    PhysicalAggregate,
    PhysicalPlan,
    RelevanceSort,
    Shuffle,
    SimilarityPrefilter,
    Strategy,
    TotalSource,
)
from .search_spec import (
    SearchContext,
    SearchSpecBuilder,
    build_search_spec,
    fallback_search_spec,
)
from .optimizer import Optimizer, explain, explain_node, extract_hint, fuse_semantic, optimize

__all__ = [
    "AggAnnotation",
    "CountScan",
    "FusedPartSpec",
    "FusedSemantic",
    "GroupSort",
    "PhysicalAggregate",
    "PhysicalPlan",
    "RelevanceSort",
    "Shuffle",
    "SimilarityPrefilter",
    "Strategy",
    "TotalSource",
    "SearchContext",
    "SearchSpecBuilder",
    "build_search_spec",
    "fallback_search_spec",
    "Optimizer",
    "explain",
    "explain_node",
    "extract_hint",
    "fuse_semantic",
    "optimize",
]
