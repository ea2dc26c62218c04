"""
声明模块

提供:
- 量词与声明结构 IR
- 归一化与否定
- 暴力求值 (测试与基准真值)
- 模糊量词提示表
- 回答拆分为声明
"""

from .models import (
    ComparisonOp,
    Comparison,
    QuantifierKind,
    Quantifier,
    SimpleStructure,
    OrdinalStructure,
    NestedStructure,
    ClaimStructure,
    Scope,
    Claim,
    tolerant_ceil,
    tolerant_floor,
)
from .quantifiers import (
    VagueQuantifierHints,
    dense_rank_of,
    evaluate_quantifier,
    evaluate_structure,
    group_value,
    negate,
    normalize,
    count_comparison,
)
from .decomposer import ClaimDecomposer, decompose
from .loader import load_claims, save_claims

__all__ = [
    "ComparisonOp",
    "Comparison",
    "QuantifierKind",
    "Quantifier",
    "SimpleStructure",
    "OrdinalStructure",
    "NestedStructure",
    "ClaimStructure",
    "Scope",
    "Claim",
    "tolerant_ceil",
    "tolerant_floor",
    "VagueQuantifierHints",
    "dense_rank_of",
    "evaluate_quantifier",
    "evaluate_structure",
    "group_value",
    "negate",
    "normalize",
    "count_comparison",
    "ClaimDecomposer",
    "decompose",
    "load_claims",
    "save_claims",
]
