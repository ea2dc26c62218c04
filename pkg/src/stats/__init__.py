"""
统计模块

提供:
- 任意时刻有效置信序列 (下注法 / Hoeffding)
- 各比较类型的停止规则
- 族错误率预算分配
- 带种子的 (分层) 洗牌
"""

from .models import AllocationRule, BudgetPlan, CSMethod, CSMode, OperatorBudget
from .confidence import (
    BettingConfidenceSequence,
    ConfidenceState,
    HoeffdingConfidenceSequence,
    cs_update,
    new_confidence_state,
)
from .resolve import as_proportion, cs_resolve
from .budget import allocate_budget
from .shuffle import contiguous_blocks, shuffle

__all__ = [
    "AllocationRule",
    "BudgetPlan",
    "CSMethod",
    "CSMode",
    "OperatorBudget",
    "BettingConfidenceSequence",
    "ConfidenceState",
    "HoeffdingConfidenceSequence",
    "cs_update",
    "new_confidence_state",
    "as_proportion",
    "cs_resolve",
    "allocate_budget",
    "contiguous_blocks",
    "shuffle",
]
