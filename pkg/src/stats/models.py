"""
Statistics Data Models
"""
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field


class CSMode(Enum):
    """Sampling model behind a confidence sequence"""
    WITH_REPLACEMENT = "with_replacement"
    WITHOUT_REPLACEMENT = "without_replacement"


class CSMethod(Enum):
    BETTING = "betting"
    HOEFFDING = "hoeffding"


class AllocationRule(Enum):
    BONFERRONI = "bonferroni"
    GEOMETRIC = "geometric"


class OperatorBudget(BaseModel):
    """Budget of one estimating aggregate operator"""
    accumulators: int = 1
    groups: Optional[int] = None
    rule: AllocationRule = AllocationRule.BONFERRONI


class BudgetPlan(BaseModel):
    """Family-wise error budget over the estimating operators of a query"""
    alpha: float
    operators: List[OperatorBudget] = Field(default_factory=list)

    @property
    def o(self) -> int:
        return len(self.operators)

    def alpha_for(self, operator_index: int, group_index: int = 1) -> float:
        """α for one accumulator of an operator in its group_index-th group (1-based)."""
        op = self.operators[operator_index]
        share = self.alpha / (self.o * op.accumulators)
        if op.rule == AllocationRule.BONFERRONI:
            return share / max(1, op.groups or 1)
        return share / (2 ** group_index)

    def total_allocated(self) -> float:
        """Upper bound on the α spent if every accumulator in every group estimates."""
        total = 0.0
        for i, op in enumerate(self.operators):
            if op.rule == AllocationRule.BONFERRONI:
                total += self.alpha_for(i) * op.accumulators * max(1, op.groups or 1)
            else:
                # geometric series over groups sums to the operator share
                total += self.alpha / self.o
        return total
