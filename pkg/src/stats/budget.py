"""Family-wise error budget allocation."""
from typing import Optional, Sequence, Tuple

from .models import AllocationRule, BudgetPlan, OperatorBudget


def allocate_budget(alpha: float, operators: Sequence[Tuple[int, Optional[int]]]) -> BudgetPlan:
    """Split α over estimating operators, then over accumulators and groups.

    Args:
        alpha: Query-level significance
        operators: (a, g) per estimating operator; g is None when the number of groups is unknown

    Each operator receives α/o. Within it, each accumulator of each group gets
    α/(o·a·g) when g is known (Bonferroni) and α/(o·a·2^i) for the i-th group
    otherwise (geometric).
    """
    plan = BudgetPlan(alpha=alpha)
    for accumulators, groups in operators:
        plan.operators.append(OperatorBudget(
            accumulators=max(1, accumulators),
            groups=groups,
            rule=AllocationRule.BONFERRONI if groups is not None else AllocationRule.GEOMETRIC,
        ))
    return plan
