"""
Expression evaluation - 表达式求值

符号部分在本地求值; 语义部分 (PromptExpr) 由调用方按批预先向 oracle
求得, 以 {PromptExpr: value} 传入.
"""
from typing import Any, Mapping, Optional

from src.claims.models import Comparison, ComparisonOp
from src.common.errors import ExecutionError
from src.dsl.models import BoolOp, ColumnRef, Compare, Expr, Literal, PromptExpr
from src.dsl.shape import column_comparison
from .models import Resolved

PromptValues = Mapping[PromptExpr, Any]


def _column(expr: ColumnRef, values: Mapping[str, Any]) -> Any:
    if expr.name not in values:
        raise ExecutionError(f"unknown column {expr.name!r} at execution time")
    value = values[expr.name]
    return value.value if isinstance(value, Resolved) else value


def _hint_outcome(expr: Compare, values: Mapping[str, Any]) -> Optional[bool]:
    """Outcome of an aggregate whose pushed-down hint is exactly this comparison."""
    for side in (expr.left, expr.right):
        if isinstance(side, ColumnRef) and isinstance(values.get(side.name), Resolved):
            resolved: Resolved = values[side.name]
            found = column_comparison(expr, side.name)
            if found is None or resolved.hint is None or resolved.outcome is None:
                return None
            op, k = found
            if resolved.hint == Comparison(op=op, threshold=k):
                return resolved.outcome
    return None


def compare(op: ComparisonOp, left: Any, right: Any) -> bool:
    if left is None or right is None:
        return False
    numeric = all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (left, right))
    if numeric:
        return op.apply(float(left), float(right))
    if op == ComparisonOp.EQ:
        return left == right
    if op == ComparisonOp.NE:
        return left != right
    raise ExecutionError(f"cannot compare {left!r} {op.symbol} {right!r}")


def evaluate(expr: Expr, values: Mapping[str, Any], prompt_values: Optional[PromptValues] = None) -> Any:
    """Value of an expression on one row."""
    if isinstance(expr, ColumnRef):
        return _column(expr, values)
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, PromptExpr):
        if prompt_values is None or expr not in prompt_values:
            raise ExecutionError(f"prompt {expr.template!r} was not evaluated")
        return prompt_values[expr]
    if isinstance(expr, Compare):
        outcome = _hint_outcome(expr, values)
        if outcome is not None:
            return outcome
        return compare(expr.op, evaluate(expr.left, values, prompt_values),
                       evaluate(expr.right, values, prompt_values))
    if isinstance(expr, BoolOp):
        if expr.op == "not":
            return not truthy(evaluate(expr.operands[0], values, prompt_values))
        results = (truthy(evaluate(o, values, prompt_values)) for o in expr.operands)
        return all(results) if expr.op == "and" else any(results)
    raise ExecutionError(f"cannot evaluate {expr!r}")


def truthy(value: Any) -> bool:
    """Boolean reading of a predicate value; missing values are false."""
    return bool(value) if value is not None else False
