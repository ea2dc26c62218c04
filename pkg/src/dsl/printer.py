"""Canonical printing: one operator per line, re-parseable to the same plan."""
import json
from typing import Any, List

from src.claims.models import ComparisonOp
from src.oracle.models import ReturnKind, ReturnType
from .models import (
    Aggregate,
    AggExpr,
    BoolOp,
    Check,
    ColumnRef,
    Compare,
    Expr,
    Filter,
    Literal,
    Map,
    PlanNode,
    PromptExpr,
    Scan,
    WithRank,
    chain,
)

_METHOD_NAMES = {ComparisonOp.EQ: "eq", ComparisonOp.NE: "ne"}


def _literal(value: Any) -> str:
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    return repr(value)


def _return_type(rt: ReturnType) -> str:
    if rt.kind == ReturnKind.ENUM:
        return "enum(" + ", ".join(_literal(l) for l in rt.labels) + ")"
    return {ReturnKind.BOOL: "bool", ReturnKind.INT: "int", ReturnKind.REAL: "float"}[rt.kind]


def _receiver(expr: Expr) -> str:
    """Expression printed in front of a method call."""
    if isinstance(expr, Literal):
        return f"lit({_literal(expr.value)})"
    return _operand(expr)


def _operand(expr: Expr) -> str:
    text = print_expr(expr)
    return f"({text})" if isinstance(expr, (Compare, BoolOp)) else text


def print_expr(expr: Expr) -> str:
    if isinstance(expr, ColumnRef):
        return f"col({_literal(expr.name)})"
    if isinstance(expr, Literal):
        return _literal(expr.value)
    if isinstance(expr, PromptExpr):
        return f"prompt({_literal(expr.template)}, {_return_type(expr.return_type)})"
    if isinstance(expr, BoolOp):
        if expr.op == "not":
            return f"~{_operand(expr.operands[0])}"
        symbol = " & " if expr.op == "and" else " | "
        return symbol.join(_operand(o) for o in expr.operands)
    if isinstance(expr, Compare):
        if expr.op in _METHOD_NAMES:
            return f"{_receiver(expr.left)}.{_METHOD_NAMES[expr.op]}({print_expr(expr.right)})"
        return f"{_operand(expr.left)} {expr.op.symbol} {_operand(expr.right)}"
    raise TypeError(f"cannot print {expr!r}")


def _agg(agg: AggExpr) -> str:
    return f"{agg.fn}({print_expr(agg.arg)}).alias({_literal(agg.out_name)})"


def print_node(node: PlanNode) -> str:
    if isinstance(node, Scan):
        return node.relation
    if isinstance(node, Filter):
        return f".filter({print_expr(node.expr)})"
    if isinstance(node, Map):
        return f".map({_receiver(node.expr)}.alias({_literal(node.out_name)}))"
    if isinstance(node, Aggregate):
        aggs = ", ".join(_agg(a) for a in node.aggs)
        if node.group_by:
            keys = ", ".join(print_expr(k) for k in node.group_by)
            return f".aggregate([{aggs}], group_by=[{keys}])"
        return f".aggregate([{aggs}])"
    if isinstance(node, WithRank):
        suffix = "" if node.descending else ", descending=False"
        return f".with_rank({print_expr(node.expr)}{suffix})"
    if isinstance(node, Check):
        return f".check({print_expr(node.expr)})"
    raise TypeError(f"cannot print {node!r}")


def print_plan(plan: PlanNode) -> str:
    lines: List[str] = [print_node(node) for node in chain(plan)]
    return "\n".join(lines)
