"""Static typing of plans against a relation schema."""
from typing import Dict

from src.claims.models import ComparisonOp
from src.common.errors import DslNameError, DslTypeError
from src.oracle.models import ReturnKind
from src.oracle.oracle import template_placeholders
from src.relation.models import AttrType, Schema
from .models import (
    BOOL,
    INT,
    REAL,
    TEXT,
    Aggregate,
    BoolOp,
    Check,
    ColumnRef,
    ColumnType,
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
from .printer import print_expr

Columns = Dict[str, ColumnType]

_AGG_TYPES = {"bool_or": BOOL, "bool_and": BOOL, "count_if": INT, "proportion": REAL}


def column_type(attr_type: AttrType) -> ColumnType:
    return ColumnType(attr_type.value)


def schema_columns(schema: Schema) -> Columns:
    return {a.name: column_type(a.type) for a in schema.attributes}


def _where(expr) -> dict:
    pos = getattr(expr, "pos", None)
    return {"line": pos[0], "column": pos[1]} if pos else {}


def _type_error(message: str, expr) -> DslTypeError:
    return DslTypeError(message, token=print_expr(expr), **_where(expr))


def expr_type(expr: Expr, columns: Columns) -> ColumnType:
    """Type of an expression over the given columns; raises on unknown names or mismatches."""
    if isinstance(expr, ColumnRef):
        if expr.name not in columns:
            raise DslNameError("unknown attribute", token=expr.name, **_where(expr))
        return columns[expr.name]
    if isinstance(expr, Literal):
        value = expr.value
        if isinstance(value, bool):
            return BOOL
        if isinstance(value, int):
            return INT
        if isinstance(value, float):
            return REAL
        return TEXT
    if isinstance(expr, PromptExpr):
        for name in template_placeholders(expr.template):
            if name not in columns:
                raise DslNameError("prompt placeholder names an unknown attribute", token=name, **_where(expr))
        kind = expr.return_type.kind
        if kind == ReturnKind.ENUM:
            return ColumnType("enum", tuple(expr.return_type.labels))
        return {ReturnKind.BOOL: BOOL, ReturnKind.INT: INT, ReturnKind.REAL: REAL}.get(kind, TEXT)
    if isinstance(expr, BoolOp):
        for operand in expr.operands:
            if expr_type(operand, columns) != BOOL:
                raise _type_error(f"operand of '{expr.op}' must be boolean", operand)
        return BOOL
    if isinstance(expr, Compare):
        left = expr_type(expr.left, columns)
        right = expr_type(expr.right, columns)
        _check_comparable(expr, left, right)
        return BOOL
    raise DslTypeError(f"unknown expression {expr!r}")


def _check_comparable(expr: Compare, left: ColumnType, right: ColumnType) -> None:
    if left.is_numeric and right.is_numeric:
        return
    if expr.op not in (ComparisonOp.EQ, ComparisonOp.NE):
        raise _type_error(f"'{expr.op.symbol}' needs numeric operands, got {left} and {right}", expr)
    if left == BOOL and right == BOOL:
        return
    if left.is_stringy and right.is_stringy:
        for enum_type, other in ((left, expr.right), (right, expr.left)):
            if enum_type.kind == "enum" and isinstance(other, Literal) and other.value not in enum_type.labels:
                raise _type_error(f"{other.value!r} is not a label of {enum_type}", other)
        return
    raise _type_error(f"cannot compare {left} with {right}", expr)


def typecheck(plan: PlanNode, schema: Schema) -> Columns:
    """Check the whole plan and return the columns of the root's input."""
    nodes = chain(plan)
    if not isinstance(nodes[0], Scan):
        raise DslTypeError("plan must start with a Scan")
    if not isinstance(nodes[-1], Check):
        raise DslTypeError("plan must end with check()")
    for node in nodes[1:-1]:
        if isinstance(node, (Scan, Check)):
            raise DslTypeError(f"{type(node).__name__} may only appear once, at the {'leaf' if isinstance(node, Scan) else 'root'}")

    columns: Columns = schema_columns(schema)
    for node in nodes[1:]:
        columns = _output_columns(node, columns)
    return columns


def _output_columns(node: PlanNode, columns: Columns) -> Columns:
    if isinstance(node, (Filter, Check)):
        if expr_type(node.expr, columns) != BOOL:
            raise _type_error(f"{type(node).__name__.lower()} predicate must be boolean", node.expr)
        return columns
    if isinstance(node, Map):
        out = dict(columns)
        out[node.out_name] = expr_type(node.expr, columns)
        return out
    if isinstance(node, WithRank):
        if not expr_type(node.expr, columns).is_numeric:
            raise _type_error("with_rank() needs a numeric expression", node.expr)
        out = dict(columns)
        out[node.out_name] = INT
        return out
    if isinstance(node, Aggregate):
        out: Columns = {}
        for ref in node.group_by:
            out[ref.name] = expr_type(ref, columns)
        for agg in node.aggs:
            if expr_type(agg.arg, columns) != BOOL:
                raise _type_error(f"{agg.fn}() argument must be boolean", agg.arg)
            if agg.out_name in out:
                raise DslTypeError("duplicate output column", token=agg.out_name, **_where(agg))
            out[agg.out_name] = _AGG_TYPES[agg.fn]
        return out
    raise DslTypeError(f"unexpected operator {type(node).__name__}")

