"""
DSL Data Models - 验证查询语言的表达式与算子树

节点均为不可变 dataclass; pos (行, 列) 不参与相等比较,
因此 parse(print(plan)) == plan 只比较结构.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Optional, Tuple, Union

from src.claims.models import ComparisonOp
from src.oracle.models import ReturnKind, ReturnType

Pos = Optional[Tuple[int, int]]

AGG_FUNCTIONS = ("bool_or", "bool_and", "count_if", "proportion")


# ---------------------------------------------------------------- expressions

@dataclass(frozen=True)
class ColumnRef:
    name: str
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Literal:
    value: Any
    pos: Pos = field(default=None, compare=False, repr=False)

    def __eq__(self, other: object) -> bool:
        # True == 1 in Python; literal types must match as well
        if not isinstance(other, Literal):
            return NotImplemented
        return type(self.value) is type(other.value) and self.value == other.value

    def __hash__(self) -> int:
        return hash((type(self.value).__name__, self.value))


@dataclass(frozen=True)
class Compare:
    left: "Expr"
    op: ComparisonOp
    right: "Expr"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BoolOp:
    """op is 'and', 'or' (two operands) or 'not' (one operand)"""
    op: str
    operands: Tuple["Expr", ...]
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class PromptExpr:
    """Semantic expression answered by the oracle per row"""
    template: str
    return_type: ReturnType = field(default_factory=ReturnType.boolean)
    pos: Pos = field(default=None, compare=False, repr=False)

    @property
    def is_boolean(self) -> bool:
        return self.return_type.kind == ReturnKind.BOOL


Expr = Union[ColumnRef, Literal, Compare, BoolOp, PromptExpr]


@dataclass(frozen=True)
class AggExpr:
    fn: str
    arg: Expr
    out_name: str
    pos: Pos = field(default=None, compare=False, repr=False)


# ---------------------------------------------------------------- plan nodes

@dataclass(frozen=True)
class Scan:
    relation: str = "df"
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Filter:
    child: "PlanNode"
    expr: Expr
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Map:
    child: "PlanNode"
    expr: Expr
    out_name: str
    pos: Pos = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Aggregate:
    child: "PlanNode"
    aggs: Tuple[AggExpr, ...]
    group_by: Tuple[ColumnRef, ...] = ()
    pos: Pos = field(default=None, compare=False, repr=False)

    @property
    def group_keys(self) -> Tuple[str, ...]:
        return tuple(c.name for c in self.group_by)


@dataclass(frozen=True)
class WithRank:
    child: "PlanNode"
    expr: Expr
    descending: bool = True
    pos: Pos = field(default=None, compare=False, repr=False)

    out_name = "rank"


@dataclass(frozen=True)
class Check:
    child: "PlanNode"
    expr: Expr
    pos: Pos = field(default=None, compare=False, repr=False)


PlanNode = Union[Scan, Filter, Map, Aggregate, WithRank, Check]


@dataclass(frozen=True)
class ColumnType:
    """Static type of a column or expression"""
    kind: str                      # bool | int | real | text | categorical | enum
    labels: Tuple[str, ...] = ()

    @property
    def is_numeric(self) -> bool:
        return self.kind in ("int", "real")

    @property
    def is_stringy(self) -> bool:
        return self.kind in ("text", "categorical", "enum")

    def __str__(self) -> str:
        if self.kind == "enum":
            return f"enum({', '.join(self.labels)})"
        return self.kind


BOOL = ColumnType("bool")
INT = ColumnType("int")
REAL = ColumnType("real")
TEXT = ColumnType("text")


# ---------------------------------------------------------------- traversal

def chain(plan: Any) -> Tuple[Any, ...]:
    """Operators from the leaf upwards (Scan first, root last)."""
    nodes = []
    node = plan
    while node is not None:
        nodes.append(node)
        node = getattr(node, "child", None)
    return tuple(reversed(nodes))


def depth(plan: Any) -> int:
    return len(chain(plan))


def iter_exprs(expr: Expr) -> Iterator[Expr]:
    """Pre-order walk over an expression tree."""
    yield expr
    if isinstance(expr, Compare):
        yield from iter_exprs(expr.left)
        yield from iter_exprs(expr.right)
    elif isinstance(expr, BoolOp):
        for operand in expr.operands:
            yield from iter_exprs(operand)


def prompts_in(expr: Expr) -> Tuple[PromptExpr, ...]:
    return tuple(e for e in iter_exprs(expr) if isinstance(e, PromptExpr))


def is_semantic(expr: Expr) -> bool:
    return any(isinstance(e, PromptExpr) for e in iter_exprs(expr))


def columns_in(expr: Expr) -> Tuple[str, ...]:
    return tuple(e.name for e in iter_exprs(expr) if isinstance(e, ColumnRef))
