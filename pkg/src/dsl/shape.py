"""
Plan shapes - 从算子树反推声明结构

三种形状:
- simple:  [scope/formula ops] -> aggregate -> check
- nested:  [...] -> aggregate(group_by) -> aggregate -> check
- ordinal: [...] -> aggregate(group_by) -> with_rank -> filter(target) -> check
"""
import hashlib
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from pydantic import ValidationError

from src.claims.models import (
    ClaimStructure,
    ComparisonOp,
    NestedStructure,
    OrdinalStructure,
    Quantifier,
    SimpleStructure,
)
from src.common.errors import UnsupportedShapeError
from .models import (
    AggExpr,
    Aggregate,
    BoolOp,
    Check,
    ColumnRef,
    Compare,
    Expr,
    Filter,
    Literal,
    Map,
    PlanNode,
    Scan,
    WithRank,
    chain,
)
from .printer import print_expr, print_node


@dataclass(frozen=True)
class PlanShape:
    """Claim structure plus the plan nodes it was read from"""
    structure: ClaimStructure
    inner: Aggregate
    outer: Optional[Aggregate]
    with_rank: Optional[WithRank]
    check: Check

    @property
    def inner_agg(self) -> AggExpr:
        return self.inner.aggs[0]

    @property
    def outer_agg(self) -> Optional[AggExpr]:
        return self.outer.aggs[0] if self.outer is not None else None


def _unsupported(node, reason: str) -> UnsupportedShapeError:
    text = print_node(node) if node is not None else ""
    return UnsupportedShapeError(f"unsupported shape ({reason})", node=text.lstrip("."))


def column_comparison(expr: Expr, name: str) -> Optional[Tuple[ComparisonOp, float]]:
    """(op, k) if expr is `col(name) op k` or `k op col(name)` with a numeric literal."""
    if not isinstance(expr, Compare):
        return None
    left, right, op = expr.left, expr.right, expr.op
    if isinstance(right, ColumnRef) and isinstance(left, Literal):
        left, right, op = right, left, op.flipped
    if isinstance(left, ColumnRef) and left.name == name and isinstance(right, Literal):
        value = right.value
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return op, float(value)
    return None


def _quantifier(agg: AggExpr, consumer: Expr, node) -> Quantifier:
    """Quantifier expressed by an aggregate together with the expression that consumes its output."""
    try:
        if agg.fn in ("bool_or", "bool_and"):
            if isinstance(consumer, ColumnRef) and consumer.name == agg.out_name:
                return Quantifier.exists() if agg.fn == "bool_or" else Quantifier.forall()
            raise _unsupported(node, f"{agg.fn} output must be used as col({agg.out_name!r})")
        comparison = column_comparison(consumer, agg.out_name)
        if comparison is None:
            raise _unsupported(node, f"{agg.fn} output must be compared with a number")
        op, k = comparison
        if agg.fn == "count_if":
            return Quantifier.cardinal(op, k)
        return Quantifier.proportional(op, k)
    except ValidationError as e:
        raise _unsupported(node, e.errors()[0]["msg"])


def _target_group(expr: Expr, keys: Tuple[str, ...], node) -> List:
    """Values of `col(k1).eq(v1) & col(k2).eq(v2) ...`, in group-key order."""
    found: Dict[str, object] = {}

    def collect(e: Expr) -> None:
        if isinstance(e, BoolOp) and e.op == "and":
            for operand in e.operands:
                collect(operand)
            return
        if isinstance(e, Compare) and e.op == ComparisonOp.EQ:
            left, right = e.left, e.right
            if isinstance(right, ColumnRef):
                left, right = right, left
            if isinstance(left, ColumnRef) and isinstance(right, Literal) and left.name in keys:
                found[left.name] = right.value
                return
        raise _unsupported(node, "target filter must fix every group key with .eq()")

    collect(expr)
    if set(found) != set(keys):
        raise _unsupported(node, "target filter must fix every group key with .eq()")
    return [found[k] for k in keys]


def plan_shape(plan: PlanNode) -> PlanShape:
    """Classify a well-typed plan as simple, nested or ordinal."""
    nodes = chain(plan)
    for node in nodes[:-1]:
        if isinstance(node, Check):
            raise _unsupported(node, "more than one check()")
    check = nodes[-1]
    if not isinstance(check, Check):
        raise _unsupported(check, "plan must end with check()")

    agg_positions = [i for i, n in enumerate(nodes) if isinstance(n, Aggregate)]
    if not agg_positions:
        raise _unsupported(check, "no aggregate")
    first = agg_positions[0]
    for node in nodes[1:first]:
        if not isinstance(node, (Filter, Map)):
            raise _unsupported(node, "only filter() and map() may precede the first aggregate")
    inner: Aggregate = nodes[first]
    if len(inner.aggs) != 1:
        raise _unsupported(inner, "exactly one aggregate expression expected")
    tail = nodes[first + 1:-1]

    if not tail:
        if inner.group_by:
            raise _unsupported(inner, "grouped aggregate needs an outer aggregate or a rank")
        q = _quantifier(inner.aggs[0], check.expr, check)
        return PlanShape(SimpleStructure(quantifier=q), inner, None, None, check)

    if len(tail) == 1 and isinstance(tail[0], Aggregate):
        outer: Aggregate = tail[0]
        if not inner.group_by:
            raise _unsupported(inner, "inner aggregate of a nested claim must be grouped")
        if outer.group_by or len(outer.aggs) != 1:
            raise _unsupported(outer, "outer aggregate must be ungrouped with one expression")
        inner_q = _quantifier(inner.aggs[0], outer.aggs[0].arg, outer)
        outer_q = _quantifier(outer.aggs[0], check.expr, check)
        structure = NestedStructure(outer=outer_q, group_keys=list(inner.group_keys), inner=inner_q)
        return PlanShape(structure, inner, outer, None, check)

    if len(tail) == 2 and isinstance(tail[0], WithRank) and isinstance(tail[1], Filter):
        rank, target_filter = tail
        agg = inner.aggs[0]
        if not inner.group_by:
            raise _unsupported(inner, "ranking needs a grouped aggregate")
        if agg.fn not in ("count_if", "proportion"):
            raise _unsupported(inner, "ranking needs count_if() or proportion()")
        if not (isinstance(rank.expr, ColumnRef) and rank.expr.name == agg.out_name):
            raise _unsupported(rank, f"with_rank() must rank col({agg.out_name!r})")
        target = _target_group(target_filter.expr, inner.group_keys, target_filter)
        comparison = column_comparison(check.expr, WithRank.out_name)
        if comparison is None or comparison[0] != ComparisonOp.EQ or not float(comparison[1]).is_integer():
            raise _unsupported(check, "check must be col(\"rank\").eq(<integer>)")
        structure = OrdinalStructure(
            group_keys=list(inner.group_keys),
            aggregate="count" if agg.fn == "count_if" else "proportion",
            target_group=target,
            target_rank=int(comparison[1]),
            descending=rank.descending,
        )
        return PlanShape(structure, inner, None, rank, check)

    raise _unsupported(tail[0], "unexpected operator after the aggregate")


def claim_structure_of(plan: PlanNode) -> ClaimStructure:
    return plan_shape(plan).structure


# ---------------------------------------------------------------- formulas

def inline_maps(plan_below: PlanNode, expr: Expr) -> Expr:
    """Replace references to map outputs (computed below) by their defining expressions."""
    defs: Dict[str, Expr] = {}
    for node in chain(plan_below):
        if isinstance(node, Map):
            defs[node.out_name] = _substitute(node.expr, defs)
        elif isinstance(node, Aggregate):
            defs = {}
    return _substitute(expr, defs)


def _substitute(expr: Expr, defs: Dict[str, Expr]) -> Expr:
    if isinstance(expr, ColumnRef) and expr.name in defs:
        return defs[expr.name]
    if isinstance(expr, Compare):
        return Compare(_substitute(expr.left, defs), expr.op, _substitute(expr.right, defs), pos=expr.pos)
    if isinstance(expr, BoolOp):
        return BoolOp(expr.op, tuple(_substitute(o, defs) for o in expr.operands), pos=expr.pos)
    return expr


def formula_text(aggregate: Aggregate, agg: Optional[AggExpr] = None) -> str:
    """Canonical text of the per-row formula behind an aggregate expression."""
    agg = agg or aggregate.aggs[0]
    return print_expr(inline_maps(aggregate.child, agg.arg))


def formula_id(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
