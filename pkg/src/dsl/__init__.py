"""
验证查询语言 (DSL) 模块

提供:
- 表达式与算子树
- 方法链语法的解析与规范打印
- 基于 schema 的静态类型检查
- 计划形状识别 (简单 / 嵌套 / 序数)
- 通过 oracle 的声明编译

使用示例:
    from src.dsl import parse, print_plan

    plan = parse('df.aggregate([bool_or(col("x")).alias("any_x")]).check(col("any_x"))')
    print(print_plan(plan))
"""

from .models import (
    AGG_FUNCTIONS,
    AggExpr,
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
    columns_in,
    depth,
    is_semantic,
    iter_exprs,
    prompts_in,
)
from .printer import print_expr, print_node, print_plan
from .typecheck import expr_type, schema_columns, typecheck
from .parser import parse, parse_expr
from .shape import (
    PlanShape,
    claim_structure_of,
    column_comparison,
    formula_id,
    formula_text,
    inline_maps,
    plan_shape,
)
from .compiler import FORMULA_COLUMN, compile_claim, render_program, render_program_text

__all__ = [
    "AGG_FUNCTIONS",
    "AggExpr",
    "Aggregate",
    "BoolOp",
    "Check",
    "ColumnRef",
    "ColumnType",
    "Compare",
    "Expr",
    "Filter",
    "Literal",
    "Map",
    "PlanNode",
    "PromptExpr",
    "Scan",
    "WithRank",
    "chain",
    "columns_in",
    "depth",
    "is_semantic",
    "iter_exprs",
    "prompts_in",
    "print_expr",
    "print_node",
    "print_plan",
    "expr_type",
    "schema_columns",
    "typecheck",
    "parse",
    "parse_expr",
    "PlanShape",
    "claim_structure_of",
    "column_comparison",
    "formula_id",
    "formula_text",
    "inline_maps",
    "plan_shape",
    "FORMULA_COLUMN",
    "compile_claim",
    "render_program",
    "render_program_text",
]
