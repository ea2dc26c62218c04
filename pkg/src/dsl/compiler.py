"""
Claim compilation - 声明编译为验证查询

compile_claim 通过 oracle 生成程序并在解析/类型错误时带着错误信息重试;
render_program 则直接由已知的声明结构构造规范查询 (离线基准用它给脚本化 oracle 供稿).
"""
from typing import Dict, List, Optional

from loguru import logger

from src.claims.models import (
    Claim,
    ComparisonOp,
    NestedStructure,
    OrdinalStructure,
    Quantifier,
    QuantifierKind,
    SimpleStructure,
)
from src.claims.quantifiers import VagueQuantifierHints
from src.common.errors import CompilationError, OracleError, VerificationError
from src.oracle.oracle import SemanticOracle, render_template
from src.oracle.parsing import strip_fences
from src.relation.models import Schema
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
    PromptExpr,
    Scan,
    WithRank,
)
from .parser import parse, parse_expr
from .printer import print_plan
from .shape import claim_structure_of

MAX_ATTEMPTS = 3

FORMULA_COLUMN = "holds"


def compile_claim(
    claim: Claim,
    schema: Schema,
    api_docs: str,
    oracle: SemanticOracle,
    max_attempts: int = MAX_ATTEMPTS,
    hints: Optional[VagueQuantifierHints] = None,
) -> PlanNode:
    """Ask the oracle for a program; re-prompt with the error on parse, type or shape failures."""
    variables = {
        "schema": schema.describe(),
        "vague_quantifiers": (hints or VagueQuantifierHints()).render(),
        "dsl_docs": api_docs,
        "claim": claim.text,
        "aggregation_prompt": claim.aggregation_prompt or "",
    }
    attempts: List[Dict[str, str]] = []
    appendix: Optional[str] = None
    log = logger.bind(claim=claim.id or claim.text[:40])

    for attempt in range(1, max_attempts + 1):
        try:
            raw = oracle.complete("compile", variables, appendix=appendix)
        except OracleError as e:
            attempts.append({"program": "", "error": str(e)})
            log.warning(f"compile attempt {attempt} failed: {e}")
            break
        program = strip_fences(str(raw))
        try:
            plan = parse(program, schema)
            claim_structure_of(plan)
            log.debug(f"compiled after {attempt} attempt(s)")
            return plan
        except VerificationError as e:
            attempts.append({"program": program, "error": str(e)})
            log.warning(f"compile attempt {attempt} rejected: {e}")
            appendix = render_template(oracle.prompts["compile_retry"], {"error": str(e), "program": program})

    raise CompilationError(f"could not compile claim after {len(attempts)} attempt(s)", attempts=attempts)


# ---------------------------------------------------------------- rendering

def _number(value: float) -> Literal:
    return Literal(int(value)) if float(value).is_integer() else Literal(float(value))


def _agg_for(q: Quantifier, arg: Expr, prefix: str) -> AggExpr:
    if q.kind == QuantifierKind.EXISTS:
        return AggExpr("bool_or", arg, f"{prefix}any")
    if q.kind == QuantifierKind.FORALL:
        return AggExpr("bool_and", arg, f"{prefix}all")
    if q.kind == QuantifierKind.CARDINAL:
        return AggExpr("count_if", arg, f"{prefix}count")
    return AggExpr("proportion", arg, f"{prefix}share")


def _consume(q: Quantifier, agg: AggExpr) -> Expr:
    """Expression over the aggregate output that completes the quantifier."""
    ref = ColumnRef(agg.out_name)
    if q.kind in (QuantifierKind.EXISTS, QuantifierKind.FORALL):
        return ref
    threshold = _number(q.threshold) if q.kind == QuantifierKind.CARDINAL else Literal(float(q.threshold))
    return Compare(ref, q.op, threshold)


def _target_filter(keys: List[str], values: List) -> Expr:
    parts: List[Expr] = [Compare(ColumnRef(k), ComparisonOp.EQ, Literal(v)) for k, v in zip(keys, values)]
    expr = parts[0]
    for part in parts[1:]:
        expr = BoolOp("and", (expr, part))
    return expr


def render_program(claim: Claim) -> PlanNode:
    """Canonical plan for a claim with a known structure and formula prompt."""
    if claim.structure is None or not claim.formula_prompt:
        raise ValueError(f"claim {claim.id!r} needs a structure and a formula prompt")

    plan: PlanNode = Scan()
    if claim.scope is not None and claim.scope.symbolic:
        plan = Filter(plan, parse_expr(claim.scope.symbolic))
    if claim.scope is not None and claim.scope.semantic:
        plan = Filter(plan, PromptExpr(claim.scope.semantic))
    plan = Map(plan, PromptExpr(claim.formula_prompt), FORMULA_COLUMN)
    formula = ColumnRef(FORMULA_COLUMN)
    structure = claim.structure

    if isinstance(structure, SimpleStructure):
        agg = _agg_for(structure.quantifier, formula, "")
        plan = Aggregate(plan, (agg,))
        return Check(plan, _consume(structure.quantifier, agg))

    group_by = tuple(ColumnRef(k) for k in structure.group_keys)
    if isinstance(structure, NestedStructure):
        inner = _agg_for(structure.inner, formula, "group_")
        plan = Aggregate(plan, (inner,), group_by)
        outer = _agg_for(structure.outer, _consume(structure.inner, inner), "groups_")
        plan = Aggregate(plan, (outer,))
        return Check(plan, _consume(structure.outer, outer))

    if isinstance(structure, OrdinalStructure):
        fn = "count_if" if structure.aggregate == "count" else "proportion"
        agg = AggExpr(fn, formula, "score")
        plan = Aggregate(plan, (agg,), group_by)
        plan = WithRank(plan, ColumnRef("score"), descending=structure.descending)
        plan = Filter(plan, _target_filter(structure.group_keys, structure.target_group))
        return Check(plan, Compare(ColumnRef(WithRank.out_name), ComparisonOp.EQ, Literal(structure.target_rank)))

    raise TypeError(f"unknown structure {structure!r}")


def render_program_text(claim: Claim) -> str:
    return print_plan(render_program(claim))
