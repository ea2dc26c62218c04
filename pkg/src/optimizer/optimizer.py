"""
Rule-based Optimizer - 逻辑计划到物理计划的改写

按固定顺序应用规则:
1. 从下游比较中提取提前终止提示, 下推到聚合
2. 融合相邻的语义 filter/map
3. 在未融合的语义 filter 下方插入相似度预过滤
4. 为非分组聚合插入计数扫描 (CountScan)
5. 为分组聚合尽可能低地插入分组排序 (GroupSort)
6. 为每个聚合选择策略: 相关性排序 / 估计 / 无
7. 分配误差预算
"""
import dataclasses
from typing import Dict, List, Optional, Sequence, Tuple

from loguru import logger

from src.claims.models import ClaimStructure, Comparison, ComparisonOp
from src.common.errors import UnsupportedShapeError
from src.dsl.models import (
    AggExpr,
    Aggregate,
    BoolOp,
    Check,
    Expr,
    Filter,
    Map,
    PromptExpr,
    Scan,
    WithRank,
    chain,
    is_semantic,
    prompts_in,
)
from src.dsl.printer import print_expr, print_node
from src.dsl.shape import column_comparison, formula_id, formula_text, inline_maps, plan_shape
from src.engine.config import EngineConfig
from src.oracle.oracle import template_placeholders
from src.relation.embedder import Embedder
from src.relation.models import Schema
from src.stats.budget import allocate_budget
from src.stats.models import BudgetPlan
from .models import (
    AggAnnotation,
    CountScan,
    FusedPartSpec,
    FusedSemantic,
    GroupSort,
    PhysicalAggregate,
    PhysicalPlan,
    RelevanceSort,
    Shuffle,
    SimilarityPrefilter,
    Strategy,
    TotalSource,
)
from .search_spec import SearchContext, SearchSpecBuilder


# ---------------------------------------------------------------- helpers

def _detached(node):
    """Copy of a node with its child removed, for re-linking."""
    return dataclasses.replace(node, child=None)


def _relink(nodes: Sequence) -> object:
    """Chain detached nodes (leaf first) into a tree and return the root."""
    root = nodes[0]
    for node in nodes[1:]:
        root = dataclasses.replace(node, child=root)
    return root


def _conjuncts(expr: Expr) -> List[Expr]:
    if isinstance(expr, BoolOp) and expr.op == "and":
        out: List[Expr] = []
        for operand in expr.operands:
            out.extend(_conjuncts(operand))
        return out
    return [expr]


def _consumer_exprs(node) -> List[Expr]:
    if isinstance(node, (Check, Filter)):
        return _conjuncts(node.expr)
    if isinstance(node, Aggregate):
        return [agg.arg for agg in node.aggs]
    return []


def extract_hint(agg: AggExpr, consumer) -> Optional[Comparison]:
    """Comparison `col(out_name) op k` applied to an aggregate output right above it."""
    if agg.fn in ("bool_or", "bool_and") or consumer is None:
        return None
    for expr in _consumer_exprs(consumer):
        found = column_comparison(expr, agg.out_name)
        if found is not None:
            op, k = found
            return Comparison(op=op, threshold=k)
    return None


def _is_row_dropper(node) -> bool:
    if isinstance(node, (Filter, SimilarityPrefilter)):
        return True
    return isinstance(node, FusedSemantic) and node.has_filter


def _is_semantic_op(node) -> bool:
    if isinstance(node, (Filter, Map)):
        return is_semantic(node.expr)
    return isinstance(node, FusedSemantic)


def _is_semantic_map(node) -> bool:
    if isinstance(node, Map):
        return is_semantic(node.expr)
    return isinstance(node, FusedSemantic) and any(p.kind == "map" for p in node.parts)


def _produces(node) -> Tuple[str, ...]:
    if isinstance(node, Map):
        return (node.out_name,)
    if isinstance(node, FusedSemantic):
        return tuple(p.out_name for p in node.parts if p.kind == "map")
    return ()


def _fusable(node) -> bool:
    if isinstance(node, Filter):
        return isinstance(node.expr, PromptExpr) and node.expr.is_boolean
    return isinstance(node, Map) and isinstance(node.expr, PromptExpr)


def _part_of(node) -> FusedPartSpec:
    if isinstance(node, Filter):
        return FusedPartSpec(kind="filter", expr=node.expr)
    return FusedPartSpec(kind="map", expr=node.expr, out_name=node.out_name)


def fuse_semantic(nodes: Sequence) -> List:
    """Replace runs of independent prompt-only filters and maps by FusedSemantic."""
    out: List = []
    run: List = []

    def flush():
        if len(run) >= 2:
            out.append(FusedSemantic(child=None, parts=tuple(_part_of(n) for n in run)))
        else:
            out.extend(run)
        run.clear()

    for node in nodes:
        if not _fusable(node):
            flush()
            out.append(node)
            continue
        produced = {name for n in run for name in _produces(n)}
        if produced & set(template_placeholders(node.expr.template)):
            flush()
        run.append(node)
    flush()
    return out


# ---------------------------------------------------------------- optimizer

class Optimizer:
    """Logical-to-physical rewriter; search specs are memoized per instance."""

    def __init__(
        self,
        cfg: Optional[EngineConfig] = None,
        schema: Optional[Schema] = None,
        oracle=None,
        embedder: Optional[Embedder] = None,
    ):
        self.cfg = cfg or EngineConfig()
        self.schema = schema
        self.search_specs = SearchSpecBuilder(oracle, embedder)

    # ---------------------------------------------------------- attributes

    def text_attribute(self, prompt: PromptExpr) -> Optional[str]:
        names = template_placeholders(prompt.template)
        if self.schema is None:
            return names[0] if names else None
        text_attrs = set(self.schema.text_attributes())
        for name in names:
            if name in text_attrs:
                return name
        return None

    def traced_prompt(self, aggregate: Aggregate, agg: AggExpr) -> Optional[Tuple[PromptExpr, str]]:
        """First prompt over a text attribute behind an aggregate argument."""
        for prompt in prompts_in(inline_maps(aggregate.child, agg.arg)):
            attribute = self.text_attribute(prompt)
            if attribute is not None:
                return prompt, attribute
        return None

    # ---------------------------------------------------------- rules

    def _prefilter(self, node, prompt: PromptExpr) -> List:
        attribute = self.text_attribute(prompt)
        if attribute is None:
            return [node]
        spec = self.search_specs(SearchContext(primary_prompt=prompt.template, aggregate="filter",
                                               attribute=attribute))
        return [SimilarityPrefilter(child=None, spec=spec, threshold=self.cfg.similarity_threshold,
                                    attribute=attribute), node]

    def insert_prefilters(self, nodes: Sequence) -> List:
        out: List = []
        for node in nodes:
            if isinstance(node, Filter) and isinstance(node.expr, PromptExpr):
                out.extend(self._prefilter(node, node.expr))
            elif isinstance(node, FusedSemantic) and node.has_filter:
                first = next(p for p in node.parts if p.kind == "filter")
                out.extend(self._prefilter(node, first.expr))
            else:
                out.append(node)
        return out

    def choose_strategy(self, fn: str, hint: Optional[Comparison], has_total: bool,
                        innermost: bool, traceable: bool) -> Strategy:
        flags = self.cfg.flags
        if not flags.early_stopping:
            return Strategy.NONE
        relevance_ok = flags.relevance_sorting and innermost and traceable
        estimation = Strategy.ESTIMATION if flags.estimation else Strategy.NONE

        if fn == "bool_or":
            if relevance_ok:
                return Strategy.RELEVANCE
            return estimation if has_total else Strategy.NONE
        if fn == "bool_and":
            return estimation
        if fn == "proportion":
            return estimation
        # count_if
        if hint is None:
            return estimation
        if hint.op in (ComparisonOp.GE, ComparisonOp.GT):
            if hint.threshold <= self.cfg.low_k or not has_total:
                if relevance_ok:
                    return Strategy.RELEVANCE
                return estimation if has_total else Strategy.NONE
            return estimation
        return estimation if has_total else Strategy.NONE

    # ---------------------------------------------------------- main

    def optimize(self, plan) -> PhysicalPlan:
        nodes = chain(plan)
        structure: Optional[ClaimStructure] = None
        classified = True
        try:
            structure = plan_shape(plan).structure
        except UnsupportedShapeError as e:
            classified = False
            logger.warning(f"unclassifiable plan, optimizing without strategies: {e}")

        agg_positions = [i for i, n in enumerate(nodes) if isinstance(n, Aggregate)]
        if not agg_positions or not isinstance(nodes[0], Scan):
            raise UnsupportedShapeError("plan needs a scan and an aggregate")
        first = agg_positions[0]
        inner: Aggregate = nodes[first]
        flags = self.cfg.flags

        # (1) hints and formulas
        hints: Dict[int, Tuple[Optional[Comparison], ...]] = {}
        formulas: Dict[str, str] = {}
        formula_ids: Dict[int, Tuple[str, ...]] = {}
        for i in agg_positions:
            consumer = nodes[i + 1] if i + 1 < len(nodes) else None
            hints[i] = tuple(extract_hint(agg, consumer) for agg in nodes[i].aggs)
            ids = []
            for agg in nodes[i].aggs:
                text = formula_text(nodes[i], agg)
                fid = formula_id(text)
                formulas[fid] = text
                ids.append(fid)
            formula_ids[i] = tuple(ids)

        # (2) fusion, (3) prefilters
        below = [_detached(n) for n in nodes[1:first]]
        if flags.fusion:
            below = fuse_semantic(below)
        if flags.similarity_filter:
            below = self.insert_prefilters(below)

        # (4) count scan / (5) group sort
        count_scan_at: Optional[int] = None
        group_sort_at: Optional[int] = None
        exact_groups = False
        if not inner.group_by:
            dropper_after_map = False
            seen_map = False
            for node in below:
                if _is_row_dropper(node) and seen_map:
                    dropper_after_map = True
                seen_map = seen_map or _is_semantic_map(node)
            fused_filter = any(isinstance(n, FusedSemantic) and n.has_filter for n in below)
            if flags.early_stopping and not dropper_after_map and not fused_filter:
                droppers = [j for j, n in enumerate(below) if _is_row_dropper(n)]
                count_scan_at = droppers[-1] + 1 if droppers else 0
        else:
            keys = set(inner.group_keys)
            position = 0
            while position < len(below) and not _is_semantic_op(below[position]) \
                    and not isinstance(below[position], SimilarityPrefilter):
                position += 1
            for j, node in enumerate(below):
                if keys & set(_produces(node)):
                    position = max(position, j + 1)
            group_sort_at = position
            exact_groups = not any(_is_row_dropper(n) for n in below[position:])

        # (6) strategies
        totals: Dict[int, TotalSource] = {}
        for i in agg_positions:
            if i == first:
                if count_scan_at is not None:
                    totals[i] = TotalSource.COUNT_SCAN
                elif inner.group_by and exact_groups:
                    totals[i] = TotalSource.GROUP_SORT
                else:
                    totals[i] = TotalSource.NONE
            else:
                previous = nodes[i - 1]
                from_groups = isinstance(previous, Aggregate) and previous is inner and exact_groups
                totals[i] = TotalSource.GROUPS if from_groups else TotalSource.NONE

        strategies: Dict[int, List[Strategy]] = {}
        for i in agg_positions:
            chosen = []
            for agg, hint in zip(nodes[i].aggs, hints[i]):
                if not classified:
                    chosen.append(Strategy.NONE)
                    continue
                traceable = self.traced_prompt(nodes[i], agg) is not None
                chosen.append(self.choose_strategy(agg.fn, hint, totals[i] != TotalSource.NONE,
                                                   innermost=(i == first), traceable=traceable))
            if Strategy.RELEVANCE in chosen:
                # one strategy per operator
                chosen = [s if s != Strategy.ESTIMATION else Strategy.NONE for s in chosen]
            strategies[i] = chosen

        # (7) error budget
        operators: List[Tuple[int, Optional[int]]] = []
        operator_index: Dict[int, int] = {}
        for i in agg_positions:
            estimating = sum(1 for agg, hint, s in zip(nodes[i].aggs, hints[i], strategies[i])
                             if s == Strategy.ESTIMATION and _can_stop(agg.fn, hint))
            if estimating:
                operator_index[i] = len(operators)
                operators.append((estimating, None if nodes[i].group_by else 1))
        budget = allocate_budget(self.cfg.alpha, operators)

        # inserted sorts and shuffles
        prefix: List = []
        relevant = [(agg, h) for agg, h, s in zip(inner.aggs, hints[first], strategies[first])
                    if s == Strategy.RELEVANCE]
        text_attribute = None
        traced = self.traced_prompt(inner, inner.aggs[0])
        if traced is not None:
            text_attribute = traced[1]
        if relevant:
            agg, hint = relevant[0]
            prompt, attribute = self.traced_prompt(inner, agg)
            filter_prompts = tuple(
                n.expr.template for n in nodes[1:first]
                if isinstance(n, Filter) and isinstance(n.expr, PromptExpr)
                and self.text_attribute(n.expr) == attribute
            )
            context = SearchContext(
                primary_prompt=prompt.template,
                filter_prompts=filter_prompts,
                aggregate=f"{agg.fn}({print_expr(inline_maps(inner.child, agg.arg))})",
                comparison=str(hint) if hint is not None else "",
                attribute=attribute,
            )
            prefix.append(RelevanceSort(child=None, spec=self.search_specs(context), attribute=attribute))

        estimating_anywhere = any(Strategy.ESTIMATION in s for s in strategies.values())
        inner_relevance = bool(relevant)
        if inner.group_by:
            block = [GroupSort(child=None, keys=inner.group_keys, exact_counts=exact_groups)]
            if estimating_anywhere:
                block.append(Shuffle(child=None, seed=self.cfg.shuffle_seed, hierarchical=True,
                                     keys=inner.group_keys, shuffle_within=not inner_relevance))
            below[group_sort_at:group_sort_at] = block
        else:
            if estimating_anywhere:
                prefix.append(Shuffle(child=None, seed=self.cfg.shuffle_seed))
            if count_scan_at is not None:
                below.insert(count_scan_at, CountScan(child=None))

        physical: List = [Scan(relation=nodes[0].relation)] + prefix + below
        for i in range(first, len(nodes)):
            node = nodes[i]
            if isinstance(node, Aggregate):
                annotations = tuple(
                    AggAnnotation(
                        hint=hint,
                        strategy=strategy,
                        operator_index=(operator_index.get(i)
                                        if strategy == Strategy.ESTIMATION and _can_stop(agg.fn, hint) else None),
                        formula_id=fid,
                    )
                    for agg, hint, strategy, fid in zip(node.aggs, hints[i], strategies[i], formula_ids[i])
                )
                physical.append(PhysicalAggregate(child=None, aggs=node.aggs, group_by=node.group_by,
                                                  annotations=annotations, totals=totals[i]))
            else:
                physical.append(_detached(node))

        root = _relink(physical)
        logger.bind(strategies={i: [s.value for s in v] for i, v in strategies.items()}).debug("plan optimized")
        return PhysicalPlan(root=root, logical=plan, structure=structure, budget=budget,
                            formulas=formulas, text_attribute=text_attribute)


def optimize(plan, cfg: Optional[EngineConfig] = None, schema: Optional[Schema] = None,
             oracle=None, embedder: Optional[Embedder] = None) -> PhysicalPlan:
    return Optimizer(cfg, schema, oracle, embedder).optimize(plan)


def _can_stop(fn: str, hint: Optional[Comparison]) -> bool:
    """Whether a confidence sequence can decide this aggregate before the scan ends."""
    return fn in ("bool_and", "bool_or") or hint is not None


# ---------------------------------------------------------------- explain

def _annotation_text(fn: str, annotation: AggAnnotation, budget: BudgetPlan) -> str:
    parts = [f"strategy={annotation.strategy.value}"]
    if annotation.hint is not None:
        parts.append(f"hint={annotation.hint}")
    elif annotation.strategy == Strategy.ESTIMATION and not _can_stop(fn, None):
        # ranked consumers carry no threshold
        parts.append("stops=never")
    if annotation.operator_index is not None:
        op = budget.operators[annotation.operator_index]
        share = budget.alpha / (budget.o * op.accumulators)
        parts.append(f"alpha={share:.4g}" if op.groups == 1 else f"alpha={share:.4g}/group-split")
    return ", ".join(parts)


def explain_node(node, budget: Optional[BudgetPlan] = None) -> str:
    budget = budget or BudgetPlan(alpha=0.0)
    if isinstance(node, Scan):
        return node.relation
    if isinstance(node, CountScan):
        return "CountScan"
    if isinstance(node, GroupSort):
        return f"GroupSort(keys={list(node.keys)}, exact_counts={node.exact_counts})"
    if isinstance(node, Shuffle):
        if node.hierarchical:
            return (f"Shuffle(seed={node.seed}, hierarchical={list(node.keys)}, "
                    f"within_groups={node.shuffle_within})")
        return f"Shuffle(seed={node.seed})"
    if isinstance(node, RelevanceSort):
        return f"RelevanceSort(query={node.spec.query!r}, attribute={node.attribute})"
    if isinstance(node, SimilarityPrefilter):
        return f"SimilarityPrefilter(query={node.spec.query!r}, threshold={node.threshold})"
    if isinstance(node, FusedSemantic):
        parts = []
        for part in node.parts:
            target = f" -> {part.out_name}" if part.out_name else ""
            parts.append(f"{part.kind} {print_expr(part.expr)}{target}")
        return "FusedSemantic(" + "; ".join(parts) + ")"
    if isinstance(node, PhysicalAggregate):
        aggs = []
        for agg, annotation in zip(node.aggs, node.annotations):
            aggs.append(f"{agg.fn}({print_expr(agg.arg)}) -> {agg.out_name} [{_annotation_text(agg.fn, annotation, budget)}]")
        keys = f" by {list(node.group_keys)}" if node.group_by else ""
        return f"Aggregate{keys}(" + "; ".join(aggs) + f") totals={node.totals.value}"
    if isinstance(node, (Filter, Map, WithRank, Check)):
        return print_node(node).lstrip(".")
    return repr(node)


def explain(physical: PhysicalPlan) -> str:
    """Physical plan, one operator per line from the scan upwards."""
    return "\n".join(explain_node(n, physical.budget) for n in chain(physical.root))
