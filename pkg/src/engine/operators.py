"""
Physical operators - 批量流水线算子

元组区的算子每次处理一批行 (最多 batch_size 行), 批内的 oracle 请求
并发发出, 结果按原始流顺序交给上层. 排序, 洗牌与计数扫描是流水线
断点: 先物化下方的全部输入再继续.
"""
from collections import Counter
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from loguru import logger

from src.common.errors import OracleError, OracleTypeError
from src.dsl.models import AggExpr, Filter, Map, PromptExpr, prompts_in
from src.engine.config import EngineConfig
from src.optimizer.models import (
    CountScan,
    FusedSemantic,
    GroupSort,
    RelevanceSort,
    Shuffle,
    SimilarityPrefilter,
)
from src.relevance.prefilter import similarity_prefilter
from src.relevance.ranking import relevance_sort
from src.stats.shuffle import shuffle
from .expressions import evaluate, truthy
from .fusion import fused_semantic_eval
from .models import ExecRow, ExecutionStats

BREAKERS = (RelevanceSort, GroupSort, Shuffle, CountScan)


class ExecContext:
    """State shared by the operators of one execution"""

    def __init__(self, oracle, cfg: EngineConfig, stats: Optional[ExecutionStats] = None):
        self.oracle = oracle
        self.cfg = cfg
        self.stats = stats or ExecutionStats()
        self.n_total: Optional[int] = None
        self.group_counts: Dict[Tuple[Any, ...], int] = {}
        self.exact_group_counts = False
        self.resolved_groups = set()

    def dispatch(self, requests) -> List[Any]:
        return self.oracle.evaluate_batch_sync(requests, return_exceptions=True)

    def tuple_failed(self, row: ExecRow, error: OracleError) -> None:
        """Per-tuple error policy: malformed answers may be skipped, everything else aborts."""
        if isinstance(error, OracleTypeError) and self.cfg.error_policy == "skip":
            self.stats.tuples_failed += 1
            logger.bind(row_id=row.row_id).warning(f"skipping tuple after malformed answer: {error}")
            return
        raise error

    def evaluate_prompts(self, rows: Sequence[ExecRow], prompts: Sequence[PromptExpr]):
        """Answer every prompt for every row in one concurrent batch.

        Returns the surviving rows and, per surviving row, {prompt: value}.
        """
        if not prompts or not rows:
            return list(rows), [None] * len(rows)
        requests = [
            self.oracle.semantic_request(p.template, p.return_type, row.variables())
            for row in rows for p in prompts
        ]
        results = self.dispatch(requests)
        kept, values = [], []
        width = len(prompts)
        for i, row in enumerate(rows):
            answers = results[i * width:(i + 1) * width]
            error = next((a for a in answers if isinstance(a, OracleError)), None)
            if error is not None:
                self.tuple_failed(row, error)
                continue
            kept.append(row)
            values.append({p: a.value for p, a in zip(prompts, answers)})
        return kept, values


def _distinct_prompts(*exprs) -> Tuple[PromptExpr, ...]:
    found: Dict[PromptExpr, None] = {}
    for expr in exprs:
        for prompt in prompts_in(expr):
            found.setdefault(prompt, None)
    return tuple(found)


class Stage:
    """One batch-at-a-time operator"""

    def __init__(self, ctx: ExecContext):
        self.ctx = ctx

    def process(self, batch: List[ExecRow]) -> List[ExecRow]:
        raise NotImplementedError


class FilterStage(Stage):
    def __init__(self, ctx: ExecContext, node: Filter):
        super().__init__(ctx)
        self.expr = node.expr
        self.prompts = _distinct_prompts(node.expr)

    def process(self, batch):
        rows, prompt_values = self.ctx.evaluate_prompts(batch, self.prompts)
        return [row for row, pv in zip(rows, prompt_values) if truthy(evaluate(self.expr, row.values, pv))]


class MapStage(Stage):
    def __init__(self, ctx: ExecContext, node: Map):
        super().__init__(ctx)
        self.expr = node.expr
        self.out_name = node.out_name
        self.prompts = _distinct_prompts(node.expr)

    def process(self, batch):
        rows, prompt_values = self.ctx.evaluate_prompts(batch, self.prompts)
        for row, pv in zip(rows, prompt_values):
            row.values[self.out_name] = evaluate(self.expr, row.values, pv)
        return rows


class PrefilterStage(Stage):
    def __init__(self, ctx: ExecContext, node: SimilarityPrefilter):
        super().__init__(ctx)
        self.node = node

    def process(self, batch):
        kept = []
        for row in batch:
            if row.row is None or similarity_prefilter(row.row, self.node.spec, self.node.threshold,
                                                       self.node.attribute):
                kept.append(row)
            else:
                self.ctx.stats.tuples_prefiltered += 1
        return kept


class FusedStage(Stage):
    def __init__(self, ctx: ExecContext, node: FusedSemantic):
        super().__init__(ctx)
        self.parts = node.parts

    def process(self, batch):
        outcomes = fused_semantic_eval(self.parts, [row.variables() for row in batch], self.ctx.oracle,
                                       return_exceptions=True)
        kept = []
        for row, outputs in zip(batch, outcomes):
            if isinstance(outputs, OracleError):
                self.ctx.tuple_failed(row, outputs)
                continue
            if outputs is None:
                continue
            row.values.update(outputs)
            kept.append(row)
        return kept


class ArgumentStage(Stage):
    """Evaluates aggregate arguments (semantic ones in batch) into row.args"""

    def __init__(self, ctx: ExecContext, aggs: Sequence[AggExpr]):
        super().__init__(ctx)
        self.aggs = tuple(aggs)
        self.prompts = _distinct_prompts(*(a.arg for a in aggs))

    def process(self, batch):
        rows, prompt_values = self.ctx.evaluate_prompts(batch, self.prompts)
        for row, pv in zip(rows, prompt_values):
            row.args = [truthy(evaluate(a.arg, row.values, pv)) for a in self.aggs]
        return rows


def make_stage(node, ctx: ExecContext) -> Stage:
    if isinstance(node, Filter):
        return FilterStage(ctx, node)
    if isinstance(node, Map):
        return MapStage(ctx, node)
    if isinstance(node, SimilarityPrefilter):
        return PrefilterStage(ctx, node)
    if isinstance(node, FusedSemantic):
        return FusedStage(ctx, node)
    raise TypeError(f"no batch operator for {type(node).__name__}")


def run_stages(stages: Sequence[Stage], batch: List[ExecRow]) -> List[ExecRow]:
    for stage in stages:
        if not batch:
            break
        batch = stage.process(batch)
    return batch


def run_full(stages: Sequence[Stage], rows: List[ExecRow], batch_size: int) -> List[ExecRow]:
    """Push every row through the stages (below a pipeline breaker)."""
    if not stages:
        return rows
    out: List[ExecRow] = []
    for start in range(0, len(rows), batch_size):
        out.extend(run_stages(stages, rows[start:start + batch_size]))
    return out


# ---------------------------------------------------------------- breakers

def _order(value: Any):
    return (value is None, type(value).__name__, value)


def group_sort(rows: List[ExecRow], keys: Sequence[str]) -> List[ExecRow]:
    """Stable sort into group-contiguous order."""
    return sorted(rows, key=lambda r: tuple(_order(r.values.get(k)) for k in keys))


def apply_breaker(node, rows: List[ExecRow], ctx: ExecContext) -> List[ExecRow]:
    if isinstance(node, RelevanceSort):
        by_id = {r.row_id: r for r in rows}
        ordered = relevance_sort([r.row for r in rows], node.spec, node.attribute)
        return [by_id[t.row_id] for t in ordered]
    if isinstance(node, GroupSort):
        rows = group_sort(rows, node.keys)
        ctx.group_counts = dict(Counter(r.key(node.keys) for r in rows))
        ctx.exact_group_counts = node.exact_counts
        return rows
    if isinstance(node, Shuffle):
        keys = node.keys
        return shuffle(rows, node.seed, hierarchical=node.hierarchical,
                       key=(lambda r: r.key(keys)) if node.hierarchical else None,
                       shuffle_within=node.shuffle_within)
    if isinstance(node, CountScan):
        ctx.n_total = len(rows)
        return rows
    raise TypeError(f"{type(node).__name__} is not a pipeline breaker")


class BatchSource:
    """Draws batches lazily, skipping rows whose group is already resolved."""

    def __init__(self, rows: Sequence[ExecRow], batch_size: int,
                 skip: Optional[Callable[[ExecRow], bool]] = None):
        self.rows = rows
        self.batch_size = batch_size
        self.skip = skip
        self.position = 0
        self.drawn = 0
        self.skipped = 0

    def __iter__(self) -> Iterator[List[ExecRow]]:
        while self.position < len(self.rows):
            batch: List[ExecRow] = []
            while len(batch) < self.batch_size and self.position < len(self.rows):
                row = self.rows[self.position]
                self.position += 1
                if self.skip is not None and self.skip(row):
                    self.skipped += 1
                    continue
                batch.append(row)
            if batch:
                self.drawn += len(batch)
                yield batch

    @property
    def untouched(self) -> int:
        return len(self.rows) - self.position
