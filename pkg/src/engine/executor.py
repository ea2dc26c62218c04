"""
Executor - 物理计划执行器

第一个聚合之前的元组区按批拉取; 第一个聚合按组流式产出结果行,
其上的算子 (外层聚合, 排名, 过滤, check) 惰性消费这些结果行,
因此外层一旦决定, 内层的剩余组不再求值.
"""
import time
from typing import Any, Dict, Iterator, List, Optional, Tuple

from loguru import logger

from src.claims.models import NestedStructure, OrdinalStructure, SimpleStructure
from src.common.errors import ExecutionError, OracleError
from src.dsl.models import Check, Filter, Map, WithRank, chain
from src.oracle.models import RateTable, load_rate_table
from src.optimizer.models import PhysicalAggregate, PhysicalPlan, Strategy, TotalSource
from src.provenance.assembler import assemble
from src.provenance.models import GroupCapture, OrdinalCapture, ProvToken, StreamCapture
from src.relation.models import Relation
from src.stats.confidence import new_confidence_state
from src.stats.models import AllocationRule
from .accumulator import Accumulator, finalize
from .config import EngineConfig
from .expressions import evaluate, truthy
from .grouping import GroupResult, streaming_group_aggregate
from .models import ExecRow, ExecutionStats, Resolution, ResolutionKind, Resolved, ResolvedBy, Verdict
from .operators import (
    BREAKERS,
    ArgumentStage,
    BatchSource,
    ExecContext,
    apply_breaker,
    make_stage,
    run_full,
    run_stages,
)
from .rank import dense_rank

_DETERMINISTIC = (ResolvedBy.WITNESS, ResolvedBy.RUNNING_COUNT, ResolvedBy.BOUNDS)


def _needs_total(fn: str, hint) -> bool:
    return fn == "bool_or" or (fn == "count_if" and hint is not None)


class Executor:
    """Runs one physical plan against a relation."""

    def __init__(
        self,
        physical: PhysicalPlan,
        relation: Relation,
        oracle,
        cfg: Optional[EngineConfig] = None,
        rates: Optional[RateTable] = None,
    ):
        self.physical = physical
        self.relation = relation
        self.oracle = oracle
        self.cfg = cfg or EngineConfig()
        self.rates = rates
        self.ctx = ExecContext(oracle, self.cfg)
        self.budget = physical.budget.model_copy(deep=True)
        self.accumulators: List[Accumulator] = []
        self.alpha_created = 0.0
        self.first_results: List[GroupResult] = []
        self.outer_results: List[GroupResult] = []
        self.outer_inputs: List[Tuple[ExecRow, List[bool]]] = []
        self.notes: List[str] = []
        self.source: Optional[BatchSource] = None
        self.log = logger.bind(relation=relation.name)

    # ---------------------------------------------------------- accumulators

    def _n_total(self, node: PhysicalAggregate, key) -> Optional[int]:
        if node.totals == TotalSource.COUNT_SCAN:
            return self.ctx.n_total
        if node.totals == TotalSource.GROUP_SORT and self.ctx.exact_group_counts:
            return self.ctx.group_counts.get(key)
        if node.totals == TotalSource.GROUPS and self.ctx.exact_group_counts:
            return len(self.ctx.group_counts)
        return None

    def _new_accumulators(self, node: PhysicalAggregate, key, index: int) -> List[Accumulator]:
        n_total = self._n_total(node, key)
        early = self.cfg.flags.early_stopping
        out = []
        for agg, annotation in zip(node.aggs, node.annotations):
            acc = Accumulator(
                fn=agg.fn,
                hint=annotation.hint,
                n_total=n_total,
                capture=StreamCapture(formula_id=annotation.formula_id, n_total=n_total),
                early_stopping=early,
                epsilon=self.cfg.epsilon,
            )
            if early and annotation.strategy == Strategy.ESTIMATION and annotation.operator_index is not None:
                decidable = agg.fn == "bool_and" or annotation.hint is not None or agg.fn == "bool_or"
                if _needs_total(agg.fn, annotation.hint) and n_total is None:
                    decidable = False
                if decidable:
                    alpha = self.budget.alpha_for(annotation.operator_index, index)
                    acc.confidence = new_confidence_state(alpha, n_total, self.cfg.cs_method, self.cfg.cs_grid_size)
                    self.alpha_created += alpha
            self.accumulators.append(acc)
            out.append(acc)
        return out

    def _fill_group_budget(self) -> None:
        """Bonferroni over groups once the group sort has counted them."""
        if not self.ctx.group_counts:
            return
        for operator in self.budget.operators:
            if operator.groups is None:
                operator.groups = len(self.ctx.group_counts)
                operator.rule = AllocationRule.BONFERRONI

    # ---------------------------------------------------------- group rows

    def _group_row(self, node: PhysicalAggregate, result: GroupResult) -> ExecRow:
        values: Dict[str, Any] = dict(zip(node.group_keys, result.key))
        for agg, annotation, acc in zip(node.aggs, node.annotations, result.accumulators):
            values[agg.out_name] = Resolved(value=acc.value, outcome=acc.outcome, hint=annotation.hint)
        self.ctx.stats.groups_processed += 1
        return ExecRow(values=values, origin=result)

    def _aggregate(self, node: PhysicalAggregate, items, results_log: List[GroupResult],
                   skips_source: bool = False) -> Iterator[ExecRow]:
        keys = node.group_keys
        on_resolved = None
        if skips_source and self.cfg.flags.early_stopping:
            on_resolved = self.ctx.resolved_groups.add
        results = streaming_group_aggregate(
            items,
            lambda key, index: self._new_accumulators(node, key, index),
            on_group_resolved=on_resolved,
        )
        if not keys:
            result = next(results, None)
            if result is None:
                result = GroupResult(key=(), index=1, accumulators=self._new_accumulators(node, (), 1))
                for acc in result.accumulators:
                    finalize(acc)
            results_log.append(result)
            yield self._group_row(node, result)
            return
        for result in results:
            results_log.append(result)
            yield self._group_row(node, result)

    def _first_aggregate(self, tuple_nodes, node: PhysicalAggregate) -> Iterator[ExecRow]:
        ctx = self.ctx
        batch_size = self.cfg.batch_size
        rows = [ExecRow.of(r) for r in self.relation.rows]
        pending = []
        for op in tuple_nodes:
            if isinstance(op, BREAKERS):
                rows = run_full(pending, rows, batch_size)
                pending = []
                rows = apply_breaker(op, rows, ctx)
            else:
                pending.append(make_stage(op, ctx))
        pending.append(ArgumentStage(ctx, node.aggs))
        self._fill_group_budget()

        keys = node.group_keys
        skip = None
        if self.cfg.flags.early_stopping:
            resolved = ctx.resolved_groups

            def skip(row: ExecRow) -> bool:
                if not resolved:
                    return False
                key = row.key(keys)
                return key is not None and key in resolved

        self.source = BatchSource(rows, batch_size, skip)

        def items():
            for batch in self.source:
                for row in run_stages(pending, batch):
                    ctx.stats.tuples_processed += 1
                    yield row.key(keys), row.row_id, row.args

        return self._aggregate(node, items(), self.first_results, skips_source=True)

    def _outer_aggregate(self, node: PhysicalAggregate, stream: Iterator[ExecRow]) -> Iterator[ExecRow]:
        def items():
            for index, row in enumerate(stream):
                args = [truthy(evaluate(a.arg, row.values)) for a in node.aggs]
                self.outer_inputs.append((row, args))
                yield row.key(node.group_keys), index, args

        return self._aggregate(node, items(), self.outer_results)

    # ---------------------------------------------------------- post-aggregate

    def _with_rank(self, node: WithRank, stream: Iterator[ExecRow]) -> Iterator[ExecRow]:
        rows = list(stream)
        values = [evaluate(node.expr, r.values) for r in rows]
        for row, rank in zip(rows, dense_rank(values, node.descending)):
            row.values[WithRank.out_name] = rank
            yield row

    def _check(self, node: Check, stream: Iterator[ExecRow]) -> bool:
        rows = list(stream)
        if not rows:
            self.notes.append("target missing")
            self.log.warning("check has no input rows; target missing")
            return False
        if len(rows) > 1:
            self.log.warning(f"check over {len(rows)} rows; taking the conjunction")
        return all(truthy(evaluate(node.expr, r.values)) for r in rows)

    # ---------------------------------------------------------- provenance

    def _provenance(self, value: bool) -> List[ProvToken]:
        structure = self.physical.structure
        if structure is None or not self.first_results:
            return []
        if isinstance(structure, SimpleStructure):
            return assemble(structure, self.first_results[0].accumulators[0].capture, value)
        if isinstance(structure, NestedStructure):
            groups = [
                GroupCapture(key=row.origin.key, stream=row.origin.accumulators[0].capture, outcome=args[0])
                for row, args in self.outer_inputs
            ]
            n_groups = self.outer_results[0].accumulators[0].n_total if self.outer_results else None
            return assemble(structure, groups, value, n_groups)
        if isinstance(structure, OrdinalStructure):
            capture = OrdinalCapture(
                groups={r.key: r.accumulators[0].capture for r in self.first_results},
                aggregate=structure.aggregate,
                target=tuple(structure.target_group),
            )
            return assemble(structure, capture, value)
        return []

    def _resolution(self) -> Resolution:
        if any(acc.resolved_by == ResolvedBy.ESTIMATE for acc in self.accumulators):
            return Resolution(kind=ResolutionKind.ESTIMATED, alpha_used=self.alpha_created)
        if any(acc.resolved_by in _DETERMINISTIC for acc in self.accumulators):
            return Resolution(kind=ResolutionKind.DETERMINISTIC)
        return Resolution(kind=ResolutionKind.FULL_SCAN)

    def _finish_stats(self, before, started: float) -> ExecutionStats:
        stats = self.ctx.stats
        used = self.oracle.ledger.since(before)
        stats.oracle_calls = used.calls
        stats.cache_hits = used.cache_hits
        stats.input_tokens = used.input_tokens
        stats.output_tokens = used.output_tokens
        stats.cost_usd = used.cost(self.rates) if self.rates is not None else 0.0
        stats.wall_time_s = time.perf_counter() - started
        stats.simulated_latency_s = used.calls * self.cfg.simulated_call_latency_s
        if self.source is not None:
            stats.tuples_skipped = self.source.skipped + self.source.untouched
        return stats

    # ---------------------------------------------------------- run

    def run(self) -> Verdict:
        if self.rates is None:
            self.rates = load_rate_table()
        started = time.perf_counter()
        before = self.oracle.ledger.snapshot()
        nodes = chain(self.physical.root)
        first = next((i for i, n in enumerate(nodes) if isinstance(n, PhysicalAggregate)), None)
        if first is None or not isinstance(nodes[-1], Check):
            raise ExecutionError("physical plan needs an aggregate and a final check")

        try:
            stream = self._first_aggregate(nodes[1:first], nodes[first])
            value = False
            for node in nodes[first + 1:]:
                if isinstance(node, PhysicalAggregate):
                    stream = self._outer_aggregate(node, stream)
                elif isinstance(node, WithRank):
                    stream = self._with_rank(node, stream)
                elif isinstance(node, Filter):
                    stream = self._filter_rows(node, stream)
                elif isinstance(node, Map):
                    stream = self._map_rows(node, stream)
                elif isinstance(node, Check):
                    value = self._check(node, stream)
                else:
                    raise ExecutionError(f"unexpected operator {type(node).__name__} above an aggregate")
        except OracleError as e:
            stats = self._finish_stats(before, started)
            self.log.error(f"oracle failure: {e}")
            raise ExecutionError(f"oracle failure: {e}", stats=stats) from e

        for acc in self.accumulators:
            self.notes.extend(w for w in acc.warnings if w not in self.notes)
        stats = self._finish_stats(before, started)
        verdict = Verdict(
            value=value,
            tokens=self._provenance(value),
            stats=stats,
            resolution=self._resolution(),
            formulas=dict(self.physical.formulas),
            notes=self.notes,
        )
        self.log.bind(calls=stats.oracle_calls, resolution=str(verdict.resolution)).info(
            f"verdict {verdict.value}"
        )
        return verdict

    @staticmethod
    def _filter_rows(node: Filter, stream: Iterator[ExecRow]) -> Iterator[ExecRow]:
        expr = node.expr
        for row in stream:
            if truthy(evaluate(expr, row.values)):
                yield row

    @staticmethod
    def _map_rows(node: Map, stream: Iterator[ExecRow]) -> Iterator[ExecRow]:
        for row in stream:
            row.values[node.out_name] = evaluate(node.expr, row.values)
            yield row


def execute(
    physical: PhysicalPlan,
    relation: Relation,
    oracle,
    cfg: Optional[EngineConfig] = None,
    rates: Optional[RateTable] = None,
) -> Verdict:
    """Execute an optimized plan and return the verdict with provenance."""
    return Executor(physical, relation, oracle, cfg, rates).run()
