"""
Optimizer tests.
Tests for hint extraction, fusion, strategy choice, operator placement and search specs.
"""
import pytest

from src.claims.models import Comparison, ComparisonOp
from src.dsl import chain, parse
from src.engine import EngineConfig, OptimizationFlags
from src.optimizer import (
    CountScan,
    FusedSemantic,
    GroupSort,
    Optimizer,
    PhysicalAggregate,
    RelevanceSort,
    SearchContext,
    SearchSpecBuilder,
    Shuffle,
    SimilarityPrefilter,
    Strategy,
    TotalSource,
    build_search_spec,
    explain,
    extract_hint,
    fuse_semantic,
)
from conftest import COMPLAINT, DINNER, PRAISE

EXISTS_COMPLAINT = f'df.aggregate([bool_or(prompt("{COMPLAINT}")).alias("any")]).check(col("any"))'
ALL_PRAISE = f'df.aggregate([bool_and(prompt("{PRAISE}")).alias("all")]).check(col("all"))'
TWO_MAPS = (
    f'df.map(prompt("{DINNER}", bool).alias("d"))\n'
    f'.map(prompt("{PRAISE}", bool).alias("p"))\n'
    '.aggregate([count_if(col("d") & col("p")).alias("n")])\n'
    '.check(col("n") >= 5)'
)
SPLIT_MAPS = (
    f'df.map(prompt("{DINNER}", bool).alias("d"))\n'
    '.filter(col("stars") >= 3)\n'
    f'.map(prompt("{PRAISE}", bool).alias("p"))\n'
    '.aggregate([count_if(col("d") & col("p")).alias("n")])\n'
    '.check(col("n") >= 1)'
)
TWO_FILTERS = (
    f'df.filter(prompt("{DINNER}"))\n'
    f'.filter(prompt("{PRAISE}"))\n'
    f'.aggregate([bool_or(prompt("{COMPLAINT}")).alias("any")])\n'
    '.check(col("any"))'
)
EVERY_LOCATION_PRAISED = (
    f'df.aggregate([count_if(prompt("{PRAISE}")).alias("n")], group_by=[col("business")])\n'
    '.aggregate([bool_and(col("n") >= 1).alias("all")])\n'
    '.check(col("all"))'
)
MOST_COMPLAINTS = (
    f'df.aggregate([count_if(prompt("{COMPLAINT}")).alias("score")], group_by=[col("business")])\n'
    '.with_rank(col("score"))\n'
    '.filter(col("business").eq("loc_a"))\n'
    '.check(col("rank").eq(1))'
)


def _physical(program, cfg, schema, oracle=None):
    return Optimizer(cfg, schema, oracle).optimize(parse(program, schema))


def _kinds(physical):
    return [type(n) for n in chain(physical.root)]


class TestHints:
    """Tests for pushing comparisons down into aggregates."""

    def test_count_hint_from_check(self):
        nodes = chain(parse(
            f'df.aggregate([count_if(prompt("{COMPLAINT}")).alias("c")]).check(col("c") >= 2)'))
        assert extract_hint(nodes[1].aggs[0], nodes[2]) == Comparison(op=ComparisonOp.GE, threshold=2)

    def test_quantifiers_take_no_hint(self):
        nodes = chain(parse(EXISTS_COMPLAINT))
        assert extract_hint(nodes[1].aggs[0], nodes[2]) is None

    def test_hint_from_outer_aggregate(self):
        nodes = chain(parse(EVERY_LOCATION_PRAISED))
        assert extract_hint(nodes[1].aggs[0], nodes[2]) == Comparison(op=ComparisonOp.GE, threshold=1)


class TestFusion:
    """Tests for fusing adjacent semantic operators."""

    def test_adjacent_maps_fuse(self):
        nodes = chain(parse(TWO_MAPS))[1:3]
        fused = fuse_semantic(nodes)
        assert len(fused) == 1
        assert isinstance(fused[0], FusedSemantic)
        assert [p.out_name for p in fused[0].parts] == ["d", "p"]
        assert not fused[0].has_filter

    def test_single_operator_untouched(self):
        nodes = chain(parse(TWO_MAPS))[1:2]
        assert fuse_semantic(nodes) == list(nodes)

    def test_symbolic_filter_breaks_run(self):
        nodes = chain(parse(SPLIT_MAPS))[1:4]
        assert len(nodes) == 3
        assert not any(isinstance(n, FusedSemantic) for n in fuse_semantic(nodes))


class TestStrategy:
    """Tests for the per-aggregate strategy table."""

    @pytest.fixture
    def optimizer(self):
        return Optimizer(EngineConfig())

    @pytest.mark.parametrize("fn,hint,has_total,innermost,expected", [
        ("bool_or", None, False, True, Strategy.RELEVANCE),
        ("bool_or", None, True, False, Strategy.ESTIMATION),
        ("bool_or", None, False, False, Strategy.NONE),
        ("bool_and", None, True, True, Strategy.ESTIMATION),
        ("proportion", Comparison(op=ComparisonOp.GT, threshold=0.5), True, True, Strategy.ESTIMATION),
        ("count_if", Comparison(op=ComparisonOp.GE, threshold=2), True, True, Strategy.RELEVANCE),
        ("count_if", Comparison(op=ComparisonOp.GE, threshold=50), True, True, Strategy.ESTIMATION),
        ("count_if", Comparison(op=ComparisonOp.GE, threshold=50), False, True, Strategy.RELEVANCE),
        ("count_if", Comparison(op=ComparisonOp.LE, threshold=3), True, True, Strategy.ESTIMATION),
        ("count_if", Comparison(op=ComparisonOp.LE, threshold=3), False, True, Strategy.NONE),
        ("count_if", None, True, True, Strategy.ESTIMATION),
    ])
    def test_table(self, optimizer, fn, hint, has_total, innermost, expected):
        assert optimizer.choose_strategy(fn, hint, has_total, innermost, traceable=True) == expected

    def test_untraceable_falls_back(self, optimizer):
        assert optimizer.choose_strategy("bool_or", None, True, True, traceable=False) == Strategy.ESTIMATION

    def test_no_early_stopping(self):
        optimizer = Optimizer(EngineConfig(flags=OptimizationFlags.all_disabled()))
        assert optimizer.choose_strategy("bool_or", None, True, True, True) == Strategy.NONE

    def test_no_relevance_sorting(self):
        flags = OptimizationFlags().without("relevance_sorting")
        optimizer = Optimizer(EngineConfig(flags=flags))
        assert optimizer.choose_strategy("bool_or", None, True, True, True) == Strategy.ESTIMATION

    def test_unknown_flag(self):
        with pytest.raises(ValueError):
            OptimizationFlags().without("telepathy")


class TestPlacement:
    """Tests for inserted physical operators."""

    def test_exists_plan(self, oracle, engine_cfg, review_schema):
        physical = _physical(EXISTS_COMPLAINT, engine_cfg, review_schema, oracle)
        kinds = _kinds(physical)
        assert RelevanceSort in kinds and CountScan in kinds
        assert Shuffle not in kinds
        aggregate = next(n for n in chain(physical.root) if isinstance(n, PhysicalAggregate))
        assert aggregate.totals == TotalSource.COUNT_SCAN
        assert aggregate.annotations[0].strategy == Strategy.RELEVANCE
        assert physical.text_attribute == "review"

    def test_estimation_inserts_shuffle(self, oracle, engine_cfg, review_schema):
        physical = _physical(ALL_PRAISE, engine_cfg, review_schema, oracle)
        kinds = _kinds(physical)
        assert Shuffle in kinds
        assert RelevanceSort not in kinds
        annotation = next(a for _, a in physical.annotations())
        assert annotation.strategy == Strategy.ESTIMATION
        assert annotation.operator_index == 0
        assert physical.budget.alpha_for(0, 1) == pytest.approx(engine_cfg.alpha)

    def test_fused_filter_blocks_count_scan(self, oracle, engine_cfg, review_schema):
        physical = _physical(TWO_FILTERS, engine_cfg, review_schema, oracle)
        kinds = _kinds(physical)
        assert FusedSemantic in kinds
        assert CountScan not in kinds
        assert kinds.index(SimilarityPrefilter) < kinds.index(FusedSemantic)

    def test_unfused_filters_get_prefilters(self, oracle, review_schema):
        cfg = EngineConfig(flags=OptimizationFlags().without("fusion"))
        kinds = _kinds(_physical(TWO_FILTERS, cfg, review_schema, oracle))
        assert kinds.count(SimilarityPrefilter) == 2
        # counted above the last filter, right below the aggregate
        assert kinds.index(CountScan) == len(kinds) - 3

    def test_grouped_plan(self, oracle, engine_cfg, review_schema):
        physical = _physical(EVERY_LOCATION_PRAISED, engine_cfg, review_schema, oracle)
        nodes = chain(physical.root)
        sort = next(n for n in nodes if isinstance(n, GroupSort))
        shuffle = next(n for n in nodes if isinstance(n, Shuffle))
        assert sort.keys == ("business",) and sort.exact_counts
        assert shuffle.hierarchical and not shuffle.shuffle_within
        assert nodes.index(sort) < nodes.index(shuffle)
        inner, outer = [n for n in nodes if isinstance(n, PhysicalAggregate)]
        assert inner.totals == TotalSource.GROUP_SORT
        assert outer.totals == TotalSource.GROUPS
        assert outer.annotations[0].strategy == Strategy.ESTIMATION

    def test_ordinal_plan_spends_no_alpha(self, oracle, engine_cfg, review_schema):
        physical = _physical(MOST_COMPLAINTS, engine_cfg, review_schema, oracle)
        nodes = chain(physical.root)
        shuffle = next(n for n in nodes if isinstance(n, Shuffle))
        assert shuffle.hierarchical and shuffle.keys == ("business",)
        annotation = next(a for _, a in physical.annotations())
        assert annotation.strategy == Strategy.ESTIMATION
        assert annotation.hint is None and annotation.operator_index is None
        assert physical.budget.operators == []
        text = explain(physical)
        assert "stops=never" in text and "alpha=" not in text

    def test_all_disabled_is_plain(self, review_schema):
        cfg = EngineConfig(flags=OptimizationFlags.all_disabled())
        kinds = _kinds(_physical(TWO_FILTERS, cfg, review_schema))
        for inserted in (CountScan, Shuffle, RelevanceSort, SimilarityPrefilter, FusedSemantic):
            assert inserted not in kinds

    def test_explain(self, oracle, engine_cfg, review_schema):
        text = explain(_physical(ALL_PRAISE, engine_cfg, review_schema, oracle))
        lines = text.splitlines()
        assert lines[0] == "df"
        assert any(line.startswith("Shuffle(seed=") for line in lines)
        assert "strategy=estimation" in text
        assert "alpha=0.05" in text
        assert lines[-1].startswith("check(")


class TestSearchSpec:
    """Tests for retrieval hints."""

    def test_scripted_spec(self, oracle, engine_cfg, review_schema):
        physical = _physical(EXISTS_COMPLAINT, engine_cfg, review_schema, oracle)
        sort = next(n for n in chain(physical.root) if isinstance(n, RelevanceSort))
        assert sort.spec.query == "poor service complaints"
        assert "rude" in sort.spec.inclusion_keywords
        assert sort.attribute == "review"

    def test_fallback_after_failures(self, oracle):
        context = SearchContext(primary_prompt="Does the {review} mention parking?", attribute="review")
        spec = build_search_spec(context, oracle)
        assert spec.query == "Does the {review} mention parking?"
        assert spec.inclusion_keywords == ()

    def test_no_oracle_uses_prompts(self):
        context = SearchContext(primary_prompt="p1", filter_prompts=("p2",))
        assert build_search_spec(context).query == "p1 p2"

    def test_memoized(self, oracle):
        builder = SearchSpecBuilder(oracle)
        context = SearchContext(primary_prompt=COMPLAINT, attribute="review")
        first = builder(context)
        second = builder(context)
        assert first is second
        assert len(builder) == 1
        assert oracle.ledger.calls == 1
