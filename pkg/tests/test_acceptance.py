"""
Acceptance tests.
Property grids: optimized verdicts against full scans, provenance minimality,
budget arithmetic, ranking and the similarity prefilter. Full-size grids are
marked slow; the reduced grids always run.
"""
import itertools

import numpy as np
import pytest

from src.claims.models import ComparisonOp, NestedStructure, Quantifier, SimpleStructure
from src.claims.quantifiers import evaluate_quantifier, evaluate_structure
from src.dsl.compiler import render_program_text
from src.engine import EngineConfig, OptimizationFlags, dense_rank
from src.harness.pipeline import Verifier
from src.harness.synthetic import DINNER, LOCATION_RATES, SCHEMA, SINGLE_RATES, generate_dataset
from src.oracle import ScriptedBackend, SemanticOracle
from src.oracle.cache import PromptCache
from src.optimizer import SearchContext, build_search_spec
from src.provenance import GroupCapture, StreamCapture, assemble, brute_polynomial, check_minimal
from src.relation.embedder import get_embedder
from src.relation.ingest import ingest
from src.relation.models import Schema
from src.relevance.prefilter import similarity_prefilter
from src.stats.budget import allocate_budget


def _quantifiers(max_k):
    out = [Quantifier.exists(), Quantifier.forall()]
    for op in (ComparisonOp.GE, ComparisonOp.GT, ComparisonOp.LE, ComparisonOp.LT, ComparisonOp.EQ, ComparisonOp.NE):
        out.extend(Quantifier.cardinal(op, k) for k in range(max_k + 1))
    for op in (ComparisonOp.GT, ComparisonOp.GE, ComparisonOp.LT):
        out.extend(Quantifier.proportional(op, p) for p in (0.25, 0.5, 0.75))
    return out


def _columns(max_len):
    for n in range(1, max_len + 1):
        yield from itertools.product([False, True], repeat=n)


def _simple_case(q, column):
    structure = SimpleStructure(quantifier=q)
    value = evaluate_structure(structure, list(column))
    capture = StreamCapture(formula_id="f", n_total=len(column))
    for row_id, v in enumerate(column):
        capture.record(row_id, v)
    tokens = assemble(structure, capture, value)
    return check_minimal(tokens, brute_polynomial(structure, list(column), negate=not value))


def _nested_case(outer, inner, groups):
    structure = NestedStructure(outer=outer, group_keys=["g"], inner=inner)
    columns = {(f"g{i}",): list(col) for i, col in enumerate(groups)}
    value = evaluate_structure(structure, columns)
    captures, next_id = [], 0
    for key, column in columns.items():
        stream = StreamCapture(formula_id="f", n_total=len(column))
        for v in column:
            stream.record(next_id, v)
            next_id += 1
        captures.append(GroupCapture(key, stream, evaluate_quantifier(inner, column)))
    tokens = assemble(structure, captures, value, n_groups=len(captures))
    return check_minimal(tokens, brute_polynomial(structure, columns, negate=not value))


def _verdict_pairs(seed, single_size, per_location, loader):
    """(optimized, full scan, label) per claim of one generated suite."""
    schema = Schema.model_validate(SCHEMA)
    optimized = EngineConfig(batch_size=8, shuffle_seed=seed,
                             flags=OptimizationFlags().without("estimation", "similarity_filter"))
    full_scan = EngineConfig(batch_size=8, flags=OptimizationFlags.all_disabled())
    pairs = []
    plans = (("single", {"bistro": SINGLE_RATES}, single_size, False),
             ("multi", LOCATION_RATES, per_location, True))
    for name, rates, size, grouped in plans:
        records, claims, rules = generate_dataset(name, rates, size, seed, grouped)
        relation = ingest(records, schema)
        oracle = SemanticOracle(ScriptedBackend(rules), cache=PromptCache(), loader=loader)
        fast = Verifier(relation, oracle, optimized, loader)
        slow = Verifier(relation, oracle, full_scan, loader)
        for claim in claims:
            claim.program = render_program_text(claim)
            pairs.append((claim.id, fast.verify(claim).value, slow.verify(claim).value, claim.grounded))
        oracle.close()
    return pairs


class TestVerdictEquivalence:
    """Deterministic optimizations never change a verdict."""

    def test_reduced_suite(self, loader):
        pairs = _verdict_pairs(0, 60, 12, loader)
        assert len(pairs) > 20
        for claim_id, fast, slow, label in pairs:
            assert fast == slow, claim_id
            assert slow == label, claim_id

    @pytest.mark.slow
    def test_full_suite(self, loader):
        pairs = []
        for seed in range(6):
            pairs.extend(_verdict_pairs(seed, 200, 40, loader))
        assert len(pairs) >= 200
        assert all(fast == slow == label for _, fast, slow, label in pairs)


class TestProvenanceGrid:
    """Assembled explanations are monomials of the brute-force polynomial."""

    def test_simple_reduced(self):
        for column in _columns(6):
            for q in _quantifiers(3):
                assert _simple_case(q, column), (q, column)

    def test_nested_reduced(self):
        outers = [Quantifier.exists(), Quantifier.forall(), Quantifier.cardinal(ComparisonOp.GE, 2),
                  Quantifier.cardinal(ComparisonOp.LE, 1)]
        inners = [Quantifier.exists(), Quantifier.forall(), Quantifier.cardinal(ComparisonOp.GE, 2)]
        for sizes in ((2, 2), (1, 3), (2, 1, 2)):
            cells = [list(itertools.product([False, True], repeat=s)) for s in sizes]
            for groups in itertools.product(*cells):
                for outer in outers:
                    for inner in inners:
                        assert _nested_case(outer, inner, groups), (outer, inner, groups)

    @pytest.mark.slow
    def test_simple_full(self):
        cases = 0
        for column in _columns(10):
            for q in _quantifiers(5):
                assert _simple_case(q, column), (q, column)
                cases += 1
        assert cases >= 50000


class TestBudgetArithmetic:
    """The allocated α never exceeds the query α."""

    @pytest.mark.parametrize("alpha", [0.05, 0.1])
    def test_bonferroni(self, alpha):
        for o, a, g in itertools.product(range(1, 5), range(1, 5), range(1, 65)):
            plan = allocate_budget(alpha, [(a, g)] * o)
            spent = sum(plan.alpha_for(i, j) * a for i in range(o) for j in range(1, g + 1))
            assert spent <= alpha * (1 + 1e-12)

    def test_geometric(self):
        alpha = 0.05
        for o, a in itertools.product(range(1, 5), range(1, 5)):
            plan = allocate_budget(alpha, [(a, None)] * o)
            spent = sum(plan.alpha_for(i, j) * a for i in range(o) for j in range(1, 65))
            assert spent <= alpha * (1 + 1e-12)


class TestRankOracle:
    """dense_rank against a counting oracle."""

    @staticmethod
    def _oracle(values):
        return [1 + len({w for w in values if w > v}) for v in values]

    def _check(self, lists):
        rng = np.random.default_rng(17)
        for _ in range(lists):
            values = rng.integers(0, 6, size=rng.integers(1, 12)).tolist()
            assert dense_rank(values) == self._oracle(values)

    def test_reduced(self):
        self._check(1000)

    @pytest.mark.slow
    def test_full(self):
        self._check(10000)


class TestPrefilterRecall:
    """The similarity prefilter keeps the rows the filter would accept."""

    def test_dinner_scope(self, suite_dir, loader):
        from src.harness.pipeline import load_dataset
        from src.oracle.backends import ScriptedRules

        dataset = load_dataset(suite_dir / "single", loader)
        rules = ScriptedRules.load(dataset.rules_path)
        oracle = SemanticOracle(ScriptedBackend(rules), cache=PromptCache(), loader=loader)
        embedder = get_embedder(dataset.relation.embedder_name, dataset.relation.dimension)
        spec = build_search_spec(SearchContext(primary_prompt=DINNER.template, aggregate="filter",
                                               attribute="review"), oracle, embedder)
        oracle.close()
        rule = rules.semantic_rule(DINNER.template)
        accepted = [row for row in dataset.relation.rows if rule.evaluate(row.attrs)]
        kept = [row for row in accepted if similarity_prefilter(row, spec, 0.15, attribute="review")]
        assert accepted
        assert len(kept) / len(accepted) >= 0.97
