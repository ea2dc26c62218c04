"""
Statistics tests.
Tests for budget allocation, confidence sequences, stopping rules and shuffling.
"""
import numpy as np
import pytest

from src.claims.models import Comparison, ComparisonOp
from src.common.errors import InvariantError, NeedsTotalError
from src.stats.budget import allocate_budget
from src.stats.confidence import (
    BettingConfidenceSequence,
    ConfidenceState,
    HoeffdingConfidenceSequence,
    cs_update,
    new_confidence_state,
)
from src.stats.models import AllocationRule, CSMethod, CSMode
from src.stats.resolve import cs_resolve
from src.stats.shuffle import contiguous_blocks, shuffle


def _interval(lower, upper, n_total=None):
    return ConfidenceState(alpha=0.05, n_total=n_total, lower=lower, upper=upper)


class TestBudget:
    """Tests for family-wise error allocation."""

    def test_known_groups(self):
        plan = allocate_budget(0.05, [(1, 4)])
        assert plan.operators[0].rule == AllocationRule.BONFERRONI
        for group in range(1, 5):
            assert plan.alpha_for(0, group) == pytest.approx(0.0125)
        assert plan.total_allocated() == pytest.approx(0.05)

    def test_unknown_groups_geometric(self):
        plan = allocate_budget(0.05, [(1, None)])
        assert plan.operators[0].rule == AllocationRule.GEOMETRIC
        assert plan.alpha_for(0, 3) == pytest.approx(0.00625)
        assert plan.alpha_for(0, 1) == pytest.approx(0.025)

    def test_two_operators_two_accumulators(self):
        plan = allocate_budget(0.05, [(2, 1), (2, 1)])
        assert plan.alpha_for(1) == pytest.approx(0.0125)
        assert plan.total_allocated() <= 0.05 + 1e-12


class TestConfidenceSequence:
    """Tests for betting and Hoeffding confidence sequences."""

    def test_no_data(self):
        state = new_confidence_state(0.05)
        assert state.interval == (0.0, 1.0)
        assert state.mode == CSMode.WITH_REPLACEMENT

    def test_monotone_shrinking(self):
        state = new_confidence_state(0.05, grid_size=200)
        rng = np.random.default_rng(7)
        previous = state.interval
        for x in rng.random(150) < 0.7:
            cs_update(state, bool(x))
            assert state.lower >= previous[0] - 1e-12
            assert state.upper <= previous[1] + 1e-12
            previous = state.interval
        assert state.upper - state.lower < 1.0

    def test_all_positive_excludes_half(self):
        state = new_confidence_state(0.05, grid_size=200)
        for _ in range(200):
            cs_update(state, True)
        assert state.lower > 0.5

    def test_without_replacement_collapses(self):
        state = new_confidence_state(0.05, n_total=10, grid_size=100)
        assert state.mode == CSMode.WITHOUT_REPLACEMENT
        stream = [True, False, True, True, False, False, True, False, True, True]
        for x in stream:
            cs_update(state, x)
        assert state.lower == pytest.approx(0.6)
        assert state.upper == pytest.approx(0.6)

    def test_update_beyond_population(self):
        state = new_confidence_state(0.05, n_total=2, grid_size=50)
        cs_update(state, True)
        cs_update(state, True)
        with pytest.raises(InvariantError):
            cs_update(state, True)

    def test_update_after_finalize(self):
        state = new_confidence_state(0.05)
        state.finalize()
        with pytest.raises(InvariantError):
            cs_update(state, True)

    def test_hoeffding_shrinks(self):
        state = new_confidence_state(0.05, method=CSMethod.HOEFFDING)
        for _ in range(300):
            cs_update(state, True)
        assert 0.0 < state.lower <= 1.0
        assert state.upper == pytest.approx(1.0)

    def test_invalid_alpha(self):
        with pytest.raises(ValueError):
            new_confidence_state(0.0)


def _stream(method, mu, alpha, runs, length, grid, seed):
    """Run `runs` parallel Bernoulli(mu) streams; returns (missed, lower, upper)."""
    if method == CSMethod.BETTING:
        cs = BettingConfidenceSequence(alpha, grid_size=grid, batch_shape=(runs,))
    else:
        cs = HoeffdingConfidenceSequence(alpha, batch_shape=(runs,))
    rng = np.random.default_rng(seed)
    missed = np.zeros(runs, dtype=bool)
    for _ in range(length):
        cs.update((rng.random(runs) < mu).astype(float))
        missed |= (mu < cs.lower - 1e-9) | (mu > cs.upper + 1e-9)
    return missed, cs.lower, cs.upper


def _truth(comparison, mu, epsilon):
    if comparison.op in (ComparisonOp.EQ, ComparisonOp.NE):
        inside = comparison.threshold * (1 - epsilon) <= mu <= comparison.threshold * (1 + epsilon)
        return inside if comparison.op == ComparisonOp.EQ else not inside
    return comparison.holds(mu)


def _check_cell(method, mu, alpha, runs, length, grid, seed=0, epsilon=0.05):
    missed, lower, upper = _stream(method, mu, alpha, runs, length, grid, seed)
    bound = alpha + 3 * np.sqrt(alpha / runs)
    assert missed.mean() <= bound, (method, mu, alpha, missed.mean())
    # intervals only shrink, so the final interval carries the first decision of every run
    for op in ComparisonOp:
        for rho in (mu / 2, mu, (1 + mu) / 2):
            comparison = Comparison(op=op, threshold=rho)
            truth = _truth(comparison, mu, epsilon)
            wrong = 0
            for lo, hi in zip(lower, upper):
                decision = cs_resolve(_interval(float(lo), float(hi)), comparison, epsilon=epsilon)
                wrong += decision is not None and decision != truth
            assert wrong / runs <= bound, (method, mu, alpha, op, rho, wrong)


class TestMonteCarlo:
    """Anytime coverage and wrong-verdict rates over a μ × α grid."""

    @pytest.mark.parametrize("method", [CSMethod.BETTING, CSMethod.HOEFFDING])
    @pytest.mark.parametrize("mu", [0.05, 0.5, 0.95])
    def test_reduced_grid(self, method, mu):
        _check_cell(method, mu, 0.05, runs=300, length=300, grid=200, seed=3)

    @pytest.mark.slow
    @pytest.mark.parametrize("method", [CSMethod.BETTING, CSMethod.HOEFFDING])
    @pytest.mark.parametrize("alpha", [0.05, 0.0125])
    @pytest.mark.parametrize("mu", [0.05, 0.3, 0.5, 0.7, 0.95])
    def test_full_grid(self, method, mu, alpha):
        _check_cell(method, mu, alpha, runs=2000, length=2000, grid=400, seed=11)

    @pytest.mark.parametrize("share", [0.1, 0.5, 0.8])
    def test_without_replacement_never_wider(self, share):
        population, runs, grid = 300, 40, 200
        rng = np.random.default_rng(5)
        base = np.zeros(population)
        base[: int(share * population)] = 1.0
        streams = np.stack([rng.permutation(base) for _ in range(runs)])
        wor = BettingConfidenceSequence(0.05, n_total=population, grid_size=grid, batch_shape=(runs,))
        wr = BettingConfidenceSequence(0.05, grid_size=grid, batch_shape=(runs,))
        for s in range(population):
            wor.update(streams[:, s])
            wr.update(streams[:, s])
            assert np.all((wor.upper - wor.lower) <= (wr.upper - wr.lower) + 2.0 / grid + 1e-12)
        assert np.allclose(wor.lower, share) and np.allclose(wor.upper, share)


class TestResolve:
    """Tests for stopping rules over confidence intervals."""

    def test_ge_resolves_true(self):
        assert cs_resolve(_interval(0.62, 0.91), Comparison(op=ComparisonOp.GE, threshold=0.5)) is True

    def test_ge_straddles(self):
        assert cs_resolve(_interval(0.4, 0.6), Comparison(op=ComparisonOp.GE, threshold=0.5)) is None

    def test_le_resolves_false(self):
        assert cs_resolve(_interval(0.62, 0.91), Comparison(op=ComparisonOp.LE, threshold=0.5)) is False

    def test_eq_within_tolerance(self):
        state = _interval(0.48, 0.52)
        assert cs_resolve(state, Comparison(op=ComparisonOp.EQ, threshold=0.5), epsilon=0.05) is True
        assert cs_resolve(state, Comparison(op=ComparisonOp.NE, threshold=0.5), epsilon=0.05) is False

    def test_eq_disjoint(self):
        state = _interval(0.7, 0.8)
        assert cs_resolve(state, Comparison(op=ComparisonOp.EQ, threshold=0.5), epsilon=0.05) is False

    def test_bool_or_refuted(self):
        assert cs_resolve(_interval(0.0, 0.008, n_total=100), None, fn="bool_or") is False

    def test_bool_or_confirmed(self):
        assert cs_resolve(_interval(0.02, 0.3, n_total=100), None, fn="bool_or") is True

    def test_bool_or_needs_total(self):
        with pytest.raises(NeedsTotalError):
            cs_resolve(_interval(0.0, 0.5), None, fn="bool_or")

    def test_bool_and_confirm_only(self):
        assert cs_resolve(_interval(0.97, 1.0), None, epsilon=0.05, fn="bool_and") is True
        assert cs_resolve(_interval(0.0, 0.2), None, epsilon=0.05, fn="bool_and") is None

    def test_count_rescaled(self):
        state = _interval(0.3, 0.4, n_total=100)
        assert cs_resolve(state, Comparison(op=ComparisonOp.GE, threshold=50), fn="count") is False


class TestShuffle:
    """Tests for seeded permutations."""

    def test_same_seed_same_order(self):
        items = list(range(50))
        assert shuffle(items, 3) == shuffle(items, 3)
        assert sorted(shuffle(items, 3)) == items
        assert shuffle(items, 3) != shuffle(items, 4)

    def test_hierarchical_keeps_blocks(self):
        items = [("a", i) for i in range(5)] + [("b", i) for i in range(5)] + [("c", i) for i in range(5)]
        out = shuffle(items, 1, hierarchical=True, key=lambda item: item[0])
        blocks = contiguous_blocks(out, lambda item: item[0])
        assert sorted(len(b) for b in blocks) == [5, 5, 5]
        assert sorted(out) == sorted(items)

    def test_hierarchical_without_inner_shuffle(self):
        items = [("a", i) for i in range(4)] + [("b", i) for i in range(4)]
        out = shuffle(items, 2, hierarchical=True, key=lambda item: item[0], shuffle_within=False)
        for block in contiguous_blocks(out, lambda item: item[0]):
            assert [i for _, i in block] == [0, 1, 2, 3]

    def test_hierarchical_needs_key(self):
        with pytest.raises(ValueError):
            shuffle([1, 2], 0, hierarchical=True)

    def test_reappearing_key(self):
        with pytest.raises(InvariantError):
            contiguous_blocks(["a", "b", "a"], lambda x: x)
