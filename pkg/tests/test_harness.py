"""
Harness tests.
Tests for metrics, the synthetic suite, benchmark runs, replay and ablation.
"""
import pytest
import yaml

from src.claims.loader import load_claims
from src.engine import EngineConfig, OptimizationFlags
from src.harness.bench import ablation_configs, run_ablation, run_bench
from src.harness.metrics import (
    ablation_multipliers,
    classification_metrics,
    confusion,
    multiplier,
    summarize,
    trial_metrics,
)
from src.harness.models import ClaimRow, Metrics, MetricSpread
from src.harness.pipeline import Verifier, load_dataset
from src.harness.report import load_run_report, render_ablation, render_summary, write_report
from src.harness.synthetic import claim_type, generate_suite
from src.common.errors import VerificationError
from src.oracle import ScriptedBackend, ScriptedRules, SemanticOracle
from src.oracle.cache import PromptCache

CLAIM_TYPES = {"existential", "universal", "cardinal", "proportional", "ordinal", "nested"}


@pytest.fixture(scope="module")
def datasets(suite_dir):
    return [load_dataset(suite_dir / "single"), load_dataset(suite_dir / "multi")]


@pytest.fixture
def oracle_for(loader):
    """Scripted oracle over a dataset's own rule table."""
    def make(dataset):
        return SemanticOracle(ScriptedBackend(ScriptedRules.load(dataset.rules_path)), cache=PromptCache(),
                              loader=loader)
    return make


def _row(verdict, grounded, **kwargs):
    return ClaimRow(dataset="d", claim_id="c", text="t", verdict=verdict, grounded=grounded, **kwargs)


class TestMetrics:
    """Tests for classification metrics with ungrounded claims as positives."""

    def test_half_right(self):
        scores = classification_metrics([True, True, False, False], [True, False, True, False])
        assert scores == {"precision": 0.5, "recall": 0.5, "f1": 0.5, "accuracy": 0.5}

    def test_confusion(self):
        c = confusion([True, True, False], [True, False, False])
        assert (c.tp, c.fp, c.tn, c.fn) == (1, 1, 1, 0)
        with pytest.raises(ValueError):
            confusion([True], [])

    def test_empty_denominators(self):
        scores = classification_metrics([False, False], [False, False])
        assert scores["precision"] == 0.0 and scores["recall"] == 0.0
        assert scores["accuracy"] == 1.0

    def test_trial_metrics_flip_polarity(self):
        rows = [
            _row(False, False, oracle_calls=10),
            _row(True, True, oracle_calls=4),
            _row(True, False, oracle_calls=6),
            _row(None, True, error="ExecutionError: boom"),
        ]
        metrics = trial_metrics(rows)
        assert metrics.precision == 1.0
        assert metrics.recall == 0.5
        assert metrics.accuracy == pytest.approx(2 / 3)
        assert metrics.total_oracle_calls == 20
        assert metrics.errors == 1

    def test_summarize(self):
        summary = summarize([Metrics(f1=0.5), Metrics(f1=0.7)])
        assert summary["f1"].mean == pytest.approx(0.6)
        assert (summary["f1"].min, summary["f1"].max) == (0.5, 0.7)
        assert summarize([]) == {}

    def test_multipliers(self):
        assert multiplier(3.0, 0.0) is None
        summaries = {
            "full": {"total_oracle_calls": MetricSpread(mean=100, min=100, max=100)},
            "none": {"total_oracle_calls": MetricSpread(mean=450, min=400, max=500)},
        }
        table = ablation_multipliers(summaries, fields=("total_oracle_calls",))
        assert table == {"full": {"total_oracle_calls": 1.0}, "none": {"total_oracle_calls": 4.5}}


class TestSynthetic:
    """Tests for the generated evaluation suite."""

    def test_files(self, suite_dir):
        for name in ("single", "multi"):
            for file in ("records.jsonl", "schema.yaml", "rules.yaml", "claims.yaml", "response.txt"):
                assert (suite_dir / name / file).exists()

    def test_covers_every_claim_type(self, suite_dir):
        claims = load_claims(suite_dir / "single" / "claims.yaml") + load_claims(suite_dir / "multi" / "claims.yaml")
        assert {claim_type(c) for c in claims} == CLAIM_TYPES
        assert {c.grounded for c in claims} == {True, False}
        assert len({c.id for c in claims}) == len(claims)

    def test_same_seed_same_suite(self, tmp_path):
        first = generate_suite(tmp_path / "a", seed=3, single_size=40, per_location=10)
        second = generate_suite(tmp_path / "b", seed=3, single_size=40, per_location=10)
        for a, b in zip(first, second):
            assert (a / "records.jsonl").read_text() == (b / "records.jsonl").read_text()
            assert (a / "claims.yaml").read_text() == (b / "claims.yaml").read_text()

    def test_rules_compile_every_claim(self, suite_dir):
        rules = yaml.safe_load((suite_dir / "single" / "rules.yaml").read_text(encoding="utf-8"))
        claims = load_claims(suite_dir / "single" / "claims.yaml")
        assert set(rules["text"]["compile"]["responses"]) == {c.text for c in claims}


class TestBench:
    """Tests for benchmark runs against the scripted oracle."""

    def test_verifier_compiles_and_verifies(self, datasets, oracle_for):
        dataset = datasets[0]
        oracle = oracle_for(dataset)
        verifier = Verifier(dataset.relation, oracle, EngineConfig())
        claim = dataset.claims[0]
        verdict = verifier.verify(claim)
        oracle.close()
        assert verdict.value == claim.grounded

    def test_run_without_errors(self, datasets):
        report = run_bench(datasets, EngineConfig(), backend="scripted")
        metrics = report.trials[0].metrics
        assert metrics.errors == 0
        assert metrics.accuracy >= 0.9
        assert report.config["datasets"] == ["single", "multi"]
        assert {r.claim_type for r in report.trials[0].rows} == CLAIM_TYPES
        # ordinal claims never estimate
        ordinal = [r for r in report.trials[0].rows if r.claim_type == "ordinal"]
        assert ordinal and all(r.verdict == r.grounded for r in ordinal)

    def test_deterministic_config_matches_every_label(self, datasets):
        cfg = EngineConfig(flags=OptimizationFlags().without("estimation", "similarity_filter"))
        report = run_bench(datasets, cfg, backend="scripted")
        rows = report.trials[0].rows
        assert report.trials[0].metrics.accuracy == 1.0
        for kind in CLAIM_TYPES:
            typed = [r for r in rows if r.claim_type == kind]
            assert typed, kind
            assert all(r.verdict == r.grounded for r in typed), kind

    def test_replay_makes_no_calls(self, datasets, tmp_path):
        recorded = run_bench(datasets[:1], EngineConfig(), cache_root=tmp_path, fresh_cache=False,
                             backend="scripted")
        replayed = run_bench(datasets[:1], EngineConfig(), cache_root=tmp_path, fresh_cache=False,
                             backend="replay")
        assert recorded.summary["total_oracle_calls"].mean > 0
        assert replayed.summary["total_oracle_calls"].mean == 0
        assert replayed.trials[0].metrics.errors == 0
        assert [r.verdict for r in replayed.trials[0].rows] == [r.verdict for r in recorded.trials[0].rows]

    def test_deterministic_reports(self, datasets):
        cfg = EngineConfig(shuffle_seed=5)
        first = run_bench(datasets[:1], cfg, backend="scripted")
        second = run_bench(datasets[:1], cfg, backend="scripted")
        assert first.deterministic() == second.deterministic()

    def test_trials_use_consecutive_seeds(self, datasets):
        report = run_bench(datasets[:1], EngineConfig(shuffle_seed=2), trials=2, backend="scripted")
        assert [t.seed for t in report.trials] == [2, 3]
        assert report.config["seeds"] == [2, 3]
        assert report.summary["f1"].min <= report.summary["f1"].mean <= report.summary["f1"].max

    def test_report_round_trip(self, datasets, tmp_path):
        report = run_bench(datasets[:1], EngineConfig(), backend="scripted")
        loaded = load_run_report(write_report(report, tmp_path / "report.json"))
        assert loaded.deterministic() == report.deterministic()
        assert "accuracy" in render_summary(loaded)


class TestAblation:
    """Tests for leave-one-out configurations."""

    def test_configs(self):
        configs = ablation_configs(EngineConfig(), ["fusion", "all"])
        assert list(configs) == ["full", "no_fusion", "none"]
        assert not configs["no_fusion"].flags.fusion
        assert not any(configs["none"].flags.enabled())

    def test_unknown_flag(self):
        with pytest.raises(VerificationError):
            ablation_configs(EngineConfig(), ["telepathy"])

    @pytest.mark.slow
    def test_optimizations_save_calls(self, datasets):
        report = run_ablation(datasets[:1], ["all"], EngineConfig(), backend="scripted")
        assert report.multipliers["full"]["total_oracle_calls"] == 1.0
        assert report.multipliers["none"]["total_oracle_calls"] >= 2.0
        full, none = report.runs["full"].trials[0].rows, report.runs["none"].trials[0].rows
        assert sum(r.verdict == r.grounded for r in none) == len(none)
        assert sum(r.verdict == r.grounded for r in full) >= 0.8 * len(full)
        assert "none" in render_ablation(report)
