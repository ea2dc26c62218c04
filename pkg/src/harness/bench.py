"""
Benchmark runner - 基准与消融

每个 trial 执行所有数据集的全部声明; 指标按 trial 计算后汇总为
均值与 [min, max]. 消融模式逐一关闭优化开关 (或全部关闭), 给出
相对完整配置的调用数, 成本和延迟倍数.
"""
import tempfile
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

from loguru import logger

from src.claims.models import Claim
from src.common.config_loader import ConfigLoader, get_config_loader
from src.common.errors import ExecutionError, VerificationError
from src.engine.config import FLAG_NAMES, EngineConfig
from src.oracle.factory import build_oracle, get_backend
from src.oracle.models import RateTable, load_rate_table
from src.oracle.oracle import SemanticOracle
from .metrics import ablation_multipliers, summarize, trial_metrics
from .models import AblationReport, ClaimRow, Dataset, RunReport, TrialResult
from .pipeline import Verifier
from .synthetic import claim_type

OracleFactory = Callable[[Dataset, Optional[Path]], SemanticOracle]


def oracle_factory(
    backend: Optional[str] = None,
    caching: bool = True,
    max_concurrency: int = 32,
    loader: Optional[ConfigLoader] = None,
) -> OracleFactory:
    """Builds one oracle per dataset; the scripted backend reads the dataset's rule table."""
    loader = loader or get_config_loader()
    settings = loader.load_settings().get("oracle", {})

    def make(dataset: Dataset, cache_dir: Optional[Path]) -> SemanticOracle:
        kind = get_backend(settings, backend, dataset.rules_path, loader)
        return build_oracle(kind, cache_dir=cache_dir, caching=caching,
                            max_concurrency=max_concurrency, loader=loader)

    return make


def _claim_row(dataset: Dataset, claim: Claim, verifier: Verifier) -> ClaimRow:
    row = ClaimRow(
        dataset=dataset.name,
        claim_id=claim.id,
        claim_type=claim_type(claim) if claim.structure is not None else "",
        text=claim.text,
        grounded=claim.grounded,
    )
    try:
        verdict = verifier.verify(claim)
    except VerificationError as e:
        logger.bind(claim=claim.id).warning(f"claim failed: {e}")
        row.error = f"{type(e).__name__}: {e}"
        stats = e.stats if isinstance(e, ExecutionError) else None
        if stats is not None:
            row.oracle_calls = stats.oracle_calls
            row.cache_hits = stats.cache_hits
        return row
    stats = verdict.stats
    row.verdict = verdict.value
    row.resolution = str(verdict.resolution)
    row.tokens_cited = len(verdict.tokens)
    row.oracle_calls = stats.oracle_calls
    row.cache_hits = stats.cache_hits
    row.cost_usd = stats.cost_usd
    row.latency_s = stats.latency_s
    row.simulated_latency_s = stats.simulated_latency_s
    return row


def run_trial(
    datasets: Sequence[Dataset],
    cfg: EngineConfig,
    make_oracle: OracleFactory,
    trial: int = 0,
    cache_root: Optional[Path] = None,
    loader: Optional[ConfigLoader] = None,
    rates: Optional[RateTable] = None,
) -> TrialResult:
    """Verify every claim of every dataset once."""
    rows: List[ClaimRow] = []
    for dataset in datasets:
        cache_dir = cache_root / dataset.name if cache_root is not None else None
        oracle = make_oracle(dataset, cache_dir)
        try:
            verifier = Verifier(dataset.relation, oracle, cfg, loader, rates)
            for claim in dataset.claims:
                rows.append(_claim_row(dataset, claim, verifier))
        finally:
            oracle.close()
    result = TrialResult(trial=trial, seed=cfg.shuffle_seed, rows=rows, metrics=trial_metrics(rows))
    logger.bind(trial=trial).info(
        f"{len(rows)} claims, f1={result.metrics.f1:.3f}, calls={result.metrics.total_oracle_calls}"
    )
    return result


def _snapshot(cfg: EngineConfig, datasets: Sequence[Dataset], trials: int, backend: Optional[str],
              loader: ConfigLoader) -> Dict:
    oracle_settings = loader.load_settings().get("oracle", {})
    return {
        "engine": cfg.model_dump(mode="json"),
        "datasets": [d.name for d in datasets],
        "trials": trials,
        "seeds": [cfg.shuffle_seed + t for t in range(trials)],
        "backend": backend or oracle_settings.get("backend", "scripted"),
        "execution_model": oracle_settings.get("execution_model"),
        "optimizer_model": oracle_settings.get("optimizer_model"),
    }


def run_bench(
    datasets: Sequence[Dataset],
    cfg: Optional[EngineConfig] = None,
    trials: int = 1,
    cache_root: Optional[Union[str, Path]] = None,
    fresh_cache: bool = True,
    backend: Optional[str] = None,
    loader: Optional[ConfigLoader] = None,
) -> RunReport:
    """Run every claim per trial and summarize.

    fresh_cache=True gives every trial an empty cache (under cache_root or a
    temporary directory); with fresh_cache=False all trials share
    cache_root/<dataset>, which is what a replay run reads.
    """
    loader = loader or get_config_loader()
    cfg = cfg or EngineConfig.from_config(loader)
    rates = load_rate_table(loader)
    make_oracle = oracle_factory(backend, caching=cfg.flags.caching,
                                 max_concurrency=cfg.batch_size, loader=loader)
    results: List[TrialResult] = []
    with tempfile.TemporaryDirectory(prefix="bench-cache-") as scratch:
        root = Path(cache_root) if cache_root is not None else Path(scratch)
        for trial in range(trials):
            trial_cfg = cfg.model_copy(update={"shuffle_seed": cfg.shuffle_seed + trial})
            cache_dir = root / f"trial-{trial}" if fresh_cache else root
            results.append(run_trial(datasets, trial_cfg, make_oracle, trial, cache_dir, loader, rates))
    return RunReport(
        config=_snapshot(cfg, datasets, trials, backend, loader),
        trials=results,
        summary=summarize([r.metrics for r in results]),
    )


def ablation_configs(cfg: EngineConfig, ablate: Sequence[str]) -> Dict[str, EngineConfig]:
    """'full' plus one leave-one-out configuration per flag; 'all' adds 'none' (every flag off)."""
    names = list(ablate)
    if "all" in names:
        names = [n for n in names if n != "all"]
        include_none = True
    else:
        include_none = False
    configs = {"full": cfg}
    for name in names:
        if name not in FLAG_NAMES:
            raise VerificationError(f"unknown optimization flag {name!r}; expected one of {', '.join(FLAG_NAMES)}")
        configs[f"no_{name}"] = cfg.with_flags(cfg.flags.without(name))
    if include_none:
        configs["none"] = cfg.with_flags(cfg.flags.all_disabled())
    return configs


def run_ablation(
    datasets: Sequence[Dataset],
    ablate: Sequence[str],
    cfg: Optional[EngineConfig] = None,
    trials: int = 1,
    backend: Optional[str] = None,
    loader: Optional[ConfigLoader] = None,
) -> AblationReport:
    """Each configuration runs against its own empty cache."""
    loader = loader or get_config_loader()
    cfg = cfg or EngineConfig.from_config(loader)
    report = AblationReport()
    for name, config in ablation_configs(cfg, ablate).items():
        logger.bind(config=name).info("running ablation configuration")
        report.runs[name] = run_bench(datasets, config, trials, backend=backend, loader=loader)
    report.multipliers = ablation_multipliers({n: r.summary for n, r in report.runs.items()})
    return report
