"""
评测模块

提供:
- 合成评论语料与声明网格
- 声明核查流水线 (编译 -> 优化 -> 执行)
- 基准运行, 多 trial 汇总与消融
- 分类指标 (未被支持的声明为正类)
- 报告文件与文本表格
"""

from .models import AblationReport, ClaimRow, Dataset, MetricSpread, Metrics, RunReport, TrialResult
from .metrics import ablation_multipliers, classification_metrics, confusion, summarize, trial_metrics
from .synthetic import ClaimGrid, GroundTruth, claim_type, generate_suite
from .pipeline import Verifier, load_dataset, load_dataset_relation
from .bench import ablation_configs, oracle_factory, run_ablation, run_bench, run_trial
from .report import load_run_report, render_ablation, render_claims, render_summary, write_report

__all__ = [
    "AblationReport",
    "ClaimRow",
    "Dataset",
    "MetricSpread",
    "Metrics",
    "RunReport",
    "TrialResult",
    "ablation_multipliers",
    "classification_metrics",
    "confusion",
    "summarize",
    "trial_metrics",
    "ClaimGrid",
    "GroundTruth",
    "claim_type",
    "generate_suite",
    "Verifier",
    "load_dataset",
    "load_dataset_relation",
    "ablation_configs",
    "oracle_factory",
    "run_ablation",
    "run_bench",
    "run_trial",
    "load_run_report",
    "render_ablation",
    "render_claims",
    "render_summary",
    "write_report",
]
