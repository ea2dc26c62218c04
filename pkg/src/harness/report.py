"""Report files and plain-text tables."""
import json
from pathlib import Path
from typing import List, Sequence, Union

from pydantic import BaseModel

from .metrics import ABLATION_FIELDS, mismatches
from .models import AblationReport, RunReport

_SUMMARY_ORDER = ("precision", "recall", "f1", "accuracy", "mean_cost_usd", "mean_latency_s",
                  "total_oracle_calls", "errors")


def write_report(report: BaseModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2), encoding="utf-8")
    return path


def load_run_report(path: Union[str, Path]) -> RunReport:
    return RunReport.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))


def _table(header: Sequence[str], rows: List[Sequence[str]]) -> str:
    widths = [max(len(str(c)) for c in col) for col in zip(header, *rows)]
    lines = ["  ".join(str(c).ljust(w) for c, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(str(c).ljust(w) for c, w in zip(row, widths)) for row in rows)
    return "\n".join(lines)


def _fmt(value: float) -> str:
    return f"{value:.4f}" if abs(value) < 100 else f"{value:.0f}"


def render_summary(report: RunReport) -> str:
    """Metric, mean, [min, max] table followed by the claims whose verdict missed the label."""
    rows = []
    for name in _SUMMARY_ORDER:
        s = report.summary.get(name)
        if s is not None:
            rows.append([name, _fmt(s.mean), f"[{_fmt(s.min)}, {_fmt(s.max)}]"])
    text = _table(["metric", "mean", "range"], rows)
    missed = [r for trial in report.trials for r in mismatches(trial.rows)]
    failed = [r for trial in report.trials for r in trial.rows if r.failed]
    if missed:
        text += "\n\nverdict != label:\n" + "\n".join(
            f"  {r.dataset}/{r.claim_id} [{r.resolution}] {r.text}" for r in missed)
    if failed:
        text += "\n\nerrors:\n" + "\n".join(f"  {r.dataset}/{r.claim_id}: {r.error}" for r in failed)
    return text


def render_claims(report: RunReport, trial: int = 0) -> str:
    rows = [
        [r.dataset, r.claim_id, r.claim_type, str(r.grounded), str(r.verdict), r.resolution or "-",
         str(r.oracle_calls), str(r.tokens_cited)]
        for r in report.trials[trial].rows
    ]
    return _table(["dataset", "claim", "type", "grounded", "verdict", "resolution", "calls", "cited"], rows)


def render_ablation(report: AblationReport) -> str:
    """One row per configuration: calls, cost and latency relative to the full configuration."""
    rows = []
    for name, run in report.runs.items():
        multipliers = report.multipliers.get(name, {})
        cells = [name, f"{run.summary['total_oracle_calls'].mean:.0f}"]
        cells.extend(f"{multipliers[f]:.2f}x" if f in multipliers else "-" for f in ABLATION_FIELDS)
        rows.append(cells)
    return _table(["config", "calls", "calls x", "cost x", "latency x"], rows)
