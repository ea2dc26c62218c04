"""
Metrics - 分类指标

以 "未被支持 (ungrounded)" 的声明为正类.
"""
from dataclasses import dataclass
from statistics import mean
from typing import Dict, List, Optional, Sequence

from .models import ClaimRow, MetricSpread, Metrics


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(predicted: Sequence[bool], actual: Sequence[bool]) -> Confusion:
    """Confusion counts; True marks the positive (ungrounded) class."""
    if len(predicted) != len(actual):
        raise ValueError("predictions and labels differ in length")
    tp = sum(1 for p, a in zip(predicted, actual) if p and a)
    fp = sum(1 for p, a in zip(predicted, actual) if p and not a)
    fn = sum(1 for p, a in zip(predicted, actual) if not p and a)
    return Confusion(tp=tp, fp=fp, tn=len(actual) - tp - fp - fn, fn=fn)


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def classification_metrics(predicted: Sequence[bool], actual: Sequence[bool]) -> Dict[str, float]:
    """Precision, recall, F1 and accuracy; empty denominators give 0."""
    c = confusion(predicted, actual)
    precision = _ratio(c.tp, c.tp + c.fp)
    recall = _ratio(c.tp, c.tp + c.fn)
    return {
        "precision": precision,
        "recall": recall,
        "f1": _ratio(2 * precision * recall, precision + recall),
        "accuracy": _ratio(c.tp + c.tn, c.total),
    }


def trial_metrics(rows: Sequence[ClaimRow]) -> Metrics:
    """Metrics over rows with both a verdict and a label; error rows only count as errors."""
    scored = [r for r in rows if not r.failed and r.verdict is not None and r.grounded is not None]
    scores = classification_metrics([not r.verdict for r in scored], [not r.grounded for r in scored])
    executed = [r for r in rows if not r.failed]
    return Metrics(
        **scores,
        mean_cost_usd=mean(r.cost_usd for r in executed) if executed else 0.0,
        mean_latency_s=mean(r.latency_s for r in executed) if executed else 0.0,
        total_oracle_calls=sum(r.oracle_calls for r in executed),
        total_cost_usd=sum(r.cost_usd for r in executed),
        total_latency_s=sum(r.latency_s for r in executed),
        errors=len(rows) - len(executed),
    )


def spread(values: Sequence[float]) -> MetricSpread:
    return MetricSpread(mean=mean(values), min=min(values), max=max(values))


def summarize(per_trial: Sequence[Metrics]) -> Dict[str, MetricSpread]:
    """Mean, min and max of every metric across trials."""
    if not per_trial:
        return {}
    names = list(Metrics.model_fields)
    return {name: spread([float(getattr(m, name)) for m in per_trial]) for name in names}


def multiplier(value: float, baseline: float) -> Optional[float]:
    """value / baseline, or None when the baseline is zero."""
    return value / baseline if baseline else None


ABLATION_FIELDS = ("total_oracle_calls", "total_cost_usd", "total_latency_s")


def ablation_multipliers(summaries: Dict[str, Dict[str, MetricSpread]], baseline: str = "full",
                         fields: Sequence[str] = ABLATION_FIELDS) -> Dict[str, Dict[str, float]]:
    """Per configuration, the trial mean of each field relative to the baseline configuration."""
    base = summaries[baseline]
    table: Dict[str, Dict[str, float]] = {}
    for name, summary in summaries.items():
        row: Dict[str, float] = {}
        for f in fields:
            m = multiplier(summary[f].mean, base[f].mean)
            if m is not None:
                row[f] = m
        table[name] = row
    return table


def mismatches(rows: List[ClaimRow]) -> List[ClaimRow]:
    """Rows whose verdict disagrees with the label."""
    return [r for r in rows if not r.failed and r.verdict is not None and r.verdict != r.grounded]
