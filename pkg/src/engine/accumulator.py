"""
Accumulators - 提前终止的聚合累加器

每个累加器依次尝试:
1. 见证 / 反例 (bool_or / bool_and)
2. 运行计数已满足提示
3. 基于 n_total 的最大可达 / 最小保证
4. 置信序列 (仅在附带 ConfidenceState 时)
流结束仍未决定时为 EXHAUSTED, 由精确计数定值.
"""
from dataclasses import dataclass, field
from typing import Any, Optional

from loguru import logger

from src.claims.models import Comparison, ComparisonOp
from src.common.errors import InvariantError
from src.provenance.models import StreamCapture
from src.stats.confidence import ConfidenceState, cs_update
from src.stats.resolve import cs_resolve
from .models import AccState, ResolvedBy

_CS_FN = {"bool_or": "bool_or", "bool_and": "bool_and", "count_if": "count", "proportion": "proportion"}


@dataclass
class Accumulator:
    fn: str
    hint: Optional[Comparison] = None
    n_total: Optional[int] = None
    seen: int = 0
    positives: int = 0
    state: AccState = AccState.RUNNING
    outcome: Optional[bool] = None
    resolved_by: Optional[ResolvedBy] = None
    confidence: Optional[ConfidenceState] = None
    capture: Optional[StreamCapture] = None
    early_stopping: bool = True
    epsilon: float = 0.05
    warnings: list = field(default_factory=list)

    @property
    def running(self) -> bool:
        return self.state == AccState.RUNNING

    @property
    def value(self) -> Any:
        """Aggregate value; exact only once EXHAUSTED."""
        if self.fn in ("bool_or", "bool_and"):
            return self.outcome
        if self.fn == "count_if":
            return self.positives
        return self.positives / self.seen if self.seen else None

    def _resolve(self, outcome: bool, by: ResolvedBy) -> None:
        self.state = AccState.RESOLVED
        self.outcome = outcome
        self.resolved_by = by


def _count_decided(op: ComparisonOp, k: float, low: float, high: float) -> Optional[bool]:
    """Comparison value if it is the same for every achievable value in [low, high]."""
    if op in (ComparisonOp.EQ, ComparisonOp.NE):
        if low == high:
            return op.apply(low, k)
        if not (ComparisonOp.GE.apply(k, low) and ComparisonOp.LE.apply(k, high)):
            return op == ComparisonOp.NE
        return None
    at_low, at_high = op.apply(low, k), op.apply(high, k)
    return at_low if at_low == at_high else None


def _running_count_rule(acc: Accumulator) -> Optional[bool]:
    if acc.fn != "count_if" or acc.hint is None:
        return None
    op, k = acc.hint.op, acc.hint.threshold
    count = acc.positives
    if op in (ComparisonOp.GE, ComparisonOp.GT):
        return True if op.apply(count, k) else None
    if op in (ComparisonOp.LE, ComparisonOp.LT):
        return None if op.apply(count, k) else False
    if ComparisonOp.GT.apply(count, k):
        return op == ComparisonOp.NE
    return None


def _bounds_rule(acc: Accumulator) -> Optional[bool]:
    if acc.n_total is None or acc.hint is None or acc.fn not in ("count_if", "proportion"):
        return None
    low = acc.positives
    high = acc.positives + (acc.n_total - acc.seen)
    if acc.fn == "proportion":
        if acc.n_total == 0:
            return None
        low, high = low / acc.n_total, high / acc.n_total
    return _count_decided(acc.hint.op, acc.hint.threshold, low, high)


def _estimate_rule(acc: Accumulator, value: bool) -> Optional[bool]:
    if acc.confidence is None:
        return None
    cs_update(acc.confidence, value)
    mode = _CS_FN[acc.fn]
    if mode in ("bool_or", "count") and acc.n_total is None:
        return None
    if mode in ("count", "proportion") and acc.hint is None:
        return None
    if acc.hint is not None and acc.hint.op == ComparisonOp.EQ and acc.hint.threshold == 0:
        return None
    return cs_resolve(acc.confidence, acc.hint, acc.epsilon, fn=mode)


def finalize(acc: Accumulator) -> Accumulator:
    """End of stream: exact outcome from the counts."""
    if not acc.running:
        return acc
    acc.state = AccState.EXHAUSTED
    acc.resolved_by = ResolvedBy.EXHAUSTED
    if acc.confidence is not None:
        acc.confidence.finalize()
    if acc.fn == "bool_or":
        acc.outcome = acc.positives > 0
    elif acc.fn == "bool_and":
        acc.outcome = acc.positives == acc.seen
    elif acc.hint is None:
        acc.outcome = None
    elif acc.fn == "count_if":
        acc.outcome = acc.hint.holds(acc.positives)
    elif acc.seen == 0:
        acc.outcome = False
        acc.warnings.append("proportion over empty input")
        logger.warning("proportion over empty input evaluates to false")
    else:
        acc.outcome = acc.hint.holds(acc.positives / acc.seen)
    return acc


def accumulate(acc: Accumulator, value: bool, row_id: Optional[int] = None) -> Accumulator:
    """Consume one observation of the argument expression."""
    if not acc.running:
        raise InvariantError(f"{acc.fn} accumulator consumed a value after {acc.state.value}")
    if acc.n_total is not None and acc.seen >= acc.n_total:
        raise InvariantError(f"{acc.fn} accumulator saw more than n_total={acc.n_total} values")
    value = bool(value)
    acc.seen += 1
    acc.positives += int(value)
    if acc.capture is not None:
        acc.capture.record(row_id if row_id is not None else acc.seen - 1, value)

    if not acc.early_stopping:
        if acc.n_total is not None and acc.seen == acc.n_total:
            finalize(acc)
        return acc

    if acc.fn == "bool_or" and value:
        acc._resolve(True, ResolvedBy.WITNESS)
        return acc
    if acc.fn == "bool_and" and not value:
        acc._resolve(False, ResolvedBy.WITNESS)
        return acc

    decided = _running_count_rule(acc)
    if decided is not None:
        acc._resolve(decided, ResolvedBy.RUNNING_COUNT)
        return acc

    if acc.n_total is not None and acc.seen == acc.n_total:
        return finalize(acc)

    decided = _bounds_rule(acc)
    if decided is not None:
        acc._resolve(decided, ResolvedBy.BOUNDS)
        return acc

    decided = _estimate_rule(acc, value)
    if decided is not None:
        acc._resolve(decided, ResolvedBy.ESTIMATE)
    return acc
