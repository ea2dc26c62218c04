"""
Confidence Sequences - 任意时刻有效的置信序列

对 Bernoulli 观测的均值 μ:
- 下注法: 在候选网格 m ∈ {0, 1/G, ..., 1} 上维护对冲资本过程,
  资本达到 1/α 即拒绝 m; 区间取存活网格点的包络 (天然单调收缩).
  无放回模式使用随样本推进的条件均值, 并与确定性界求交.
- Hoeffding 法: 可预测混合的闭式区间, 用于交叉检验.

资本过程均为 numpy 数组, 支持前导批维度 (蒙特卡洛一次跑多条流).
"""
from dataclasses import dataclass, field
from typing import Any, Optional, Tuple, Union

import numpy as np

from src.common.errors import InvariantError
from .models import CSMethod, CSMode

ArrayLike = Union[int, float, np.ndarray]


def _plugin_lambda(alpha: float, t: int, var_hat: np.ndarray) -> np.ndarray:
    """Predictable plug-in bet size for observation t (1-based)."""
    return np.sqrt(2.0 * np.log(2.0 / alpha) / (var_hat * t * np.log1p(t)))


class BettingConfidenceSequence:
    """Grid-inverted hedged betting confidence sequence."""

    def __init__(
        self,
        alpha: float,
        n_total: Optional[int] = None,
        grid_size: int = 1000,
        batch_shape: Tuple[int, ...] = (),
        theta: float = 0.5,
        clip: float = 0.5,
    ):
        if not 0 < alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        self.alpha = alpha
        self.n_total = n_total
        self.theta = theta
        self.clip = clip
        self.grid = np.linspace(0.0, 1.0, grid_size + 1)
        self.batch_shape = tuple(batch_shape)
        shape = self.batch_shape + (grid_size + 1,)
        self.log_capital_up = np.zeros(shape)
        self.log_capital_down = np.zeros(shape)
        self.alive = np.ones(shape, dtype=bool)
        self.s = 0
        self.total = np.zeros(self.batch_shape)
        self.mean_hat = np.full(self.batch_shape, 0.5)
        self.var_hat = np.full(self.batch_shape, 0.25)
        self._sq_dev = np.zeros(self.batch_shape)
        self.lower = np.zeros(self.batch_shape)
        self.upper = np.ones(self.batch_shape)
        self._log_threshold = np.log(1.0 / alpha)

    def _conditional_means(self) -> np.ndarray:
        """Mean of the next draw under each candidate m."""
        if self.n_total is None:
            return np.broadcast_to(self.grid, self.alive.shape)
        remaining = self.n_total - self.s
        return (self.n_total * self.grid - self.total[..., None]) / remaining

    def update(self, x: ArrayLike) -> None:
        x = np.asarray(x, dtype=np.float64)
        if self.n_total is not None and self.s >= self.n_total:
            raise InvariantError("without-replacement sequence already consumed the population")
        t = self.s + 1
        m = self._conditional_means()
        feasible = (m >= 0.0) & (m <= 1.0)
        m_safe = np.clip(m, 0.0, 1.0)

        lam = _plugin_lambda(self.alpha, t, self.var_hat)[..., None]
        with np.errstate(divide="ignore"):
            lam_up = np.minimum(lam, self.clip / m_safe)
            lam_down = np.minimum(lam, self.clip / (1.0 - m_safe))
        dev = x[..., None] - m_safe
        self.log_capital_up += np.log1p(lam_up * dev)
        self.log_capital_down += np.log1p(-lam_down * dev)
        hedged = np.logaddexp(
            np.log(self.theta) + self.log_capital_up,
            np.log(1.0 - self.theta) + self.log_capital_down,
        )
        self.alive &= feasible & (hedged < self._log_threshold)

        self.s = t
        self.total = self.total + x
        self.mean_hat = (0.5 + self.total) / (t + 1)
        self._sq_dev = self._sq_dev + (x - self.mean_hat) ** 2
        self.var_hat = (0.25 + self._sq_dev) / (t + 1)
        self._refresh_interval()

    def _refresh_interval(self) -> None:
        any_alive = self.alive.any(axis=-1)
        first = np.argmax(self.alive, axis=-1)
        last = self.alive.shape[-1] - 1 - np.argmax(self.alive[..., ::-1], axis=-1)
        lower = np.where(any_alive, self.grid[first], self.lower)
        upper = np.where(any_alive, self.grid[last], self.upper)
        lower, upper = np.maximum(lower, self.lower), np.minimum(upper, self.upper)
        if self.n_total is not None:
            lower, upper = _intersect_population_bounds(lower, upper, self.total, self.s, self.n_total)
        self.lower, self.upper = lower, upper


class HoeffdingConfidenceSequence:
    """Predictable-mixture Hoeffding confidence sequence (closed form)."""

    def __init__(self, alpha: float, n_total: Optional[int] = None, batch_shape: Tuple[int, ...] = ()):
        if not 0 < alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        self.alpha = alpha
        self.n_total = n_total
        self.batch_shape = tuple(batch_shape)
        self.s = 0
        self.total = np.zeros(self.batch_shape)
        self._weighted_sum = np.zeros(self.batch_shape)
        self._lambda_sum = 0.0
        self._lambda_sq_sum = 0.0
        self.lower = np.zeros(self.batch_shape)
        self.upper = np.ones(self.batch_shape)

    def update(self, x: ArrayLike) -> None:
        x = np.asarray(x, dtype=np.float64)
        if self.n_total is not None and self.s >= self.n_total:
            raise InvariantError("without-replacement sequence already consumed the population")
        t = self.s + 1
        lam = min(np.sqrt(8.0 * np.log(2.0 / self.alpha) / (t * np.log1p(t))), 1.0)
        self._weighted_sum = self._weighted_sum + lam * x
        self._lambda_sum += lam
        self._lambda_sq_sum += lam ** 2
        center = self._weighted_sum / self._lambda_sum
        width = (np.log(2.0 / self.alpha) + self._lambda_sq_sum / 8.0) / self._lambda_sum
        self.s = t
        self.total = self.total + x
        lower = np.maximum(np.clip(center - width, 0.0, 1.0), self.lower)
        upper = np.minimum(np.clip(center + width, 0.0, 1.0), self.upper)
        if self.n_total is not None:
            lower, upper = _intersect_population_bounds(lower, upper, self.total, self.s, self.n_total)
        self.lower, self.upper = lower, upper


def _intersect_population_bounds(lower, upper, total, s, n_total):
    """Clamp to [sum/N, (sum + N - s)/N]; fall back to those bounds if the grid missed them."""
    det_lo = total / n_total
    det_hi = (total + n_total - s) / n_total
    lo = np.maximum(lower, det_lo)
    hi = np.minimum(upper, det_hi)
    empty = lo > hi
    return np.where(empty, det_lo, lo), np.where(empty, det_hi, hi)


@dataclass
class ConfidenceState:
    """Confidence interval for one accumulator"""
    alpha: float
    n_total: Optional[int] = None
    method: CSMethod = CSMethod.BETTING
    s: int = 0
    sum: int = 0
    lower: float = 0.0
    upper: float = 1.0
    finalized: bool = False
    sequence: Any = field(default=None, repr=False)

    @property
    def mode(self) -> CSMode:
        return CSMode.WITH_REPLACEMENT if self.n_total is None else CSMode.WITHOUT_REPLACEMENT

    @property
    def interval(self) -> Tuple[float, float]:
        return self.lower, self.upper

    def finalize(self) -> None:
        self.finalized = True


def new_confidence_state(
    alpha: float,
    n_total: Optional[int] = None,
    method: Union[CSMethod, str] = CSMethod.BETTING,
    grid_size: int = 1000,
) -> ConfidenceState:
    method = CSMethod(method)
    if method == CSMethod.BETTING:
        sequence = BettingConfidenceSequence(alpha, n_total=n_total, grid_size=grid_size)
    else:
        sequence = HoeffdingConfidenceSequence(alpha, n_total=n_total)
    return ConfidenceState(alpha=alpha, n_total=n_total, method=method, sequence=sequence)


def cs_update(state: ConfidenceState, x: Union[bool, int]) -> ConfidenceState:
    """Feed one Bernoulli observation and tighten the interval."""
    if state.finalized:
        raise InvariantError("confidence state updated after finalization")
    if state.n_total is not None and state.s >= state.n_total:
        raise InvariantError("without-replacement update beyond the population size")
    value = 1 if x else 0
    state.sequence.update(value)
    state.s += 1
    state.sum += value
    state.lower = float(state.sequence.lower)
    state.upper = float(state.sequence.upper)
    return state
