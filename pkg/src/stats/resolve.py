"""Stopping rules: turn a confidence interval into a decision for a comparison."""
from typing import Optional

from src.claims.models import Comparison, ComparisonOp
from src.common.errors import NeedsTotalError
from .confidence import ConfidenceState


def as_proportion(comparison: Comparison, n_total: Optional[int]) -> Comparison:
    """Rescale a count comparison to a proportion comparison."""
    if n_total is None:
        raise NeedsTotalError("count comparison needs n_total to use a confidence interval")
    if n_total == 0:
        return comparison
    return Comparison(op=comparison.op, threshold=comparison.threshold / n_total)


def cs_resolve(
    state: ConfidenceState,
    comparison: Optional[Comparison],
    epsilon: float = 0.05,
    fn: str = "proportion",
) -> Optional[bool]:
    """Decision for the comparison, or None while the interval straddles it.

    fn selects the rule family: 'proportion' (comparison over proportions),
    'count' (comparison over counts, rescaled by n_total), 'bool_and'
    (confirm-only equality with 1), 'bool_or' (n_total * interval against 1).
    """
    lo, hi = state.lower, state.upper

    if fn == "bool_and":
        return True if lo >= 1.0 - epsilon else None

    if fn == "bool_or":
        if state.n_total is None:
            raise NeedsTotalError("bool_or estimation needs n_total")
        if state.n_total * lo >= 1.0:
            return True
        if state.n_total * hi < 1.0:
            return False
        return None

    if comparison is None:
        return None
    if fn == "count":
        comparison = as_proportion(comparison, state.n_total)

    op, rho = comparison.op, comparison.threshold
    if op == ComparisonOp.GE:
        return True if lo >= rho else (False if hi < rho else None)
    if op == ComparisonOp.GT:
        return True if lo > rho else (False if hi <= rho else None)
    if op == ComparisonOp.LE:
        return True if hi <= rho else (False if lo > rho else None)
    if op == ComparisonOp.LT:
        return True if hi < rho else (False if lo >= rho else None)

    if rho == 0:
        # degenerate tolerance band; handled deterministically by the caller
        return None
    band_lo = max(0.0, rho * (1.0 - epsilon))
    band_hi = min(1.0, rho * (1.0 + epsilon))
    inside = band_lo <= lo and hi <= band_hi
    disjoint = hi < band_lo or lo > band_hi
    if op == ComparisonOp.EQ:
        return True if inside else (False if disjoint else None)
    return False if inside else (True if disjoint else None)
