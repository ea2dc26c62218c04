"""
Quantifier semantics

Normalization to cardinal comparisons, brute-force evaluation, and the
vague-quantity hint table.
"""
from typing import Any, Dict, List, Mapping, Optional, Sequence

from src.common.config_loader import ConfigLoader, get_config_loader
from src.common.errors import NeedsTotalError
from .models import (
    ClaimStructure,
    Comparison,
    ComparisonOp,
    NestedStructure,
    OrdinalStructure,
    Quantifier,
    QuantifierKind,
    SimpleStructure,
)


def normalize(q: Quantifier, n: Optional[int] = None) -> Quantifier:
    """Rewrite a quantifier as a CARDINAL one.

    EXISTS -> (>= 1), FORALL -> (== n), PROPORTIONAL(op, p) -> CARDINAL(op, p*n);
    the scaled threshold stays an exact real.
    """
    if q.kind == QuantifierKind.EXISTS:
        return Quantifier.cardinal(ComparisonOp.GE, 1)
    if q.kind == QuantifierKind.CARDINAL:
        return q
    if n is None:
        raise NeedsTotalError(f"{q.kind.value} needs the relation size to normalize")
    if q.kind == QuantifierKind.FORALL:
        return Quantifier.cardinal(ComparisonOp.EQ, n)
    return Quantifier.cardinal(q.op, q.threshold * n)


def count_comparison(q: Quantifier, n: Optional[int] = None) -> Comparison:
    """The comparison a satisfying count must meet."""
    cardinal = normalize(q, n)
    return Comparison(op=cardinal.op, threshold=cardinal.threshold)


def negate(comparison: Comparison) -> Comparison:
    """GE<->LT, GT<->LE, EQ<->NE"""
    return comparison.negate()


def evaluate_quantifier(q: Quantifier, column: Sequence[bool]) -> bool:
    """Exact truth of a quantifier over a boolean column."""
    n = len(column)
    count = sum(1 for v in column if v)
    if q.kind == QuantifierKind.EXISTS:
        return count >= 1
    if q.kind == QuantifierKind.FORALL:
        return count == n
    if q.kind == QuantifierKind.PROPORTIONAL:
        if n == 0:
            return False
        return q.op.apply(count / n, q.threshold)
    return q.op.apply(count, q.threshold)


def group_value(aggregate: str, column: Sequence[bool]) -> Optional[float]:
    count = sum(1 for v in column if v)
    if aggregate == "count":
        return float(count)
    if not column:
        return None
    return count / len(column)


def dense_rank_of(values: Sequence[Optional[float]], index: int, descending: bool = True) -> int:
    """1 + number of distinct values strictly better than values[index]."""
    target = values[index]
    if target is None:
        return len({v for v in values if v is not None}) + 1
    distinct = {v for v in values if v is not None}
    if descending:
        return 1 + sum(1 for v in distinct if v > target)
    return 1 + sum(1 for v in distinct if v < target)


def evaluate_structure(structure: ClaimStructure, columns: Any) -> bool:
    """Brute-force truth of a claim structure.

    columns is a boolean sequence for simple claims and an ordered mapping
    group key -> boolean sequence for ordinal and nested claims.
    """
    if isinstance(structure, SimpleStructure):
        return evaluate_quantifier(structure.quantifier, columns)

    groups: Mapping[Any, Sequence[bool]] = columns
    if isinstance(structure, NestedStructure):
        outer_column = [evaluate_quantifier(structure.inner, col) for col in groups.values()]
        return evaluate_quantifier(structure.outer, outer_column)

    if isinstance(structure, OrdinalStructure):
        keys = list(groups.keys())
        target = _as_key(structure.target_group)
        if target not in keys:
            return False
        values = [group_value(structure.aggregate, groups[k]) for k in keys]
        rank = dense_rank_of(values, keys.index(target), structure.descending)
        return rank == structure.target_rank

    raise TypeError(f"unknown structure {structure!r}")


def _as_key(values: Sequence[Any]) -> Any:
    return tuple(values)


class VagueQuantifierHints:
    """模糊量词提示表"""

    def __init__(self, loader: Optional[ConfigLoader] = None):
        self._table: Dict[str, Dict[str, Any]] = (loader or get_config_loader()).load_vague_quantifiers()

    @property
    def words(self) -> List[str]:
        return list(self._table.keys())

    def hint_for(self, word: str) -> Optional[Quantifier]:
        entry = self._table.get(word.strip().lower())
        if entry is None:
            return None
        kind = QuantifierKind(entry["kind"])
        if kind in (QuantifierKind.EXISTS, QuantifierKind.FORALL):
            return Quantifier(kind=kind)
        return Quantifier(kind=kind, op=ComparisonOp[entry["op"]], threshold=entry["threshold"])

    def render(self) -> str:
        """Render the table for the compilation prompt."""
        lines = []
        for word in self._table:
            q = self.hint_for(word)
            if q.kind == QuantifierKind.PROPORTIONAL:
                lines.append(f'- "{word}": proportion {q.op.symbol} {q.threshold:g}')
            elif q.kind == QuantifierKind.CARDINAL:
                lines.append(f'- "{word}": count {q.op.symbol} {q.threshold:g}')
            else:
                lines.append(f'- "{word}": {q.kind.value.lower()}')
        return "\n".join(lines)
