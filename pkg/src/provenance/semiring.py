"""
Brute-force provenance polynomials (test oracle)

每个元组 t 对应 p_t / p̄_t; π(φ(t)) = p_t 当且仅当 φ(t) 为真, 否则为 0,
否定对偶. 基数量词用按计数的动态规划展开, 与按子集求和等价.
"""
from typing import Any, List, Mapping, Optional, Sequence, Tuple, Union

from src.claims.models import (
    ClaimStructure,
    Comparison,
    ComparisonOp,
    NestedStructure,
    OrdinalStructure,
    Quantifier,
    QuantifierKind,
    SimpleStructure,
    tolerant_ceil,
    tolerant_floor,
)
from src.common.errors import ProvenanceSizeError
from .models import Polarity, ProvPolynomial

MAX_RELATION_SIZE = 16

Item = Tuple[ProvPolynomial, ProvPolynomial]   # (polynomial if it holds, polynomial if it fails)


def _tuple_items(rows: Sequence[Tuple[int, bool]]) -> List[Item]:
    items = []
    for row_id, value in rows:
        pos = ProvPolynomial.literal(row_id, Polarity.POS) if value else ProvPolynomial.zero()
        neg = ProvPolynomial.zero() if value else ProvPolynomial.literal(row_id, Polarity.NEG)
        items.append((pos, neg))
    return items


def _at_least(items: Sequence[Item], k: int) -> ProvPolynomial:
    """Σ over k-subsets W of Π_{W} pos."""
    if k <= 0:
        return ProvPolynomial.one()
    if k > len(items):
        return ProvPolynomial.zero()
    by_count = [ProvPolynomial.one()] + [ProvPolynomial.zero()] * k
    for pos, _ in items:
        for c in range(k, 0, -1):
            by_count[c] = by_count[c] + by_count[c - 1] * pos
    return by_count[k]


def _exact_form(items: Sequence[Item], comparison: Comparison) -> ProvPolynomial:
    """Σ over subsets W with |W| satisfying the comparison of Π_{W} pos · Π_{rest} neg."""
    n = len(items)
    by_count = [ProvPolynomial.one()] + [ProvPolynomial.zero()] * n
    for pos, neg in items:
        for c in range(n, -1, -1):
            stay = by_count[c] * neg
            grow = by_count[c - 1] * pos if c > 0 else ProvPolynomial.zero()
            by_count[c] = stay + grow
    total = ProvPolynomial.zero()
    for c, poly in enumerate(by_count):
        if comparison.holds(c):
            total = total + poly
    return total


def _cardinal(items: Sequence[Item], comparison: Comparison) -> ProvPolynomial:
    op, k = comparison.op, comparison.threshold
    if op == ComparisonOp.GT:
        return _at_least(items, tolerant_floor(k) + 1)
    if op == ComparisonOp.GE:
        return _at_least(items, tolerant_ceil(k))
    return _exact_form(items, comparison)


def quantified(q: Quantifier, items: Sequence[Item], negate: bool = False) -> ProvPolynomial:
    """Polynomial of a quantifier (or of its negation) over items."""
    kind = q.kind
    if kind in (QuantifierKind.EXISTS, QuantifierKind.FORALL):
        if negate:
            items = [(neg, pos) for pos, neg in items]
            kind = QuantifierKind.FORALL if kind == QuantifierKind.EXISTS else QuantifierKind.EXISTS
        if kind == QuantifierKind.EXISTS:
            total = ProvPolynomial.zero()
            for pos, _ in items:
                total = total + pos
            return total
        product = ProvPolynomial.one()
        for pos, _ in items:
            product = product * pos
        return product

    threshold = q.threshold * len(items) if kind == QuantifierKind.PROPORTIONAL else q.threshold
    comparison = Comparison(op=q.op, threshold=threshold)
    if negate:
        comparison = comparison.negate()
    return _cardinal(items, comparison)


def _numbered(columns: Union[Sequence[bool], Mapping[Any, Sequence[bool]]]):
    """Rows numbered consecutively: a flat list, or per group in mapping order."""
    if isinstance(columns, Mapping):
        grouped = {}
        next_id = 0
        for key, column in columns.items():
            grouped[key] = [(next_id + i, bool(v)) for i, v in enumerate(column)]
            next_id += len(column)
        return grouped, next_id
    rows = [(i, bool(v)) for i, v in enumerate(columns)]
    return rows, len(rows)


def _pair(winner: List[Tuple[int, bool]], loser: List[Tuple[int, bool]], loser_score: float,
          winner_score: float, aggregate: str) -> ProvPolynomial:
    scale_w = len(winner) if aggregate == "proportion" else 1
    scale_l = len(loser) if aggregate == "proportion" else 1
    above = _cardinal(_tuple_items(winner), Comparison(op=ComparisonOp.GT, threshold=loser_score * scale_w))
    below = _cardinal(_tuple_items(loser), Comparison(op=ComparisonOp.LT, threshold=winner_score * scale_l))
    return above * below


def _score(aggregate: str, rows: List[Tuple[int, bool]]) -> float:
    count = sum(1 for _, v in rows if v)
    if aggregate == "count":
        return float(count)
    return count / len(rows) if rows else 0.0


def brute_polynomial(structure: ClaimStructure, columns: Any, negate: bool = False) -> ProvPolynomial:
    """Exact provenance polynomial of a claim (or of its negation) over a small relation.

    columns is a boolean column for simple claims and a mapping group key ->
    boolean column otherwise; row ids are assigned consecutively. Ordinal
    claims yield the product of the pairwise comparisons observed in the data.
    """
    rows, size = _numbered(columns)
    if size > MAX_RELATION_SIZE:
        raise ProvenanceSizeError(f"relation of {size} rows exceeds the brute-force bound {MAX_RELATION_SIZE}")

    if isinstance(structure, SimpleStructure):
        return quantified(structure.quantifier, _tuple_items(rows), negate)

    if isinstance(structure, NestedStructure):
        items = []
        for group_rows in rows.values():
            inner_items = _tuple_items(group_rows)
            items.append((quantified(structure.inner, inner_items), quantified(structure.inner, inner_items, True)))
        return quantified(structure.outer, items, negate)

    if isinstance(structure, OrdinalStructure):
        target = tuple(structure.target_group)
        if target not in rows:
            return ProvPolynomial.zero()
        target_rows = rows[target]
        target_score = _score(structure.aggregate, target_rows)
        product = ProvPolynomial.one()
        for key, other_rows in rows.items():
            if key == target:
                continue
            other_score = _score(structure.aggregate, other_rows)
            if target_score > other_score:
                product = product * _pair(target_rows, other_rows, other_score, target_score, structure.aggregate)
            elif target_score < other_score:
                product = product * _pair(other_rows, target_rows, target_score, other_score, structure.aggregate)
            else:
                tie = Comparison(op=ComparisonOp.EQ, threshold=float(sum(1 for _, v in target_rows if v)))
                other_tie = Comparison(op=ComparisonOp.EQ, threshold=float(sum(1 for _, v in other_rows if v)))
                product = product * _exact_form(_tuple_items(target_rows), tie) \
                    * _exact_form(_tuple_items(other_rows), other_tie)
        return product

    raise TypeError(f"unknown structure {structure!r}")
