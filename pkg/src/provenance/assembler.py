"""
Provenance assembly - 按声明类型组装最小解释

结论为真时解释"为什么成立", 为假时解释其否定为什么成立.
"""
from typing import Any, Dict, List, Optional, Sequence, Tuple

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
from .models import GroupCapture, OrdinalCapture, ProvToken, StreamCapture


def quantifier_aggregate(q: Quantifier) -> Tuple[str, Optional[Comparison]]:
    """Aggregate function and comparison implementing a quantifier."""
    if q.kind == QuantifierKind.EXISTS:
        return "bool_or", None
    if q.kind == QuantifierKind.FORALL:
        return "bool_and", None
    fn = "count_if" if q.kind == QuantifierKind.CARDINAL else "proportion"
    return fn, Comparison(op=q.op, threshold=q.threshold)


def explain_stream(
    fn: str,
    comparison: Optional[Comparison],
    values: Sequence[bool],
    outcome: bool,
    n_total: Optional[int] = None,
) -> List[int]:
    """Indices of the observations that explain the outcome of one aggregate.

    Proportion thresholds are scaled by n_total when known, else by the number
    of processed observations.
    """
    everything = list(range(len(values)))
    if fn == "bool_or":
        if outcome:
            return [i for i, v in enumerate(values) if v][:1]
        return everything
    if fn == "bool_and":
        if outcome:
            return everything
        return [i for i, v in enumerate(values) if not v][:1]

    if comparison is None:
        return everything
    n = n_total if n_total is not None else len(values)
    threshold = comparison.threshold * n if fn == "proportion" else comparison.threshold
    op = comparison.op if outcome else comparison.op.negated
    if op == ComparisonOp.GT:
        op, threshold = ComparisonOp.GE, tolerant_floor(threshold) + 1
    if op == ComparisonOp.GE:
        k = max(0, tolerant_ceil(threshold))
        return [i for i, v in enumerate(values) if v][:k]
    return everything


def _dedupe(tokens: Sequence[ProvToken]) -> List[ProvToken]:
    seen = set()
    out = []
    for token in tokens:
        key = (token.row_id, token.formula_id, token.polarity)
        if key not in seen:
            seen.add(key)
            out.append(token)
    return out


def _explain_simple(q: Quantifier, stream: StreamCapture, outcome: bool) -> List[ProvToken]:
    fn, comparison = quantifier_aggregate(q)
    return stream.tokens(explain_stream(fn, comparison, stream.values, outcome, stream.n_total))


def _explain_nested(structure: NestedStructure, groups: Sequence[GroupCapture], outcome: bool,
                    n_groups: Optional[int]) -> List[ProvToken]:
    outer_fn, outer_cmp = quantifier_aggregate(structure.outer)
    chosen = explain_stream(outer_fn, outer_cmp, [g.outcome for g in groups], outcome, n_groups)
    tokens: List[ProvToken] = []
    for index in chosen:
        group = groups[index]
        tokens.extend(_explain_simple(structure.inner, group.stream, group.outcome))
    return tokens


def group_score(aggregate: str, stream: StreamCapture) -> float:
    if aggregate == "count":
        return float(stream.positives)
    return stream.positives / stream.processed if stream.processed else 0.0


def _beats(winner: StreamCapture, loser_score: float, aggregate: str) -> List[ProvToken]:
    """Winner's explanation of scoring above the loser's score."""
    threshold = loser_score * winner.processed if aggregate == "proportion" else loser_score
    indices = explain_stream("count_if", Comparison(op=ComparisonOp.GT, threshold=threshold), winner.values, True)
    return winner.tokens(indices)


def _explain_ordinal(capture: OrdinalCapture) -> List[ProvToken]:
    groups = capture.groups
    if capture.target not in groups:
        tokens: List[ProvToken] = []
        for stream in groups.values():
            tokens.extend(stream.tokens(range(stream.processed)))
        return tokens

    target = groups[capture.target]
    target_score = group_score(capture.aggregate, target)
    tokens = []
    for key, other in groups.items():
        if key == capture.target:
            continue
        other_score = group_score(capture.aggregate, other)
        if target_score > other_score:
            tokens.extend(_beats(target, other_score, capture.aggregate))
            tokens.extend(other.tokens(range(other.processed)))
        elif target_score < other_score:
            tokens.extend(target.tokens(range(target.processed)))
            tokens.extend(_beats(other, target_score, capture.aggregate))
        else:
            tokens.extend(target.tokens(range(target.processed)))
            tokens.extend(other.tokens(range(other.processed)))
    return tokens


def assemble(structure: ClaimStructure, capture: Any, outcome: bool, n_groups: Optional[int] = None) -> List[ProvToken]:
    """Minimal token set for a verdict.

    capture is a StreamCapture (simple), a list of GroupCapture in group
    processing order (nested) or an OrdinalCapture (ordinal).
    """
    if isinstance(structure, SimpleStructure):
        tokens = _explain_simple(structure.quantifier, capture, outcome)
    elif isinstance(structure, NestedStructure):
        tokens = _explain_nested(structure, capture, outcome, n_groups)
    elif isinstance(structure, OrdinalStructure):
        tokens = _explain_ordinal(capture)
    else:
        raise TypeError(f"unknown structure {structure!r}")
    return _dedupe(tokens)


def render_tokens(tokens: Sequence[ProvToken], formulas: Dict[str, str], relation: Any = None,
                  text_attribute: Optional[str] = None) -> List[Dict[str, Any]]:
    """Human-readable citations: row id, formula text, polarity and the row's text."""
    rendered = []
    for token in tokens:
        entry: Dict[str, Any] = {
            "row_id": token.row_id,
            "formula": formulas.get(token.formula_id, token.formula_id),
            "polarity": token.polarity.value,
        }
        if relation is not None:
            entry["text"] = relation.text_of(token.row_id, text_attribute)
        rendered.append(entry)
    return rendered
