"""
Relevance Sorting - 相关性排序

三路信号 (余弦相似度, 包含关键词命中数, 排除关键词缺失数) 经 RRF 融合.
"""
from typing import List, Optional, Sequence

import numpy as np

from src.relation.models import TupleRow
from .keywords import keyword_hits
from .models import SearchSpec

RRF_K = 60
# fused scores are rounded so equal rank multisets tie exactly
_SCORE_DECIMALS = 12


def rank_positions(scores: Sequence[float], row_ids: Sequence[int]) -> np.ndarray:
    """1-based rank of each element under descending score, ties by ascending row_id."""
    scores = np.asarray(scores, dtype=np.float64)
    row_ids = np.asarray(row_ids)
    order = np.lexsort((row_ids, -scores))
    ranks = np.empty(len(order), dtype=np.int64)
    ranks[order] = np.arange(1, len(order) + 1)
    return ranks


def rrf_score(ranks: Sequence[int], k: int = RRF_K) -> float:
    """Reciprocal rank fusion: sum of 1 / (k + rank)."""
    return float(sum(1.0 / (k + r) for r in ranks))


def signal_scores(rows: Sequence[TupleRow], spec: SearchSpec, attribute: Optional[str] = None):
    """Cosine, inclusion-hit and exclusion-miss scores for each row."""
    attribute = attribute or spec.attribute
    embeddings = np.vstack([row.embedding_for(attribute) for row in rows])
    cosines = embeddings @ spec.query_embedding
    texts = [_row_text(row, attribute) for row in rows]
    inclusion = np.array([keyword_hits(t, spec.inclusion_keywords) for t in texts], dtype=np.float64)
    exclusion_misses = np.array(
        [len(spec.exclusion_keywords) - keyword_hits(t, spec.exclusion_keywords) for t in texts],
        dtype=np.float64,
    )
    return cosines, inclusion, exclusion_misses


def relevance_sort(
    rows: Sequence[TupleRow],
    spec: SearchSpec,
    attribute: Optional[str] = None,
    k: int = RRF_K,
) -> List[TupleRow]:
    """Reorder rows by fused relevance; ties by ascending row_id."""
    if len(rows) <= 1:
        return list(rows)
    row_ids = np.array([row.row_id for row in rows])
    fused = np.zeros(len(rows), dtype=np.float64)
    for signal in signal_scores(rows, spec, attribute):
        fused += 1.0 / (k + rank_positions(signal, row_ids))
    fused = np.round(fused, _SCORE_DECIMALS)
    order = np.lexsort((row_ids, -fused))
    return [rows[i] for i in order]


def _row_text(row: TupleRow, attribute: Optional[str]) -> str:
    if attribute is not None and attribute in row.attrs:
        return str(row.attrs[attribute])
    return " ".join(row.sentences)
