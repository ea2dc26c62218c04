"""Embedding-similarity prefilter in front of semantic filters."""
from typing import Iterable, Optional

import numpy as np

from src.relation.models import TupleRow
from .models import PrefilterResult, SearchSpec

DEFAULT_THRESHOLD = 0.15


def max_sentence_similarity(row: TupleRow, spec: SearchSpec, attribute: Optional[str] = None) -> Optional[float]:
    """Highest cosine between the query and any sentence; None for rows without sentences."""
    matrix = row.sentence_matrix(attribute or spec.attribute)
    if matrix.size == 0:
        return None
    return float(np.max(matrix @ spec.query_embedding))


def similarity_prefilter(
    row: TupleRow,
    spec: SearchSpec,
    threshold: float = DEFAULT_THRESHOLD,
    attribute: Optional[str] = None,
) -> bool:
    """Keep iff the best sentence similarity reaches the threshold; sentence-less rows are kept."""
    best = max_sentence_similarity(row, spec, attribute)
    return best is None or best >= threshold


def prefilter_rows(
    rows: Iterable[TupleRow],
    spec: SearchSpec,
    threshold: float = DEFAULT_THRESHOLD,
    attribute: Optional[str] = None,
) -> PrefilterResult:
    result = PrefilterResult()
    for row in rows:
        if similarity_prefilter(row, spec, threshold, attribute):
            result.kept.append(row)
        else:
            result.dropped += 1
    return result
