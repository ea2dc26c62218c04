"""
相关性模块

提供:
- SearchSpec 检索提示
- RRF 相关性排序
- 句向量相似度预过滤
- 关键词命中计数
"""

from .models import SearchSpec, PrefilterResult, dedupe_keywords
from .keywords import keyword_hits
from .ranking import RRF_K, rank_positions, relevance_sort, rrf_score, signal_scores
from .prefilter import DEFAULT_THRESHOLD, max_sentence_similarity, prefilter_rows, similarity_prefilter

__all__ = [
    "SearchSpec",
    "PrefilterResult",
    "dedupe_keywords",
    "keyword_hits",
    "RRF_K",
    "rank_positions",
    "relevance_sort",
    "rrf_score",
    "signal_scores",
    "DEFAULT_THRESHOLD",
    "max_sentence_similarity",
    "prefilter_rows",
    "similarity_prefilter",
]
