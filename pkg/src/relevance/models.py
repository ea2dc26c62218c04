"""Relevance Data Models"""
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np


def dedupe_keywords(keywords: Iterable[str]) -> Tuple[str, ...]:
    """Lower-case, strip and deduplicate, keeping first occurrence order."""
    seen = []
    for kw in keywords:
        kw = str(kw).strip().lower()
        if kw and kw not in seen:
            seen.append(kw)
    return tuple(seen)


@dataclass(frozen=True)
class SearchSpec:
    """Retrieval hints for one semantic expression"""
    query: str
    query_embedding: np.ndarray = field(compare=False, repr=False)
    inclusion_keywords: Tuple[str, ...] = ()
    exclusion_keywords: Tuple[str, ...] = ()
    attribute: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "inclusion_keywords", dedupe_keywords(self.inclusion_keywords))
        object.__setattr__(self, "exclusion_keywords", dedupe_keywords(self.exclusion_keywords))

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "include_keywords": list(self.inclusion_keywords),
            "exclude_keywords": list(self.exclusion_keywords),
            "attribute": self.attribute,
        }


@dataclass
class PrefilterResult:
    kept: List = field(default_factory=list)
    dropped: int = 0
