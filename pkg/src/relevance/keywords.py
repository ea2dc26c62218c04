"""Keyword matching."""
import re
from functools import lru_cache
from typing import Sequence


@lru_cache(maxsize=4096)
def _pattern(keyword: str) -> "re.Pattern[str]":
    return re.compile(r"(?<!\w)" + re.escape(keyword) + r"(?!\w)", re.IGNORECASE)


def keyword_hits(text: str, keywords: Sequence[str]) -> int:
    """Number of keywords present in text as whole words (case-insensitive).

    >>> keyword_hits("Service was RUDE and slow", ["rude", "slow", "wait"])
    2
    """
    if not text or not keywords:
        return 0
    return sum(1 for kw in set(k.strip().lower() for k in keywords if k.strip()) if _pattern(kw).search(text))
