"""Dense rank over per-group values."""
from typing import List, Optional, Sequence


def dense_rank(values: Sequence[Optional[float]], descending: bool = True) -> List[int]:
    """1 + number of distinct values strictly better; ties share a rank, no gaps.

    Missing values rank after every present value.
    """
    distinct = sorted({v for v in values if v is not None}, reverse=descending)
    position = {v: i + 1 for i, v in enumerate(distinct)}
    return [position[v] if v is not None else len(distinct) + 1 for v in values]
