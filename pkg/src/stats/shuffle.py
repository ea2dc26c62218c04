"""Seeded shuffling of streams and group blocks."""
import random
from typing import Any, Callable, Hashable, List, Optional, Sequence, TypeVar

from src.common.errors import InvariantError

T = TypeVar("T")


def contiguous_blocks(items: Sequence[T], key: Callable[[T], Hashable]) -> List[List[T]]:
    """Split a group-contiguous sequence into blocks; a reappearing key is an error."""
    blocks: List[List[T]] = []
    seen = set()
    current_key: Any = object()
    for item in items:
        k = key(item)
        if blocks and k == current_key:
            blocks[-1].append(item)
            continue
        if k in seen:
            raise InvariantError(f"input is not group-contiguous: key {k!r} reappears")
        seen.add(k)
        current_key = k
        blocks.append([item])
    return blocks


def shuffle(
    items: Sequence[T],
    seed: int,
    hierarchical: bool = False,
    key: Optional[Callable[[T], Hashable]] = None,
    shuffle_within: bool = True,
) -> List[T]:
    """Fisher-Yates permutation from a seeded generator.

    Hierarchical mode permutes the order of contiguous blocks (by key) and then,
    if shuffle_within, the items inside each block.
    """
    rng = random.Random(seed)
    if not hierarchical:
        out = list(items)
        rng.shuffle(out)
        return out
    if key is None:
        raise ValueError("hierarchical shuffle needs a block key")
    blocks = contiguous_blocks(items, key)
    rng.shuffle(blocks)
    if shuffle_within:
        for block in blocks:
            rng.shuffle(block)
    return [item for block in blocks for item in block]
