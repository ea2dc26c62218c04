"""Streaming grouped aggregation over group-contiguous input."""
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Iterator, List, Optional, Sequence, Tuple

from src.common.errors import InvariantError
from .accumulator import Accumulator, accumulate, finalize

GroupKey = Tuple[Any, ...]
Item = Tuple[GroupKey, Optional[int], Sequence[bool]]


@dataclass
class GroupResult:
    """Accumulators of one group; index is the 1-based processing position"""
    key: GroupKey
    index: int
    accumulators: List[Accumulator] = field(default_factory=list)
    discarded: int = 0

    @property
    def done(self) -> bool:
        return all(not acc.running for acc in self.accumulators)


def streaming_group_aggregate(
    items: Iterable[Item],
    new_accumulators: Callable[[GroupKey, int], List[Accumulator]],
    on_group_resolved: Optional[Callable[[GroupKey], None]] = None,
) -> Iterator[GroupResult]:
    """Aggregate (key, row_id, values) items group by group.

    A group is yielded as soon as all its accumulators stop running, or when
    its last item has been seen. Items of an already yielded group are
    discarded; a key that reappears after another key is an invariant error.
    """
    current: Optional[GroupResult] = None
    finished = set()
    count = 0

    for key, row_id, values in items:
        if current is None or key != current.key:
            if key in finished:
                raise InvariantError(f"group {key!r} reappeared; input is not group-contiguous")
            if current is not None and current.key not in finished:
                for acc in current.accumulators:
                    finalize(acc)
                finished.add(current.key)
                yield current
            count += 1
            current = GroupResult(key=key, index=count, accumulators=new_accumulators(key, count))

        if current.key in finished:
            # leftovers of a resolved group within an evaluated batch
            current.discarded += 1
            continue
        for acc, value in zip(current.accumulators, values):
            if acc.running:
                accumulate(acc, value, row_id)
        if current.done:
            finished.add(current.key)
            if on_group_resolved is not None:
                on_group_resolved(current.key)
            yield current

    if current is not None and current.key not in finished:
        for acc in current.accumulators:
            finalize(acc)
        yield current
