"""
Provenance Data Models
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict


class Polarity(Enum):
    """POS: φ(t) held; NEG: φ(t) did not hold"""
    POS = "POS"
    NEG = "NEG"

    @classmethod
    def of(cls, value: bool) -> "Polarity":
        return cls.POS if value else cls.NEG


class ProvToken(BaseModel):
    """(row, formula, polarity)"""
    model_config = ConfigDict(frozen=True)

    row_id: int
    formula_id: str
    polarity: Polarity

    @property
    def literal(self) -> Tuple[int, Polarity]:
        return self.row_id, self.polarity


@dataclass
class StreamCapture:
    """Formula values of the rows one accumulator consumed, in consumption order"""
    formula_id: str
    row_ids: List[int] = field(default_factory=list)
    values: List[bool] = field(default_factory=list)
    n_total: Optional[int] = None

    def record(self, row_id: int, value: bool) -> None:
        self.row_ids.append(row_id)
        self.values.append(bool(value))

    @property
    def processed(self) -> int:
        return len(self.values)

    @property
    def positives(self) -> int:
        return sum(1 for v in self.values if v)

    def tokens(self, indices: Iterable[int]) -> List[ProvToken]:
        return [ProvToken(row_id=self.row_ids[i], formula_id=self.formula_id,
                          polarity=Polarity.of(self.values[i])) for i in indices]


@dataclass
class GroupCapture:
    """Inner stream of one group and the group's inner outcome"""
    key: Tuple[Any, ...]
    stream: StreamCapture
    outcome: bool


@dataclass
class OrdinalCapture:
    """Per-group streams of a ranked aggregate; order is group processing order"""
    groups: Dict[Tuple[Any, ...], StreamCapture]
    aggregate: str = "proportion"        # count | proportion
    target: Optional[Tuple[Any, ...]] = None


Literal_ = Tuple[int, Polarity]
Monomial = FrozenSet[Literal_]


@dataclass(frozen=True)
class ProvPolynomial:
    """Set of monomials over p_t / p̄_t with p_t · p̄_t = 0 (test oracle only)"""
    monomials: FrozenSet[Monomial] = frozenset()

    @classmethod
    def zero(cls) -> "ProvPolynomial":
        return cls(frozenset())

    @classmethod
    def one(cls) -> "ProvPolynomial":
        return cls(frozenset([frozenset()]))

    @classmethod
    def literal(cls, row_id: int, polarity: Polarity) -> "ProvPolynomial":
        return cls(frozenset([frozenset([(row_id, polarity)])]))

    @property
    def is_zero(self) -> bool:
        return not self.monomials

    def __add__(self, other: "ProvPolynomial") -> "ProvPolynomial":
        return ProvPolynomial(self.monomials | other.monomials)

    def __mul__(self, other: "ProvPolynomial") -> "ProvPolynomial":
        out = set()
        for a in self.monomials:
            for b in other.monomials:
                merged = a | b
                if not _contradictory(merged):
                    out.add(merged)
        return ProvPolynomial(frozenset(out))

    def __len__(self) -> int:
        return len(self.monomials)


def _contradictory(monomial: Monomial) -> bool:
    rows = {}
    for row_id, polarity in monomial:
        if rows.setdefault(row_id, polarity) != polarity:
            return True
    return False


def literals_of(tokens: Sequence[ProvToken]) -> FrozenSet[Literal_]:
    return frozenset(t.literal for t in tokens)
