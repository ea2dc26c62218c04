"""
Claim IR - 声明中间表示
"""
from __future__ import annotations

import math
from enum import Enum
from typing import Annotated, Any, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

# float thresholds such as 0.3 * 10 must compare equal to the integer count 3
_REL_TOL = 1e-9


def _tol(threshold: float) -> float:
    return _REL_TOL * max(1.0, abs(threshold))


def tolerant_ceil(value: float) -> int:
    return math.ceil(value - _tol(value))


def tolerant_floor(value: float) -> int:
    return math.floor(value + _tol(value))


class ComparisonOp(Enum):
    """Comparison operators"""
    GE = ">="
    GT = ">"
    LE = "<="
    LT = "<"
    EQ = "=="
    NE = "!="

    @property
    def symbol(self) -> str:
        return self.value

    @property
    def negated(self) -> "ComparisonOp":
        return _NEGATION[self]

    @property
    def flipped(self) -> "ComparisonOp":
        """Operator with operands swapped (k < x  <=>  x > k)."""
        return _FLIP[self]

    def apply(self, value: float, threshold: float) -> bool:
        tol = _tol(threshold)
        if self == ComparisonOp.GE:
            return value >= threshold - tol
        if self == ComparisonOp.GT:
            return value > threshold + tol
        if self == ComparisonOp.LE:
            return value <= threshold + tol
        if self == ComparisonOp.LT:
            return value < threshold - tol
        if self == ComparisonOp.EQ:
            return abs(value - threshold) <= tol
        return abs(value - threshold) > tol


_NEGATION = {
    ComparisonOp.GE: ComparisonOp.LT,
    ComparisonOp.LT: ComparisonOp.GE,
    ComparisonOp.GT: ComparisonOp.LE,
    ComparisonOp.LE: ComparisonOp.GT,
    ComparisonOp.EQ: ComparisonOp.NE,
    ComparisonOp.NE: ComparisonOp.EQ,
}

_FLIP = {
    ComparisonOp.GE: ComparisonOp.LE,
    ComparisonOp.LE: ComparisonOp.GE,
    ComparisonOp.GT: ComparisonOp.LT,
    ComparisonOp.LT: ComparisonOp.GT,
    ComparisonOp.EQ: ComparisonOp.EQ,
    ComparisonOp.NE: ComparisonOp.NE,
}


class Comparison(BaseModel):
    """A comparison against a numeric threshold"""
    model_config = ConfigDict(frozen=True)

    op: ComparisonOp
    threshold: float

    def holds(self, value: float) -> bool:
        return self.op.apply(value, self.threshold)

    def negate(self) -> "Comparison":
        return Comparison(op=self.op.negated, threshold=self.threshold)

    def __str__(self) -> str:
        return f"{self.op.symbol} {self.threshold:g}"


class QuantifierKind(Enum):
    EXISTS = "EXISTS"
    FORALL = "FORALL"
    CARDINAL = "CARDINAL"
    PROPORTIONAL = "PROPORTIONAL"


class Quantifier(BaseModel):
    """Quantifier over a relation"""
    model_config = ConfigDict(frozen=True)

    kind: QuantifierKind
    op: Optional[ComparisonOp] = None
    threshold: Optional[float] = None

    @model_validator(mode="after")
    def _check_threshold(self) -> "Quantifier":
        if self.kind in (QuantifierKind.CARDINAL, QuantifierKind.PROPORTIONAL):
            if self.op is None or self.threshold is None:
                raise ValueError(f"{self.kind.value} quantifier needs op and threshold")
            if self.kind == QuantifierKind.PROPORTIONAL and not 0.0 <= self.threshold <= 1.0:
                raise ValueError("proportional threshold must lie in [0, 1]")
            if self.kind == QuantifierKind.CARDINAL and self.threshold < 0:
                raise ValueError("cardinal threshold must be non-negative")
        return self

    @classmethod
    def exists(cls) -> "Quantifier":
        return cls(kind=QuantifierKind.EXISTS)

    @classmethod
    def forall(cls) -> "Quantifier":
        return cls(kind=QuantifierKind.FORALL)

    @classmethod
    def cardinal(cls, op: ComparisonOp, k: float) -> "Quantifier":
        return cls(kind=QuantifierKind.CARDINAL, op=op, threshold=k)

    @classmethod
    def proportional(cls, op: ComparisonOp, p: float) -> "Quantifier":
        return cls(kind=QuantifierKind.PROPORTIONAL, op=op, threshold=p)

    def __str__(self) -> str:
        if self.kind in (QuantifierKind.EXISTS, QuantifierKind.FORALL):
            return self.kind.value
        return f"{self.kind.value}({self.op.symbol} {self.threshold:g})"


class SimpleStructure(BaseModel):
    """Quantifier applied directly to the tuples of the relation"""
    model_config = ConfigDict(frozen=True)

    kind: Literal["simple"] = "simple"
    quantifier: Quantifier


class OrdinalStructure(BaseModel):
    """Rank of one group among all groups by a per-group aggregate"""
    model_config = ConfigDict(frozen=True)

    kind: Literal["ordinal"] = "ordinal"
    group_keys: List[str]
    aggregate: Literal["count", "proportion"] = "proportion"
    target_group: List[Any]
    target_rank: int = 1
    descending: bool = True


class NestedStructure(BaseModel):
    """Outer quantifier over groups of an inner quantified claim"""
    model_config = ConfigDict(frozen=True)

    kind: Literal["nested"] = "nested"
    outer: Quantifier
    group_keys: List[str]
    inner: Quantifier


ClaimStructure = Annotated[
    Union[SimpleStructure, OrdinalStructure, NestedStructure],
    Field(discriminator="kind"),
]


class Scope(BaseModel):
    """Restriction of the relation: a symbolic DSL expression and/or a semantic prompt"""
    symbolic: Optional[str] = None
    semantic: Optional[str] = None


class Claim(BaseModel):
    """A natural-language claim and its (optional) structured form"""
    id: str = ""
    text: str
    aggregation_prompt: Optional[str] = None
    structure: Optional[ClaimStructure] = None
    formula_prompt: Optional[str] = None
    scope: Optional[Scope] = None
    grounded: Optional[bool] = None
    program: Optional[str] = None
