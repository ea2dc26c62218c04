"""
Optimizer Data Models - 物理计划节点与聚合注解

物理节点与逻辑节点一样带 child 字段, 因此 dsl.chain() 同样适用.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from src.claims.models import ClaimStructure, Comparison
from src.dsl.models import AggExpr, ColumnRef, PromptExpr, chain
from src.relevance.models import SearchSpec
from src.stats.models import BudgetPlan


class Strategy(Enum):
    """Per-aggregate early-resolution strategy"""
    NONE = "none"
    RELEVANCE = "relevance"
    ESTIMATION = "estimation"


class TotalSource(Enum):
    """Where an aggregate's input count comes from"""
    NONE = "none"
    COUNT_SCAN = "count_scan"      # ungrouped: CountScan below
    GROUP_SORT = "group_sort"      # grouped: exact per-group counts of the GroupSort
    GROUPS = "groups"              # outer: number of groups of an exact GroupSort


@dataclass(frozen=True)
class AggAnnotation:
    """Optimizer decisions for one aggregate expression"""
    hint: Optional[Comparison] = None
    strategy: Strategy = Strategy.NONE
    operator_index: Optional[int] = None     # index into the BudgetPlan when estimating
    formula_id: str = ""


@dataclass(frozen=True)
class CountScan:
    """Pipeline breaker that counts its input before passing it on"""
    child: Any


@dataclass(frozen=True)
class GroupSort:
    """Sorts rows into group-contiguous order and records per-group counts"""
    child: Any
    keys: Tuple[str, ...]
    exact_counts: bool = True


@dataclass(frozen=True)
class Shuffle:
    child: Any
    seed: int = 0
    hierarchical: bool = False
    keys: Tuple[str, ...] = ()
    shuffle_within: bool = True


@dataclass(frozen=True)
class RelevanceSort:
    child: Any
    spec: SearchSpec
    attribute: Optional[str] = None


@dataclass(frozen=True)
class SimilarityPrefilter:
    child: Any
    spec: SearchSpec
    threshold: float = 0.15
    attribute: Optional[str] = None


@dataclass(frozen=True)
class FusedPartSpec:
    """One prompt of a fused operator: kind is 'filter' or 'map'"""
    kind: str
    expr: PromptExpr
    out_name: Optional[str] = None


@dataclass(frozen=True)
class FusedSemantic:
    child: Any
    parts: Tuple[FusedPartSpec, ...]

    @property
    def has_filter(self) -> bool:
        return any(p.kind == "filter" for p in self.parts)


@dataclass(frozen=True)
class PhysicalAggregate:
    child: Any
    aggs: Tuple[AggExpr, ...]
    group_by: Tuple[ColumnRef, ...] = ()
    annotations: Tuple[AggAnnotation, ...] = ()
    totals: TotalSource = TotalSource.NONE

    @property
    def group_keys(self) -> Tuple[str, ...]:
        return tuple(c.name for c in self.group_by)


@dataclass
class PhysicalPlan:
    """Optimizer output: the physical operator tree plus what execution needs"""
    root: Any
    logical: Any
    structure: Optional[ClaimStructure]
    budget: BudgetPlan
    formulas: Dict[str, str] = field(default_factory=dict)
    text_attribute: Optional[str] = None

    def annotations(self):
        for node in chain(self.root):
            if isinstance(node, PhysicalAggregate):
                yield from zip(node.aggs, node.annotations)
