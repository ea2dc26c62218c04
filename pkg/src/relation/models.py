"""
Relation Data Models
"""
from __future__ import annotations

from enum import Enum
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field


class AttrType(Enum):
    """Attribute types"""
    TEXT = "text"
    INT = "int"
    REAL = "real"
    BOOL = "bool"
    CATEGORICAL = "categorical"

    @property
    def is_numeric(self) -> bool:
        return self in (AttrType.INT, AttrType.REAL)

    @property
    def is_stringy(self) -> bool:
        return self in (AttrType.TEXT, AttrType.CATEGORICAL)


class AttributeSpec(BaseModel):
    """One declared attribute"""
    name: str
    type: AttrType
    description: str = ""


class Schema(BaseModel):
    """Ordered attribute declarations of a relation"""
    attributes: List[AttributeSpec] = Field(default_factory=list)

    @property
    def names(self) -> List[str]:
        return [a.name for a in self.attributes]

    def has(self, name: str) -> bool:
        return any(a.name == name for a in self.attributes)

    def get(self, name: str) -> Optional[AttributeSpec]:
        for attr in self.attributes:
            if attr.name == name:
                return attr
        return None

    def type_of(self, name: str) -> Optional[AttrType]:
        attr = self.get(name)
        return attr.type if attr else None

    def text_attributes(self) -> List[str]:
        return [a.name for a in self.attributes if a.type == AttrType.TEXT]

    def describe(self) -> str:
        """Render 'name (type): description' lines for prompts."""
        lines = []
        for a in self.attributes:
            line = f"- {a.name} ({a.type.value})"
            if a.description:
                line += f": {a.description}"
            lines.append(line)
        return "\n".join(lines)


@dataclass
class TupleRow:
    """A single tuple with its sentences and embeddings"""
    row_id: int
    attrs: Dict[str, Any]
    sentences: List[str] = field(default_factory=list)
    sentence_attrs: List[str] = field(default_factory=list)
    sentence_embeddings: Optional[np.ndarray] = None  # (num_sentences, D)
    doc_embedding: Optional[np.ndarray] = None
    attr_embeddings: Dict[str, np.ndarray] = field(default_factory=dict)

    def sentence_matrix(self, attr: Optional[str] = None) -> np.ndarray:
        """Sentence embeddings, optionally restricted to one text attribute."""
        if self.sentence_embeddings is None or not self.sentences:
            return np.zeros((0, 0))
        if attr is None:
            return self.sentence_embeddings
        mask = np.asarray([a == attr for a in self.sentence_attrs], dtype=bool)
        return self.sentence_embeddings[mask]

    def embedding_for(self, attr: Optional[str] = None) -> Optional[np.ndarray]:
        if attr is not None and attr in self.attr_embeddings:
            return self.attr_embeddings[attr]
        return self.doc_embedding


@dataclass
class Relation:
    """An ingested, immutable collection of tuples"""
    schema: Schema
    rows: List[TupleRow] = field(default_factory=list)
    name: str = "df"
    embedder_name: str = "feature-hash"
    dimension: int = 256

    def __len__(self) -> int:
        return len(self.rows)

    def row(self, row_id: int) -> TupleRow:
        # row ids are assigned 0..n-1 in record order
        if 0 <= row_id < len(self.rows) and self.rows[row_id].row_id == row_id:
            return self.rows[row_id]
        for row in self.rows:
            if row.row_id == row_id:
                return row
        raise KeyError(f"unknown row_id {row_id}")

    def text_of(self, row_id: int, attr: Optional[str] = None) -> str:
        """Source text of a tuple (all text attributes joined when attr is None)."""
        row = self.row(row_id)
        names = [attr] if attr else self.schema.text_attributes()
        return " ".join(str(row.attrs.get(n, "")) for n in names)

    def group_sizes(self, keys: Sequence[str]) -> Dict[Tuple[Any, ...], int]:
        sizes: Dict[Tuple[Any, ...], int] = {}
        for row in self.rows:
            key = tuple(row.attrs[k] for k in keys)
            sizes[key] = sizes.get(key, 0) + 1
        return sizes
