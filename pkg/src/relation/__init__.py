"""
关系模块

提供:
- 属性类型与 schema
- 分句与确定性嵌入
- JSONL 导入与物化存储
"""

from .models import AttrType, AttributeSpec, Schema, TupleRow, Relation
from .segmenter import segment_sentences
from .embedder import Embedder, FeatureHashEmbedder, cosine, get_embedder, tokenize
from .ingest import coerce_value, ingest, ingest_jsonl, load_schema, read_jsonl
from .storage import load_relation, save_relation

__all__ = [
    "AttrType",
    "AttributeSpec",
    "Schema",
    "TupleRow",
    "Relation",
    "segment_sentences",
    "Embedder",
    "FeatureHashEmbedder",
    "cosine",
    "get_embedder",
    "tokenize",
    "coerce_value",
    "ingest",
    "ingest_jsonl",
    "load_schema",
    "read_jsonl",
    "load_relation",
    "save_relation",
]
