"""
Relation Ingestion - 关系导入

JSONL 记录 + schema.yaml -> Relation (分句 + 嵌入)
"""
import json
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, Optional, Tuple, Union

import numpy as np
import yaml
from loguru import logger

from src.common.errors import IngestionError
from .embedder import Embedder, FeatureHashEmbedder
from .models import AttrType, AttributeSpec, Relation, Schema, TupleRow
from .segmenter import segment_sentences

_TRUE = {"true", "yes", "1"}
_FALSE = {"false", "no", "0"}


def load_schema(path: Union[str, Path]) -> Schema:
    """加载 schema 声明文件"""
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"schema file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}

    entries = data.get("attributes", data if isinstance(data, list) else [])
    attributes = []
    for entry in entries:
        try:
            attributes.append(AttributeSpec(
                name=entry["name"],
                type=AttrType(entry["type"]),
                description=entry.get("description", ""),
            ))
        except (KeyError, ValueError) as e:
            raise IngestionError(f"invalid schema entry {entry!r}: {e}")
    if not attributes:
        raise IngestionError(f"schema declares no attributes: {path}")
    return Schema(attributes=attributes)


def coerce_value(value: Any, attr: AttributeSpec) -> Any:
    """Validate and coerce one attribute value; raises ValueError."""
    if value is None:
        raise ValueError(f"attribute {attr.name!r} is null")
    kind = attr.type
    if kind == AttrType.TEXT or kind == AttrType.CATEGORICAL:
        if not isinstance(value, str):
            raise ValueError(f"attribute {attr.name!r} expects a string, got {type(value).__name__}")
        return value
    if kind == AttrType.BOOL:
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.strip().lower() in _TRUE | _FALSE:
            return value.strip().lower() in _TRUE
        raise ValueError(f"attribute {attr.name!r} expects a bool, got {value!r}")
    if isinstance(value, bool):
        raise ValueError(f"attribute {attr.name!r} expects a number, got {value!r}")
    if kind == AttrType.INT:
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        if isinstance(value, str):
            return int(value.strip())
        raise ValueError(f"attribute {attr.name!r} expects an int, got {value!r}")
    # REAL
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return float(value.strip())
    raise ValueError(f"attribute {attr.name!r} expects a real, got {value!r}")


def build_row(row_id: int, record: Dict[str, Any], schema: Schema, embedder: Embedder) -> TupleRow:
    """Validate a record and attach sentences and embeddings."""
    attrs: Dict[str, Any] = {}
    for attr in schema.attributes:
        if attr.name not in record:
            raise ValueError(f"missing attribute {attr.name!r}")
        attrs[attr.name] = coerce_value(record[attr.name], attr)

    sentences, sentence_attrs = [], []
    attr_embeddings: Dict[str, np.ndarray] = {}
    for name in schema.text_attributes():
        pieces = segment_sentences(attrs[name])
        sentences.extend(pieces)
        sentence_attrs.extend([name] * len(pieces))
        attr_embeddings[name] = embedder.embed(attrs[name])

    full_text = " ".join(attrs[name] for name in schema.text_attributes())
    return TupleRow(
        row_id=row_id,
        attrs=attrs,
        sentences=sentences,
        sentence_attrs=sentence_attrs,
        sentence_embeddings=embedder.embed_many(sentences) if sentences else None,
        doc_embedding=embedder.embed(full_text),
        attr_embeddings=attr_embeddings,
    )


def ingest(
    records: Iterable[Dict[str, Any]],
    schema: Schema,
    embedder: Optional[Embedder] = None,
    name: str = "df",
) -> Relation:
    """Ingest records; row ids follow record order. Errors name the 1-based record line."""
    embedder = embedder or FeatureHashEmbedder()
    rows = []
    for index, record in enumerate(records):
        try:
            rows.append(build_row(index, record, schema, embedder))
        except ValueError as e:
            raise IngestionError(str(e), line=index + 1)
    logger.bind(relation=name).info(f"ingested {len(rows)} tuples")
    return Relation(
        schema=schema,
        rows=rows,
        name=name,
        embedder_name=embedder.name,
        dimension=embedder.dimension,
    )


def read_jsonl(path: Union[str, Path]) -> Iterator[Tuple[int, Dict[str, Any]]]:
    """Yield (file line number, JSON object) pairs, skipping blank lines."""
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"records file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise IngestionError(f"malformed JSON: {e.msg}", line=line_no)
            if not isinstance(record, dict):
                raise IngestionError("record is not a JSON object", line=line_no)
            yield line_no, record


def ingest_jsonl(
    records_path: Union[str, Path],
    schema: Schema,
    embedder: Optional[Embedder] = None,
    name: str = "df",
) -> Relation:
    """Ingest a JSONL file; errors name the file line."""
    embedder = embedder or FeatureHashEmbedder()
    rows = []
    for line_no, record in read_jsonl(records_path):
        try:
            rows.append(build_row(len(rows), record, schema, embedder))
        except ValueError as e:
            raise IngestionError(str(e), line=line_no)
    logger.bind(relation=name).info(f"ingested {len(rows)} tuples from {records_path}")
    return Relation(schema=schema, rows=rows, name=name,
                    embedder_name=embedder.name, dimension=embedder.dimension)
