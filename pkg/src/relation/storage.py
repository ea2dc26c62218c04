"""JSON file storage for materialized relations."""

import json
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from src.common.errors import IngestionError
from .models import Relation, Schema, TupleRow


def _serialize_row(row: TupleRow) -> Dict[str, Any]:
    return {
        "row_id": row.row_id,
        "attrs": row.attrs,
        "sentences": row.sentences,
        "sentence_attrs": row.sentence_attrs,
        "sentence_embeddings": (
            row.sentence_embeddings.tolist() if row.sentence_embeddings is not None else None
        ),
        "doc_embedding": row.doc_embedding.tolist() if row.doc_embedding is not None else None,
        "attr_embeddings": {k: v.tolist() for k, v in row.attr_embeddings.items()},
    }


def _deserialize_row(data: Dict[str, Any]) -> TupleRow:
    sentence_embeddings = data.get("sentence_embeddings")
    doc_embedding = data.get("doc_embedding")
    return TupleRow(
        row_id=data["row_id"],
        attrs=data["attrs"],
        sentences=data.get("sentences", []),
        sentence_attrs=data.get("sentence_attrs", []),
        sentence_embeddings=np.asarray(sentence_embeddings) if sentence_embeddings else None,
        doc_embedding=np.asarray(doc_embedding) if doc_embedding is not None else None,
        attr_embeddings={k: np.asarray(v) for k, v in data.get("attr_embeddings", {}).items()},
    )


def save_relation(relation: Relation, path: Union[str, Path]) -> Path:
    """Save a materialized relation to a JSON file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "name": relation.name,
        "embedder": relation.embedder_name,
        "dimension": relation.dimension,
        "schema": relation.schema.model_dump(mode="json"),
        "rows": [_serialize_row(r) for r in relation.rows],
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False)
    return path


def load_relation(path: Union[str, Path]) -> Relation:
    """Load a relation saved by save_relation."""
    path = Path(path)
    if not path.exists():
        raise IngestionError(f"materialized relation not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except json.JSONDecodeError as e:
        raise IngestionError(f"corrupt relation file {path}: {e.msg}", line=e.lineno)
    return Relation(
        schema=Schema.model_validate(payload["schema"]),
        rows=[_deserialize_row(r) for r in payload["rows"]],
        name=payload.get("name", "df"),
        embedder_name=payload.get("embedder", "feature-hash"),
        dimension=payload.get("dimension", 256),
    )
