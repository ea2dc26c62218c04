"""
Relation tests.
Tests for sentence segmentation, embeddings, ingestion and relation storage.
"""
import json

import numpy as np
import pytest

from src.common.errors import IngestionError
from src.relation.embedder import FeatureHashEmbedder, get_embedder, tokenize
from src.relation.ingest import coerce_value, ingest, ingest_jsonl, load_schema
from src.relation.models import AttributeSpec, AttrType, Schema
from src.relation.segmenter import segment_sentences
from src.relation.storage import load_relation, save_relation


class TestSegmenter:
    """Tests for sentence segmentation."""

    def test_terminators(self):
        assert segment_sentences("Great food. Bad service!") == ["Great food.", "Bad service!"]

    def test_no_terminator(self):
        assert segment_sentences("no terminator here") == ["no terminator here"]

    def test_empty(self):
        assert segment_sentences("") == []
        assert segment_sentences("   ") == []

    def test_sentences_reconstruct_text(self):
        text = "Why so slow? The soup was delicious.  We left happy!"
        pieces = segment_sentences(text)
        assert " ".join(pieces).split() == text.split()


class TestEmbedder:
    """Tests for the feature-hash embedder."""

    def test_unit_norm(self):
        embedder = FeatureHashEmbedder(64)
        for text in ["rude staff", "The pasta was delicious.", "", "!!!"]:
            assert abs(np.linalg.norm(embedder.embed(text)) - 1.0) < 1e-6

    def test_deterministic(self):
        a = FeatureHashEmbedder(128).embed("slow service tonight")
        b = FeatureHashEmbedder(128).embed("slow service tonight")
        assert np.array_equal(a, b)

    def test_embed_many_shape(self):
        matrix = FeatureHashEmbedder(32).embed_many(["a b", "c d", "e"])
        assert matrix.shape == (3, 32)

    def test_tokenize_lowercases(self):
        assert tokenize("Service WAS rude") == ["service", "was", "rude"]

    def test_factory_rejects_unknown(self):
        with pytest.raises(ValueError):
            get_embedder("word2vec")


class TestIngest:
    """Tests for record ingestion."""

    def test_three_records(self):
        schema = Schema(attributes=[
            AttributeSpec(name="text", type=AttrType.TEXT),
            AttributeSpec(name="business_id", type=AttrType.CATEGORICAL),
        ])
        records = [{"text": f"Review {i}.", "business_id": "b1"} for i in range(3)]
        relation = ingest(records, schema)
        assert len(relation) == 3
        assert [r.row_id for r in relation.rows] == [0, 1, 2]

    def test_empty_stream(self, review_schema):
        assert len(ingest([], review_schema)) == 0

    def test_missing_attribute_names_line(self):
        schema = Schema(attributes=[AttributeSpec(name="text", type=AttrType.TEXT)])
        with pytest.raises(IngestionError) as exc_info:
            ingest([{"text": "fine"}, {"other": "x"}], schema)
        assert exc_info.value.line == 2

    def test_rows_carry_sentences_and_embeddings(self, review_relation):
        row = review_relation.row(0)
        assert row.sentences == ["The pasta was delicious.", "We came for dinner."]
        assert row.sentence_attrs == ["review", "review"]
        assert row.sentence_embeddings.shape[0] == 2
        assert "review" in row.attr_embeddings
        assert abs(np.linalg.norm(row.doc_embedding) - 1.0) < 1e-6

    def test_coerce_values(self):
        assert coerce_value("3", AttributeSpec(name="n", type=AttrType.INT)) == 3
        assert coerce_value(2.0, AttributeSpec(name="n", type=AttrType.INT)) == 2
        assert coerce_value("yes", AttributeSpec(name="b", type=AttrType.BOOL)) is True
        assert coerce_value(1, AttributeSpec(name="x", type=AttrType.REAL)) == 1.0
        with pytest.raises(ValueError):
            coerce_value(3, AttributeSpec(name="c", type=AttrType.CATEGORICAL))
        with pytest.raises(ValueError):
            coerce_value(True, AttributeSpec(name="n", type=AttrType.INT))

    def test_ingest_jsonl_reports_file_line(self, tmp_path, review_schema):
        path = tmp_path / "records.jsonl"
        path.write_text(
            json.dumps({"business": "a", "stars": 3, "review": "ok."}) + "\n\n"
            + json.dumps({"business": "a", "stars": "many", "review": "bad."}) + "\n",
            encoding="utf-8",
        )
        with pytest.raises(IngestionError) as exc_info:
            ingest_jsonl(path, review_schema)
        assert exc_info.value.line == 3

    def test_load_schema(self, tmp_path):
        path = tmp_path / "schema.yaml"
        path.write_text("attributes:\n  - name: review\n    type: text\n  - name: stars\n    type: int\n",
                        encoding="utf-8")
        schema = load_schema(path)
        assert schema.names == ["review", "stars"]
        assert schema.type_of("stars") == AttrType.INT

    def test_load_schema_rejects_unknown_type(self, tmp_path):
        path = tmp_path / "schema.yaml"
        path.write_text("attributes:\n  - name: review\n    type: blob\n", encoding="utf-8")
        with pytest.raises(IngestionError):
            load_schema(path)


class TestRelation:
    """Tests for relation helpers and storage."""

    def test_text_of_and_group_sizes(self, review_relation):
        assert review_relation.text_of(4) == "I ordered the special."
        assert review_relation.group_sizes(["business"]) == {("loc_a",): 3, ("loc_b",): 3, ("loc_c",): 2}

    def test_unknown_row(self, review_relation):
        with pytest.raises(KeyError):
            review_relation.row(99)

    def test_save_and_load(self, tmp_path, review_relation):
        path = save_relation(review_relation, tmp_path / "relation.json")
        loaded = load_relation(path)
        assert len(loaded) == len(review_relation)
        assert loaded.schema.names == review_relation.schema.names
        original, restored = review_relation.row(3), loaded.row(3)
        assert restored.attrs == original.attrs
        assert np.allclose(restored.doc_embedding, original.doc_embedding)
        assert np.allclose(restored.sentence_embeddings, original.sentence_embeddings)

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(IngestionError):
            load_relation(tmp_path / "nope.json")
