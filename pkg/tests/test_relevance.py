"""
Relevance tests.
Tests for keyword matching, rank fusion and the similarity prefilter.
"""
import numpy as np
import pytest

from src.relation.embedder import get_embedder
from src.relation.models import TupleRow
from src.relevance.keywords import keyword_hits
from src.relevance.models import SearchSpec, dedupe_keywords
from src.relevance.prefilter import prefilter_rows, similarity_prefilter
from src.relevance.ranking import rank_positions, relevance_sort, rrf_score


def _unit(*values):
    v = np.asarray(values, dtype=np.float64)
    return v / np.linalg.norm(v)


def _row_with_similarities(row_id, sims):
    """Row whose sentence cosines against e1 are exactly sims."""
    embeddings = np.array([[s, np.sqrt(1.0 - s * s), 0.0] for s in sims]).reshape(len(sims), 3)
    return TupleRow(
        row_id=row_id,
        attrs={"review": " ".join(f"s{i}." for i in range(len(sims)))},
        sentences=[f"s{i}." for i in range(len(sims))],
        sentence_attrs=["review"] * len(sims),
        sentence_embeddings=embeddings,
        doc_embedding=_unit(1, 1, 1),
    )


E1_SPEC = SearchSpec(query="q", query_embedding=_unit(1, 0, 0))


class TestKeywords:
    """Tests for whole-word keyword hits."""

    def test_counts_each_keyword_once(self):
        assert keyword_hits("Service was RUDE and slow", ["rude", "slow", "wait"]) == 2
        assert keyword_hits("rude rude rude", ["rude"]) == 1

    def test_whole_word(self):
        assert keyword_hits("rudeness", ["rude"]) == 0

    def test_empty_keywords(self):
        assert keyword_hits("anything", []) == 0

    def test_phrase(self):
        assert keyword_hits("They had live music tonight", ["live music"]) == 1

    def test_spec_dedupes_keywords(self):
        spec = SearchSpec(query="q", query_embedding=_unit(1, 0), inclusion_keywords=("Rude", "rude ", "slow"))
        assert spec.inclusion_keywords == ("rude", "slow")
        assert dedupe_keywords(["", " A", "a"]) == ("a",)


class TestRanking:
    """Tests for reciprocal rank fusion."""

    def test_rrf_constant(self):
        assert rrf_score([1, 2, 3]) == pytest.approx(1 / 61 + 1 / 62 + 1 / 63, abs=1e-12)

    def test_rank_positions_tie_by_row_id(self):
        ranks = rank_positions([0.5, 0.9, 0.5], [7, 3, 2])
        assert list(ranks) == [3, 1, 2]

    def test_witness_ranked_first(self, review_relation):
        embedder = get_embedder(review_relation.embedder_name, review_relation.dimension)
        spec = SearchSpec(query="rude server", query_embedding=embedder.embed("rude server"),
                          inclusion_keywords=("rude",))
        ordered = relevance_sort(review_relation.rows, spec, attribute="review")
        assert ordered[0].row_id == 1
        assert sorted(r.row_id for r in ordered) == list(range(len(review_relation)))

    def test_identical_rows_keep_row_id_order(self):
        a = _row_with_similarities(2, [0.3])
        b = _row_with_similarities(5, [0.3])
        assert [r.row_id for r in relevance_sort([a, b], E1_SPEC)] == [2, 5]
        assert [r.row_id for r in relevance_sort([b, a], E1_SPEC)] == [2, 5]

    def test_single_row(self):
        row = _row_with_similarities(0, [0.3])
        assert relevance_sort([row], E1_SPEC) == [row]


class TestPrefilter:
    """Tests for the embedding-similarity prefilter."""

    def test_keep_on_max(self):
        assert similarity_prefilter(_row_with_similarities(0, [0.10, 0.22]), E1_SPEC, 0.15)

    def test_drop_below_threshold(self):
        assert not similarity_prefilter(_row_with_similarities(0, [0.05, 0.10]), E1_SPEC, 0.15)

    def test_negative_threshold_keeps_all(self):
        assert similarity_prefilter(_row_with_similarities(0, [-0.4]), E1_SPEC, -1.0)

    def test_sentence_less_row_is_kept(self):
        row = TupleRow(row_id=0, attrs={"review": ""}, doc_embedding=_unit(1, 0, 0))
        assert similarity_prefilter(row, E1_SPEC, 0.99)

    def test_prefilter_rows_counts_drops(self):
        rows = [_row_with_similarities(i, [s]) for i, s in enumerate([0.5, 0.05, 0.2, 0.0])]
        result = prefilter_rows(rows, E1_SPEC, 0.15)
        assert [r.row_id for r in result.kept] == [0, 2]
        assert result.dropped == 2
