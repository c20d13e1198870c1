import gzip

import numpy as np
import pytest

from sdprel.embed import (
    OOV_SCALE,
    EmbeddingTable,
    assemble,
    load_embeddings,
    lookup,
    oov_vector,
)
from sdprel.errors import DimensionMismatch, FormatError


def write_vectors(path, header, rows):
    lines = [header] + rows
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestLoadEmbeddings:
    def test_basic_file(self, tmp_path):
        path = write_vectors(
            tmp_path / "emb.txt",
            "3 4",
            ["alpha 1 2 3 4", "beta 0.5 0.5 0.5 0.5", "gamma -1 -2 -3 -4"],
        )
        table = load_embeddings(path)
        assert table.dimension == 4
        assert len(table.vocabulary) == 3
        assert np.array_equal(table.vocabulary["alpha"], [1.0, 2.0, 3.0, 4.0])

    def test_row_dimension_mismatch(self, tmp_path):
        path = write_vectors(tmp_path / "emb.txt", "1 4", ["alpha 1 2 3"])
        with pytest.raises(DimensionMismatch):
            load_embeddings(path)

    def test_duplicate_keeps_first(self, tmp_path):
        path = write_vectors(
            tmp_path / "emb.txt", "2 2", ["w 1 1", "w 9 9"]
        )
        table = load_embeddings(path)
        assert np.array_equal(table.vocabulary["w"], [1.0, 1.0])
        assert table.duplicate_count == 1

    def test_bad_header(self, tmp_path):
        path = write_vectors(tmp_path / "emb.txt", "not a header", [])
        with pytest.raises(FormatError):
            load_embeddings(path)

    def test_non_numeric_value(self, tmp_path):
        path = write_vectors(tmp_path / "emb.txt", "1 2", ["w 1 x"])
        with pytest.raises(FormatError):
            load_embeddings(path)

    def test_gzip_variant(self, tmp_path):
        path = tmp_path / "emb.txt.gz"
        with gzip.open(path, "wt", encoding="utf-8") as fh:
            fh.write("1 3\nword 1 2 3\n")
        table = load_embeddings(path)
        assert np.array_equal(table.vocabulary["word"], [1.0, 2.0, 3.0])


class TestLookup:
    def table(self):
        return EmbeddingTable(
            dimension=4,
            vocabulary={"protein": np.array([1.0, 2.0, 3.0, 4.0])},
            oov_seed=7,
        )

    def test_in_vocabulary(self):
        assert np.array_equal(lookup(self.table(), "protein"), [1.0, 2.0, 3.0, 4.0])

    def test_lowercase_fallback(self):
        assert np.array_equal(lookup(self.table(), "Protein"), [1.0, 2.0, 3.0, 4.0])

    def test_oov_deterministic(self):
        table = self.table()
        first = lookup(table, "UNSEEN-TOKEN")
        second = lookup(table, "UNSEEN-TOKEN")
        assert np.array_equal(first, second)

    def test_oov_depends_on_token_and_seed(self):
        table = self.table()
        assert not np.array_equal(lookup(table, "aaa"), lookup(table, "bbb"))
        other = EmbeddingTable(dimension=4, vocabulary={}, oov_seed=8)
        assert not np.array_equal(lookup(table, "aaa"), lookup(other, "aaa"))

    def test_oov_bounds_and_norm(self):
        vec = oov_vector("anything", 200, 3)
        assert np.all(np.abs(vec) <= OOV_SCALE)
        assert np.linalg.norm(vec) <= OOV_SCALE * np.sqrt(200)

    def test_empty_table(self):
        table = EmbeddingTable.empty(8, oov_seed=1)
        assert lookup(table, "word").shape == (8,)


class TestAssemble:
    def test_zero_inputs(self):
        out = assemble(np.zeros(200), np.zeros(8), np.zeros(10), np.zeros(10))
        assert out.shape == (228,)
        assert not out.any()

    def test_basis_vector_layout(self):
        word = np.zeros(200)
        word[0] = 1.0
        out = assemble(word, np.zeros(8), np.zeros(10), np.zeros(10))
        assert out[0] == 1.0
        assert out.sum() == 1.0

    def test_pos_segment_slice(self):
        pos = np.arange(8, dtype=float)
        out = assemble(np.zeros(200), pos, np.zeros(10), np.zeros(10))
        assert np.array_equal(out[200:208], pos)

    def test_none_segments_omitted(self):
        out = assemble(np.ones(16), None, None, None)
        assert out.shape == (16,)

    def test_injective_layout(self):
        a = assemble(np.ones(4), np.zeros(2), np.zeros(3), np.zeros(3))
        b = assemble(np.ones(4), np.zeros(2), np.zeros(3), np.ones(3))
        assert not np.array_equal(a, b)

    def test_non_finite_rejected(self):
        with pytest.raises(DimensionMismatch):
            assemble(np.array([np.nan]), None, None, None)

    def test_non_vector_rejected(self):
        with pytest.raises(DimensionMismatch):
            assemble(np.zeros((2, 2)), None, None, None)
