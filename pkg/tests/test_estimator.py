"""Estimator facade and embedding-file round trips."""

import io

import numpy as np
import pytest
from sklearn.exceptions import NotFittedError

from boostne import (
    BoostConfig,
    BoostNE,
    ParseError,
    boostne,
    line_matrix,
    load_edge_list,
    load_embedding,
    save_embedding,
)
from helpers import random_graph


def _triangle():
    return load_edge_list(io.StringIO("a b\nb c\na c\n"))


class TestBoostNEEstimator:
    def test_fit_transform_matches_pipeline(self):
        """The facade reproduces the underlying calls bit for bit."""
        rng = np.random.default_rng(283)
        g = random_graph(rng, 20, weighted=True)
        est = BoostNE(matrix="line", dimension=6, levels=3, shift=1.0, seed=4)
        emb = est.fit_transform(g)
        conn = line_matrix(g, shift=1.0)
        direct = boostne(conn, BoostConfig(levels=3, rank=2, seed=4))
        assert np.array_equal(emb, direct.embedding)
        assert est.embedding_ is emb
        assert est.result_.connectivity_fingerprint == conn.fingerprint()

    def test_accepts_adjacency_matrix(self):
        rng = np.random.default_rng(293)
        g = random_graph(rng, 12)
        est = BoostNE(matrix="line", dimension=4, levels=2, shift=1.0, seed=0)
        from_graph = est.fit_transform(g)
        est2 = BoostNE(matrix="line", dimension=4, levels=2, shift=1.0, seed=0)
        from_adj = est2.fit_transform(g.adjacency)
        assert np.array_equal(from_graph, from_adj)

    def test_grarep_default_shift(self):
        est = BoostNE(matrix="grarep", dimension=2, levels=1, seed=0)
        est.fit(_triangle())
        assert est.connectivity_.config.shift == pytest.approx(1.0 / 3.0)

    def test_transform_requires_fit(self):
        with pytest.raises(NotFittedError):
            BoostNE().transform()

    def test_transform_rejects_other_graph(self):
        rng = np.random.default_rng(307)
        g1 = random_graph(rng, 10)
        g2 = random_graph(rng, 11)
        est = BoostNE(matrix="line", dimension=2, levels=1, shift=1.0, seed=0)
        est.fit(g1)
        assert np.array_equal(est.transform(g1), est.embedding_)
        with pytest.raises(ValueError, match="transductive"):
            est.transform(g2)

    def test_dimension_divisibility(self):
        est = BoostNE(dimension=100, levels=8)
        with pytest.raises(ValueError, match="divisible"):
            est.fit(_triangle())

    def test_unknown_matrix_kind(self):
        est = BoostNE(matrix="hope", dimension=2, levels=1)
        with pytest.raises(ValueError, match="hope"):
            est.fit(_triangle())

    def test_get_set_params_round_trip(self):
        est = BoostNE(dimension=16, levels=4, seed=3)
        params = est.get_params()
        assert params["dimension"] == 16
        assert params["levels"] == 4
        clone = BoostNE(**params)
        assert clone.get_params() == params
        est.set_params(seed=5)
        assert est.seed == 5

    def test_residual_trace_passthrough(self):
        rng = np.random.default_rng(311)
        g = random_graph(rng, 15)
        est = BoostNE(matrix="line", dimension=4, levels=2, shift=1.0, seed=1)
        est.fit(g)
        rows = est.residual_trace()
        assert [r["level"] for r in rows] == [1, 2, 3]


class TestEmbeddingFileFormat:
    def test_round_trip(self, tmp_path):
        """Write then read recovers ids and values to 6 significant digits."""
        rng = np.random.default_rng(313)
        ids = tuple(f"node{i}" for i in range(7))
        matrix = rng.uniform(0, 3, size=(7, 4))
        path = tmp_path / "emb.txt"
        save_embedding(path, ids, matrix)
        back_ids, back = load_embedding(path)
        assert back_ids == ids
        np.testing.assert_allclose(back, matrix, rtol=1e-5)

    def test_header_line(self, tmp_path):
        path = tmp_path / "emb.txt"
        save_embedding(path, ("a", "b"), np.zeros((2, 3)))
        first = path.read_text().splitlines()[0]
        assert first == "2 3"

    def test_six_significant_digits(self, tmp_path):
        path = tmp_path / "emb.txt"
        save_embedding(path, ("a",), np.array([[1.23456789]]))
        assert "1.23457" in path.read_text()

    def test_reload_written_file_is_stable(self, tmp_path):
        """A second save of the loaded matrix is byte-identical."""
        rng = np.random.default_rng(317)
        ids = tuple(f"n{i}" for i in range(5))
        matrix = rng.uniform(0, 1, size=(5, 3))
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        save_embedding(a, ids, matrix)
        back_ids, back = load_embedding(a)
        save_embedding(b, back_ids, back)
        assert a.read_bytes() == b.read_bytes()

    def test_row_count_mismatch(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("2 2\na 1 2\n")
        with pytest.raises(ParseError, match="promises 2"):
            load_embedding(path)

    def test_value_count_mismatch(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("1 3\na 1 2\n")
        with pytest.raises(ParseError, match="line 2"):
            load_embedding(path)

    def test_duplicate_ids(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("2 1\na 1\na 2\n")
        with pytest.raises(ParseError, match="duplicate"):
            load_embedding(path)

    def test_bad_value(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("1 1\na x\n")
        with pytest.raises(ParseError, match="non-numeric"):
            load_embedding(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("")
        with pytest.raises(ParseError, match="empty"):
            load_embedding(path)

    def test_shape_validation_on_save(self, tmp_path):
        with pytest.raises(ValueError):
            save_embedding(tmp_path / "x.txt", ("a", "b"), np.zeros((3, 2)))
