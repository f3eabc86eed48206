"""Command-line surface: outputs, exit codes, manifest replay."""

import json

import numpy as np
import pytest
import scipy.sparse as sp

from boostne import (
    NmfConfig,
    factorize,
    line_matrix,
    load_edge_list,
    load_embedding,
    save_edge_list,
)
from boostne.cli import main
from helpers import random_graph


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """A toy graph with labels, written once for the whole module."""
    root = tmp_path_factory.mktemp("cli")
    rng = np.random.default_rng(331)
    g = random_graph(rng, 24, extra_edges=60)
    save_edge_list(g, root / "toy.edges")
    with open(root / "toy.labels", "w") as handle:
        for i, name in enumerate(g.node_ids):
            handle.write(f"{name} {'odd' if i % 2 else 'even'}\n")
    return root


def _embed_args(workdir, out, extra=()):
    return [
        "embed",
        "--edges", str(workdir / "toy.edges"),
        "--dim", "4",
        "--levels", "2",
        "--shift", "1",
        "--seed", "13",
        "--out", str(out),
        *extra,
    ]


class TestEmbedCommand:
    def test_writes_all_outputs(self, workdir, tmp_path, capsys):
        out = tmp_path / "emb.txt"
        assert main(_embed_args(workdir, out)) == 0
        ids, matrix = load_embedding(out)
        assert matrix.shape == (24, 4)
        assert len(ids) == 24
        trace = json.loads((tmp_path / "emb.trace.json").read_text())
        assert [row["level"] for row in trace] == [1, 2, 3]
        norms = [row["frobenius_norm"] for row in trace]
        assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))
        manifest = json.loads((tmp_path / "emb.manifest.json").read_text())
        assert manifest["command"] == "embed"
        assert manifest["parameters"]["dim"] == 4
        assert manifest["parameters"]["shift"] == 1.0
        assert "sha256" in manifest["inputs"]["edges"]
        assert "sha256" in manifest["outputs"]["embedding"]
        assert "wrote" in capsys.readouterr().out

    def test_k1_matches_library_factorize(self, workdir, tmp_path):
        """One level at full width writes the plain solver's factors."""
        out = tmp_path / "k1.txt"
        args = [
            "embed", "--edges", str(workdir / "toy.edges"),
            "--matrix", "line", "--dim", "4", "--levels", "1",
            "--shift", "1", "--seed", "21", "--out", str(out),
        ]
        assert main(args) == 0
        ids, matrix = load_embedding(out)
        g = load_edge_list(workdir / "toy.edges")
        conn = line_matrix(g, shift=1.0)
        plain = factorize(
            sp.csr_array(conn.matrix), NmfConfig(rank=4, seed=21)
        )
        assert ids == g.node_ids
        # the file stores 6 significant digits
        np.testing.assert_allclose(matrix, plain.u, rtol=1e-5, atol=1e-11)

    def test_indivisible_dimension_is_usage_error(self, workdir, capsys):
        args = [
            "embed", "--edges", str(workdir / "toy.edges"),
            "--dim", "100", "--levels", "8",
        ]
        assert main(args) == 2
        assert "divisible" in capsys.readouterr().err

    def test_missing_file_is_data_error(self, tmp_path, capsys):
        args = ["embed", "--edges", str(tmp_path / "absent.edges")]
        assert main(args) == 3
        assert "not found" in capsys.readouterr().err

    def test_dense_ceiling_is_resource_error(self, workdir, capsys):
        args = _embed_args(workdir, "unused.txt", ["--max-dense-nodes", "5"])
        assert main(args) == 4
        assert "ceiling" in capsys.readouterr().err

    def test_drop_isolated_flag(self, tmp_path):
        (tmp_path / "iso.edges").write_text("a b\nc c\n")
        out = tmp_path / "iso.txt"
        args = [
            "embed", "--edges", str(tmp_path / "iso.edges"),
            "--dim", "1", "--levels", "1", "--shift", "1",
            "--drop-isolated", "--allow-wide", "--out", str(out),
        ]
        assert main(args) == 0
        ids, matrix = load_embedding(out)
        assert ids == ("a", "b")

    def test_zero_degree_without_flag_is_data_error(self, tmp_path, capsys):
        (tmp_path / "iso.edges").write_text("a b\nc c\n")
        args = [
            "embed", "--edges", str(tmp_path / "iso.edges"),
            "--dim", "1", "--levels", "1", "--allow-wide",
        ]
        assert main(args) == 3
        assert "zero-degree" in capsys.readouterr().err


class TestManifestReplay:
    def test_replay_is_byte_identical(self, workdir, tmp_path):
        """Re-running from a manifest reproduces the embedding exactly."""
        first = tmp_path / "run1.txt"
        assert main(_embed_args(workdir, first)) == 0
        second = tmp_path / "run2.txt"
        args = [
            "embed",
            "--from-manifest", str(tmp_path / "run1.manifest.json"),
            "--out", str(second),
        ]
        assert main(args) == 0
        assert first.read_bytes() == second.read_bytes()
        assert (tmp_path / "run1.trace.json").read_bytes() == (
            tmp_path / "run2.trace.json"
        ).read_bytes()

    def test_explicit_flag_overrides_manifest(self, workdir, tmp_path):
        base = tmp_path / "base.txt"
        assert main(_embed_args(workdir, base)) == 0
        other = tmp_path / "other.txt"
        args = [
            "embed", "--from-manifest", str(tmp_path / "base.manifest.json"),
            "--seed", "99", "--out", str(other),
        ]
        assert main(args) == 0
        assert base.read_bytes() != other.read_bytes()
        manifest = json.loads((tmp_path / "other.manifest.json").read_text())
        assert manifest["parameters"]["seed"] == 99

    def test_wrong_command_manifest_rejected(self, workdir, tmp_path, capsys):
        base = tmp_path / "b.txt"
        assert main(_embed_args(workdir, base)) == 0
        args = ["eval", "--from-manifest", str(tmp_path / "b.manifest.json")]
        assert main(args) == 2
        assert "records command" in capsys.readouterr().err

    def test_unreadable_manifest_rejected(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["embed", "--from-manifest", str(bad)]) == 2


@pytest.fixture(scope="module")
def embedded(workdir, tmp_path_factory):
    root = tmp_path_factory.mktemp("eval")
    out = root / "emb.txt"
    assert main(_embed_args(workdir, out)) == 0
    return root, out


class TestEvalCommand:
    def test_report_outputs(self, workdir, embedded, capsys):
        root, emb = embedded
        args = [
            "eval", "--embedding", str(emb),
            "--labels", str(workdir / "toy.labels"),
            "--ratios", "0.3,0.6", "--repeats", "2", "--seed", "3",
            "--iters", "80", "--out", str(root / "rep"),
        ]
        assert main(args) == 0
        payload = json.loads((root / "rep.json").read_text())
        assert len(payload["cells"]) == 4
        assert [m["ratio"] for m in payload["means"]] == [0.3, 0.6]
        table = (root / "rep.txt").read_text()
        assert "micro-f1" in table and "macro-f1" in table
        out = capsys.readouterr().out
        assert "micro-f1" in out
        manifest = json.loads((root / "rep.manifest.json").read_text())
        assert manifest["command"] == "eval"
        assert manifest["parameters"]["repeats"] == 2

    def test_eval_deterministic(self, workdir, embedded, tmp_path):
        root, emb = embedded
        outs = []
        for name in ("d1", "d2"):
            args = [
                "eval", "--embedding", str(emb),
                "--labels", str(workdir / "toy.labels"),
                "--ratios", "0.5", "--repeats", "2", "--seed", "7",
                "--iters", "60", "--out", str(tmp_path / name),
            ]
            assert main(args) == 0
            outs.append((tmp_path / f"{name}.json").read_bytes())
        assert outs[0] == outs[1]

    def test_missing_labels_file(self, embedded, capsys):
        root, emb = embedded
        args = ["eval", "--embedding", str(emb), "--labels", "nope.labels"]
        assert main(args) != 0

    def test_label_id_mismatch_lists_ids(self, embedded, tmp_path, capsys):
        root, emb = embedded
        bad = tmp_path / "bad.labels"
        bad.write_text("ghost1 x\nghost2 y\n")
        args = ["eval", "--embedding", str(emb), "--labels", str(bad)]
        assert main(args) == 3
        err = capsys.readouterr().err
        assert "ghost1" in err and "ghost2" in err

    def test_bad_ratio_list(self, workdir, embedded, capsys):
        root, emb = embedded
        args = [
            "eval", "--embedding", str(emb),
            "--labels", str(workdir / "toy.labels"), "--ratios", "0.5,2.0",
        ]
        assert main(args) == 2

    def test_required_flags(self, capsys):
        assert main(["eval"]) == 2
        assert "--embedding" in capsys.readouterr().err


class TestResidualsCommand:
    def test_sweep_outputs_and_k1_identity(self, workdir, tmp_path):
        """The k=1 row's joint objective equals a single factorization."""
        out = tmp_path / "res.csv"
        args = [
            "residuals", "--edges", str(workdir / "toy.edges"),
            "--matrix", "line", "--dim", "4", "--levels-sweep", "1,2,4",
            "--shift", "1", "--seed", "17", "--out", str(out),
        ]
        assert main(args) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "levels,terminal_residual_norm,joint_objective"
        assert len(lines) == 4
        rows = {
            int(parts[0]): (float(parts[1]), float(parts[2]))
            for parts in (line.split(",") for line in lines[1:])
        }
        g = load_edge_list(workdir / "toy.edges")
        conn = line_matrix(g, shift=1.0)
        plain = factorize(
            sp.csr_array(conn.matrix), NmfConfig(rank=4, seed=17)
        )
        assert rows[1][1] == plain.final_objective
        manifest = json.loads(
            (tmp_path / "res.manifest.json").read_text()
        )
        assert manifest["parameters"]["levels_sweep"] == "1,2,4"

    def test_terminal_norms_trend_down(self, workdir, tmp_path):
        """More levels at fixed width track or beat fewer, within slack."""
        out = tmp_path / "trend.csv"
        args = [
            "residuals", "--edges", str(workdir / "toy.edges"),
            "--dim", "8", "--levels-sweep", "1,2,4,8", "--shift", "1",
            "--seed", "5", "--out", str(out),
        ]
        assert main(args) == 0
        lines = out.read_text().strip().splitlines()[1:]
        norms = [float(line.split(",")[1]) for line in lines]
        for later in norms[1:]:
            assert later <= norms[0] * 1.05

    def test_indivisible_levels_listed(self, workdir, capsys):
        args = [
            "residuals", "--edges", str(workdir / "toy.edges"),
            "--dim", "8", "--levels-sweep", "1,3,5",
        ]
        assert main(args) == 2
        err = capsys.readouterr().err
        assert "3, 5" in err

    def test_empty_sweep_rejected(self, workdir, capsys):
        args = [
            "residuals", "--edges", str(workdir / "toy.edges"),
            "--dim", "8", "--levels-sweep", ",",
        ]
        assert main(args) == 2


class TestEnvironment:
    def test_thread_cap_accepted(self, workdir, tmp_path, monkeypatch):
        monkeypatch.setenv("BOOSTNE_THREADS", "1")
        out = tmp_path / "t.txt"
        assert main(_embed_args(workdir, out)) == 0
        assert out.exists()

    def test_bad_thread_cap_rejected(self, workdir, monkeypatch, capsys):
        monkeypatch.setenv("BOOSTNE_THREADS", "zero")
        assert main(_embed_args(workdir, "x.txt")) == 2
        assert "BOOSTNE_THREADS" in capsys.readouterr().err

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--version"])
        assert excinfo.value.code == 0
        assert "boostne" in capsys.readouterr().out
