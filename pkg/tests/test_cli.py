import json

import pytest

from sdprel.cli import main
from sdprel.errors import NonFiniteLoss

from helpers import synthetic_corpus, write_lines

CONFIG_TEXT = """\
model=bilstm
lstm_units=6
mlp_hidden=4
dropout=0.0
epochs=6
batch=8
seed=11
embedding_dim=8
ae_epochs=120
k_folds=2
"""


@pytest.fixture
def workdir(tmp_path):
    corpus_lines, dep_lines, _ = synthetic_corpus(16, seed=4)
    write_lines(tmp_path / "corpus.tsv", corpus_lines)
    write_lines(tmp_path / "deps.tsv", dep_lines)
    (tmp_path / "config").write_text(CONFIG_TEXT, encoding="utf-8")
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


class TestPreprocessCommand:
    def test_writes_instances_file(self, workdir, capsys):
        rc = run(
            "preprocess",
            "--corpus", workdir / "corpus.tsv",
            "--deps", workdir / "deps.tsv",
            "--out", workdir / "inst.json",
        )
        assert rc == 0
        doc = json.loads((workdir / "inst.json").read_text())
        assert doc["format"] == "sdprel-instances"
        assert doc["stats"]["generated"] == 16
        out = capsys.readouterr().out
        assert "generated: 16" in out

    def test_missing_corpus_is_exit_2(self, workdir, capsys):
        rc = run(
            "preprocess",
            "--corpus", workdir / "nope.tsv",
            "--deps", workdir / "deps.tsv",
            "--out", workdir / "inst.json",
        )
        assert rc == 2
        assert "error:" in capsys.readouterr().err

    def test_window_flag(self, workdir):
        rc = run(
            "preprocess",
            "--corpus", workdir / "corpus.tsv",
            "--deps", workdir / "deps.tsv",
            "--out", workdir / "inst.json",
            "--window", "6",
        )
        assert rc == 0
        doc = json.loads((workdir / "inst.json").read_text())
        assert doc["position_window"] == 6
        assert all(len(i["pos1_codes"][0]) == 6 for i in doc["instances"])


class TestTrainEvaluatePredict:
    def test_full_cycle(self, workdir, capsys):
        rc = run(
            "preprocess",
            "--corpus", workdir / "corpus.tsv",
            "--deps", workdir / "deps.tsv",
            "--out", workdir / "inst.json",
        )
        assert rc == 0
        rc = run(
            "train",
            "--instances", workdir / "inst.json",
            "--config", workdir / "config",
            "--out", workdir / "model.sdpl",
            "--losses", workdir / "losses.csv",
        )
        assert rc == 0
        losses = (workdir / "losses.csv").read_text().strip().split("\n")
        assert losses[0] == "epoch,loss"
        assert len(losses) == 1 + 6
        capsys.readouterr()

        rc = run(
            "evaluate",
            "--ck", workdir / "model.sdpl",
            "--instances", workdir / "inst.json",
            "--report", "csv",
        )
        assert rc == 0
        out = capsys.readouterr().out.strip().split("\n")
        assert out[0] == "fold,tp,fp,fn,tn,precision,recall,f1"
        assert out[1].startswith("all,")

        rc = run(
            "evaluate",
            "--ck", workdir / "model.sdpl",
            "--instances", workdir / "inst.json",
            "--report", "json",
        )
        assert rc == 0
        report = json.loads(capsys.readouterr().out)
        assert set(report) == {"tp", "fp", "fn", "tn", "precision", "recall", "f1"}
        assert report["tp"] + report["fp"] + report["fn"] + report["tn"] == 16

        rc = run(
            "predict",
            "--ck", workdir / "model.sdpl",
            "--instances", workdir / "inst.json",
        )
        assert rc == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "instance_id,predicted_label,prob_positive"
        assert len(lines) == 1 + 16

    def test_tune_embeddings_flag(self, workdir, capsys):
        run(
            "preprocess",
            "--corpus", workdir / "corpus.tsv",
            "--deps", workdir / "deps.tsv",
            "--out", workdir / "inst.json",
        )
        rc = run(
            "train",
            "--instances", workdir / "inst.json",
            "--config", workdir / "config",
            "--out", workdir / "model.sdpl",
            "--tune-embeddings",
        )
        assert rc == 0
        capsys.readouterr()
        from sdprel.checkpoint import load_checkpoint

        ck = load_checkpoint(workdir / "model.sdpl")
        assert ck.config.tune_embeddings is True
        # tuned vocabulary is persisted alongside the placeholder vectors
        assert len(ck.token_vectors) > 3

    def test_unknown_config_key_is_exit_2(self, workdir, capsys):
        (workdir / "badconfig").write_text("frobnicate=1\n", encoding="utf-8")
        run(
            "preprocess",
            "--corpus", workdir / "corpus.tsv",
            "--deps", workdir / "deps.tsv",
            "--out", workdir / "inst.json",
        )
        rc = run(
            "train",
            "--instances", workdir / "inst.json",
            "--config", workdir / "badconfig",
            "--out", workdir / "model.sdpl",
        )
        assert rc == 2
        assert "unknown config key" in capsys.readouterr().err

    def test_numeric_failure_is_exit_3(self, workdir, monkeypatch, capsys):
        run(
            "preprocess",
            "--corpus", workdir / "corpus.tsv",
            "--deps", workdir / "deps.tsv",
            "--out", workdir / "inst.json",
        )
        import sdprel.cli as cli_mod

        def explode(*args, **kwargs):
            raise NonFiniteLoss("training loss became non-finite: nan")

        monkeypatch.setattr(cli_mod, "train", explode)
        rc = run(
            "train",
            "--instances", workdir / "inst.json",
            "--config", workdir / "config",
            "--out", workdir / "model.sdpl",
        )
        assert rc == 3
        assert "numeric failure" in capsys.readouterr().err


class TestCvCommand:
    def test_cv_runs_and_is_deterministic(self, workdir, capsys):
        args = (
            "cv",
            "--corpus", workdir / "corpus.tsv",
            "--deps", workdir / "deps.tsv",
            "--config", workdir / "config",
            "--k", "2",
            "--seed", "29",
        )
        assert run(*args, "--report", workdir / "r1.csv") == 0
        assert run(*args, "--report", workdir / "r2.csv") == 0
        first = (workdir / "r1.csv").read_bytes()
        second = (workdir / "r2.csv").read_bytes()
        assert first == second
        lines = first.decode().strip().split("\n")
        assert lines[0] == "fold,tp,fp,fn,tn,precision,recall,f1"
        assert len(lines) == 1 + 2 + 2
        capsys.readouterr()

    def test_bad_k_is_exit_2(self, workdir, capsys):
        rc = run(
            "cv",
            "--corpus", workdir / "corpus.tsv",
            "--deps", workdir / "deps.tsv",
            "--config", workdir / "config",
            "--k", "1",
            "--report", workdir / "r.csv",
        )
        assert rc == 2
        capsys.readouterr()


class TestSweepCommand:
    def test_window_sweep(self, workdir, capsys):
        rc = run(
            "sweep",
            "--param", "window",
            "--values", "8,10",
            "--corpus", workdir / "corpus.tsv",
            "--deps", workdir / "deps.tsv",
            "--config", workdir / "config",
            "--report", workdir / "sweep.csv",
        )
        assert rc == 0
        lines = (workdir / "sweep.csv").read_text().strip().split("\n")
        assert lines[0] == "param,value,precision,recall,f1"
        assert lines[1].startswith("window,8,")
        assert lines[2].startswith("window,10,")
        capsys.readouterr()

    def test_epochs_sweep(self, workdir, capsys):
        rc = run(
            "sweep",
            "--param", "epochs",
            "--values", "2,4",
            "--corpus", workdir / "corpus.tsv",
            "--deps", workdir / "deps.tsv",
            "--config", workdir / "config",
            "--report", workdir / "sweep.csv",
        )
        assert rc == 0
        assert len((workdir / "sweep.csv").read_text().strip().split("\n")) == 3
        capsys.readouterr()

    def test_bad_values_exit_2(self, workdir, capsys):
        rc = run(
            "sweep",
            "--param", "epochs",
            "--values", "two",
            "--corpus", workdir / "corpus.tsv",
            "--deps", workdir / "deps.tsv",
            "--config", workdir / "config",
            "--report", workdir / "sweep.csv",
        )
        assert rc == 2
        capsys.readouterr()
