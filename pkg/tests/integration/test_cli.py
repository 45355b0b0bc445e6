"""Integration tests for the command line."""

import json
import os
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from src.cli.main import main
from src.core.models import balanced_sigma
from src.data.loader import load_path

THREE_CLUSTER_P = [[0.9, 0.1, 0.0], [0.0, 0.1, 0.9], [0.3, 0.7, 0.0]]
PRICES_CSV = os.environ.get("BMCKIT_PRICES_CSV", "")
CODON_FILE = os.environ.get("BMCKIT_CODON_FILE", "")


@pytest.fixture
def model_file(tmp_path):
    """Three-cluster model without sigma."""
    path = tmp_path / "model.json"
    path.write_text(json.dumps({"m": 3, "p": THREE_CLUSTER_P}))
    return path


@pytest.fixture
def truth_file(tmp_path):
    """Balanced assignment of 30 states."""
    path = tmp_path / "truth.json"
    path.write_text(json.dumps({"n": 30, "m": 3, "labels": balanced_sigma(30, 3).tolist()}))
    return path


@pytest.fixture
def simulated(tmp_path, model_file):
    """Path of default length sampled from the model over 30 states."""
    out = tmp_path / "sim"
    assert main(["simulate", "--model", str(model_file), "--n", "30", "--seed", "1", "--out", str(out)]) == 0
    return out / "path.csv"


def read_json(path):
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


class TestSimulate:
    """Test the simulate command."""

    def test_auto_length(self, simulated):
        """Test l = floor(30 n ln n) and the path header."""
        with open(simulated, "r", encoding="utf-8") as f:
            assert f.readline().strip() == "# n=30 l=3061"
        assert len(load_path(simulated)) == 3061

    def test_byte_identical(self, tmp_path, model_file, simulated):
        """Test that the same config reproduces the same file."""
        out = tmp_path / "again"
        assert main(["simulate", "--model", str(model_file), "--n", "30", "--seed", "1", "--out", str(out)]) == 0
        assert (out / "path.csv").read_bytes() == simulated.read_bytes()
        assert read_json(out / "config.json")["length"] == "auto"

    @pytest.mark.parametrize("generator", ["bmc0", "dcbmc"])
    def test_other_generators(self, tmp_path, model_file, generator):
        """Test the zeroth-order and degree-corrected generators."""
        out = tmp_path / generator
        code = main(
            ["simulate", "--model", str(model_file), "--n", "12", "--length", "500", "--generator", generator, "--out", str(out)]
        )
        assert code == 0
        path = load_path(out / "path.csv")
        assert len(path) == 500
        assert path.n == 12

    def test_perturbed(self, tmp_path, model_file):
        """Test a heavy-tailed perturbation."""
        out = tmp_path / "perturbed"
        code = main(
            [
                "simulate", "--model", str(model_file), "--n", "12", "--length", "400",
                "--perturb", "kind=heavy_tailed,s=1.5", "--epsilon", "0.05", "--out", str(out),
            ]
        )
        assert code == 0
        assert len(load_path(out / "path.csv")) == 400

    def test_config_precedence(self, tmp_path, model_file):
        """Test flags over the config file over defaults."""
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"length": "100", "n": 12, "model": str(model_file)}))
        out = tmp_path / "precedence"
        assert main(["simulate", "--config", str(config), "--length", "200", "--out", str(out)]) == 0
        assert len(load_path(out / "path.csv")) == 200
        echoed = read_json(out / "config.json")
        assert echoed["length"] == "200"
        assert echoed["n"] == 12

    def test_replay_echoed_config(self, tmp_path, simulated):
        """Test that an echoed config.json repeats the run."""
        out = tmp_path / "replay"
        assert main(["simulate", "--config", str(simulated.parent / "config.json"), "--out", str(out)]) == 0
        assert (out / "path.csv").read_bytes() == simulated.read_bytes()
        assert main(["cluster", "--config", str(simulated.parent / "config.json"), "--out", str(out)]) == 2

    def test_unknown_config_key(self, tmp_path, model_file):
        """Test that unknown config keys are a usage error."""
        config = tmp_path / "bad.json"
        config.write_text(json.dumps({"colour": "blue"}))
        assert main(["simulate", "--config", str(config), "--model", str(model_file), "--out", str(tmp_path)]) == 2

    def test_missing_model_file(self, tmp_path):
        """Test exit code 2 for a missing input file."""
        assert main(["simulate", "--model", str(tmp_path / "none.json"), "--out", str(tmp_path)]) == 2

    def test_invalid_model(self, tmp_path):
        """Test exit code 1 for a model that fails validation."""
        bad = tmp_path / "bad_model.json"
        bad.write_text(json.dumps({"m": 2, "sigma": [0, 1], "p": [[0.5, 0.6], [0.5, 0.5]]}))
        assert main(["simulate", "--model", str(bad), "--length", "10", "--out", str(tmp_path / "o")]) == 1


class TestCluster:
    """Test the cluster command."""

    def test_outputs(self, tmp_path, simulated, truth_file):
        """Test assignment, params and summary files."""
        out = tmp_path / "cluster"
        code = main(["cluster", "--path", str(simulated), "--m", "3", "--truth", str(truth_file), "--out", str(out)])
        assert code == 0
        assignment = read_json(out / "assignment.json")
        assert assignment["n"] == 30
        assert len(assignment["labels"]) == 30
        params = read_json(out / "params.json")
        np.testing.assert_allclose(np.sum(params["p_hat"], axis=1), 1.0)
        summary = read_json(out / "summary.json")
        assert 0.0 <= summary["misclassification"] <= 1.0
        assert summary["path_length"] == 3061

    def test_counts_input(self, tmp_path):
        """Test clustering a count file."""
        counts = tmp_path / "counts.csv"
        counts.write_text(
            "# n=4\ni,j,count\n0,2,5\n0,3,5\n1,2,5\n1,3,5\n2,0,5\n2,1,5\n3,0,5\n3,1,5\n"
        )
        out = tmp_path / "cluster_counts"
        assert main(["cluster", "--counts", str(counts), "--m", "2", "--iterations", "0", "--out", str(out)]) == 0
        labels = read_json(out / "assignment.json")["labels"]
        assert labels[0] == labels[1] != labels[2] == labels[3]

    def test_missing_counts(self, tmp_path):
        """Test that a missing count file is a usage error."""
        assert main(["cluster", "--counts", str(tmp_path / "none.csv"), "--m", "2", "--out", str(tmp_path)]) == 2

    def test_missing_m(self, tmp_path, simulated):
        """Test that --m is required."""
        assert main(["cluster", "--path", str(simulated), "--out", str(tmp_path)]) == 2


class TestEvaluateKl:
    """Test the evaluate-kl command."""

    def test_identical_candidates(self, tmp_path, simulated):
        """Test d_hat = 0 and half-width 0 for identical candidates."""
        out = tmp_path / "kl"
        code = main(
            [
                "evaluate-kl", "--path", str(simulated), "--candidate-p", "empirical",
                "--candidate-q", "empirical", "--smoothing", "0.5", "--out", str(out),
            ]
        )
        assert code == 0
        report = read_json(out / "kl_report.json")
        assert report["d_hat"] == 0.0
        assert report["ci_halfwidth"] == 0.0
        assert report["decision"] == "inconclusive"
        assert report["z"] == 0.05

    def test_block_candidates(self, tmp_path, simulated, truth_file):
        """Test the default bmc against bmc0 comparison with a curve."""
        out = tmp_path / "kl_block"
        code = main(
            [
                "evaluate-kl", "--path", str(simulated), "--assignment", str(truth_file),
                "--smoothing", "0.5", "--curve-points", "5", "--out", str(out),
            ]
        )
        assert code == 0
        report = read_json(out / "kl_report.json")
        assert report["candidate_p"] == "bmc"
        assert report["d_hat"] > 0
        curve = pd.read_csv(out / "kl_curve.csv")
        assert list(curve.columns) == ["horizon", "d_hat"]

    def test_support_mismatch(self, tmp_path, simulated):
        """Test a nonzero exit when the candidates differ in support."""
        code = main(
            [
                "evaluate-kl", "--path", str(simulated), "--candidate-p", "empirical",
                "--candidate-q", "uniform", "--out", str(tmp_path / "mismatch"),
            ]
        )
        assert code == 1

    def test_block_needs_assignment(self, tmp_path, simulated):
        """Test that block candidates need clusters."""
        assert main(["evaluate-kl", "--path", str(simulated), "--out", str(tmp_path / "x")]) == 2


class TestSelectOrder:
    """Test the select-order command."""

    def test_constant_path(self, tmp_path):
        """Test that a constant path selects order 0."""
        path = tmp_path / "constant.csv"
        path.write_text("# n=1 l=50\n" + "0\n" * 50)
        out = tmp_path / "order"
        assert main(["select-order", "--path", str(path), "--r-max", "2", "--out", str(out)]) == 0
        assert read_json(out / "order.json")["order"] == 0
        table = pd.read_csv(out / "order_table.csv")
        assert table["r"].tolist() == [0, 1, 2]

    def test_cluster_path(self, tmp_path, simulated, truth_file):
        """Test order selection on the cluster path of a first-order chain."""
        out = tmp_path / "order_clusters"
        code = main(
            ["select-order", "--path", str(simulated), "--assignment", str(truth_file), "--r-max", "2", "--out", str(out)]
        )
        assert code == 0
        selection = read_json(out / "order.json")
        assert selection["order"] == 1
        assert selection["alphabet"] == 3


class TestSpectra:
    """Test the spectra command."""

    def test_outputs(self, tmp_path, simulated, model_file):
        """Test histogram, theory and comparison files."""
        out = tmp_path / "spectra"
        code = main(["spectra", "--path", str(simulated), "--model", str(model_file), "--out", str(out)])
        assert code == 0
        histogram = pd.read_csv(out / "histogram.csv")
        assert list(histogram.columns) == ["x", "f"]
        theory = pd.read_csv(out / "theory.csv")
        assert len(theory) == 400
        comparison = read_json(out / "comparison.json")
        assert comparison["drop_leading"] == 3
        assert 0.0 <= comparison["kolmogorov"] <= 1.0

    def test_pieces_need_path(self, tmp_path):
        """Test that piece averaging needs a path."""
        counts = tmp_path / "counts.csv"
        counts.write_text("# n=2\n0,1,3\n1,0,3\n")
        assert main(["spectra", "--counts", str(counts), "--pieces", "2", "--out", str(tmp_path / "s")]) == 2


class TestIngest:
    """Test the ingest command."""

    def test_gps(self, tmp_path):
        """Test three records and the bounding-box filter."""
        gps = tmp_path / "trace.csv"
        gps.write_text("lat,lon,timestamp\n0.0,0.0,a\n0.0,0.02,b\n0.5,0.0,c\n")
        out = tmp_path / "gps"
        assert main(["ingest", "--format", "gps", "--input", str(gps), "--out", str(out)]) == 0
        assert len(load_path(out / "path.csv")) == 3
        assert read_json(out / "registry.json") == {"0,0": 0, "0,2": 1, "55,0": 2}

        boxed = tmp_path / "gps_boxed"
        code = main(
            ["ingest", "--format", "gps", "--input", str(gps), "--bbox=-1,0.1,-1,1", "--out", str(boxed)]
        )
        assert code == 0
        assert len(load_path(boxed / "path.csv")) == 2

    def test_tokens_with_self_jumps(self, tmp_path):
        """Test lossless tokenizing and self-jump removal."""
        tokens = tmp_path / "tokens.txt"
        tokens.write_text("a\na\nb\nb\nb\na\n")
        out = tmp_path / "tokens"
        code = main(
            [
                "ingest", "--format", "tokens", "--input", str(tokens), "--min-count", "1",
                "--drop-top", "0", "--remove-self-jumps", "--out", str(out),
            ]
        )
        assert code == 0
        path = load_path(out / "path.csv")
        assert path.decode() == ["a", "b", "a"]

    def test_codons(self, tmp_path):
        """Test codon ingestion with lossless defaults."""
        sequence = tmp_path / "dna.txt"
        sequence.write_text("ACGACG\nTTT\n")
        out = tmp_path / "codons"
        assert main(["ingest", "--format", "codons", "--input", str(sequence), "--out", str(out)]) == 0
        assert load_path(out / "path.csv").decode() == ["ACG", "ACG", "TTT"]

    def test_prices(self, tmp_path):
        """Test daily return leaders from a long price table."""
        prices = tmp_path / "prices.csv"
        prices.write_text(
            "date,ticker,open,close\n"
            "2020-01-01,AAA,10,11\n2020-01-01,BBB,10,10\n"
            "2020-01-02,AAA,10,9\n2020-01-02,BBB,10,12\n"
        )
        out = tmp_path / "prices"
        assert main(["ingest", "--format", "prices", "--input", str(prices), "--out", str(out)]) == 0
        assert load_path(out / "path.csv").decode() == ["AAA", "BBB"]

    def test_corpus(self, tmp_path):
        """Test cf-idf vectors of a small corpus."""
        corpus = tmp_path / "corpus.json"
        corpus.write_text(json.dumps([["a", "b"], ["c"]]))
        vocab = tmp_path / "vocab.txt"
        vocab.write_text("a\nb\nc\n")
        assignment = tmp_path / "assignment.json"
        assignment.write_text(json.dumps({"n": 3, "m": 2, "labels": [0, 0, 1]}))
        out = tmp_path / "corpus"
        code = main(
            [
                "ingest", "--format", "corpus", "--input", str(corpus), "--assignment", str(assignment),
                "--vocab", str(vocab), "--out", str(out),
            ]
        )
        assert code == 0
        vectors = pd.read_csv(out / "cfidf.csv")
        assert list(vectors.columns) == ["c0", "c1"]
        assert len(vectors) == 2

    def test_empty_after_filter(self, tmp_path):
        """Test exit code 1 when filtering removes every token."""
        tokens = tmp_path / "tokens.txt"
        tokens.write_text("a\na\n")
        assert main(["ingest", "--format", "tokens", "--input", str(tokens), "--out", str(tmp_path / "t")]) == 1


class TestExperiment:
    """Test the experiment command."""

    def test_robustness(self, tmp_path):
        """Test the robustness table on the default two-cluster model."""
        out = tmp_path / "robustness"
        code = main(
            [
                "experiment", "--kind", "robustness", "--n", "20", "--epsilons", "0,0.1",
                "--seeds", "2", "--length", "3000", "--out", str(out),
            ]
        )
        assert code == 0
        table = pd.read_csv(out / "robustness.csv")
        assert list(table.columns) == ["epsilon", "mean_E", "stderr", "seeds"]
        assert table["epsilon"].tolist() == [0.0, 0.1]

    def test_risk_curve(self, tmp_path, model_file):
        """Test the risk table over two lengths."""
        out = tmp_path / "risk"
        code = main(
            [
                "experiment", "--kind", "risk_curve", "--model", str(model_file), "--n", "12",
                "--lengths", "1000,2000", "--seeds", "2", "--out", str(out),
            ]
        )
        assert code == 0
        table = pd.read_csv(out / "risk_curve.csv")
        assert table["length"].tolist() == [1000, 2000]

    def test_order_error(self, tmp_path, simulated, truth_file):
        """Test the order-error table."""
        out = tmp_path / "order_error"
        code = main(
            [
                "experiment", "--kind", "order_error", "--path", str(simulated), "--assignment", str(truth_file),
                "--epsilons", "0", "--repetitions", "2", "--length", "500", "--out", str(out),
            ]
        )
        assert code == 0
        table = pd.read_csv(out / "order_error.csv")
        assert list(table.columns) == ["epsilon", "e_over", "e_under", "repetitions"]

    def test_missing_kind(self, tmp_path):
        """Test that --kind is required."""
        assert main(["experiment", "--out", str(tmp_path)]) == 2


class TestDatasets:
    """Test the full pipelines on user-supplied data files."""

    @pytest.mark.skipif(not Path(PRICES_CSV).is_file(), reason="BMCKIT_PRICES_CSV is not set")
    def test_price_clusters_near_equilibrium(self, tmp_path, record_property):
        """Test that the rows of p_hat at m=3 stay close to pi_hat for daily return leaders."""
        ingested = tmp_path / "prices"
        assert main(["ingest", "--format", "prices", "--input", PRICES_CSV, "--out", str(ingested)]) == 0
        out = tmp_path / "clusters"
        assert main(["cluster", "--path", str(ingested / "path.csv"), "--m", "3", "--out", str(out)]) == 0
        params = read_json(out / "params.json")
        deviation = float(np.abs(np.array(params["p_hat"]) - np.array(params["pi_hat"])[None, :]).max())
        record_property("max_row_deviation", deviation)
        assert deviation <= 0.1

    @pytest.mark.skipif(not Path(CODON_FILE).is_file(), reason="BMCKIT_CODON_FILE is not set")
    def test_codon_order_table(self, tmp_path):
        """Test the order table over r = 0..4 for a codon sequence."""
        ingested = tmp_path / "codons"
        assert main(["ingest", "--format", "codons", "--input", CODON_FILE, "--out", str(ingested)]) == 0
        out = tmp_path / "order"
        assert main(["select-order", "--path", str(ingested / "path.csv"), "--r-max", "4", "--out", str(out)]) == 0
        table = pd.read_csv(out / "order_table.csv")
        assert list(table.columns) == ["r", "criterion"]
        assert table["r"].tolist() == [0, 1, 2, 3, 4]
        assert read_json(out / "order.json")["order"] in range(5)
