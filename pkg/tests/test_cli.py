"""End-to-end CLI behavior: reports, exit codes, config handling."""

from __future__ import annotations

import csv
import json
import subprocess
import sys

import numpy as np
import pytest
from scipy.spatial.distance import jensenshannon

from conftest import dist_sample, text_sample, write_jsonl


def load_vectors(path) -> dict[str, np.ndarray]:
    table = {}
    for line in path.read_text().splitlines():
        token, *values = line.split(" ")
        table[token] = np.array([float(v) for v in values])
    return table


def mean_encode(text: str, table: dict[str, np.ndarray]) -> np.ndarray:
    vectors = [table[token] for token in sorted(text.lower().split()) if token in table]
    return np.mean(vectors, axis=0)


def abs_cosine(u: np.ndarray, v: np.ndarray) -> float:
    return 1.0 - abs(float(np.dot(u, v))) / (float(np.linalg.norm(u)) * float(np.linalg.norm(v)))


def _edit_oracle(a: list[str], b: list[str]) -> int:
    table = {(i, 0): i for i in range(len(a) + 1)}
    table.update({(0, j): j for j in range(len(b) + 1)})
    for i in range(1, len(a) + 1):
        for j in range(1, len(b) + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            table[i, j] = min(
                table[i - 1, j] + 1, table[i, j - 1] + 1, table[i - 1, j - 1] + cost
            )
    return table[len(a), len(b)]


def run_cli(*args: str) -> subprocess.CompletedProcess:
    return subprocess.run(
        [sys.executable, "-m", "advgain", *map(str, args)],
        capture_output=True,
        text=True,
    )


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


@pytest.fixture
def toy_eval_args(toy_paths):
    return [
        "--pairs", toy_paths["pairs"],
        "--real", toy_paths["real"],
        "--word-vectors", toy_paths["vectors"],
        "--seed", "42",
        "--resamples", "500",
    ]


class TestEval:
    def test_toy_corpus_report(self, toy_eval_args, tmp_path):
        out = tmp_path / "reports"
        result = run_cli("eval", *toy_eval_args, "--out", out)
        assert result.returncode == 0, result.stderr
        rows = read_csv(out / "gains.csv")
        assert len(rows) == 8
        for row in rows:
            d_in, d_out, gain = float(row["d_in"]), float(row["d_out"]), float(row["gain"])
            assert abs(gain * (d_in + 1e-4) - d_out) <= 1e-9
            assert row["exceeds_real"] in ("true", "false")
            assert row["word_overlap"] != ""
        summary = json.loads((out / "summary.json").read_text())
        assert summary["count"] == 8
        assert summary["skipped"] == []
        bootstrap = json.loads((out / "bootstrap.json").read_text())
        assert bootstrap["n_resamples"] == 500
        assert bootstrap["ci_low"] <= bootstrap["mean"] <= bootstrap["ci_high"]

    def test_rows_match_composed_metric_oracle(self, toy_paths, toy_eval_args, tmp_path):
        out = tmp_path / "reports"
        assert run_cli("eval", *toy_eval_args, "--out", out).returncode == 0
        table = load_vectors(toy_paths["vectors"])
        pairs = {}
        for line in toy_paths["pairs"].read_text().splitlines():
            record = json.loads(line)
            original, adversarial = record["original"], record["adversarial"]
            pairs[f"{original['id']}->{adversarial['id']}"] = (original, adversarial)
        for row in read_csv(out / "gains.csv"):
            original, adversarial = pairs[row["pair_id"]]
            d_in = abs_cosine(
                mean_encode(original["input"], table), mean_encode(adversarial["input"], table)
            )
            d_out = abs_cosine(
                mean_encode(original["output_text"], table),
                mean_encode(adversarial["output_text"], table),
            )
            assert float(row["d_in"]) == pytest.approx(d_in, abs=1e-12)
            assert float(row["d_out"]) == pytest.approx(d_out, abs=1e-12)
            assert float(row["gain"]) == pytest.approx(d_out / (d_in + 1e-4), rel=1e-12)

    def test_runtime_write_failure_exits_1(self, toy_paths, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("not a directory")
        result = run_cli(
            "eval",
            "--pairs", toy_paths["pairs"],
            "--word-vectors", toy_paths["vectors"],
            "--out", blocker / "sub",
        )
        assert result.returncode == 1

    def test_epsilon_keeps_zero_d_in_finite(self, toy_eval_args, tmp_path):
        out = tmp_path / "reports"
        result = run_cli("eval", *toy_eval_args, "--out", out)
        assert result.returncode == 0
        gains = [row["gain"] for row in read_csv(out / "gains.csv")]
        assert all(g not in ("inf", "-inf") for g in gains)

    def test_missing_word_vector_file_exits_2(self, toy_paths, tmp_path):
        result = run_cli(
            "eval",
            "--pairs", toy_paths["pairs"],
            "--word-vectors", tmp_path / "missing.txt",
        )
        assert result.returncode == 2
        assert "missing.txt" in result.stderr

    def test_missing_seed_with_real_exits_2(self, toy_paths):
        result = run_cli(
            "eval",
            "--pairs", toy_paths["pairs"],
            "--real", toy_paths["real"],
            "--word-vectors", toy_paths["vectors"],
        )
        assert result.returncode == 2
        assert "seed" in result.stderr

    def test_unknown_metric_exits_2(self, toy_paths):
        result = run_cli(
            "eval",
            "--pairs", toy_paths["pairs"],
            "--word-vectors", toy_paths["vectors"],
            "--out-metric", "bleu",
        )
        assert result.returncode == 2
        assert "bleu" in result.stderr

    def test_unused_embedding_source_exits_2(self, toy_paths, tmp_path):
        store = tmp_path / "store.jsonl"
        store.write_text('{"id": "x", "vector": [1.0]}\n')
        result = run_cli(
            "eval",
            "--pairs", toy_paths["pairs"],
            "--word-vectors", toy_paths["vectors"],
            "--embeddings", store,
        )
        assert result.returncode == 2

    def test_unencodable_pair_skipped_and_reported(self, tmp_path):
        vectors = tmp_path / "vectors.txt"
        vectors.write_text("alpha 1.0 0.0\nbeta 0.0 1.0\ngamma 1.0 1.0\n")
        pairs = tmp_path / "pairs.jsonl"
        write_jsonl(
            pairs,
            [
                {
                    "attack": "ok",
                    "original": text_sample("a1", "alpha beta", "alpha"),
                    "adversarial": text_sample("a2", "alpha gamma", "beta"),
                },
                {
                    "attack": "oov",
                    "original": text_sample("b1", "zzzz qqqq", "alpha"),
                    "adversarial": text_sample("b2", "alpha", "beta"),
                },
            ],
        )
        out = tmp_path / "reports"
        result = run_cli(
            "eval", "--pairs", pairs, "--word-vectors", vectors, "--out", out
        )
        assert result.returncode == 0, result.stderr
        assert len(read_csv(out / "gains.csv")) == 1
        summary = json.loads((out / "summary.json").read_text())
        assert summary["count"] == 1
        assert summary["skipped"][0]["pair_id"] == "b1->b2"

    def test_all_formats_emitted(self, toy_eval_args, tmp_path):
        out = tmp_path / "reports"
        result = run_cli("eval", *toy_eval_args, "--out", out, "--format", "csv,jsonl,markdown")
        assert result.returncode == 0
        assert (out / "gains.csv").is_file()
        assert (out / "gains.jsonl").is_file()
        assert (out / "gains.md").is_file()
        first = json.loads((out / "gains.jsonl").read_text().splitlines()[0])
        assert first["pair_id"] == "p1o->p1a"

    def test_failure_writes_no_partial_outputs(self, toy_eval_args, tmp_path):
        out = tmp_path / "reports"
        result = run_cli("eval", *toy_eval_args, "--out", out, "--batch-size", "100")
        assert result.returncode == 2
        assert not out.exists() or not list(out.iterdir())

    def test_report_infinity_policy_emits_inf(self, toy_paths, tmp_path):
        out = tmp_path / "reports"
        result = run_cli(
            "eval",
            "--pairs", toy_paths["pairs"],
            "--word-vectors", toy_paths["vectors"],
            "--infinite-policy", "report_infinity",
            "--epsilon", "0",
            "--out", out,
        )
        assert result.returncode == 0, result.stderr
        by_id = {row["pair_id"]: row for row in read_csv(out / "gains.csv")}
        assert by_id["p2o->p2a"]["gain"] == "inf"
        summary = json.loads((out / "summary.json").read_text())
        assert summary["infinite_count"] == 1
        assert summary["max_gain_infinite"] is True


class TestBootstrapCommand:
    def test_constant_corpus_collapses_bounds(self, tmp_path):
        real = tmp_path / "real.jsonl"
        write_jsonl(real, [text_sample(f"s{i}", "same words here", "same out") for i in range(6)])
        out = tmp_path / "reports"
        result = run_cli(
            "bootstrap",
            "--real", real,
            "--in-metric", "word_distance",
            "--out-metric", "word_distance",
            "--seed", "3",
            "--resamples", "200",
            "--out", out,
        )
        assert result.returncode == 0, result.stderr
        assert (out / "bootstrap.txt").read_text() == "0.0 (0.0, 0.0)\n"

    def test_deterministic_reports(self, toy_paths, tmp_path):
        args = [
            "bootstrap",
            "--real", toy_paths["real"],
            "--word-vectors", toy_paths["vectors"],
            "--seed", "9",
            "--resamples", "400",
        ]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run_cli(*args, "--out", out1).returncode == 0
        assert run_cli(*args, "--out", out2).returncode == 0
        for name in ("bootstrap.json", "bootstrap.txt"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_seed_required(self, toy_paths):
        result = run_cli(
            "bootstrap", "--real", toy_paths["real"], "--word-vectors", toy_paths["vectors"]
        )
        assert result.returncode == 2

    def test_estimate_matches_throwaway_oracle(self, tmp_path):
        real = tmp_path / "real.jsonl"
        texts_and_probs = [
            ("alpha beta gamma", 0.9),
            ("alpha beta delta", 0.7),
            ("epsilon zeta eta", 0.2),
            ("theta iota kappa", 0.4),
            ("alpha zeta kappa", 0.6),
            ("beta gamma iota", 0.3),
        ]
        write_jsonl(
            real,
            [dist_sample(f"s{i}", text, (p, 1 - p)) for i, (text, p) in enumerate(texts_and_probs)],
        )
        out = tmp_path / "reports"
        seed, resamples, confidence = 13, 400, 0.9
        result = run_cli(
            "bootstrap",
            "--real", real,
            "--in-metric", "word_distance",
            "--out-metric", "js",
            "--batch-size", "3",
            "--seed", seed,
            "--resamples", resamples,
            "--confidence", confidence,
            "--out", out,
        )
        assert result.returncode == 0, result.stderr

        # throwaway oracle: re-derive the pairing, gains, and percentile
        # bootstrap from the documented contracts
        from advgain import load_dataset, split_disjoint_batches

        first, second = split_disjoint_batches(load_dataset(real), batch_size=3, seed=seed)
        gains = []
        for x1, x2 in zip(first, second):
            d_in = _edit_oracle(x1.input_text.split(), x2.input_text.split())
            d_out = float(jensenshannon(x1.output.distribution, x2.output.distribution) ** 2)
            gains.append(d_out / (d_in + 1e-4))
        values = np.asarray(gains)
        means = np.array(
            [
                values[np.random.default_rng(seed ^ i).integers(0, len(values), len(values))].mean()
                for i in range(resamples)
            ]
        )
        low, high = np.quantile(means, [0.05, 0.95])
        report = json.loads((out / "bootstrap.json").read_text())
        assert report["mean"] == pytest.approx(float(means.mean()), rel=1e-12)
        assert report["ci_low"] == pytest.approx(float(low), rel=1e-12)
        assert report["ci_high"] == pytest.approx(float(high), rel=1e-12)
        assert report["n_gain_samples"] == 3


class TestScatter:
    def test_rows_sorted_with_gain_identity(self, toy_paths, tmp_path):
        out = tmp_path / "reports"
        result = run_cli(
            "scatter",
            "--pairs", toy_paths["pairs"],
            "--word-vectors", toy_paths["vectors"],
            "--out", out,
        )
        assert result.returncode == 0, result.stderr
        rows = read_csv(out / "scatter.csv")
        assert [row["pair_id"] for row in rows] == sorted(row["pair_id"] for row in rows)
        for row in rows:
            gain = float(row["gain"])
            assert abs(gain * (float(row["d_in"]) + 1e-4) - float(row["d_out"])) <= 1e-9

    def test_infinite_sidecar(self, toy_paths, tmp_path):
        out = tmp_path / "reports"
        result = run_cli(
            "scatter",
            "--pairs", toy_paths["pairs"],
            "--word-vectors", toy_paths["vectors"],
            "--infinite-policy", "report_infinity",
            "--epsilon", "0",
            "--out", out,
        )
        assert result.returncode == 0
        assert len(read_csv(out / "scatter.csv")) == 7
        sidecar = read_csv(out / "scatter_infinite.csv")
        assert [row["pair_id"] for row in sidecar] == ["p2o->p2a"]

    def test_all_identical_pairs_give_zero_rows(self, tmp_path):
        pairs = tmp_path / "pairs.jsonl"
        write_jsonl(
            pairs,
            [
                {
                    "attack": "noop",
                    "original": text_sample(f"a{i}", "same input text", "same output"),
                    "adversarial": text_sample(f"b{i}", "same input text", "same output"),
                }
                for i in range(3)
            ],
        )
        out = tmp_path / "reports"
        result = run_cli(
            "scatter",
            "--pairs", pairs,
            "--in-metric", "word_distance",
            "--out-metric", "word_distance",
            "--out", out,
        )
        assert result.returncode == 0, result.stderr
        rows = read_csv(out / "scatter.csv")
        assert len(rows) == 3
        for row in rows:
            assert (row["d_in"], row["d_out"], row["gain"]) == ("0.0", "0.0", "0.0")


class TestKnn:
    def test_duplicate_reference_yields_zero_gain(self, toy_paths, tmp_path):
        out = tmp_path / "reports"
        result = run_cli(
            "knn",
            "--real", toy_paths["real"],
            "--generated", toy_paths["generated"],
            "--word-vectors", toy_paths["vectors"],
            "--k", "2",
            "--out", out,
        )
        assert result.returncode == 0, result.stderr
        rows = {row["generated_id"]: row for row in read_csv(out / "knn.csv")}
        assert rows["g1"]["reference_id"] == "r01"
        assert float(rows["g1"]["gain"]) == 0.0
        neighbors = read_csv(out / "knn_neighbors.csv")
        assert len(neighbors) == 6  # 3 generated x k=2

    def test_k_larger_than_reference_count_exits_2(self, toy_paths, tmp_path):
        result = run_cli(
            "knn",
            "--real", toy_paths["real"],
            "--generated", toy_paths["generated"],
            "--word-vectors", toy_paths["vectors"],
            "--k", "100",
        )
        assert result.returncode == 2

    def test_non_vector_input_metric_exits_2(self, toy_paths):
        result = run_cli(
            "knn",
            "--real", toy_paths["real"],
            "--generated", toy_paths["generated"],
            "--word-vectors", toy_paths["vectors"],
            "--in-metric", "word_distance",
        )
        assert result.returncode == 2

    def test_rows_match_linear_scan_oracle(self, toy_paths, tmp_path):
        # 10-reference corpus scored against the toy generated samples
        real = tmp_path / "real10.jsonl"
        full = [json.loads(line) for line in toy_paths["real"].read_text().splitlines()]
        write_jsonl(real, full[:10])
        out = tmp_path / "reports"
        result = run_cli(
            "knn",
            "--real", real,
            "--generated", toy_paths["generated"],
            "--word-vectors", toy_paths["vectors"],
            "--out", out,
        )
        assert result.returncode == 0, result.stderr
        table = load_vectors(toy_paths["vectors"])
        references = {r["id"]: r for r in full[:10]}
        generated = [
            json.loads(line) for line in toy_paths["generated"].read_text().splitlines()
        ]
        rows = {row["generated_id"]: row for row in read_csv(out / "knn.csv")}
        assert len(rows) == len(generated)
        for record in generated:
            query = mean_encode(record["input"], table)
            scored = sorted(
                (max(abs_cosine(query, mean_encode(ref["input"], table)), 0.0), ref_id)
                for ref_id, ref in references.items()
            )
            best_distance, best_id = scored[0]
            row = rows[record["id"]]
            assert row["reference_id"] == best_id
            assert float(row["d_in"]) == pytest.approx(best_distance, abs=1e-12)
            d_out = abs_cosine(
                mean_encode(references[best_id]["output_text"], table),
                mean_encode(record["output_text"], table),
            )
            assert float(row["d_out"]) == pytest.approx(max(d_out, 0.0), abs=1e-12)
            assert float(row["gain"]) == pytest.approx(
                max(d_out, 0.0) / (float(row["d_in"]) + 1e-4), rel=1e-9
            )


class TestConfigFile:
    def test_file_values_used_and_flags_win(self, toy_paths, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text(
            "\n".join(
                [
                    "# toy evaluation",
                    f"pairs = {toy_paths['pairs']}",
                    f"word_vectors = {toy_paths['vectors']}",
                    "epsilon = 1e-4",
                    "format = csv",
                ]
            )
            + "\n"
        )
        out = tmp_path / "reports"
        result = run_cli("eval", "--config", config, "--epsilon", "0.5", "--out", out)
        assert result.returncode == 0, result.stderr
        rows = {row["pair_id"]: row for row in read_csv(out / "gains.csv")}
        row = rows["p2o->p2a"]
        # d_in is 0 for this pair, so the flag's epsilon shows up directly
        assert float(row["gain"]) == pytest.approx(float(row["d_out"]) / 0.5, rel=1e-12)

    def test_unknown_config_key_exits_2(self, toy_paths, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("wibble = 3\n")
        result = run_cli("eval", "--config", config, "--pairs", toy_paths["pairs"])
        assert result.returncode == 2
        assert "wibble" in result.stderr
