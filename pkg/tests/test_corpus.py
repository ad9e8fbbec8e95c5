"""Dataset loading, validation, serialization, and disjoint batching."""

from __future__ import annotations

import numpy as np
import pytest

from advgain import (
    AdversarialPair,
    Dataset,
    InsufficientDataError,
    OutputValue,
    ParseError,
    Sample,
    ValidationError,
    load_dataset,
    save_dataset,
    split_disjoint_batches,
)

from conftest import dist_sample, text_sample, write_jsonl


class TestOutputValue:
    def test_exactly_one_variant_required(self):
        with pytest.raises(ValidationError):
            OutputValue()
        with pytest.raises(ValidationError):
            OutputValue(text="x", distribution=(0.5, 0.5), classes=("a", "b"))

    def test_distribution_must_sum_to_one(self):
        with pytest.raises(ValidationError, match="sum to 1"):
            OutputValue(distribution=(0.7, 0.2), classes=("a", "b"))

    def test_distribution_class_count_must_match(self):
        with pytest.raises(ValidationError):
            OutputValue(distribution=(0.5, 0.5), classes=("a",))

    def test_distribution_needs_two_classes(self):
        with pytest.raises(ValidationError):
            OutputValue(distribution=(1.0,), classes=("a",))

    def test_negative_entries_rejected(self):
        with pytest.raises(ValidationError):
            OutputValue(distribution=(-0.1, 1.1), classes=("a", "b"))

    def test_sum_tolerance_accepts_rounded_probabilities(self):
        value = OutputValue(distribution=(0.9999996, 0.0000001), classes=("a", "b"))
        assert value.is_distribution

    def test_predicted_label(self):
        value = OutputValue(distribution=(0.2, 0.8), classes=("pos", "neg"))
        assert value.predicted_label == "neg"
        assert OutputValue(text="hi").predicted_label is None


class TestPairInvariants:
    def test_distinct_ids_required(self):
        sample = Sample("s1", "text", OutputValue(text="out"))
        with pytest.raises(ValidationError, match="distinct"):
            AdversarialPair(original=sample, adversarial=sample, attack_name="noop")

    def test_output_variants_must_match(self):
        original = Sample("s1", "text", OutputValue(text="out"))
        adversarial = Sample(
            "s2", "text", OutputValue(distribution=(0.5, 0.5), classes=("a", "b"))
        )
        with pytest.raises(ValidationError, match="variant"):
            AdversarialPair(original=original, adversarial=adversarial, attack_name="x")

    def test_pair_id(self):
        pair = AdversarialPair(
            original=Sample("s1", "a", OutputValue(text="o")),
            adversarial=Sample("s2", "a b", OutputValue(text="o2")),
            attack_name="swap",
        )
        assert pair.pair_id == "s1->s2"


class TestLoadJsonl:
    def test_well_formed_records(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_jsonl(
            path,
            [
                text_sample("s1", "one", "out one"),
                text_sample("s2", "two", "out two"),
                dist_sample("s3", "three", (0.25, 0.75), label="neg"),
            ],
        )
        dataset = load_dataset(path)
        assert len(dataset.samples) == 3
        assert dataset.samples[0].id == "s1"
        assert dataset.samples[2].output.distribution == (0.25, 0.75)
        assert dataset.samples[2].label == "neg"
        assert dataset.metadata["provenance_format"] == "jsonl"

    def test_bad_distribution_reports_validation_error(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_jsonl(path, [dist_sample("s1", "x", (0.7, 0.2))])
        with pytest.raises(ValidationError, match="sum to 1"):
            load_dataset(path)

    def test_duplicate_id_names_offender(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_jsonl(path, [text_sample("s1", "a", "b"), text_sample("s1", "c", "d")])
        with pytest.raises(ValidationError, match="'s1'"):
            load_dataset(path)

    def test_malformed_json_names_line(self, tmp_path):
        path = tmp_path / "data.jsonl"
        path.write_text('{"id": "s1", "input": "a", "output_text": "b"}\n{oops\n')
        with pytest.raises(ParseError, match=":2"):
            load_dataset(path)

    def test_missing_output_is_parse_error(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_jsonl(path, [{"id": "s1", "input": "a"}])
        with pytest.raises(ParseError, match="output"):
            load_dataset(path)

    def test_pair_records_with_target(self, tmp_path):
        path = tmp_path / "data.jsonl"
        write_jsonl(
            path,
            [
                {
                    "attack": "flip",
                    "original": dist_sample("s1", "good movie", (0.9, 0.1)),
                    "adversarial": dist_sample("s2", "good flick", (0.2, 0.8)),
                    "target": {"output_dist": [0.0, 1.0], "classes": ["pos", "neg"]},
                }
            ],
        )
        dataset = load_dataset(path)
        assert len(dataset.pairs) == 1
        pair = dataset.pairs[0]
        assert pair.attack_name == "flip"
        assert pair.target.distribution == (0.0, 1.0)
        assert dataset.metadata["provenance_pair_samples"] == "holdout"

    def test_pairs_reusing_listed_samples_marked_shared(self, tmp_path):
        path = tmp_path / "data.jsonl"
        original = text_sample("s1", "a", "b")
        write_jsonl(
            path,
            [
                original,
                {"attack": "x", "original": original, "adversarial": text_sample("s2", "aa", "bb")},
            ],
        )
        assert load_dataset(path).metadata["provenance_pair_samples"] == "mixed"


class TestLoadCsv:
    def test_samples_with_optional_label(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("id,input,output_text,label\ns1,hello there,hi,greet\ns2,bye now,bye,\n")
        dataset = load_dataset(path, format="csv")
        assert [s.id for s in dataset.samples] == ["s1", "s2"]
        assert dataset.samples[0].label == "greet"
        assert dataset.samples[1].label is None

    def test_missing_column_is_parse_error(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("id,input\ns1,hello\n")
        with pytest.raises(ParseError, match="output_text"):
            load_dataset(path, format="csv")

    def test_unknown_format_rejected(self, tmp_path):
        path = tmp_path / "data.xml"
        path.write_text("<x/>")
        with pytest.raises(ValueError):
            load_dataset(path, format="xml")


class TestRoundTrip:
    def test_save_then_load_is_equal(self, tmp_path):
        source = tmp_path / "source.jsonl"
        write_jsonl(
            source,
            [
                {"_metadata": {"origin": "unit-test"}},
                text_sample("s1", "alpha beta", "gamma"),
                dist_sample("s2", "delta", (0.5, 0.5)),
                {
                    "attack": "swap",
                    "original": text_sample("p1", "x y", "z"),
                    "adversarial": text_sample("p2", "x w", "z2"),
                },
            ],
        )
        first = load_dataset(source)
        assert first.metadata["origin"] == "unit-test"
        saved = tmp_path / "saved.jsonl"
        save_dataset(first, saved)
        second = load_dataset(saved)
        assert first == second


class TestSplitDisjointBatches:
    def _dataset(self, n: int) -> Dataset:
        return Dataset(
            samples=tuple(
                Sample(f"s{i}", f"text {i}", OutputValue(text=f"out {i}")) for i in range(n)
            )
        )

    def test_sizes_and_disjointness(self):
        first, second = split_disjoint_batches(self._dataset(10), batch_size=5, seed=7)
        assert len(first) == len(second) == 5
        assert {s.id for s in first}.isdisjoint({s.id for s in second})

    def test_insufficient_data(self):
        with pytest.raises(InsufficientDataError):
            split_disjoint_batches(self._dataset(10), batch_size=6, seed=7)

    def test_deterministic_for_fixed_seed(self):
        dataset = self._dataset(20)
        a = split_disjoint_batches(dataset, batch_size=7, seed=123)
        b = split_disjoint_batches(dataset, batch_size=7, seed=123)
        assert a == b

    def test_different_seeds_usually_differ(self):
        dataset = self._dataset(20)
        a = split_disjoint_batches(dataset, batch_size=7, seed=1)
        b = split_disjoint_batches(dataset, batch_size=7, seed=2)
        assert a != b

    def test_disjointness_property_over_random_datasets(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            n = int(rng.integers(2, 40))
            batch = int(rng.integers(1, n // 2 + 1))
            seed = int(rng.integers(0, 2**32))
            first, second = split_disjoint_batches(self._dataset(n), batch, seed)
            ids_first = {s.id for s in first}
            ids_second = {s.id for s in second}
            assert len(ids_first) == len(ids_second) == batch
            assert ids_first.isdisjoint(ids_second)
