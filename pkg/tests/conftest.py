"""Shared fixtures: tiny in-memory word vectors and toy-corpus paths."""

from __future__ import annotations

import json

import numpy as np
import pytest

from advgain import WordVectorTable
from advgain.data import (
    toy_generated_path,
    toy_pairs_path,
    toy_real_path,
    toy_vectors_path,
)


@pytest.fixture(scope="session")
def toy_paths() -> dict:
    return {
        "pairs": toy_pairs_path(),
        "real": toy_real_path(),
        "generated": toy_generated_path(),
        "vectors": toy_vectors_path(),
    }


def make_table(entries: dict[str, list[float]]) -> WordVectorTable:
    vectors = {}
    dimension = None
    for token, values in entries.items():
        vector = np.asarray(values, dtype=np.float64)
        vector.setflags(write=False)
        vectors[token] = vector
        dimension = vector.size
    return WordVectorTable(dimension=dimension, entries=vectors)


@pytest.fixture
def unit_table() -> WordVectorTable:
    return make_table({"a": [1.0, 0.0], "b": [0.0, 1.0], "c": [1.0, 1.0]})


def write_jsonl(path, records) -> None:
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")


def text_sample(sample_id: str, input_text: str, output_text: str) -> dict:
    return {"id": sample_id, "input": input_text, "output_text": output_text}


def dist_sample(sample_id: str, input_text: str, dist, classes=("pos", "neg"), label=None) -> dict:
    record = {
        "id": sample_id,
        "input": input_text,
        "output_dist": list(dist),
        "classes": list(classes),
    }
    if label is not None:
        record["label"] = label
    return record
