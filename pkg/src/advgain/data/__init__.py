"""Bundled toy corpus: small enough to hand-check, rich enough to demo.

``toy_pairs.jsonl`` holds 8 adversarial pairs with text outputs (one pair
keeps the input unchanged, so its input distance is exactly 0),
``toy_real.jsonl`` 12 real samples, ``toy_generated.jsonl`` 3 generated
samples (one duplicates a real sample), and ``toy_vectors.txt`` an
8-dimensional word-vector table covering the whole toy vocabulary.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def _path(name: str) -> Path:
    return Path(str(resources.files(__package__) / name))


def toy_pairs_path() -> Path:
    return _path("toy_pairs.jsonl")


def toy_real_path() -> Path:
    return _path("toy_real.jsonl")


def toy_generated_path() -> Path:
    return _path("toy_generated.jsonl")


def toy_vectors_path() -> Path:
    return _path("toy_vectors.txt")
