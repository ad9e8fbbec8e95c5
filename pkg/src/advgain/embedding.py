"""Feature transforms that map text to dense vectors.

Two interchangeable sources are provided: a mean-of-word-vectors sentence
encoder over a GloVe-style text file, and a lookup table of precomputed
per-sample vectors (for users who run a heavier sentence encoder offline).
Both are immutable after load; encoding and lookup are pure functions.

Word-vector file format: one entry per line, ``<token> <f1> ... <fd>``,
single-space separated. Precomputed store format: JSON Lines records
``{"id": str, "vector": [float, ...]}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import (
    DimensionMismatchError,
    EmptyEncodingError,
    MissingEmbeddingError,
    ParseError,
    ValidationError,
)

# Characters stripped from token edges; a token made only of these is kept as-is.
TOKEN_STRIP_CHARS = ".,!?;:'\"()[]"


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """A finite dense vector, optionally tagged with the id it encodes."""

    values: np.ndarray
    source_id: str | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValidationError("feature vector must be a non-empty 1-D array")
        if not np.isfinite(values).all():
            raise ValidationError(
                f"feature vector {self.source_id or ''} has non-finite entries".strip()
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dimension(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class WordVectorTable:
    """Token-to-vector map with a single shared dimension."""

    dimension: int
    entries: Mapping[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, token: str) -> bool:
        return token in self.entries


@dataclass(frozen=True)
class EmbeddingStore:
    """Precomputed per-sample vectors keyed by sample id."""

    dimension: int
    vectors: Mapping[str, FeatureVector]

    def __len__(self) -> int:
        return len(self.vectors)


def load_word_vectors(path) -> WordVectorTable:
    """Parse a GloVe-style text file into a :class:`WordVectorTable`.

    The dimension is inferred from the first entry; later lines with a
    different field count raise :class:`DimensionMismatchError` naming the
    line. Duplicate tokens keep the last occurrence.
    """
    path = Path(path)
    entries: dict[str, np.ndarray] = {}
    dimension: int | None = None
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split(" ")
            if len(fields) < 2:
                raise ParseError(
                    f"{path}:{lineno}: expected '<token> <f1> ... <fd>'",
                    path=path,
                    line=lineno,
                )
            token = fields[0]
            if not token:
                raise ParseError(f"{path}:{lineno}: empty token", path=path, line=lineno)
            try:
                vector = np.array([float(f) for f in fields[1:]], dtype=np.float64)
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: non-numeric vector component", path=path, line=lineno
                ) from None
            if dimension is None:
                dimension = vector.size
            elif vector.size != dimension:
                raise DimensionMismatchError(
                    f"{path}:{lineno}: expected {dimension} values, got {vector.size}"
                )
            vector.setflags(write=False)
            entries[token] = vector
    if dimension is None:
        raise ParseError(f"{path}: no entries", path=path)
    return WordVectorTable(dimension=dimension, entries=entries)


def load_embedding_store(path) -> EmbeddingStore:
    """Load precomputed vectors from a JSON Lines file keyed by sample id."""
    path = Path(path)
    vectors: dict[str, FeatureVector] = {}
    dimension: int | None = None
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{where}: {exc.msg}", path=path, line=lineno) from None
            if not isinstance(record, dict) or "id" not in record or "vector" not in record:
                raise ParseError(
                    f"{where}: expected an object with 'id' and 'vector'", path=path, line=lineno
                )
            sample_id = str(record["id"])
            if sample_id in vectors:
                raise ValidationError(f"{where}: duplicate embedding id {sample_id!r}")
            vector = FeatureVector(np.asarray(record["vector"], dtype=np.float64), sample_id)
            if dimension is None:
                dimension = vector.dimension
            elif vector.dimension != dimension:
                raise DimensionMismatchError(
                    f"{where}: expected dimension {dimension}, got {vector.dimension}"
                )
            vectors[sample_id] = vector
    if dimension is None:
        raise ParseError(f"{path}: no entries", path=path)
    return EmbeddingStore(dimension=dimension, vectors=vectors)


def tokenize(text: str) -> list[str]:
    """Lowercase and split ``text`` on whitespace, trimming edge punctuation.

    Each token is stripped of leading and trailing characters from
    ``TOKEN_STRIP_CHARS``; a token that would vanish entirely (it was pure
    punctuation) is kept unstripped. Empty input yields an empty list.
    """
    tokens = []
    for raw in text.lower().split():
        stripped = raw.strip(TOKEN_STRIP_CHARS)
        tokens.append(stripped if stripped else raw)
    return tokens


def encode_sentence(text: str, table: WordVectorTable) -> FeatureVector:
    """Encode ``text`` as the arithmetic mean of its in-vocabulary word vectors.

    Out-of-vocabulary tokens are skipped. If no token is in vocabulary (or
    the text tokenizes to nothing) :class:`EmptyEncodingError` is raised so
    the caller can skip and report the sample; a silent zero vector would
    make cosine distance undefined. Tokens are averaged in sorted order, so
    the encoding depends only on the token multiset.
    """
    if not table.entries:
        raise ValidationError("word-vector table is empty")
    known = sorted(token for token in tokenize(text) if token in table.entries)
    if not known:
        raise EmptyEncodingError(f"no in-vocabulary tokens in {text!r}")
    stacked = np.stack([table.entries[token] for token in known])
    return FeatureVector(stacked.mean(axis=0))


def lookup_embedding(sample_id: str, store: EmbeddingStore) -> FeatureVector:
    """Return the stored vector for ``sample_id``."""
    try:
        return store.vectors[sample_id]
    except KeyError:
        raise MissingEmbeddingError(f"no embedding stored for id {sample_id!r}") from None
