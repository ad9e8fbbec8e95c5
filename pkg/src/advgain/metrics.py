"""Distance functions for input and output spaces, and their configuration.

All distances are pure, symmetric, and non-negative:

* ``cosine_distance``     1 - |u.v| / (|u||v|), on dense vectors
* ``js_divergence``       Jensen-Shannon divergence in nats, on distributions
* ``step_distance``       1.0 if the class label changed, else 0.0
* ``word_distance``       token-level edit distance (a true metric)
* ``word_overlap``        count of distinct token types shared by two texts

A :class:`MetricSpec` names one distance together with the feature it is
computed over (averaged word vectors, precomputed vectors, raw tokens,
class distribution, or predicted class label) and the side it applies to.
:func:`sample_distance` turns a spec plus loaded resources into a callable
on sample pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .corpus import OutputValue, Sample
from .embedding import (
    EmbeddingStore,
    FeatureVector,
    WordVectorTable,
    encode_sentence,
    lookup_embedding,
    tokenize,
)
from .errors import (
    DimensionMismatchError,
    InvalidDistributionError,
    ValidationError,
    ZeroVectorError,
)

METRIC_KINDS = ("cosine_embedding", "js_divergence", "step_label", "word_distance", "word_overlap")
FEATURES = ("averaged_word_vectors", "precomputed", "raw_tokens", "class_distribution", "class_label")
SIDES = ("input", "output")

_KIND_FEATURES = {
    "cosine_embedding": {"averaged_word_vectors", "precomputed"},
    "js_divergence": {"class_distribution"},
    "step_label": {"class_label"},
    "word_distance": {"raw_tokens"},
    "word_overlap": {"raw_tokens"},
}

# Inputs are raw text, so class-based features only make sense on outputs.
_INPUT_FEATURES = {"averaged_word_vectors", "precomputed", "raw_tokens"}

# CLI-facing metric names.
_NAMED_SPECS = {
    "cosine_wordvec": ("cosine_embedding", "averaged_word_vectors"),
    "cosine_precomputed": ("cosine_embedding", "precomputed"),
    "js": ("js_divergence", "class_distribution"),
    "step": ("step_label", "class_label"),
    "word_distance": ("word_distance", "raw_tokens"),
    "word_overlap": ("word_overlap", "raw_tokens"),
}


@dataclass(frozen=True)
class MetricSpec:
    """A configured (feature, distance) pairing for one side of a system."""

    kind: str
    side: str
    feature: str

    def __post_init__(self):
        if self.kind not in _KIND_FEATURES:
            raise ValidationError(f"unknown metric kind {self.kind!r}")
        if self.side not in SIDES:
            raise ValidationError(f"metric side must be 'input' or 'output', got {self.side!r}")
        if self.feature not in FEATURES:
            raise ValidationError(f"unknown feature {self.feature!r}")
        if self.feature not in _KIND_FEATURES[self.kind]:
            raise ValidationError(
                f"metric {self.kind!r} is incompatible with feature {self.feature!r}"
            )
        if self.side == "input" and self.feature not in _INPUT_FEATURES:
            raise ValidationError(f"feature {self.feature!r} is not available on the input side")

    @property
    def name(self) -> str:
        for name, (kind, feature) in _NAMED_SPECS.items():
            if (kind, feature) == (self.kind, self.feature):
                return name
        return f"{self.kind}/{self.feature}"


def spec_from_name(name: str, side: str) -> MetricSpec:
    """Build a :class:`MetricSpec` from a CLI-facing metric name."""
    try:
        kind, feature = _NAMED_SPECS[name]
    except KeyError:
        known = ", ".join(sorted(_NAMED_SPECS))
        raise ValidationError(f"unknown metric {name!r} (choose from: {known})") from None
    return MetricSpec(kind=kind, side=side, feature=feature)


@dataclass(frozen=True)
class MetricResources:
    """Loaded embedding sources handed to metric resolution."""

    word_vectors: WordVectorTable | None = None
    embeddings: EmbeddingStore | None = None
    output_embeddings: EmbeddingStore | None = None


def _as_array(vector) -> np.ndarray:
    if isinstance(vector, FeatureVector):
        return vector.values
    return np.asarray(vector, dtype=np.float64)


def cosine_distance(u, v) -> float:
    """Absolute-cosine distance ``1 - |u.v| / (|u| |v|)`` in [0, 1].

    The absolute value folds antiparallel vectors onto parallel ones, which
    keeps the distance within [0, 1] for arbitrary dense embeddings.
    Accepts :class:`FeatureVector` or any 1-D array-like.
    """
    a, b = _as_array(u), _as_array(v)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"dimension mismatch: {a.size} vs {b.size}")
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroVectorError("cosine distance is undefined for zero-norm vectors")
    similarity = abs(float(np.dot(a, b))) / (norm_a * norm_b)
    return min(max(1.0 - similarity, 0.0), 1.0)


def _check_distribution(p: np.ndarray, name: str) -> np.ndarray:
    if p.ndim != 1 or p.size < 2:
        raise InvalidDistributionError(f"{name} must be a 1-D distribution over >= 2 classes")
    if (p < 0).any():
        raise InvalidDistributionError(f"{name} has negative entries")
    total = float(p.sum())
    if abs(total - 1.0) > 1e-6:
        raise InvalidDistributionError(f"{name} must sum to 1, got {total!r}")
    return p / total


def js_divergence(p: Sequence[float], q: Sequence[float]) -> float:
    """Jensen-Shannon divergence in natural log units, in [0, ln 2].

    JSD(p, q) = KL(p || m) / 2 + KL(q || m) / 2 with m = (p + q) / 2 and the
    convention 0 * log(0 / x) = 0. Zero iff p = q; ln 2 for distributions
    with disjoint support.
    """
    a = np.asarray(p, dtype=np.float64)
    b = np.asarray(q, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidDistributionError(f"length mismatch: {a.size} vs {b.size}")
    a = _check_distribution(a, "p")
    b = _check_distribution(b, "q")
    m = 0.5 * (a + b)

    def half_kl(x: np.ndarray) -> float:
        mask = x > 0
        return float(np.sum(x[mask] * np.log(x[mask] / m[mask])))

    return 0.5 * half_kl(a) + 0.5 * half_kl(b)


def step_distance(a: str, b: str) -> float:
    """1.0 if the class label changed, 0.0 otherwise."""
    return 0.0 if a == b else 1.0


def word_distance(a: Sequence[str], b: Sequence[str]) -> int:
    """Token-level edit distance: insertions + deletions + substitutions.

    A true metric on token lists; counts the minimum number of words added,
    removed, or changed to turn ``a`` into ``b``.
    """
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, token_a in enumerate(a, start=1):
        current = [i]
        for j, token_b in enumerate(b, start=1):
            cost = 0 if token_a == token_b else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def word_overlap(a: Sequence[str], b: Sequence[str]) -> int:
    """Number of distinct token types appearing in both lists."""
    return len(set(a) & set(b))


def _require(resource, message: str):
    if resource is None:
        raise ValidationError(message)
    return resource


def output_distance(
    spec: MetricSpec, resources: MetricResources | None = None
) -> Callable[[OutputValue, OutputValue], float]:
    """Resolve an output-side spec into a distance on :class:`OutputValue`.

    Precomputed vectors are keyed by sample id and cannot be resolved from
    a bare output value; use :func:`sample_distance` for that feature.
    """
    if spec.side != "output":
        raise ValidationError(f"expected an output-side metric, got side {spec.side!r}")
    resources = resources or MetricResources()

    def text_of(output: OutputValue) -> str:
        if not output.is_text:
            raise ValidationError("metric needs text outputs but got a class distribution")
        return output.text

    if spec.feature == "averaged_word_vectors":
        table = _require(resources.word_vectors, "metric cosine_wordvec requires word vectors")
        return lambda x, y: cosine_distance(
            encode_sentence(text_of(x), table), encode_sentence(text_of(y), table)
        )
    if spec.feature == "raw_tokens":
        distance = word_distance if spec.kind == "word_distance" else word_overlap
        return lambda x, y: float(distance(tokenize(text_of(x)), tokenize(text_of(y))))
    if spec.feature == "class_distribution":
        def js_between(x: OutputValue, y: OutputValue) -> float:
            if not (x.is_distribution and y.is_distribution):
                raise InvalidDistributionError("js metric needs class-distribution outputs")
            if x.classes != y.classes:
                raise InvalidDistributionError(
                    f"class names differ: {x.classes} vs {y.classes}"
                )
            return js_divergence(x.distribution, y.distribution)

        return js_between
    if spec.feature == "class_label":
        def step_between(x: OutputValue, y: OutputValue) -> float:
            if not (x.is_distribution and y.is_distribution):
                raise InvalidDistributionError("step metric needs class-distribution outputs")
            return step_distance(x.predicted_label, y.predicted_label)

        return step_between
    raise ValidationError(f"feature {spec.feature!r} cannot be computed from output values")


def sample_distance(
    spec: MetricSpec, resources: MetricResources | None = None
) -> Callable[[Sample, Sample], float]:
    """Resolve a spec into a distance on whole samples.

    Input-side specs read ``input_text`` (or look up the sample id in the
    precomputed store); output-side specs read ``output``.
    """
    resources = resources or MetricResources()
    if spec.feature == "precomputed":
        if spec.side == "input":
            store = _require(
                resources.embeddings, "metric cosine_precomputed requires an embedding store"
            )
        else:
            store = _require(
                resources.output_embeddings or resources.embeddings,
                "output metric cosine_precomputed requires an embedding store",
            )
        return lambda x, y: cosine_distance(
            lookup_embedding(x.id, store), lookup_embedding(y.id, store)
        )
    if spec.side == "output":
        between = output_distance(spec, resources)
        return lambda x, y: between(x.output, y.output)
    if spec.feature == "averaged_word_vectors":
        table = _require(resources.word_vectors, "metric cosine_wordvec requires word vectors")
        return lambda x, y: cosine_distance(
            encode_sentence(x.input_text, table), encode_sentence(y.input_text, table)
        )
    # raw_tokens on the input side
    distance = word_distance if spec.kind == "word_distance" else word_overlap
    return lambda x, y: float(distance(tokenize(x.input_text), tokenize(y.input_text)))
