"""Adversarial gain: output-space displacement relative to input-space displacement.

For a pair (x, x_adv) the gain is

    gain = D_out(phi_out(f(x)), phi_out(f(x_adv))) / D_in(phi_in(x), phi_in(x_adv))

under configurable feature transforms and distances. A large gain means a
small input change produced a large output change, the signature of an
effective adversarial example. Two policies handle D_in = 0: smooth the
denominator with a small epsilon, or report the gain as infinite.

The module also provides a targeted variant (progress toward a target
output per unit of input change) and a nearest-neighbor reference gain for
generated samples that have no original to compare against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import AdversarialPair, Dataset, Sample
from .embedding import FeatureVector, encode_sentence, lookup_embedding
from .errors import (
    DimensionMismatchError,
    EmptyEncodingError,
    EmptyInputError,
    InvalidDistributionError,
    KTooLargeError,
    MissingEmbeddingError,
    MissingTargetError,
    ValidationError,
    ZeroVectorError,
)
from .metrics import MetricResources, MetricSpec, cosine_distance, output_distance, sample_distance

INFINITE_POLICIES = ("epsilon_smooth", "report_infinity")

# Errors that invalidate one pair without invalidating the run; batch
# drivers catch these, skip the pair, and report it.
PAIR_SKIP_ERRORS = (
    EmptyEncodingError,
    ZeroVectorError,
    InvalidDistributionError,
    MissingEmbeddingError,
)


@dataclass(frozen=True)
class GainConfig:
    """Metric pairing and division policy for a gain evaluation."""

    input_metric: MetricSpec
    output_metric: MetricSpec
    epsilon: float = 1e-4
    infinite_policy: str = "epsilon_smooth"

    def __post_init__(self):
        if self.input_metric.side != "input":
            raise ValidationError("input_metric must have side 'input'")
        if self.output_metric.side != "output":
            raise ValidationError("output_metric must have side 'output'")
        if self.infinite_policy not in INFINITE_POLICIES:
            raise ValidationError(
                f"infinite_policy must be one of {INFINITE_POLICIES}, got {self.infinite_policy!r}"
            )
        if self.epsilon < 0:
            raise ValidationError("epsilon must be non-negative")
        if self.infinite_policy == "epsilon_smooth" and self.epsilon <= 0:
            raise ValidationError("epsilon must be > 0 under the epsilon_smooth policy")


@dataclass(frozen=True)
class GainRecord:
    """Per-pair distances and gain.

    For targeted records ``d_out`` holds the signed distance-to-target
    difference, so the gain may be negative. ``reference_id`` is set when a
    nearest reference stood in for the original sample.
    """

    pair_id: str
    d_in: float
    d_out: float
    gain: float
    exceeds_real: bool | None = None
    reference_id: str | None = None


@dataclass(frozen=True)
class GainSummary:
    """Aggregate view of a record batch; quantiles cover finite gains only."""

    count: int
    infinite_count: int
    max_gain: float
    finite_count: int
    finite_mean: float | None
    quantile_25: float | None
    median: float | None
    quantile_75: float | None


def compute_gain(d_in: float, d_out: float, config: GainConfig) -> float:
    """Apply the configured division policy to a distance pair.

    Under ``epsilon_smooth`` the gain is ``d_out / (d_in + epsilon)``.
    Under ``report_infinity`` the raw ratio is used and a zero denominator
    yields signed infinity (or 0.0 when ``d_out`` is also zero).
    """
    if d_in < 0:
        raise ValidationError(f"d_in must be non-negative, got {d_in!r}")
    if config.infinite_policy == "epsilon_smooth":
        return d_out / (d_in + config.epsilon)
    if d_in == 0.0:
        if d_out == 0.0:
            return 0.0
        return math.inf if d_out > 0 else -math.inf
    return d_out / d_in


def sample_pair_gain(
    x: Sample,
    x_adv: Sample,
    config: GainConfig,
    resources: MetricResources | None = None,
    *,
    pair_id: str | None = None,
    reference_id: str | None = None,
) -> GainRecord:
    """Gain between two samples; the building block behind :func:`pair_gain`.

    Unlike :class:`AdversarialPair`, this does not require distinct ids, so
    it also serves real-data pairings and generated-sample references.
    """
    pair_id = pair_id if pair_id is not None else f"{x.id}->{x_adv.id}"
    d_in_of = sample_distance(config.input_metric, resources)
    d_out_of = sample_distance(config.output_metric, resources)
    try:
        d_in = float(d_in_of(x, x_adv))
        d_out = float(d_out_of(x, x_adv))
    except PAIR_SKIP_ERRORS as exc:
        raise type(exc)(f"pair {pair_id}: {exc}") from None
    return GainRecord(
        pair_id=pair_id,
        d_in=d_in,
        d_out=d_out,
        gain=compute_gain(d_in, d_out, config),
        reference_id=reference_id,
    )


def pair_gain(
    pair: AdversarialPair, config: GainConfig, resources: MetricResources | None = None
) -> GainRecord:
    """Gain of one adversarial pair under the configured metrics."""
    return sample_pair_gain(
        pair.original, pair.adversarial, config, resources, pair_id=pair.pair_id
    )


def targeted_gain(
    pair: AdversarialPair, config: GainConfig, resources: MetricResources | None = None
) -> GainRecord:
    """Progress of the attack toward the pair's target output.

    The numerator is D_out(f(x), t) - D_out(f(x_adv), t): positive when the
    adversarial output moved closer to the target, negative when it moved
    away. It is stored in ``d_out`` and divided by the input distance under
    the usual policy, so the record carries both the raw difference and the
    normalized gain.
    """
    if pair.target is None:
        raise MissingTargetError(f"pair {pair.pair_id} has no target output")
    between = output_distance(config.output_metric, resources)
    d_in_of = sample_distance(config.input_metric, resources)
    try:
        to_target_before = float(between(pair.original.output, pair.target))
        to_target_after = float(between(pair.adversarial.output, pair.target))
        d_in = float(d_in_of(pair.original, pair.adversarial))
    except PAIR_SKIP_ERRORS as exc:
        raise type(exc)(f"pair {pair.pair_id}: {exc}") from None
    numerator = to_target_before - to_target_after
    return GainRecord(
        pair_id=pair.pair_id,
        d_in=d_in,
        d_out=numerator,
        gain=compute_gain(d_in, numerator, config),
    )


def aggregate_gain(records: Sequence[GainRecord]) -> GainSummary:
    """Summarize a batch: max over all gains, quantiles over finite ones."""
    if not records:
        raise EmptyInputError("cannot aggregate an empty record list")
    gains = [record.gain for record in records]
    finite = [g for g in gains if math.isfinite(g)]
    infinite_count = len(gains) - len(finite)
    if finite:
        q25, med, q75 = (float(q) for q in np.quantile(finite, [0.25, 0.5, 0.75]))
        finite_mean = float(np.mean(finite))
    else:
        q25 = med = q75 = finite_mean = None
    return GainSummary(
        count=len(records),
        infinite_count=infinite_count,
        max_gain=max(gains),
        finite_count=len(finite),
        finite_mean=finite_mean,
        quantile_25=q25,
        median=med,
        quantile_75=q75,
    )


@dataclass(frozen=True)
class NeighborIndex:
    """Exact cosine-distance index over reference vectors.

    Plain linear scan; at evaluation scale an approximate index is not
    worth the loss of exactness.
    """

    ids: tuple[str, ...]
    vectors: tuple[FeatureVector, ...]

    @property
    def dimension(self) -> int:
        return self.vectors[0].dimension

    def __len__(self) -> int:
        return len(self.ids)


def build_index(references: Sequence[tuple[str, FeatureVector]]) -> NeighborIndex:
    """Build a :class:`NeighborIndex` from (id, vector) pairs."""
    if not references:
        raise EmptyInputError("cannot build an index over zero vectors")
    ids = tuple(str(ref_id) for ref_id, _ in references)
    vectors = tuple(vector for _, vector in references)
    dimension = vectors[0].dimension
    for ref_id, vector in zip(ids, vectors):
        if vector.dimension != dimension:
            raise DimensionMismatchError(
                f"reference {ref_id!r} has dimension {vector.dimension}, expected {dimension}"
            )
        if not np.any(vector.values):
            raise ZeroVectorError(f"reference {ref_id!r} is a zero vector")
    return NeighborIndex(ids=ids, vectors=vectors)


def nearest_reference(
    query: FeatureVector, index: NeighborIndex, k: int = 1
) -> list[tuple[str, float]]:
    """The ``k`` nearest references by cosine distance, ascending.

    Exact linear scan; ties are broken by id in lexicographic order so the
    result is deterministic.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    if k > len(index):
        raise KTooLargeError(f"k={k} exceeds index size {len(index)}")
    scored = sorted(
        ((cosine_distance(query, vector), ref_id) for ref_id, vector in zip(index.ids, index.vectors)),
        key=lambda pair: (pair[0], pair[1]),
    )
    return [(ref_id, distance) for distance, ref_id in scored[:k]]


def input_feature_vector(
    sample: Sample, spec: MetricSpec, resources: MetricResources | None = None
) -> FeatureVector:
    """The input-side feature vector of ``sample`` under a vector-feature spec."""
    resources = resources or MetricResources()
    if spec.feature == "averaged_word_vectors":
        if resources.word_vectors is None:
            raise ValidationError("metric cosine_wordvec requires word vectors")
        return encode_sentence(sample.input_text, resources.word_vectors)
    if spec.feature == "precomputed":
        if resources.embeddings is None:
            raise ValidationError("metric cosine_precomputed requires an embedding store")
        return lookup_embedding(sample.id, resources.embeddings)
    raise ValidationError(
        f"nearest-reference search needs a vector input feature, not {spec.feature!r}"
    )


def build_input_index(
    samples: Iterable[Sample], spec: MetricSpec, resources: MetricResources | None = None
) -> NeighborIndex:
    """Index the input-side feature vectors of ``samples``."""
    return build_index(
        [(sample.id, input_feature_vector(sample, spec, resources)) for sample in samples]
    )


def generated_gain(
    generated: Sample,
    index: NeighborIndex,
    reference: Dataset | Mapping[str, Sample],
    config: GainConfig,
    resources: MetricResources | None = None,
) -> GainRecord:
    """Gain of a generated sample against its nearest known reference.

    With no original sample to compare against, the nearest reference in
    the input feature space substitutes for it; the record notes which
    reference was chosen.
    """
    if isinstance(reference, Dataset):
        reference = {sample.id: sample for sample in reference.samples}
    query = input_feature_vector(generated, config.input_metric, resources)
    ref_id, _ = nearest_reference(query, index, k=1)[0]
    try:
        ref_sample = reference[ref_id]
    except KeyError:
        raise ValidationError(f"index id {ref_id!r} is not in the reference dataset") from None
    return sample_pair_gain(
        ref_sample,
        generated,
        config,
        resources,
        pair_id=f"{ref_id}->{generated.id}",
        reference_id=ref_id,
    )


def flagged(record: GainRecord, exceeds: bool) -> GainRecord:
    """Copy of ``record`` with its exceeds-real flag set."""
    return replace(record, exceeds_real=exceeds)
