"""Adversarial gain evaluation for NLP systems.

Quantifies attack effectiveness as the ratio of output-space displacement
to input-space displacement under pluggable feature transforms and
distance metrics, bounds what "normal" gain looks like on real data with
a bootstrap estimator, and flags adversarial pairs above that bound.
"""

from __future__ import annotations

from .bootstrap import (
    BootstrapEstimate,
    RealGainSampleSet,
    bootstrap_mean_ci,
    flag_exceeding,
    real_gain_samples,
)
from .corpus import (
    AdversarialPair,
    Dataset,
    OutputValue,
    Sample,
    load_dataset,
    save_dataset,
    split_disjoint_batches,
)
from .embedding import (
    EmbeddingStore,
    FeatureVector,
    WordVectorTable,
    encode_sentence,
    load_embedding_store,
    load_word_vectors,
    lookup_embedding,
    tokenize,
)
from .errors import (
    AdvGainError,
    ConfigError,
    DimensionMismatchError,
    EmptyEncodingError,
    EmptyInputError,
    InsufficientDataError,
    InvalidConfidenceError,
    InvalidDistributionError,
    KTooLargeError,
    MissingEmbeddingError,
    MissingTargetError,
    ParseError,
    ValidationError,
    ZeroVectorError,
)
from .gain import (
    GainConfig,
    GainRecord,
    GainSummary,
    NeighborIndex,
    aggregate_gain,
    build_index,
    build_input_index,
    compute_gain,
    generated_gain,
    input_feature_vector,
    nearest_reference,
    pair_gain,
    sample_pair_gain,
    targeted_gain,
)
from .metrics import (
    MetricResources,
    MetricSpec,
    cosine_distance,
    js_divergence,
    output_distance,
    sample_distance,
    spec_from_name,
    step_distance,
    word_distance,
    word_overlap,
)

__version__ = "0.1.0"

__all__ = [
    "AdvGainError",
    "AdversarialPair",
    "BootstrapEstimate",
    "ConfigError",
    "Dataset",
    "DimensionMismatchError",
    "EmbeddingStore",
    "EmptyEncodingError",
    "EmptyInputError",
    "FeatureVector",
    "GainConfig",
    "GainEvaluator",
    "GainRecord",
    "GainSummary",
    "InsufficientDataError",
    "InvalidConfidenceError",
    "InvalidDistributionError",
    "KTooLargeError",
    "MetricResources",
    "MetricSpec",
    "MissingEmbeddingError",
    "MissingTargetError",
    "NeighborIndex",
    "OutputValue",
    "ParseError",
    "RealGainSampleSet",
    "Sample",
    "ValidationError",
    "WordVectorTable",
    "ZeroVectorError",
    "aggregate_gain",
    "bootstrap_mean_ci",
    "build_index",
    "build_input_index",
    "compute_gain",
    "cosine_distance",
    "encode_sentence",
    "flag_exceeding",
    "generated_gain",
    "input_feature_vector",
    "js_divergence",
    "load_dataset",
    "load_embedding_store",
    "load_word_vectors",
    "lookup_embedding",
    "nearest_reference",
    "pair_gain",
    "real_gain_samples",
    "sample_distance",
    "sample_pair_gain",
    "save_dataset",
    "spec_from_name",
    "split_disjoint_batches",
    "step_distance",
    "targeted_gain",
    "tokenize",
    "word_distance",
    "word_overlap",
    "output_distance",
]


def __getattr__(name: str):
    # GainEvaluator pulls in scikit-learn; load it lazily so the CLI and the
    # numeric core stay import-light.
    if name == "GainEvaluator":
        from .estimator import GainEvaluator

        return GainEvaluator
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
