"""Scikit-learn style front end over the gain pipeline.

``GainEvaluator`` behaves like a novelty detector: ``fit`` learns what
normal gain looks like from real (non-adversarial) samples, ``transform``
scores adversarial pairs into gain records, and ``predict`` flags the
pairs whose gain exceeds the fitted bound. Inheriting ``BaseEstimator``
gives ``get_params`` / ``set_params``, so the evaluator clones and
composes like any other estimator.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .bootstrap import bootstrap_mean_ci, flag_exceeding, real_gain_samples
from .corpus import AdversarialPair, Dataset, Sample
from .embedding import EmbeddingStore, WordVectorTable, load_embedding_store, load_word_vectors
from .errors import InsufficientDataError, ValidationError
from .gain import GainConfig, GainRecord, pair_gain
from .metrics import MetricResources, MetricSpec, spec_from_name


def _as_dataset(X) -> Dataset:
    if isinstance(X, Dataset):
        return X
    samples = tuple(X)
    for sample in samples:
        if not isinstance(sample, Sample):
            raise ValidationError(f"expected Sample instances, got {type(sample).__name__}")
    return Dataset(samples=samples)


def _as_pairs(X) -> tuple[AdversarialPair, ...]:
    pairs = X.pairs if isinstance(X, Dataset) else tuple(X)
    for pair in pairs:
        if not isinstance(pair, AdversarialPair):
            raise ValidationError(f"expected AdversarialPair instances, got {type(pair).__name__}")
    return tuple(pairs)


class GainEvaluator(BaseEstimator):
    """Flag adversarial pairs whose gain exceeds the real-data bound.

    Parameters
    ----------
    input_metric, output_metric : str or MetricSpec
        Metric names as accepted by the CLI (``cosine_wordvec``,
        ``cosine_precomputed``, ``js``, ``step``, ``word_distance``,
        ``word_overlap``) or fully built :class:`MetricSpec` objects.
    word_vectors : WordVectorTable, str or Path, optional
        Word-vector table (or path to one) backing ``cosine_wordvec``.
    embeddings, output_embeddings : EmbeddingStore, str or Path, optional
        Precomputed vector stores backing ``cosine_precomputed``; the
        output store falls back to ``embeddings`` when not given.
    epsilon : float, default 1e-4
        Denominator smoothing under the ``epsilon_smooth`` policy.
    infinite_policy : {"epsilon_smooth", "report_infinity"}
        How a zero input distance is handled.
    batch_size : int, optional
        Size of each real-data batch; defaults to half the fitted dataset.
    n_resamples : int, default 10000
        Bootstrap resample count.
    confidence : float, default 0.95
        Confidence level of the percentile interval.
    seed : int, default 0
        Master seed for the batch split and the bootstrap.

    Attributes
    ----------
    real_sample_set_ : RealGainSampleSet
        Finite real-data gains collected during ``fit``.
    estimate_ : BootstrapEstimate
        Bootstrap mean and confidence bounds of the real gain.

    Examples
    --------
    >>> evaluator = GainEvaluator(input_metric="word_distance", output_metric="js")
    >>> records = evaluator.fit(real_dataset).transform(pair_dataset)  # doctest: +SKIP
    """

    def __init__(
        self,
        input_metric="cosine_wordvec",
        output_metric="cosine_wordvec",
        *,
        word_vectors=None,
        embeddings=None,
        output_embeddings=None,
        epsilon=1e-4,
        infinite_policy="epsilon_smooth",
        batch_size=None,
        n_resamples=10_000,
        confidence=0.95,
        seed=0,
    ):
        self.input_metric = input_metric
        self.output_metric = output_metric
        self.word_vectors = word_vectors
        self.embeddings = embeddings
        self.output_embeddings = output_embeddings
        self.epsilon = epsilon
        self.infinite_policy = infinite_policy
        self.batch_size = batch_size
        self.n_resamples = n_resamples
        self.confidence = confidence
        self.seed = seed

    def _spec(self, metric, side: str) -> MetricSpec:
        if isinstance(metric, MetricSpec):
            if metric.side != side:
                raise ValidationError(f"{side} metric has side {metric.side!r}")
            return metric
        return spec_from_name(str(metric), side)

    def _gain_config(self) -> GainConfig:
        return GainConfig(
            input_metric=self._spec(self.input_metric, "input"),
            output_metric=self._spec(self.output_metric, "output"),
            epsilon=self.epsilon,
            infinite_policy=self.infinite_policy,
        )

    def _resources(self) -> MetricResources:
        word_vectors = self.word_vectors
        if isinstance(word_vectors, (str, Path)):
            word_vectors = load_word_vectors(word_vectors)
        embeddings = self.embeddings
        if isinstance(embeddings, (str, Path)):
            embeddings = load_embedding_store(embeddings)
        output_embeddings = self.output_embeddings
        if isinstance(output_embeddings, (str, Path)):
            output_embeddings = load_embedding_store(output_embeddings)
        return MetricResources(
            word_vectors=word_vectors,
            embeddings=embeddings,
            output_embeddings=output_embeddings,
        )

    def fit(self, X, y=None):
        """Estimate the real-gain bound from real samples.

        ``X`` is a :class:`Dataset` or an iterable of :class:`Sample`.
        ``y`` is ignored; present for estimator-API compatibility.
        """
        dataset = _as_dataset(X)
        batch_size = self.batch_size
        if batch_size is None:
            batch_size = len(dataset.samples) // 2
        if batch_size < 1:
            raise InsufficientDataError("need at least 2 samples to fit the real-gain bound")
        config = self._gain_config()
        resources = self._resources()
        self.real_sample_set_ = real_gain_samples(
            dataset, config, batch_size, self.seed, resources
        )
        self.estimate_ = bootstrap_mean_ci(
            self.real_sample_set_.gains,
            n_resamples=self.n_resamples,
            confidence=self.confidence,
            seed=self.seed,
        )
        return self

    def transform(self, X) -> list[GainRecord]:
        """Score pairs into gain records.

        ``X`` is a :class:`Dataset` (its pairs are used) or an iterable of
        :class:`AdversarialPair`. Works unfitted; once fitted, records come
        back with their ``exceeds_real`` flag set.
        """
        config = self._gain_config()
        resources = self._resources()
        records = [pair_gain(pair, config, resources) for pair in _as_pairs(X)]
        if hasattr(self, "estimate_"):
            records = flag_exceeding(records, self.estimate_)
        return records

    def predict(self, X) -> np.ndarray:
        """Boolean array: True where a pair's gain exceeds the fitted bound."""
        if not hasattr(self, "estimate_"):
            raise NotFittedError("GainEvaluator must be fitted before predict")
        return np.array([record.exceeds_real for record in self.transform(X)], dtype=bool)
