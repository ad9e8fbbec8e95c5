"""Bounding "normal" gain on real data with the bootstrap.

Gain alone does not reveal whether a system actually misbehaved; what
counts as unusual has to be measured. Pairing two disjoint batches of real
(non-adversarial) samples yields a population of point-wise real gains,
and a percentile bootstrap over that population gives a mean and
confidence bounds. Adversarial records whose gain exceeds the upper bound
are flagged as likely mistakes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Dataset, split_disjoint_batches
from .errors import EmptyInputError, InvalidConfidenceError
from .gain import PAIR_SKIP_ERRORS, GainConfig, GainRecord, flagged, sample_pair_gain
from .metrics import MetricResources


@dataclass(frozen=True)
class RealGainSampleSet:
    """Point-wise gains between two disjoint batches of real samples.

    Only finite gains are kept; pairs whose gain was infinite or whose
    metrics failed (for example an un-encodable text) are counted instead
    of silently dropped.
    """

    gains: tuple[float, ...]
    pairing_seed: int
    input_metric_id: str
    output_metric_id: str
    excluded_infinite: int = 0
    skipped_errors: int = 0


@dataclass(frozen=True)
class BootstrapEstimate:
    """Bootstrap mean with percentile confidence bounds."""

    mean: float
    ci_low: float
    ci_high: float
    confidence: float
    n_resamples: int
    seed: int


def real_gain_samples(
    dataset: Dataset,
    config: GainConfig,
    batch_size: int,
    seed: int,
    resources: MetricResources | None = None,
) -> RealGainSampleSet:
    """Compute real-data gains between seeded disjoint batches.

    The dataset is split into two id-disjoint batches of ``batch_size`` and
    the gain is evaluated at each aligned index, one value per index.
    Deterministic for a fixed seed.
    """
    first, second = split_disjoint_batches(dataset, batch_size, seed)
    gains: list[float] = []
    excluded_infinite = 0
    skipped_errors = 0
    for x1, x2 in zip(first, second):
        try:
            record = sample_pair_gain(x1, x2, config, resources)
        except PAIR_SKIP_ERRORS:
            skipped_errors += 1
            continue
        if math.isinf(record.gain):
            excluded_infinite += 1
            continue
        gains.append(record.gain)
    return RealGainSampleSet(
        gains=tuple(gains),
        pairing_seed=seed,
        input_metric_id=config.input_metric.name,
        output_metric_id=config.output_metric.name,
        excluded_infinite=excluded_infinite,
        skipped_errors=skipped_errors,
    )


def bootstrap_mean_ci(
    samples: Sequence[float],
    n_resamples: int = 10_000,
    confidence: float = 0.95,
    seed: int = 0,
) -> BootstrapEstimate:
    """Percentile-bootstrap mean and confidence interval (Efron & Tibshirani).

    Draws ``n_resamples`` with-replacement resamples of size ``len(samples)``,
    takes the mean of each, and reports the mean of those resample means
    with the (alpha/2, 1 - alpha/2) empirical quantiles as bounds.

    Each resample uses its own generator seeded with ``seed XOR index``, so
    the estimate is bitwise reproducible regardless of scheduling and the
    resampling loop may be parallelized by index.
    """
    if len(samples) == 0:
        raise EmptyInputError("cannot bootstrap an empty sample set")
    if not 0.0 < confidence < 1.0:
        raise InvalidConfidenceError(f"confidence must be in (0, 1), got {confidence!r}")
    if n_resamples < 1:
        raise ValueError("n_resamples must be a positive integer")
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    values = np.asarray(samples, dtype=np.float64)
    n = values.size
    means = np.empty(n_resamples, dtype=np.float64)
    for i in range(n_resamples):
        rng = np.random.default_rng(seed ^ i)
        means[i] = values[rng.integers(0, n, size=n)].mean()
    alpha = 1.0 - confidence
    ci_low, ci_high = np.quantile(means, [alpha / 2.0, 1.0 - alpha / 2.0])
    return BootstrapEstimate(
        mean=float(means.mean()),
        ci_low=float(ci_low),
        ci_high=float(ci_high),
        confidence=confidence,
        n_resamples=n_resamples,
        seed=seed,
    )


def flag_exceeding(
    records: Sequence[GainRecord], estimate: BootstrapEstimate
) -> list[GainRecord]:
    """Set each record's ``exceeds_real`` to gain > upper bound (strict).

    Positive infinite gains always exceed the bound.
    """
    return [flagged(record, bool(record.gain > estimate.ci_high)) for record in records]
