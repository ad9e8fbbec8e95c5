"""Immutable datasets of model inputs, outputs, and adversarial pairs.

Canonical storage is JSON Lines (one record per line, UTF-8). Two record
shapes are accepted in the same file:

Sample record (text output or class distribution, exactly one of them)::

    {"id": "s1", "input": "some text", "output_text": "a summary"}
    {"id": "s2", "input": "some text", "output_dist": [0.9, 0.1],
     "classes": ["pos", "neg"], "label": "pos"}

Pair record (embeds two full sample records)::

    {"attack": "word_flip", "original": {...}, "adversarial": {...},
     "target": {"output_dist": [0.0, 1.0], "classes": ["pos", "neg"]}}

An optional leading ``{"_metadata": {...}}`` record carries free-form
string metadata and round-trips through :func:`save_dataset`.

CSV is supported as a convenience import for plain samples with text
outputs, with columns ``id,input,output_text[,label]``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import InsufficientDataError, ParseError, ValidationError

# Probabilities in the wild are printed at low precision, so distribution
# sums are accepted within this tolerance.
DISTRIBUTION_SUM_TOLERANCE = 1e-6

_PROVENANCE_KEYS = ("provenance_path", "provenance_format", "provenance_pair_samples")


@dataclass(frozen=True)
class OutputValue:
    """A system output: either raw text or a class distribution.

    Exactly one variant must be present. Distributions carry their class
    names so that outputs from different samples can be aligned.
    """

    text: str | None = None
    distribution: tuple[float, ...] | None = None
    classes: tuple[str, ...] | None = None

    def __post_init__(self):
        has_text = self.text is not None
        has_dist = self.distribution is not None
        if has_text == has_dist:
            raise ValidationError("output must have exactly one of text or distribution")
        if has_dist:
            dist = tuple(float(p) for p in self.distribution)
            object.__setattr__(self, "distribution", dist)
            if self.classes is None:
                raise ValidationError("distribution output requires class names")
            classes = tuple(str(c) for c in self.classes)
            object.__setattr__(self, "classes", classes)
            if len(dist) != len(classes):
                raise ValidationError(
                    f"distribution length {len(dist)} != class count {len(classes)}"
                )
            if len(dist) < 2:
                raise ValidationError("distribution must cover at least 2 classes")
            if any(p < 0 for p in dist):
                raise ValidationError("distribution entries must be >= 0")
            if not math.isclose(sum(dist), 1.0, abs_tol=DISTRIBUTION_SUM_TOLERANCE):
                raise ValidationError(f"distribution must sum to 1, got {sum(dist)!r}")
        elif self.classes is not None:
            raise ValidationError("text output must not carry class names")

    @property
    def is_text(self) -> bool:
        return self.text is not None

    @property
    def is_distribution(self) -> bool:
        return self.distribution is not None

    @property
    def predicted_label(self) -> str | None:
        """Class name with the highest probability; None for text outputs."""
        if not self.is_distribution:
            return None
        return self.classes[int(np.argmax(self.distribution))]


@dataclass(frozen=True)
class Sample:
    """One input text together with the system output it produced."""

    id: str
    input_text: str
    output: OutputValue
    label: str | None = None

    def __post_init__(self):
        if not self.id:
            raise ValidationError("sample id must be non-empty")


@dataclass(frozen=True)
class AdversarialPair:
    """An original sample and the adversarial sample derived from it.

    ``target`` is optional and only consumed by targeted gain; it is the
    output the attack tried to steer the system toward.
    """

    original: Sample
    adversarial: Sample
    attack_name: str
    target: OutputValue | None = None

    def __post_init__(self):
        if self.original.id == self.adversarial.id:
            raise ValidationError(
                f"pair must join two distinct samples, got id {self.original.id!r} twice"
            )
        if self.original.output.is_text != self.adversarial.output.is_text:
            raise ValidationError(
                f"pair {self.pair_id}: outputs must be the same variant (text vs distribution)"
            )

    @property
    def pair_id(self) -> str:
        return f"{self.original.id}->{self.adversarial.id}"


@dataclass(frozen=True)
class Dataset:
    """An ordered, validated collection of samples and adversarial pairs.

    Immutable after construction; safe for unrestricted concurrent reads.
    Pairs may embed samples that do not appear in ``samples``.
    """

    samples: tuple[Sample, ...] = ()
    pairs: tuple[AdversarialPair, ...] = ()
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "pairs", tuple(self.pairs))
        seen: set[str] = set()
        for sample in self.samples:
            if sample.id in seen:
                raise ValidationError(f"duplicate sample id {sample.id!r}")
            seen.add(sample.id)
        for key, value in self.metadata.items():
            if not isinstance(key, str) or not isinstance(value, str):
                raise ValidationError(f"metadata must map strings to strings, got {key!r}")

    def sample_by_id(self, sample_id: str) -> Sample:
        for sample in self.samples:
            if sample.id == sample_id:
                return sample
        raise KeyError(sample_id)


def _output_from_record(record: dict, where: str) -> OutputValue:
    if "output_text" in record:
        if "output_dist" in record:
            raise ValidationError(f"{where}: record has both output_text and output_dist")
        return OutputValue(text=str(record["output_text"]))
    if "output_dist" in record:
        return OutputValue(
            distribution=tuple(record["output_dist"]),
            classes=tuple(record.get("classes") or ()),
        )
    raise ParseError(f"{where}: record has neither output_text nor output_dist")


def _sample_from_record(record: dict, where: str) -> Sample:
    if not isinstance(record, dict):
        raise ParseError(f"{where}: expected an object, got {type(record).__name__}")
    for key in ("id", "input"):
        if key not in record:
            raise ParseError(f"{where}: record is missing {key!r}")
    label = record.get("label")
    return Sample(
        id=str(record["id"]),
        input_text=str(record["input"]),
        output=_output_from_record(record, where),
        label=None if label is None else str(label),
    )


def _pair_from_record(record: dict, where: str) -> AdversarialPair:
    for key in ("attack", "original", "adversarial"):
        if key not in record:
            raise ParseError(f"{where}: pair record is missing {key!r}")
    target = record.get("target")
    return AdversarialPair(
        original=_sample_from_record(record["original"], where),
        adversarial=_sample_from_record(record["adversarial"], where),
        attack_name=str(record["attack"]),
        target=None if target is None else _output_from_record(target, where),
    )


def _load_jsonl(path: Path) -> tuple[list[Sample], list[AdversarialPair], dict[str, str]]:
    samples: list[Sample] = []
    pairs: list[AdversarialPair] = []
    metadata: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{where}: {exc.msg}", path=path, line=lineno) from None
            if not isinstance(record, dict):
                raise ParseError(f"{where}: expected an object", path=path, line=lineno)
            try:
                if "_metadata" in record:
                    meta = record["_metadata"]
                    if not isinstance(meta, dict):
                        raise ValidationError(f"{where}: _metadata must be an object")
                    metadata.update({str(k): str(v) for k, v in meta.items()})
                elif "original" in record or "adversarial" in record:
                    pairs.append(_pair_from_record(record, where))
                else:
                    samples.append(_sample_from_record(record, where))
            except ValidationError as exc:
                message = str(exc)
                if not message.startswith(str(path)):
                    message = f"{where}: {message}"
                raise ValidationError(message) from None
    return samples, pairs, metadata


def _load_csv(path: Path) -> list[Sample]:
    samples: list[Sample] = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        fields = reader.fieldnames or []
        for column in ("id", "input", "output_text"):
            if column not in fields:
                raise ParseError(f"{path}: csv is missing required column {column!r}")
        for record in reader:
            where = f"{path}:{reader.line_num}"
            try:
                samples.append(
                    Sample(
                        id=str(record["id"] or ""),
                        input_text=str(record["input"] or ""),
                        output=OutputValue(text=str(record["output_text"] or "")),
                        label=record.get("label") or None,
                    )
                )
            except ValidationError as exc:
                raise ValidationError(f"{where}: {exc}") from None
    return samples


def _pair_provenance(samples: Iterable[Sample], pairs: Iterable[AdversarialPair]) -> str:
    known = {sample.id for sample in samples}
    reused = embedded = 0
    for pair in pairs:
        for sample in (pair.original, pair.adversarial):
            if sample.id in known:
                reused += 1
            else:
                embedded += 1
    if reused and embedded:
        return "mixed"
    if reused:
        return "shared"
    if embedded:
        return "holdout"
    return "none"


def load_dataset(path, format: str = "jsonl") -> Dataset:
    """Load and validate a dataset from ``path``.

    ``format`` is ``"jsonl"`` or ``"csv"``. Loading preserves record order.
    Provenance keys (source path, format, and whether pairs reuse listed
    samples) are recorded in ``metadata`` unless the file already carries
    them, so a save/load round trip reproduces an equal dataset.

    Raises :class:`ParseError` for malformed records (with line numbers),
    :class:`ValidationError` for invariant violations, and ``OSError`` when
    the file cannot be read.
    """
    path = Path(path)
    if format == "jsonl":
        samples, pairs, metadata = _load_jsonl(path)
    elif format == "csv":
        samples, pairs, metadata = _load_csv(path), [], {}
    else:
        raise ValueError(f"unknown dataset format {format!r}")
    metadata.setdefault("provenance_path", str(path))
    metadata.setdefault("provenance_format", format)
    metadata.setdefault("provenance_pair_samples", _pair_provenance(samples, pairs))
    return Dataset(samples=tuple(samples), pairs=tuple(pairs), metadata=metadata)


def _output_to_record(output: OutputValue) -> dict:
    if output.is_text:
        return {"output_text": output.text}
    return {"output_dist": list(output.distribution), "classes": list(output.classes)}


def _sample_to_record(sample: Sample) -> dict:
    record = {"id": sample.id, "input": sample.input_text}
    record.update(_output_to_record(sample.output))
    if sample.label is not None:
        record["label"] = sample.label
    return record


def save_dataset(dataset: Dataset, path) -> None:
    """Serialize ``dataset`` to JSON Lines at ``path`` (UTF-8, LF endings)."""
    path = Path(path)
    lines = []
    if dataset.metadata:
        lines.append(json.dumps({"_metadata": dict(dataset.metadata)}, ensure_ascii=False))
    for sample in dataset.samples:
        lines.append(json.dumps(_sample_to_record(sample), ensure_ascii=False))
    for pair in dataset.pairs:
        record = {
            "attack": pair.attack_name,
            "original": _sample_to_record(pair.original),
            "adversarial": _sample_to_record(pair.adversarial),
        }
        if pair.target is not None:
            record["target"] = _output_to_record(pair.target)
        lines.append(json.dumps(record, ensure_ascii=False))
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def split_disjoint_batches(
    dataset: Dataset, batch_size: int, seed: int
) -> tuple[list[Sample], list[Sample]]:
    """Draw two id-disjoint batches of ``batch_size`` samples each.

    Samples are shuffled uniformly under ``seed`` and the first two blocks
    are returned, so the split is deterministic for a fixed seed.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be a positive integer")
    n = len(dataset.samples)
    if 2 * batch_size > n:
        raise InsufficientDataError(
            f"need at least {2 * batch_size} samples for two batches of {batch_size}, have {n}"
        )
    order = np.random.default_rng(seed).permutation(n)
    first = [dataset.samples[i] for i in order[:batch_size]]
    second = [dataset.samples[i] for i in order[batch_size : 2 * batch_size]]
    return first, second
