"""Command-line front end: eval, bootstrap, scatter, and knn reports.

Every run is driven by one configuration (file values overridden by
flags), writes reports only after the whole computation succeeded, and
draws all randomness from a single explicit seed. Exit codes: 0 success,
1 runtime failure, 2 configuration or validation failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import reports
from .bootstrap import bootstrap_mean_ci, flag_exceeding, real_gain_samples
from .corpus import Dataset, load_dataset
from .embedding import load_embedding_store, load_word_vectors, tokenize
from .errors import (
    AdvGainError,
    ConfigError,
    InsufficientDataError,
    InvalidConfidenceError,
    KTooLargeError,
    ParseError,
    ValidationError,
)
from .gain import (
    PAIR_SKIP_ERRORS,
    GainConfig,
    GainRecord,
    aggregate_gain,
    build_index,
    input_feature_vector,
    nearest_reference,
    pair_gain,
    sample_pair_gain,
)
from .metrics import MetricResources, spec_from_name, word_overlap

VALIDATION_ERRORS = (
    ConfigError,
    ValidationError,
    ParseError,
    InsufficientDataError,
    KTooLargeError,
    InvalidConfidenceError,
)

FORMATS = ("csv", "jsonl", "markdown")

GAIN_FIELDS = ("pair_id", "d_in", "d_out", "gain", "word_overlap", "exceeds_real")
SCATTER_FIELDS = ("pair_id", "d_in", "d_out", "gain")
KNN_FIELDS = ("generated_id", "reference_id", "d_in", "d_out", "gain")
NEIGHBOR_FIELDS = ("generated_id", "rank", "reference_id", "distance")


@dataclass
class RunConfig:
    """One evaluation run, fully resolved from config file and flags."""

    pairs: Path | None = None
    real: Path | None = None
    generated: Path | None = None
    word_vectors: Path | None = None
    embeddings: Path | None = None
    output_embeddings: Path | None = None
    in_metric: str = "cosine_wordvec"
    out_metric: str = "cosine_wordvec"
    epsilon: float = 1e-4
    infinite_policy: str = "epsilon_smooth"
    batch_size: int | None = None
    resamples: int = 10_000
    confidence: float = 0.95
    seed: int | None = None
    k: int = 1
    out: Path = Path(".")
    formats: tuple[str, ...] = ("csv",)


_PATH_KEYS = ("pairs", "real", "generated", "word_vectors", "embeddings", "output_embeddings")
_INT_KEYS = ("batch_size", "resamples", "seed", "k")
_FLOAT_KEYS = ("epsilon", "confidence")


def load_config_file(path: Path) -> dict[str, str]:
    """Parse a flat ``key = value`` config file; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(key: str, raw: str):
    try:
        if key in _PATH_KEYS or key == "out":
            return Path(raw)
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key == "format":
            return raw
    except ValueError:
        raise ConfigError(f"config value {key} = {raw!r} is not a valid number") from None
    return raw


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config-file values, and flags (flags win)."""
    config = RunConfig()
    file_values: dict[str, str] = {}
    if args.config is not None:
        config_path = Path(args.config)
        if not config_path.is_file():
            raise ConfigError(f"config file not found: {config_path}")
        file_values = load_config_file(config_path)
    known = {f.name for f in fields(RunConfig)} | {"format"}
    for key, raw in file_values.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")

    def pick(key: str, flag_value):
        if flag_value is not None:
            return flag_value
        if key in file_values:
            return _coerce(key, file_values[key])
        return None

    for key in (*_PATH_KEYS, "batch_size", "seed"):
        value = pick(key, getattr(args, key, None))
        if value is not None:
            setattr(config, key, Path(value) if key in _PATH_KEYS else int(value))
    for key in ("in_metric", "out_metric", "infinite_policy"):
        value = pick(key, getattr(args, key, None))
        if value is not None:
            setattr(config, key, str(value))
    for key in ("epsilon", "confidence"):
        value = pick(key, getattr(args, key, None))
        if value is not None:
            setattr(config, key, float(value))
    for key in ("resamples", "k"):
        value = pick(key, getattr(args, key, None))
        if value is not None:
            setattr(config, key, int(value))
    out = pick("out", getattr(args, "out", None))
    if out is not None:
        config.out = Path(out)
    fmt_value = pick("format", getattr(args, "format", None))
    if fmt_value is not None:
        config.formats = tuple(token.strip() for token in str(fmt_value).split(",") if token.strip())
    return config


def _needed_sources(config: RunConfig) -> set[str]:
    needed: set[str] = set()
    for name, side in ((config.in_metric, "input"), (config.out_metric, "output")):
        spec = spec_from_name(name, side)
        if spec.feature == "averaged_word_vectors":
            needed.add("word_vectors")
        elif spec.feature == "precomputed":
            needed.add("embeddings")
    return needed


def validate_config(config: RunConfig, command: str) -> None:
    required = {
        "eval": ("pairs",),
        "scatter": ("pairs",),
        "bootstrap": ("real",),
        "knn": ("real", "generated"),
    }[command]
    for key in required:
        if getattr(config, key) is None:
            raise ConfigError(f"command {command!r} requires --{key.replace('_', '-')}")
    for key in _PATH_KEYS:
        path = getattr(config, key)
        if path is not None and not Path(path).is_file():
            raise ConfigError(f"{key.replace('_', '-')} file not found: {path}")

    # Metric names and sides are checked by construction.
    spec_from_name(config.in_metric, "input")
    out_spec = spec_from_name(config.out_metric, "output")

    needed = _needed_sources(config)
    provided = {key for key in ("word_vectors", "embeddings") if getattr(config, key) is not None}
    missing = needed - provided
    if missing:
        raise ConfigError(
            "selected metrics need an embedding source: " + ", ".join(sorted(missing))
        )
    unused = provided - needed
    if unused:
        raise ConfigError(
            "embedding source does not match the selected metrics: " + ", ".join(sorted(unused))
        )
    if config.output_embeddings is not None and out_spec.feature != "precomputed":
        raise ConfigError("--output-embeddings is only valid with out-metric cosine_precomputed")

    if config.epsilon < 0:
        raise ConfigError("epsilon must be non-negative")
    if config.infinite_policy == "epsilon_smooth" and config.epsilon <= 0:
        raise ConfigError("epsilon must be > 0 under the epsilon_smooth policy")
    if config.infinite_policy not in ("epsilon_smooth", "report_infinity"):
        raise ConfigError(f"unknown infinite policy {config.infinite_policy!r}")
    if config.resamples < 1:
        raise ConfigError("resamples must be a positive integer")
    if not 0.0 < config.confidence < 1.0:
        raise ConfigError("confidence must be strictly between 0 and 1")
    if config.batch_size is not None and config.batch_size < 1:
        raise ConfigError("batch-size must be a positive integer")
    if config.k < 1:
        raise ConfigError("k must be a positive integer")
    unknown_formats = set(config.formats) - set(FORMATS)
    if unknown_formats or not config.formats:
        raise ConfigError(f"format must be a subset of {'|'.join(FORMATS)}")
    needs_seed = command == "bootstrap" or (command == "eval" and config.real is not None)
    if needs_seed and config.seed is None:
        raise ConfigError(f"command {command!r} draws bootstrap samples; --seed is required")


def _load(path: Path) -> Dataset:
    return load_dataset(path, format="csv" if path.suffix.lower() == ".csv" else "jsonl")


def _resources(config: RunConfig) -> MetricResources:
    return MetricResources(
        word_vectors=load_word_vectors(config.word_vectors) if config.word_vectors else None,
        embeddings=load_embedding_store(config.embeddings) if config.embeddings else None,
        output_embeddings=(
            load_embedding_store(config.output_embeddings) if config.output_embeddings else None
        ),
    )


def _gain_config(config: RunConfig) -> GainConfig:
    return GainConfig(
        input_metric=spec_from_name(config.in_metric, "input"),
        output_metric=spec_from_name(config.out_metric, "output"),
        epsilon=config.epsilon,
        infinite_policy=config.infinite_policy,
    )


def _score_pairs(
    dataset: Dataset, gain_config: GainConfig, resources: MetricResources
) -> tuple[list[GainRecord], list[dict]]:
    """Score every pair, skipping (and reporting) pairs whose metrics fail."""
    records: list[GainRecord] = []
    skipped: list[dict] = []
    for pair in dataset.pairs:
        try:
            records.append(pair_gain(pair, gain_config, resources))
        except PAIR_SKIP_ERRORS as exc:
            skipped.append({"pair_id": pair.pair_id, "reason": str(exc)})
    return records, skipped


def _pair_overlaps(dataset: Dataset) -> dict[str, int]:
    overlaps: dict[str, int] = {}
    for pair in dataset.pairs:
        if pair.original.output.is_text and pair.adversarial.output.is_text:
            overlaps[pair.pair_id] = word_overlap(
                tokenize(pair.original.output.text), tokenize(pair.adversarial.output.text)
            )
    return overlaps


def _real_estimate(config: RunConfig, gain_config: GainConfig, resources: MetricResources):
    dataset = _load(config.real)
    batch_size = config.batch_size
    if batch_size is None:
        batch_size = len(dataset.samples) // 2
    if batch_size < 1:
        raise InsufficientDataError("real dataset must hold at least 2 samples")
    sample_set = real_gain_samples(dataset, gain_config, batch_size, config.seed, resources)
    if not sample_set.gains:
        raise ValidationError(
            "no finite real-data gains were collected; cannot bound normal gain"
        )
    estimate = bootstrap_mean_ci(
        sample_set.gains,
        n_resamples=config.resamples,
        confidence=config.confidence,
        seed=config.seed,
    )
    return sample_set, estimate


def _write_reports(out_dir: Path, files: dict[str, str]) -> None:
    """Write all reports, or none: partial outputs are removed on failure."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        for name, content in files.items():
            path = out_dir / name
            path.write_text(content, encoding="utf-8")
            written.append(path)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise


def _gain_rows(records: list[GainRecord], overlaps: dict[str, int]) -> list[dict]:
    return [
        {
            "pair_id": record.pair_id,
            "d_in": record.d_in,
            "d_out": record.d_out,
            "gain": record.gain,
            "word_overlap": overlaps.get(record.pair_id),
            "exceeds_real": record.exceeds_real,
        }
        for record in records
    ]


def cmd_eval(config: RunConfig) -> int:
    gain_config = _gain_config(config)
    resources = _resources(config)
    dataset = _load(config.pairs)
    records, skipped = _score_pairs(dataset, gain_config, resources)

    files: dict[str, str] = {}
    estimate = None
    sample_set = None
    if config.real is not None:
        sample_set, estimate = _real_estimate(config, gain_config, resources)
        records = flag_exceeding(records, estimate)

    rows = _gain_rows(records, _pair_overlaps(dataset))
    for fmt_name in config.formats:
        renderer = reports.RENDERERS[fmt_name]
        files[f"gains.{reports.REPORT_SUFFIX[fmt_name]}"] = renderer(rows, GAIN_FIELDS)
    summary = aggregate_gain(records) if records else None
    files["summary.json"] = reports.to_json(reports.summary_payload(summary, skipped))
    if estimate is not None:
        files["bootstrap.json"] = reports.to_json(reports.bootstrap_payload(estimate, sample_set))
        files["bootstrap.txt"] = reports.bootstrap_text(estimate)
    _write_reports(config.out, files)
    print(f"evaluated {len(records)} pairs ({len(skipped)} skipped) -> {config.out}")
    return 0


def cmd_bootstrap(config: RunConfig) -> int:
    gain_config = _gain_config(config)
    resources = _resources(config)
    sample_set, estimate = _real_estimate(config, gain_config, resources)
    files = {
        "bootstrap.json": reports.to_json(reports.bootstrap_payload(estimate, sample_set)),
        "bootstrap.txt": reports.bootstrap_text(estimate),
    }
    _write_reports(config.out, files)
    print(
        f"real gain over {len(sample_set.gains)} pairings: "
        + reports.bootstrap_text(estimate).strip()
    )
    return 0


def cmd_scatter(config: RunConfig) -> int:
    gain_config = _gain_config(config)
    resources = _resources(config)
    dataset = _load(config.pairs)
    records, skipped = _score_pairs(dataset, gain_config, resources)
    records.sort(key=lambda record: record.pair_id)
    finite_rows = [
        {"pair_id": r.pair_id, "d_in": r.d_in, "d_out": r.d_out, "gain": r.gain}
        for r in records
        if math.isfinite(r.gain)
    ]
    infinite_rows = [{"pair_id": r.pair_id} for r in records if math.isinf(r.gain)]
    files = {
        "scatter.csv": reports.rows_to_csv(finite_rows, SCATTER_FIELDS),
        "scatter_infinite.csv": reports.rows_to_csv(infinite_rows, ("pair_id",)),
    }
    _write_reports(config.out, files)
    print(
        f"plotted {len(finite_rows)} finite pairs, {len(infinite_rows)} infinite, "
        f"{len(skipped)} skipped -> {config.out}"
    )
    return 0


def cmd_knn(config: RunConfig) -> int:
    gain_config = _gain_config(config)
    if gain_config.input_metric.feature not in ("averaged_word_vectors", "precomputed"):
        raise ConfigError("knn needs a vector input metric (cosine_wordvec or cosine_precomputed)")
    resources = _resources(config)
    reference = _load(config.real)
    generated = _load(config.generated)

    ref_vectors = []
    unusable_refs = 0
    for sample in reference.samples:
        try:
            ref_vectors.append((sample.id, input_feature_vector(sample, gain_config.input_metric, resources)))
        except PAIR_SKIP_ERRORS:
            unusable_refs += 1
    if not ref_vectors:
        raise ValidationError("reference dataset yielded no encodable samples")
    if config.k > len(ref_vectors):
        raise KTooLargeError(f"k={config.k} exceeds {len(ref_vectors)} usable references")
    index = build_index(ref_vectors)
    ref_by_id = {sample.id: sample for sample in reference.samples}

    rows: list[dict] = []
    neighbor_rows: list[dict] = []
    skipped: list[dict] = []
    for sample in generated.samples:
        try:
            query = input_feature_vector(sample, gain_config.input_metric, resources)
            neighbors = nearest_reference(query, index, k=config.k)
            nearest_id = neighbors[0][0]
            record = sample_pair_gain(
                ref_by_id[nearest_id],
                sample,
                gain_config,
                resources,
                pair_id=f"{nearest_id}->{sample.id}",
                reference_id=nearest_id,
            )
        except PAIR_SKIP_ERRORS as exc:
            skipped.append({"generated_id": sample.id, "reason": str(exc)})
            continue
        rows.append(
            {
                "generated_id": sample.id,
                "reference_id": record.reference_id,
                "d_in": record.d_in,
                "d_out": record.d_out,
                "gain": record.gain,
            }
        )
        for rank, (ref_id, distance) in enumerate(neighbors, start=1):
            neighbor_rows.append(
                {
                    "generated_id": sample.id,
                    "rank": rank,
                    "reference_id": ref_id,
                    "distance": distance,
                }
            )
    files = {
        "knn.csv": reports.rows_to_csv(rows, KNN_FIELDS),
        "knn_neighbors.csv": reports.rows_to_csv(neighbor_rows, NEIGHBOR_FIELDS),
    }
    _write_reports(config.out, files)
    print(
        f"scored {len(rows)} generated samples against {len(ref_vectors)} references "
        f"({len(skipped)} skipped, {unusable_refs} unusable references) -> {config.out}"
    )
    return 0


_COMMANDS = {
    "eval": cmd_eval,
    "bootstrap": cmd_bootstrap,
    "scatter": cmd_scatter,
    "knn": cmd_knn,
}


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file; flags override it")
    parser.add_argument("--pairs", help="adversarial pair dataset (jsonl)")
    parser.add_argument("--real", help="real sample dataset (jsonl or csv)")
    parser.add_argument("--generated", help="generated sample dataset (jsonl or csv)")
    parser.add_argument("--word-vectors", dest="word_vectors", help="GloVe-style word vector file")
    parser.add_argument("--embeddings", help="precomputed vector store (jsonl)")
    parser.add_argument(
        "--output-embeddings",
        dest="output_embeddings",
        help="separate precomputed store for the output side",
    )
    parser.add_argument(
        "--in-metric",
        dest="in_metric",
        help="input distance: cosine_wordvec | cosine_precomputed | word_distance | word_overlap",
    )
    parser.add_argument(
        "--out-metric",
        dest="out_metric",
        help="output distance: cosine_wordvec | cosine_precomputed | js | step | word_distance | word_overlap",
    )
    parser.add_argument("--epsilon", type=float, help="denominator smoothing (default 1e-4)")
    parser.add_argument(
        "--infinite-policy",
        dest="infinite_policy",
        choices=("epsilon_smooth", "report_infinity"),
        help="how a zero input distance is handled",
    )
    parser.add_argument("--batch-size", dest="batch_size", type=int, help="real-data batch size")
    parser.add_argument("--resamples", type=int, help="bootstrap resamples (default 10000)")
    parser.add_argument("--confidence", type=float, help="bootstrap confidence (default 0.95)")
    parser.add_argument("--seed", type=int, help="master seed; required when bootstrapping")
    parser.add_argument("--out", help="output directory (default .)")
    parser.add_argument("--format", help="report formats: csv, jsonl, markdown (comma separated)")
    parser.add_argument("--k", type=int, help="neighbors per generated sample (knn)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="advgain",
        description="Quantify adversarial attacks on NLP systems by their gain: "
        "output change per unit of input change, measured against a bootstrap "
        "bound of what real data exhibits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "eval": "score adversarial pairs and flag gains above the real-data bound",
        "bootstrap": "estimate the real-data gain bound with confidence intervals",
        "scatter": "emit plot-ready (d_in, d_out, gain) rows per pair",
        "knn": "score generated samples against their nearest known references",
    }
    for name, handler in _COMMANDS.items():
        command = sub.add_parser(name, help=helps[name])
        _add_shared_flags(command)
        command.set_defaults(handler=handler)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = build_run_config(args)
        validate_config(config, args.command)
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.handler(config)
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (AdvGainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
