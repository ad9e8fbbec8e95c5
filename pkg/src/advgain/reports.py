"""Render evaluation results as CSV, JSON Lines, or Markdown text.

All writers are deterministic functions of their inputs (no timestamps,
stable ordering, shortest round-trip float formatting), so identical runs
produce byte-identical report files. CSV output follows RFC 4180 with a
header row, LF line endings, and UTF-8.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Sequence

from .bootstrap import BootstrapEstimate, RealGainSampleSet
from .gain import GainSummary


def fmt(value) -> str:
    """Shortest round-trip text for a cell; empty string for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def json_number(value: float | None):
    """JSON-safe number: infinities become None (JSON has no Infinity)."""
    if value is None or not math.isfinite(value):
        return None
    return value


def rows_to_csv(rows: Sequence[dict], fieldnames: Sequence[str]) -> str:
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=list(fieldnames), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({name: fmt(row.get(name)) for name in fieldnames})
    return out.getvalue()


def rows_to_jsonl(rows: Sequence[dict]) -> str:
    lines = []
    for row in rows:
        record = dict(row)
        gain = record.get("gain")
        if isinstance(gain, float) and math.isinf(gain):
            record["gain"] = None
            record["gain_infinite"] = True
        lines.append(json.dumps(record, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)


def rows_to_markdown(rows: Sequence[dict], fieldnames: Sequence[str]) -> str:
    header = "| " + " | ".join(fieldnames) + " |"
    rule = "| " + " | ".join("---" for _ in fieldnames) + " |"
    body = [
        "| " + " | ".join(fmt(row.get(name)) for name in fieldnames) + " |" for row in rows
    ]
    return "".join(line + "\n" for line in [header, rule, *body])


RENDERERS = {
    "csv": rows_to_csv,
    "jsonl": lambda rows, fieldnames: rows_to_jsonl(rows),
    "markdown": rows_to_markdown,
}

REPORT_SUFFIX = {"csv": "csv", "jsonl": "jsonl", "markdown": "md"}


def summary_payload(summary: GainSummary | None, skipped: Sequence[dict]) -> dict:
    if summary is None:
        body = {"count": 0}
    else:
        body = {
            "count": summary.count,
            "infinite_count": summary.infinite_count,
            "max_gain": json_number(summary.max_gain),
            "max_gain_infinite": math.isinf(summary.max_gain),
            "finite_count": summary.finite_count,
            "finite_mean": json_number(summary.finite_mean),
            "quantile_25": json_number(summary.quantile_25),
            "median": json_number(summary.median),
            "quantile_75": json_number(summary.quantile_75),
        }
    body["skipped"] = list(skipped)
    return body


def bootstrap_payload(
    estimate: BootstrapEstimate, sample_set: RealGainSampleSet | None = None
) -> dict:
    body = {
        "mean": estimate.mean,
        "ci_low": estimate.ci_low,
        "ci_high": estimate.ci_high,
        "confidence": estimate.confidence,
        "n_resamples": estimate.n_resamples,
        "seed": estimate.seed,
    }
    if sample_set is not None:
        body["n_gain_samples"] = len(sample_set.gains)
        body["excluded_infinite"] = sample_set.excluded_infinite
        body["skipped_errors"] = sample_set.skipped_errors
        body["input_metric"] = sample_set.input_metric_id
        body["output_metric"] = sample_set.output_metric_id
    return body


def bootstrap_text(estimate: BootstrapEstimate) -> str:
    """One-line "mean (low, high)" rendering of a bootstrap estimate."""
    return f"{fmt(estimate.mean)} ({fmt(estimate.ci_low)}, {fmt(estimate.ci_high)})\n"


def to_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True) + "\n"
