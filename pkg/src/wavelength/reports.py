"""Serializing evaluation results to JSON and CSV.

Emission is deterministic: sorted JSON keys, fixed CSV columns, no wall
timestamps; emitting the same report twice yields byte-identical files.
Missing per-problem values serialize as JSON nulls / empty CSV cells so
dropped problems stay visible.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict
from pathlib import Path

from .metrics import BootstrapResult
from .pipelines import AblationReport, MetricReport

CSV_COLUMNS = (
    "problem_id", "pair_index", "left", "right", "target", "clue",
    "prediction", "abs_diff", "wasserstein", "model_entropy",
    "human_entropy", "human_mean", "n_candidates", "missing", "error",
)

ABLATION_CSV_COLUMNS = (
    "pool_size", "n", "n_missing", "mean_abs_diff", "standard_error",
    "ci_low", "ci_high", "mean_candidates", "p_vs_largest",
)


def report_to_dict(report: MetricReport) -> dict:
    return {
        "manifest": report.manifest.public_dict(),
        "aggregate": report.aggregate,
        "pearson_human": report.pearson_human,
        "rmse_human": report.rmse_human,
        "pearson_target": report.pearson_target,
        "rmse_target": report.rmse_target,
        "n_problems": report.n_problems,
        "n_missing": report.n_missing,
        "per_problem": [
            {key: getattr(row, key) for key in CSV_COLUMNS}
            for row in report.rows
        ],
    }


def ablation_to_dict(report: AblationReport) -> dict:
    return {
        "manifest": report.manifest.public_dict(),
        "pool_sizes": report.pool_sizes,
        "by_n": {str(n): report_to_dict(r) for n, r in report.by_n.items()},
        "comparisons": {
            key: asdict(result) for key, result in report.comparisons.items()
        },
    }


def _json_bytes(payload: dict) -> bytes:
    return (json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return value


def _report_csv_bytes(payload: dict) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in payload["per_problem"]:
        writer.writerow([_cell(row[key]) for key in CSV_COLUMNS])
    aggregate = payload["aggregate"]
    summary = {key: "" for key in CSV_COLUMNS}
    summary["problem_id"] = "__aggregate__"
    for name in ("abs_diff", "wasserstein", "model_entropy", "human_entropy"):
        summary[name] = _cell(aggregate[name]["mean"])
    summary["missing"] = payload["n_missing"]
    writer.writerow([summary[key] for key in CSV_COLUMNS])
    return buffer.getvalue().encode("utf-8")


def _ablation_csv_bytes(payload: dict) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(ABLATION_CSV_COLUMNS)
    largest = max(int(n) for n in payload["by_n"])
    for n in payload["pool_sizes"]:
        sub = payload["by_n"][str(n)]
        agg = sub["aggregate"]["abs_diff"]
        counts = [row["n_candidates"] for row in sub["per_problem"]
                  if row["n_candidates"] is not None]
        comparison = payload["comparisons"].get(f"{n}_vs_{largest}")
        writer.writerow([
            n,
            agg["n"],
            sub["n_missing"],
            _cell(agg["mean"]),
            _cell(agg["standard_error"]),
            _cell(agg["ci_low"]),
            _cell(agg["ci_high"]),
            _cell(sum(counts) / len(counts) if counts else None),
            _cell(comparison["p_value"] if comparison else None),
        ])
    return buffer.getvalue().encode("utf-8")


def emit_report(report, out_dir, basename: str, formats=("json", "csv")) -> dict:
    """Write a report (or ablation report) to out_dir; returns format->path.

    Writing is idempotent byte-for-byte: identical reports produce identical
    files, so reruns can be compared with plain diff.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if isinstance(report, AblationReport):
        payload = ablation_to_dict(report)
        csv_bytes = _ablation_csv_bytes(payload)
    elif isinstance(report, MetricReport):
        payload = report_to_dict(report)
        csv_bytes = _report_csv_bytes(payload)
    elif isinstance(report, dict):
        payload = report
        csv_bytes = (
            _ablation_csv_bytes(payload) if "by_n" in payload else _report_csv_bytes(payload)
        )
    else:
        raise TypeError(f"cannot emit {type(report).__name__}")
    paths = {}
    for fmt in formats:
        if fmt == "json":
            path = out_dir / f"{basename}.json"
            path.write_bytes(_json_bytes(payload))
        elif fmt == "csv":
            path = out_dir / f"{basename}.csv"
            path.write_bytes(csv_bytes)
        else:
            raise ValueError(f"unknown format {fmt!r}")
        paths[fmt] = path
    return paths


def load_report(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if "per_problem" not in payload and "by_n" not in payload:
        raise ValueError(f"{path} does not look like an emitted report")
    return payload


def compare_report_dicts(payload_a: dict, payload_b: dict, resamples: int = 10000,
                         seed: int = 0):
    """Paired bootstrap over |error| for problems shared by two report files."""
    from .metrics import paired_bootstrap

    rows_b = {row["problem_id"]: row for row in payload_b["per_problem"]}
    a, b = [], []
    for row in payload_a["per_problem"]:
        other = rows_b.get(row["problem_id"])
        if other is None or row["missing"] or other["missing"]:
            continue
        if row["abs_diff"] is None or other["abs_diff"] is None:
            continue
        a.append(row["abs_diff"])
        b.append(other["abs_diff"])
    if not a:
        return None
    return paired_bootstrap(a, b, resamples=resamples, seed=seed)


def bootstrap_to_dict(result: BootstrapResult | None) -> dict | None:
    return None if result is None else asdict(result)
