"""Deterministic JSON and CSV serialisation of experiment reports."""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from ..errors import ReportError, UsageError

BATCH_COLUMNS = (
    "kind", "decoder", "adversary", "batch", "first_trial", "trials", "accepted", "statistic_count", "correct",
    "acceptance_rate",
)
CASCADE_COLUMNS = (
    "stage", "i", "code", "lg_h", "m", "lg_n", "randomness", "block_bits", "lg_answer_size", "provers", "answers",
    "delta", "eta", "fits", "randomness_cum", "delta_cum", "provers_cum", "answers_cum", "lg_answer_size_cum",
)


def _plain(v):
    """numpy scalars and tuples to JSON-native values."""
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def to_json(report: dict) -> str:
    return json.dumps(_plain(report), indent=2, allow_nan=False) + "\n"


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    if report.get("kind") == "cascade":
        w = csv.DictWriter(buf, fieldnames=CASCADE_COLUMNS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in report["rows"]:
            w.writerow(row)
        return buf.getvalue()
    w = csv.DictWriter(buf, fieldnames=BATCH_COLUMNS, lineterminator="\n")
    w.writeheader()
    adv = (report.get("adversary") or {}).get("name", "")
    for b in report["batches"]:
        w.writerow({
            "kind": report["kind"], "decoder": report["decoder"]["decoder"], "adversary": adv, **b,
            "acceptance_rate": repr(b["accepted"] / b["trials"]),
        })
    return buf.getvalue()


def render(report: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return to_json(report)
    if fmt == "csv":
        return to_csv(report)
    raise UsageError(f"unknown report format {fmt!r}; use json or csv")


def emit_report(report: dict, fmt: str = "json", path: str | Path | None = None) -> str:
    """Serialise ``report``; writes to ``path`` unless it is ``None`` or ``-`` (stdout)."""
    text = render(report, fmt)
    if path is None:
        return text
    if str(path) == "-":
        sys.stdout.write(text)
        return text
    p = Path(path)
    try:
        p.write_text(text)
    except OSError as exc:
        raise ReportError(f"cannot write report to {p}: {exc}") from exc
    return text


def load_report(path: str | Path) -> dict:
    p = Path(path)
    try:
        return json.loads(p.read_text())
    except OSError as exc:
        raise ReportError(f"cannot read report {p}: {exc}") from exc
