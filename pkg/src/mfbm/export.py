"""CSV and JSON serialization of results.

CSV files are UTF-8 with a header row and floats written with 17
significant digits, which round-trips float64 exactly.  Lines starting
with ``#`` precede the header and carry the run configuration and summary
statistics.  JSON uses sorted keys and Python's shortest round-trip float
repr; the ``timestamp`` key is the only part that is not reproducible and
is dropped by :func:`canonical_body`.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from typing import Any, Iterable, Sequence

import numpy as np

SWEEP_COLUMNS = (
    "alpha",
    "n",
    "H",
    "mu",
    "sigma",
    "entropy_nats",
    "lower_bound_nats",
    "entropy_wiener_nats",
    "theta_n",
    "lambda_max",
    "loglr_variance",
)
SEPARATION_COLUMNS = ("alpha", "threshold", "p_mixed", "p_mixed_se", "p_drift", "p_drift_se", "samples")
RESTRICTED_COLUMNS = ("alpha", "e_s1", "e_s1_se", "up_prob", "up_prob_se", "down_prob", "down_prob_se")


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def to_jsonable(obj: Any) -> Any:
    """Plain JSON types; non-finite floats become ``None``."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if hasattr(obj, "value") and isinstance(obj.value, str):  # str enums
        return obj.value
    return obj


def dumps_json(doc: dict) -> str:
    return json.dumps(to_jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def canonical_body(doc: dict) -> dict:
    return {k: v for k, v in doc.items() if k != "timestamp"}


def write_csv(header: Sequence[str], rows: Iterable[Sequence], comments: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[str], list[list[str]], list[str]]:
    """Split a file written by :func:`write_csv` into (header, rows, comments)."""
    lines = text.splitlines()
    comments = [ln[2:] for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    parsed = list(csv.reader(body))
    return parsed[0], parsed[1:], comments


def config_comment(config: dict) -> str:
    return "config: " + json.dumps(to_jsonable(config), sort_keys=True, allow_nan=False)


def covariance_csv(matrix: np.ndarray, stats: dict, config: dict) -> str:
    n = matrix.shape[0]
    comments = [config_comment(config)] + [f"{k}={fmt(v)}" for k, v in stats.items()]
    return write_csv([f"c{j}" for j in range(n)], matrix.tolist(), comments)


def sweep_csv(rows, config: dict) -> str:
    data = [
        (r.alpha, r.n, r.hurst, r.mu, r.sigma, r.entropy, r.lower_bound,
         r.entropy_wrt_wiener, r.theta_n, r.lambda_max, r.loglr_variance)
        for r in rows
    ]
    return write_csv(SWEEP_COLUMNS, data, [config_comment(config)])


def separation_csv(report, config: dict) -> str:
    data = [[getattr(r, c) for c in SEPARATION_COLUMNS] for r in report.rows]
    comments = [
        config_comment(config),
        f"verdict={report.verdict.verdict.value}",
        f"saa_conclusion={report.saa_conclusion.value}",
    ]
    return write_csv(SEPARATION_COLUMNS, data, comments)


def restricted_csv(report, config: dict) -> str:
    data = [[getattr(r, c) for c in RESTRICTED_COLUMNS] for r in report.rows]
    comments = [
        config_comment(config),
        f"tilt_mass={fmt(report.tilt_mass)}",
        f"tilt_first_moment={fmt(report.tilt_first_moment)}",
        f"tilt_positive={fmt(report.tilt_positive)}",
    ]
    return write_csv(RESTRICTED_COLUMNS, data, comments)
