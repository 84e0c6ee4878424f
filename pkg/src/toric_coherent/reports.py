"""Row builders and writers for the batch outputs.

Every table is a list of flat dicts sharing one column order.  Floats are
written with 17 significant digits; ``None`` becomes an empty CSV cell and a
JSON ``null``.  Rows are produced in a fixed order so identical inputs give
identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from toric_coherent.chain_complex import CLASS_LABELS
from toric_coherent.channel import ChannelReport

NONTRIVIAL = CLASS_LABELS[1:]


def _tag(label) -> str:
    return f"{label.w1}{label.w2}"


CHANNEL_COLUMNS = (
    ["theta", "x", "syndrome", "probability"]
    + [f"cond_{_tag(k)}" for k in CLASS_LABELS]
    + ["nbar_00"]
    + [f"abs_nbar_0_{_tag(k)}" for k in NONTRIVIAL]
    + ["lambda"]
    + [f"abs_b_{_tag(k)}" for k in NONTRIVIAL]
    + ["abs_nbar_nontrivial", "delta_lb", "infidelity"]
)

COMPARE_COLUMNS = [
    "theta", "x", "syndrome", "chosen", "success", "twirled_success", "ratio",
    "leading_ratio", "leading_reference", "leading_tie",
    "averaged_success", "averaged_twirled", "sampled_estimate", "sampled_stderr",
    "samples", "seed",
]

AGGREGATE = "ALL"


def format_float(value: Optional[float]) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return "nan"
    return format(float(value), ".17g")


def _json_value(value):
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return None
        return value
    return value


def channel_rows(report: ChannelReport) -> List[Dict[str, object]]:
    """One row per syndrome plus an aggregate row for one angle."""
    rows = []
    for r in report.rows:
        row: Dict[str, object] = {"theta": report.theta, "x": report.x, "syndrome": r.syndrome,
                                  "probability": r.probability}
        for k, c in zip(CLASS_LABELS, r.conditionals):
            row[f"cond_{_tag(k)}"] = c
        row["nbar_00"] = r.nbar[CLASS_LABELS[0]].real
        for k in NONTRIVIAL:
            row[f"abs_nbar_0_{_tag(k)}"] = abs(r.nbar[k])
        row["lambda"] = r.lam
        for k in NONTRIVIAL:
            row[f"abs_b_{_tag(k)}"] = abs(r.b[k])
        row["abs_nbar_nontrivial"] = sum(abs(r.nbar[k]) for k in NONTRIVIAL)
        row["delta_lb"] = None
        row["infidelity"] = None
        rows.append(row)
    agg: Dict[str, object] = {c: None for c in CHANNEL_COLUMNS}
    agg.update({"theta": report.theta, "x": report.x, "syndrome": AGGREGATE,
                "infidelity": report.infidelity})
    if report.complete:
        agg["probability"] = report.total_probability
        agg["nbar_00"] = report.averaged_nbar[CLASS_LABELS[0]].real
        for k in NONTRIVIAL:
            agg[f"abs_nbar_0_{_tag(k)}"] = report.averaged_abs_nbar[k]
        agg["lambda"] = report.total_lambda
        agg["abs_nbar_nontrivial"] = math.fsum(report.averaged_abs_nbar[k] for k in NONTRIVIAL)
        agg["delta_lb"] = report.delta_lb
    rows.append(agg)
    return rows


def render_csv(rows: Sequence[Dict[str, object]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        out = []
        for c in columns:
            v = row.get(c)
            if isinstance(v, bool):
                out.append("1" if v else "0")
            elif isinstance(v, float):
                out.append(format_float(v))
            elif v is None:
                out.append("")
            else:
                out.append(str(v))
        writer.writerow(out)
    return buf.getvalue()


def render_json(rows: Sequence[Dict[str, object]], columns: Sequence[str], meta: dict) -> str:
    records = [{c: _json_value(row.get(c)) for c in columns} for row in rows]
    return json.dumps({"meta": meta, "columns": list(columns), "rows": records},
                      sort_keys=True, indent=1) + "\n"


def render_dat(rows: Sequence[Dict[str, object]], columns: Sequence[str]) -> str:
    """Whitespace-separated aggregate rows for gnuplot; missing values as ``nan``."""
    kept = [c for c in columns if c != "syndrome"]
    lines = ["# " + " ".join(kept)]
    for row in rows:
        if row.get("syndrome") != AGGREGATE:
            continue
        cells = []
        for c in kept:
            v = row.get(c)
            if isinstance(v, bool):
                cells.append("1" if v else "0")
            elif v is None:
                cells.append("nan")
            elif isinstance(v, (int, float)):
                cells.append(format_float(float(v)))
            else:
                cells.append(str(v))
        lines.append(" ".join(cells))
    return "\n".join(lines) + "\n"


def write_outputs(
    out_dir: Path,
    stem: str,
    rows: Sequence[Dict[str, object]],
    columns: Sequence[str],
    formats: Iterable[str],
    meta: dict,
) -> List[Path]:
    """Write ``stem.csv`` / ``stem.json`` and always ``stem.dat``; returns the paths."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    formats = set(formats)
    if "csv" in formats:
        p = out_dir / f"{stem}.csv"
        p.write_text(render_csv(rows, columns), encoding="utf-8")
        written.append(p)
    if "json" in formats:
        p = out_dir / f"{stem}.json"
        p.write_text(render_json(rows, columns, meta), encoding="utf-8")
        written.append(p)
    p = out_dir / f"{stem}.dat"
    p.write_text(render_dat(rows, columns), encoding="utf-8")
    written.append(p)
    return written


def read_csv(path) -> List[Dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
