"""Trace export and import (CSV or JSON lines, 17 significant digits)."""
import csv
import io
import json

import numpy as np

from .errors import RejectedInputError
from .solvers import IterationTrace, TraceRecord

__all__ = ["FORMATS", "write_trace", "read_trace", "format_trace", "select_records"]

FORMATS = ("csv", "jsonl")
_OPTIONAL = ("gamma", "k_norm", "r_norm")


def _num(v):
    return format(float(v), ".17g")


def _opt(v):
    return "" if v is None else _num(v)


def select_records(trace, every=1):
    """Every ``every``-th record, always keeping the last one."""
    if every < 1:
        raise RejectedInputError(f"log_every must be positive, got {every}")
    recs = trace.records
    chosen = recs[::every]
    if recs and chosen[-1] is not recs[-1]:
        chosen.append(recs[-1])
    return chosen


def _csv_text(records):
    if not records:
        return ""
    dx, dy = records[0].x.size, records[0].y.size
    header = (["n"] + [f"x[{i}]" for i in range(dx)] + [f"y[{i}]" for i in range(dy)]
              + ["coupling", "fix_x", "fix_y", *_OPTIONAL])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in records:
        w.writerow([r.n, *map(_num, r.x), *map(_num, r.y), _num(r.coupling), _num(r.fix_x),
                    _num(r.fix_y), *(_opt(getattr(r, k)) for k in _OPTIONAL)])
    return buf.getvalue()


def _jsonl_text(records):
    def arr(a):
        return "[" + ", ".join(_num(v) for v in a) + "]"

    def opt(v):
        return "null" if v is None else _num(v)

    lines = []
    for r in records:
        lines.append(
            f'{{"n": {r.n}, "x": {arr(r.x)}, "y": {arr(r.y)}, "coupling": {_num(r.coupling)}, '
            f'"fix_x": {_num(r.fix_x)}, "fix_y": {_num(r.fix_y)}, "gamma": {opt(r.gamma)}, '
            f'"k_norm": {opt(r.k_norm)}, "r_norm": {opt(r.r_norm)}}}'
        )
    return "".join(line + "\n" for line in lines)


def format_trace(trace, fmt="csv", every=1):
    if fmt not in FORMATS:
        raise RejectedInputError(f"trace format must be one of {FORMATS}, got {fmt!r}")
    records = select_records(trace, every)
    return _csv_text(records) if fmt == "csv" else _jsonl_text(records)


def write_trace(trace, path, fmt="csv", every=1):
    text = format_trace(trace, fmt, every)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def read_trace(path, fmt=None):
    """Load records written by ``write_trace``; stop metadata is not stored."""
    path = str(path)
    if fmt is None:
        fmt = "jsonl" if path.endswith((".jsonl", ".json")) else "csv"
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        if fmt == "jsonl":
            for line in fh:
                if line.strip():
                    d = json.loads(line)
                    records.append(TraceRecord(
                        int(d["n"]), np.array(d["x"], float), np.array(d["y"], float),
                        float(d["coupling"]), float(d["fix_x"]), float(d["fix_y"]),
                        *(None if d[k] is None else float(d[k]) for k in _OPTIONAL),
                    ))
        else:
            rows = csv.reader(fh)
            header = next(rows, None)
            if header is None:
                return IterationTrace(terminated_reason="")
            xi = [i for i, h in enumerate(header) if h.startswith("x[")]
            yi = [i for i, h in enumerate(header) if h.startswith("y[")]
            col = {h: i for i, h in enumerate(header)}
            for row in rows:
                records.append(TraceRecord(
                    int(row[0]),
                    np.array([float(row[i]) for i in xi]),
                    np.array([float(row[i]) for i in yi]),
                    float(row[col["coupling"]]), float(row[col["fix_x"]]), float(row[col["fix_y"]]),
                    *(None if row[col[k]] == "" else float(row[col[k]]) for k in _OPTIONAL),
                ))
    return IterationTrace(records=records, terminated_reason="")
