"""Text I/O: JSON documents and CSV tables, with ``-`` meaning stdin/stdout.

CSV floats use 17 significant digits (``.17g``). JSON floats use Python's
shortest round-trip ``repr``, which also parses back to the identical double.
"""

from __future__ import annotations

import csv
import io as _io
import json
import sys


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def write_text(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_json(path: str):
    return json.loads(read_text(path))


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def write_json(path: str, obj):
    write_text(path, dumps_json(obj))


def csv_text(header, rows) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def parse_csv(text: str) -> tuple[list[str], list[list[str]]]:
    rows = list(csv.reader(_io.StringIO(text)))
    return rows[0], rows[1:]


def symbol_table_csv(table) -> str:
    return csv_text(["n", "lambda"], [(n, float(s)) for n, s in enumerate(table.symbols)])


def sweep_csv(sweep) -> str:
    return csv_text(["parameter", "norm", "argmax_mode"], [(r.parameter, r.norm, r.argmax_mode) for r in sweep.rows])


def wave_csv(dimension: int, points, values) -> str:
    header = ["r", "phi", "re", "im"] if dimension == 2 else ["r", "phi", "theta", "re", "im"]
    rows = [tuple(float(p) for p in pt) + (float(v.real), float(v.imag)) for pt, v in zip(points, values)]
    return csv_text(header, rows)


def convergence_csv(table) -> str:
    """Oracle grid-refinement table; empty order/ratio cells on the coarsest grid."""
    rows = [
        (r.grid_points, r.h, r.estimate, r.error, "" if r.observed_order is None else r.observed_order,
         "" if r.error_ratio is None else r.error_ratio)
        for r in table.rows
    ]
    return csv_text(["grid_points", "h", "estimate", "error", "observed_order", "error_ratio"], rows)
