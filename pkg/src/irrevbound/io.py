"""Deterministic text serialisation of result tables."""

import json
import os

import numpy as np


def format_float(v) -> str:
    """Shortest round-trip repr; ``inf``/``-inf``/``nan`` spelled out."""
    v = float(v)
    if v != v:
        return "nan"
    if v in (np.inf, -np.inf):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def write_csv(path, header, columns):
    """Write equal-length ``columns`` under ``header`` with LF line endings."""
    columns = [np.asarray(c) for c in columns]
    n = {len(c) for c in columns}
    if len(n) > 1:
        raise ValueError("columns differ in length")
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_cell(v) for v in row))
    _write_text(path, "\n".join(lines) + "\n")


def _cell(v):
    if isinstance(v, (str, np.str_)):
        return str(v)
    return format_float(v)


def write_json(path, obj):
    _write_text(path, json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")


def _write_text(path, text):
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_csv(path):
    """Read a file written by ``write_csv`` into a dict of float arrays."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    return {h: np.array([float(r[i]) for r in rows]) for i, h in enumerate(header)}
