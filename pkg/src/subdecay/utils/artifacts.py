#!/usr/bin/env python3
"""
Artifact writers and readers for subdecay

All numbers leave the toolkit as decimals with 17 significant digits so that
re-running a configuration reproduces its artifacts byte for byte.
"""

import os
import csv
import json
import math
import logging
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

NUMBER_FORMAT = "%.17g"


def format_number(value: Any) -> str:
    """Render a number with 17 significant digits"""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return NUMBER_FORMAT % value


def to_builtin(obj: Any) -> Any:
    """Convert numpy containers and scalars into plain Python objects"""
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_builtin(v) for v in obj.tolist()]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if hasattr(obj, "to_dict"):
        return to_builtin(obj.to_dict())
    return obj


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    closing = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isfinite(obj):
            return format_number(obj)
        # JSON has no literal for non-finite numbers
        return json.dumps(format_number(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + closing + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + closing + "]"
    raise TypeError(f"Cannot serialize object of type {type(obj).__name__}")


def dumps_json(data: Any, indent: int = 2) -> str:
    """Serialize data to JSON text with 17-digit floats"""
    return _encode(to_builtin(data), indent, 0) + "\n"


def write_json(path: str, data: Any) -> str:
    """Write data as JSON

    Args:
        path: Destination file
        data: Dict/list tree, numpy values and objects with to_dict() allowed

    Returns:
        The path written
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as f:
        f.write(dumps_json(data))
    logger.debug(f"Wrote {path}")
    return path


def read_json(path: str) -> Any:
    """Read a JSON artifact"""
    with open(path, "r") as f:
        return json.load(f)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Write a numeric CSV table with a header line"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([format_number(v) for v in row])
    logger.debug(f"Wrote {path}")
    return path


def write_columns(path: str, columns: Dict[str, Sequence[float]]) -> str:
    """Write equally long named columns as CSV"""
    names = list(columns.keys())
    arrays = [np.asarray(columns[name], dtype=float) for name in names]
    lengths = {a.shape[0] for a in arrays}
    if len(lengths) > 1:
        raise ValueError(f"Columns have different lengths: {sorted(lengths)}")
    return write_csv(path, names, zip(*arrays))


def read_csv(path: str) -> Tuple[List[str], np.ndarray]:
    """Read a numeric CSV table

    Returns:
        Tuple of (header, values) with values shaped (rows, columns)
    """
    with open(path, "r", newline="") as f:
        reader = csv.reader(f)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValueError(f"Empty CSV file: {path}")
        rows = [[float(v) for v in row] for row in reader if row]
    values = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return header, values


def write_gnuplot(path: str, x: Sequence[float], y: Sequence[float], title: str = "") -> str:
    """Write a two-column whitespace-separated data file for gnuplot"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w") as f:
        if title:
            f.write(f"# {title}\n")
        for a, b in zip(x, y):
            f.write(f"{format_number(a)} {format_number(b)}\n")
    return path
