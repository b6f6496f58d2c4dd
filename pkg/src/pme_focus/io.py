"""CSV and JSON writers/readers with fixed formatting.

Numbers are written with 17 significant digits (``%.17g``), which round-trips
every float64, so files from identical runs are byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, List, Sequence

from .config import ConfigError

TRACE_HEADER = ("t", "a", "b")
PROFILE_HEADER = ("r", "U", "V")
ORACLE_HEADER = ("x", "V")
SWEEP_HEADER = ("m", "xi", "tau", "p", "beta", "c_star_exact", "c_hat", "rel_err")


def fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def read_csv(path, header: Sequence[str]) -> List[List[float]]:
    """Numeric columns of a CSV file whose header must equal ``header``."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{path}: file not found")
    with open(p, newline="") as fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file") from None
        if tuple(got) != tuple(header):
            raise ConfigError(f"{path}: header {got} != {list(header)}")
        cols: List[List[float]] = [[] for _ in header]
        for lineno, row in enumerate(reader, 2):
            if len(row) != len(header):
                raise ConfigError(f"{path}:{lineno}: expected {len(header)} fields")
            try:
                for col, v in zip(cols, row):
                    col.append(float(v))
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: non-numeric field") from None
    return cols


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return _jsonable(obj.item())
    return obj


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def read_json(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{path}: file not found")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
