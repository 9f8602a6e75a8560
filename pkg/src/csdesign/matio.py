"""Plain-text serialization shared by every module.

Two formats:

* Matrix CSV: first line ``rows,cols``, then one line per row of
  comma-separated values printed with 17 significant digits, which is
  enough for a lossless float64 round-trip.
* Key=value text: flat ``key=value`` lines used for run manifests,
  dataset manifests, and config files.
"""

from __future__ import annotations

import os
from typing import Mapping

import numpy as np

__all__ = [
    "format_float",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_keyvalues",
    "read_keyvalues",
]

#: printf format giving a lossless decimal representation of a float64
FLOAT_FMT = "%.17g"


def format_float(x: float) -> str:
    """Render a float with 17 significant digits (lossless round-trip)."""
    return FLOAT_FMT % float(x)


def write_matrix_csv(matrix: np.ndarray, path: str | os.PathLike) -> None:
    """Write a 2-D array to `path` in the shared matrix CSV format."""
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D array, got shape {a.shape}")
    rows, cols = a.shape
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"{rows},{cols}\n")
        for i in range(rows):
            fh.write(",".join(FLOAT_FMT % v for v in a[i]))
            fh.write("\n")


def read_matrix_csv(path: str | os.PathLike) -> np.ndarray:
    """Read a matrix written by :func:`write_matrix_csv`.

    Raises
    ------
    ValueError
        If the header or any row is malformed or the shape disagrees
        with the header.
    """
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        try:
            rows_s, cols_s = header.split(",")
            rows, cols = int(rows_s), int(cols_s)
        except ValueError:
            raise ValueError(f"{path}: malformed matrix header {header!r}") from None
        if rows < 0 or cols < 0:
            raise ValueError(f"{path}: negative dimensions in header {header!r}")
        out = np.empty((rows, cols), dtype=float)
        for i in range(rows):
            line = fh.readline()
            if not line:
                raise ValueError(f"{path}: expected {rows} rows, file ends at row {i}")
            parts = line.strip().split(",")
            if len(parts) != cols:
                raise ValueError(
                    f"{path}: row {i} has {len(parts)} values, expected {cols}"
                )
            try:
                out[i] = [float(p) for p in parts]
            except ValueError:
                raise ValueError(f"{path}: row {i} contains a non-numeric value") from None
    return out


def write_keyvalues(pairs: Mapping[str, object], path: str | os.PathLike) -> None:
    """Write a mapping as flat ``key=value`` lines (floats at 17 digits)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in pairs.items():
            fh.write(f"{key}={_render(value)}\n")


def read_keyvalues(path: str | os.PathLike) -> dict[str, str]:
    """Read ``key=value`` lines into a dict of strings.

    Blank lines and lines starting with ``#`` are ignored.  Values keep
    their text form; callers convert as needed.
    """
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def _render(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)
