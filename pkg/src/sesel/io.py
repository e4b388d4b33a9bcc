"""Readers and writers for embeddings, per-sample scalars, and selection output.

Formats:

* binary embeddings: magic ``SESM``, version u32=1, n as u64, d as u32, then
  n*d little-endian float32 values, row-major.
* CSV embeddings: one row of ``d`` comma-separated decimals per sample, no
  header.
* scalar CSV (difficulty, labels, dumped scores): header row, ``index`` column
  plus one or more value columns, comma separator, '.' decimal point, LF line
  endings.
* selection output: one decimal sample index per line, plus a JSON report.

All readers return float64/int64 arrays regardless of on-disk precision;
downstream arithmetic is 64-bit throughout.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateIndex,
    EmptyDataset,
    FormatError,
    IoError,
    MissingIndex,
)

_MAGIC = b"SESM"
_VERSION = 1
_HEADER = struct.Struct("<4sIQI")  # magic, version, n, d


def _open_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def _check_finite(data: np.ndarray, path) -> None:
    if not np.isfinite(data).all():
        raise FormatError(f"{path}: non-finite value in embedding data")


def read_embeddings(path, format: str = "auto") -> np.ndarray:
    """Load an (n, d) float64 embedding matrix from a binary or CSV file."""
    if format == "auto":
        format = "binary" if str(path).endswith(".sesm") else "csv"
    if format == "binary":
        raw = _open_bytes(path)
        if len(raw) < _HEADER.size:
            raise FormatError(f"{path}: truncated header")
        magic, version, n, d = _HEADER.unpack_from(raw)
        if magic != _MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}")
        if version != _VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        if n == 0:
            raise EmptyDataset(f"{path}: zero samples")
        if d == 0:
            raise FormatError(f"{path}: zero feature dimension")
        expected = _HEADER.size + 4 * n * d
        if len(raw) != expected:
            raise FormatError(f"{path}: expected {expected} bytes, found {len(raw)}")
        flat = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size)
        data = flat.astype(np.float64).reshape(n, d)
        _check_finite(data, path)
        return data
    if format == "csv":
        text = _open_bytes(path).decode("utf-8")
        rows = [line for line in text.splitlines() if line.strip()]
        if not rows:
            raise EmptyDataset(f"{path}: no rows")
        try:
            data = np.array(
                [[float(cell) for cell in row.split(",")] for row in rows],
                dtype=np.float64,
            )
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from exc
        if data.ndim != 2:
            raise FormatError(f"{path}: ragged rows")
        _check_finite(data, path)
        return data
    raise FormatError(f"unknown embedding format {format!r}")


def write_embeddings(path, data: np.ndarray, format: str = "auto") -> None:
    """Write an (n, d) matrix; binary storage is float32, CSV keeps float64."""
    data = np.ascontiguousarray(data, dtype=np.float64)
    if data.ndim != 2 or data.size == 0:
        raise FormatError("embedding matrix must be 2-D and non-empty")
    if format == "auto":
        format = "binary" if str(path).endswith(".sesm") else "csv"
    try:
        if format == "binary":
            n, d = data.shape
            payload = _HEADER.pack(_MAGIC, _VERSION, n, d)
            Path(path).write_bytes(payload + data.astype("<f4").tobytes())
        elif format == "csv":
            lines = [",".join(repr(v) for v in row) for row in data.tolist()]
            Path(path).write_text("\n".join(lines) + "\n")
        else:
            raise FormatError(f"unknown embedding format {format!r}")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_scalar_csv(
    path,
    expected_n: int,
    column: str = "value",
    as_labels: bool = False,
) -> np.ndarray:
    """Read one per-sample column from an indexed CSV, ordered by index.

    The ``index`` column must be a permutation of 0..expected_n-1.  With
    ``as_labels`` the values must be non-negative integers and an int64 array
    is returned.
    """
    text = _open_bytes(path).decode("utf-8")
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise FormatError(f"{path}: empty file")
    header = [h.strip() for h in lines[0].split(",")]
    if "index" not in header or column not in header:
        raise FormatError(f"{path}: need 'index' and {column!r} columns, found {header}")
    idx_col = header.index("index")
    val_col = header.index(column)
    out = np.full(expected_n, np.nan, dtype=np.float64)
    seen = np.zeros(expected_n, dtype=bool)
    for line in lines[1:]:
        cells = line.split(",")
        try:
            i = int(cells[idx_col])
            v = float(cells[val_col])
        except (ValueError, IndexError) as exc:
            raise FormatError(f"{path}: bad row {line!r}") from exc
        if not 0 <= i < expected_n:
            raise FormatError(f"{path}: index {i} outside [0, {expected_n})")
        if seen[i]:
            raise DuplicateIndex(f"{path}: duplicate index {i}")
        seen[i] = True
        out[i] = v
    if not seen.all():
        missing = int(np.flatnonzero(~seen)[0])
        raise MissingIndex(f"{path}: missing index {missing}")
    if not np.isfinite(out).all():
        raise FormatError(f"{path}: non-finite value")
    if as_labels:
        ints = out.astype(np.int64)
        if (ints != out).any() or (ints < 0).any():
            raise FormatError(f"{path}: labels must be non-negative integers")
        return ints
    return out


def write_scalar_csv(path, values: np.ndarray, column: str = "value") -> None:
    values = np.asarray(values)
    lines = [f"index,{column}"]
    lines += [f"{i},{v!r}" if isinstance(v, float) else f"{i},{v}"
              for i, v in enumerate(values.tolist())]
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_score_csv(path, s_e, phi, s_t, s) -> None:
    """Dump per-sample scores as ``index,s_e,phi,s_t,s``."""
    cols = [np.asarray(c, dtype=np.float64).tolist() for c in (s_e, phi, s_t, s)]
    lines = ["index,s_e,phi,s_t,s"]
    for i, row in enumerate(zip(*cols)):
        lines.append(f"{i}," + ",".join(repr(v) for v in row))
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_selection(result, index_path, report_path) -> None:
    """Write selected indices (one per line, ascending) and the JSON report."""
    indices = np.asarray(result.indices, dtype=np.int64)
    if indices.size and ((np.diff(indices) <= 0).any() or indices[0] < 0):
        raise FormatError("selection indices must be sorted ascending and unique")
    try:
        with open(index_path, "w") as fh:
            fh.writelines(f"{i}\n" for i in indices.tolist())
        with open(report_path, "w") as fh:
            json.dump(selection_report_dict(result), fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write selection: {exc}") from exc


def selection_report_dict(result) -> dict:
    per_class = result.per_class_counts
    if per_class is not None:
        per_class = {str(c): int(v) for c, v in per_class.items()}
    return {
        "n": int(result.n),
        "m": int(result.m),
        "theta_final": None if result.theta_final is None else float(result.theta_final),
        "k": int(result.k),
        "beta": float(result.beta),
        "gamma": None if result.gamma is None else float(result.gamma),
        "per_class_counts": per_class,
        "graph_entropy": float(result.graph_entropy),
        "seed": int(result.seed),
        "warnings": list(result.warnings),
    }


def read_selection_indices(path) -> np.ndarray:
    text = _open_bytes(path).decode("utf-8")
    vals = [int(line) for line in text.splitlines() if line.strip()]
    return np.asarray(vals, dtype=np.int64)


def read_report(path) -> dict:
    try:
        with open(path) as fh:
            report = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if report.get("per_class_counts") is not None:
        report["per_class_counts"] = {
            int(c): int(v) for c, v in report["per_class_counts"].items()
        }
    return report
