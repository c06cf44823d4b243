"""Readers and writers for the fvecs / ivecs ANN benchmark formats.

Each record is a little-endian 4-byte integer ``d`` followed by ``d``
4-byte values (IEEE-754 floats for fvecs, signed ints for ivecs).
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["FormatError", "load_fvecs", "write_fvecs", "load_ivecs", "write_ivecs"]


class FormatError(ValueError):
    """Malformed vecs file; the message names the offending byte offset."""


def _load_vecs(path, value_dtype: str) -> np.ndarray:
    raw = np.fromfile(path, dtype=np.uint8)
    size = raw.size
    if size == 0:
        raise FormatError(f"{os.fspath(path)}: empty file (offset 0)")
    if size < 4:
        raise FormatError(f"{os.fspath(path)}: truncated header at byte offset 0")
    d = int(raw[:4].view("<i4")[0])
    if d <= 0:
        raise FormatError(f"{os.fspath(path)}: invalid dimension {d} at byte offset 0")
    record = 4 * (d + 1)
    count, rest = divmod(size, record)
    if rest:
        raise FormatError(
            f"{os.fspath(path)}: truncated record at byte offset {count * record} "
            f"({rest} trailing bytes, record size {record})"
        )
    table = raw.view("<i4").reshape(count, d + 1)
    bad = np.flatnonzero(table[:, 0] != d)
    if bad.size:
        j = int(bad[0])
        raise FormatError(
            f"{os.fspath(path)}: record {j} has dimension {int(table[j, 0])} != {d} "
            f"at byte offset {j * record}"
        )
    return np.ascontiguousarray(table[:, 1:]).view(value_dtype)


def _write_vecs(path, X: np.ndarray, value_dtype: str) -> None:
    X = np.atleast_2d(np.asarray(X))
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError(f"expected an (n, d) array, got shape {X.shape}")
    n, d = X.shape
    out = np.empty((n, d + 1), dtype="<i4")
    out[:, 0] = d
    out[:, 1:] = X.astype(value_dtype).view("<i4")
    out.tofile(path)


def load_fvecs(path) -> np.ndarray:
    """``(n, d)`` float32 array from an fvecs file."""
    return _load_vecs(path, "<f4")


def write_fvecs(path, X) -> None:
    _write_vecs(path, X, "<f4")


def load_ivecs(path) -> np.ndarray:
    return _load_vecs(path, "<i4")


def write_ivecs(path, X) -> None:
    _write_vecs(path, X, "<i4")
