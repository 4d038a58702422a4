"""Dataset import/export.

Binary matrix format: 4-byte magic b"EQFM", uint32 version (1), uint64 n,
uint64 p, then n*p little-endian float64 values row-major.  CSV import is
provided for small hand-made inputs (plain numeric rows, optional header).
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import InputError

MAGIC = b"EQFM"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


def write_matrix(path, matrix) -> None:
    matrix = np.ascontiguousarray(matrix, dtype="<f8")
    if matrix.ndim != 2:
        raise InputError("matrix must be 2-dimensional")
    n, p = matrix.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, p))
        fh.write(matrix.tobytes())


def read_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise InputError(f"{path}: truncated header")
        magic, version, n, p = _HEADER.unpack(head)
        if magic != MAGIC:
            raise InputError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise InputError(f"{path}: unsupported version {version}")
        body = fh.read(8 * n * p)
        if len(body) != 8 * n * p:
            raise InputError(f"{path}: truncated body")
    return np.frombuffer(body, dtype="<f8").reshape(n, p).copy()


def read_csv_matrix(path) -> np.ndarray:
    """Small numeric CSV, comma-separated, optional non-numeric header row."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise InputError(f"{path}:{lineno}: non-numeric row")
    if not rows:
        raise InputError(f"{path}: no data rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise InputError(f"{path}: ragged rows")
    return np.array(rows, dtype=float)
