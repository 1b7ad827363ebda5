"""Binary and text ingestion for design matrices, labels and similarities.

Design matrix container ("DMX1"): magic, n:u32, m:u32, dtype:u8 (0 = f32,
1 = f64), then row-major little-endian payload.  Similarity container
("SIM1"): magic, n:u32, top_k:u32, then per column a u32 count followed by
(index:u32, value:f64) pairs.  CSV files (one sample per line, optional
header row) are accepted wherever a DMX1 file is and converted on load.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .classic import SparseSimilarity
from .errors import DataFormatError

DESIGN_MAGIC = b"DMX1"
SIM_MAGIC = b"SIM1"

_DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_DTYPE_CODES = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}


def write_design(path, design, dtype=None):
    """Write a design matrix container; dtype defaults to the array's."""
    arr = np.asarray(design)
    if arr.ndim != 2:
        raise DataFormatError("design matrix must be 2-d")
    if dtype is not None:
        arr = arr.astype(dtype)
    if arr.dtype not in _DTYPE_CODES:
        arr = arr.astype(np.float64)
    code = _DTYPE_CODES[arr.dtype]
    n, m = arr.shape
    with open(path, "wb") as fh:
        fh.write(DESIGN_MAGIC)
        fh.write(struct.pack("<IIB", n, m, code))
        fh.write(np.ascontiguousarray(arr, dtype=_DTYPES[code]).tobytes())


def read_design(path):
    """Read a design matrix container, preserving the stored dtype."""
    blob = Path(path).read_bytes()
    if len(blob) < 13 or blob[:4] != DESIGN_MAGIC:
        raise DataFormatError(f"{path}: not a design matrix container")
    n, m, code = struct.unpack("<IIB", blob[4:13])
    if code not in _DTYPES:
        raise DataFormatError(f"{path}: unknown dtype code {code}")
    dtype = _DTYPES[code]
    expected = 13 + n * m * dtype.itemsize
    if len(blob) != expected:
        raise DataFormatError(
            f"{path}: payload is {len(blob) - 13} bytes, expected {expected - 13}"
        )
    data = np.frombuffer(blob[13:], dtype=dtype).reshape(n, m)
    return np.array(data)  # writable copy in native byte order semantics


def _parse_csv(text, path):
    rows = []
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise DataFormatError(f"{path}: no data rows")
    start = 0
    try:
        [float(tok) for tok in lines[0].replace(",", " ").split()]
    except ValueError:
        start = 1  # header row
    width = None
    for ln in lines[start:]:
        try:
            row = [float(tok) for tok in ln.replace(",", " ").split()]
        except ValueError as exc:
            raise DataFormatError(f"{path}: malformed row {ln!r}") from exc
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise DataFormatError(f"{path}: ragged rows ({len(row)} vs {width})")
        rows.append(row)
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return np.asarray(rows, dtype=np.float64)


def load_design(path):
    """Load a design matrix from a DMX1 container or a CSV file.

    The container is recognized by magic; anything else is parsed as CSV
    (comma or whitespace separated, optional header line).  Returns float64.
    """
    head = b""
    try:
        with open(path, "rb") as fh:
            head = fh.read(4)
    except OSError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if head == DESIGN_MAGIC:
        return read_design(path).astype(np.float64)
    try:
        text = Path(path).read_text()
    except UnicodeDecodeError as exc:
        raise DataFormatError(f"{path}: neither a DMX1 container nor text") from exc
    return _parse_csv(text, path)


def read_labels(path, n=None):
    """Newline-delimited integer labels; length must match n when given."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    try:
        labels = np.asarray([int(ln) for ln in lines], dtype=np.int64)
    except ValueError as exc:
        raise DataFormatError(f"{path}: labels must be integers") from exc
    if n is not None and labels.size != n:
        raise DataFormatError(
            f"{path}: {labels.size} labels for {n} samples"
        )
    return labels


def write_labels(path, labels):
    Path(path).write_text("".join(f"{int(x)}\n" for x in np.asarray(labels).ravel()))


def read_indices(path):
    """Newline-delimited subset indices (same shape as a labels file)."""
    return read_labels(path)


def write_similarity(path, similarity):
    """Write a sparse similarity container."""
    parts = [SIM_MAGIC, struct.pack("<II", similarity.n, similarity.top_k)]
    for ix, vals in zip(similarity.col_indices, similarity.col_values):
        parts.append(struct.pack("<I", ix.size))
        entry = np.empty(ix.size, dtype=[("i", "<u4"), ("v", "<f8")])
        entry["i"] = ix
        entry["v"] = vals
        parts.append(entry.tobytes())
    Path(path).write_bytes(b"".join(parts))


def read_similarity(path):
    """Read a sparse similarity container back into SparseSimilarity."""
    blob = Path(path).read_bytes()
    if len(blob) < 12 or blob[:4] != SIM_MAGIC:
        raise DataFormatError(f"{path}: not a similarity container")
    n, top_k = struct.unpack("<II", blob[4:12])
    offset = 12
    record = np.dtype([("i", "<u4"), ("v", "<f8")])
    col_indices, col_values = [], []
    for j in range(n):
        if offset + 4 > len(blob):
            raise DataFormatError(f"{path}: truncated at column {j}")
        (count,) = struct.unpack("<I", blob[offset:offset + 4])
        offset += 4
        nbytes = count * record.itemsize
        if offset + nbytes > len(blob):
            raise DataFormatError(f"{path}: truncated entries in column {j}")
        entry = np.frombuffer(blob[offset:offset + nbytes], dtype=record)
        offset += nbytes
        col_indices.append(entry["i"].copy())
        col_values.append(entry["v"].copy())
    if offset != len(blob):
        raise DataFormatError(f"{path}: {len(blob) - offset} trailing bytes")
    try:
        return SparseSimilarity(n, top_k, col_indices, col_values)
    except Exception as exc:
        raise DataFormatError(f"{path}: inconsistent similarity data: {exc}") from exc
