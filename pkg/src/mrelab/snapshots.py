"""Binary field snapshots.

Format: magic ``MRL1`` (4 bytes), u32 n1, u32 n2, u8 ncomp, then
ncomp * n1 * n2 little-endian float64 values, row-major with x2 fastest.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"MRL1"
_HEADER = struct.Struct("<4sIIB")


def write_snapshot(path, components: np.ndarray):
    """Write one or more (n1, n2) components to ``path``.

    ``components`` has shape (ncomp, n1, n2) or (n1, n2).
    """
    arr = np.ascontiguousarray(components, dtype="<f8")
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ValueError(f"expected 2 or 3 dimensions, got {arr.ndim}")
    ncomp, n1, n2 = arr.shape
    if ncomp > 255:
        raise ValueError("at most 255 components per snapshot")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n1, n2, ncomp))
        fh.write(arr.tobytes())


def read_snapshot(path) -> np.ndarray:
    """Read a snapshot; returns an array of shape (ncomp, n1, n2)."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated snapshot header")
    magic, n1, n2, ncomp = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    expected = _HEADER.size + 8 * ncomp * n1 * n2
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(data)}")
    arr = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    return arr.reshape(ncomp, n1, n2).astype(float)
