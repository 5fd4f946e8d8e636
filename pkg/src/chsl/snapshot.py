"""Binary snapshots of coefficient fields.

Layout: magic bytes ``CHSL``, format version as little-endian uint32, the
basis dimension M as little-endian uint32, then the M x M coefficients as
little-endian float64 in row-major order (x index outer).  Round trips are
bit exact.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .field import Field2D
from .legendre import Basis1D, build_basis

__all__ = [
    "SnapshotError",
    "BadMagicError",
    "VersionMismatchError",
    "TruncatedSnapshotError",
    "snapshot_write",
    "snapshot_read",
]

MAGIC = b"CHSL"
VERSION = 1
_HEADER = struct.Struct("<4sII")


class SnapshotError(ValueError):
    """Base class for malformed snapshot files."""


class BadMagicError(SnapshotError):
    pass


class VersionMismatchError(SnapshotError):
    pass


class TruncatedSnapshotError(SnapshotError):
    pass


def snapshot_write(field: Field2D, path) -> None:
    payload = np.ascontiguousarray(field.coeffs, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, field.basis.M))
        fh.write(payload.tobytes())


def snapshot_read(path, basis: Basis1D | None = None) -> Field2D:
    """Read a snapshot; builds a matching basis unless one is supplied."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise TruncatedSnapshotError(f"file too short for header: {len(data)} bytes")
    magic, version, m = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if version != VERSION:
        raise VersionMismatchError(f"unsupported format version {version}")
    expected = _HEADER.size + m * m * 8
    if len(data) != expected:
        raise TruncatedSnapshotError(
            f"payload size mismatch: {len(data)} bytes, expected {expected}"
        )
    coeffs = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(m, m).copy()
    if basis is None:
        basis = build_basis(m)
    elif basis.M != m:
        raise ValueError(f"snapshot has M={m} but supplied basis has M={basis.M}")
    return Field2D(coeffs, basis)
