"""Binary grid files (``WSPECF2D``) and plain CSV grids.

Layout, all little-endian::

    offset  size  field
    0       8     magic b"WSPECF2D"
    8       2     version (uint16, currently 1)
    10      4     rows (uint32)
    14      4     cols (uint32)
    18      8     grid spacing in km (float64)
    26      8*rows*cols  payload, float64, row-major
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, ValidationError
from .ndwt import Field2D

MAGIC = b"WSPECF2D"
VERSION = 1
_HEADER = struct.Struct("<8sHIId")
HEADER_SIZE = _HEADER.size


def encode_grid(field: Field2D) -> bytes:
    rows, cols = field.shape
    header = _HEADER.pack(MAGIC, VERSION, rows, cols, float(field.grid_spacing))
    return header + np.ascontiguousarray(field.values, dtype="<f8").tobytes()


def decode_grid(buf: bytes, name: str = "") -> Field2D:
    if len(buf) < HEADER_SIZE:
        raise FormatError(f"{name or 'grid'}: truncated header at byte {len(buf)}, need {HEADER_SIZE} bytes")
    magic, version, rows, cols, spacing = _HEADER.unpack_from(buf, 0)
    if magic != MAGIC:
        raise FormatError(f"{name or 'grid'}: bad magic {magic!r} at byte 0")
    if version != VERSION:
        raise FormatError(f"{name or 'grid'}: unsupported version {version} at byte 8")
    expected = rows * cols * 8
    actual = len(buf) - HEADER_SIZE
    if actual != expected:
        raise FormatError(
            f"{name or 'grid'}: payload at byte {HEADER_SIZE} has {actual} bytes, expected {expected} "
            f"for {rows}x{cols}"
        )
    values = np.frombuffer(buf, dtype="<f8", offset=HEADER_SIZE).reshape(rows, cols).astype(np.float64)
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise ValidationError(f"{name or 'grid'}: non-finite value at byte {HEADER_SIZE + 8 * bad}")
    return Field2D(values=values, grid_spacing=spacing, name=name)


def read_csv_grid(path, grid_spacing: float = 2.8) -> Field2D:
    """Comma-separated numeric grid; a non-numeric first line is taken as a header."""
    path = Path(path)
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if lines:
        try:
            [float(t) for t in lines[0].split(",")]
        except ValueError:
            lines = lines[1:]
    try:
        rows = [[float(t) for t in ln.split(",")] for ln in lines]
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric CSV entry ({exc})") from exc
    if not rows or len({len(r) for r in rows}) != 1:
        raise FormatError(f"{path}: CSV rows empty or of unequal length")
    return Field2D(values=np.array(rows), grid_spacing=grid_spacing, name=path.stem)


def read_grid(path) -> Field2D:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_csv_grid(path)
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read grid {path}: {exc}") from exc
    return decode_grid(buf, name=path.stem)


def write_grid(field: Field2D, path) -> None:
    Path(path).write_bytes(encode_grid(field))
