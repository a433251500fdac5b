"""Matrix file formats.

CSV: rows are samples, optional single header line. Binary: 8-byte header
(magic ``EIGS``, little-endian u16 n, u16 p) followed by column-major
float64 payload.
"""

import io
import struct

import numpy as np

from .errors import InputError
from .util import atomic_write_bytes, atomic_write_text, fmt_float

MAGIC = b"EIGS"
_HEADER = struct.Struct("<4sHH")


def read_matrix(path, header: bool = False) -> np.ndarray:
    """Load a matrix from CSV or the binary format, sniffing the magic bytes."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return read_binary(path)
    return read_csv(path, header=header)


def read_csv(path, header: bool = False) -> np.ndarray:
    try:
        m = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2, dtype=float)
    except ValueError as exc:
        raise InputError(f"cannot parse CSV matrix {path}: {exc}") from exc
    if m.size == 0:
        raise InputError(f"empty matrix in {path}")
    return m


def write_csv(path, values: np.ndarray) -> None:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    buf = io.StringIO()
    for row in values:
        buf.write(",".join(fmt_float(x) for x in row))
        buf.write("\n")
    atomic_write_text(path, buf.getvalue())


def read_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise InputError(f"{path}: truncated binary matrix")
    magic, n, p = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise InputError(f"{path}: bad magic {magic!r}")
    need = _HEADER.size + 8 * n * p
    if len(raw) != need:
        raise InputError(f"{path}: expected {need} bytes for {n}x{p}, got {len(raw)}")
    flat = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    return flat.reshape((n, p), order="F").copy()


def write_binary(path, values: np.ndarray) -> None:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    n, p = values.shape
    if n > 0xFFFF or p > 0xFFFF:
        raise InputError(f"binary format limited to 65535 per dimension, got {n}x{p}")
    payload = _HEADER.pack(MAGIC, n, p) + np.asfortranarray(values, dtype="<f8").tobytes(order="F")
    atomic_write_bytes(path, payload)
