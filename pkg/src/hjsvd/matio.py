"""Matrix file formats.

GJH1 binary: magic bytes ``GJH1``, three little-endian uint32 fields
(n, r, p), then n*r little-endian float64 values in column-major order.
CSV: one matrix row per line, full round-trip precision.
"""

import struct

import numpy as np

from .errors import ShapeError

_MAGIC = b"GJH1"
_HEADER = struct.Struct("<4sIII")


def write_gjh(path, M, p):
    """Write an n x r matrix with sign split p in the GJH1 format."""
    M = np.asfortranarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ShapeError("GJH1 stores matrices")
    n, r = M.shape
    if not 0 <= p <= r:
        raise ValueError("p must lie in [0, r]")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, n, r, p))
        fh.write(M.astype("<f8", copy=False).tobytes(order="F"))


def read_gjh(path):
    """Read a GJH1 file; returns (matrix in Fortran order, p)."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError(f"{path}: truncated GJH1 header")
        magic, n, r, p = _HEADER.unpack(head)
        if magic != _MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        data = fh.read(8 * n * r)
        if len(data) != 8 * n * r:
            raise ValueError(f"{path}: truncated GJH1 payload")
    M = np.frombuffer(data, dtype="<f8").reshape((n, r), order="F")
    return np.asfortranarray(M.astype(np.float64)), p


def write_csv_matrix(path, M):
    """Write a matrix as CSV, one row per line, round-trip precision."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    np.savetxt(path, M, delimiter=",", fmt="%.17g")


def read_csv_matrix(path):
    """Read a CSV matrix written by write_csv_matrix."""
    M = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return M
