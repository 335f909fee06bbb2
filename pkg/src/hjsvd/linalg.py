"""Dense column-major storage helpers and deterministic column kernels.

Matrices are plain float64 numpy arrays in Fortran (column-major) order, so
that a column is a contiguous view.  The reductions below are bitwise
deterministic for a fixed chunk size; see _kernels for the evaluation-order
contract.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ShapeError

#: unit roundoff of the 64-bit binary format
EPS = 2.0 ** -52

#: default chunk size of the deterministic reductions
DEFAULT_CHUNK = 32


@dataclass(frozen=True)
class SignatureVector:
    """Signs of J, all +1 entries leading.

    signs is an int8 vector of +-1; p counts the +1 entries.
    """

    signs: np.ndarray
    p: int

    def __post_init__(self):
        signs = np.ascontiguousarray(self.signs, dtype=np.int8)
        object.__setattr__(self, "signs", signs)
        if signs.ndim != 1:
            raise ShapeError("signature must be a vector")
        if not np.all(np.abs(signs) == 1):
            raise ValueError("signature entries must be +-1")
        p = int(np.count_nonzero(signs == 1))
        if p != self.p:
            raise ValueError(f"p={self.p} does not match sign count {p}")
        if np.any(signs[:p] != 1) or np.any(signs[p:] != -1):
            raise ValueError("all +1 signs must precede all -1 signs")

    @classmethod
    def from_p(cls, r, p):
        """Signature of length r with the first p entries +1."""
        signs = np.empty(r, dtype=np.int8)
        signs[:p] = 1
        signs[p:] = -1
        return cls(signs, p)

    def __len__(self):
        return self.signs.shape[0]


def as_factor(G, name="G"):
    """Validate and return G as a float64 Fortran-ordered matrix."""
    G = np.asfortranarray(G, dtype=np.float64)
    if G.ndim != 2:
        raise ShapeError(f"{name} must be a matrix")
    if not np.all(np.isfinite(G)):
        raise ValueError(f"{name} contains non-finite entries")
    return G


def dot_chunked(x, y, chunk=DEFAULT_CHUNK):
    """Deterministic chunked dot product of two equal-length vectors.

    Partial sums over consecutive chunks are accumulated sequentially under
    the FMA contract and combined in a fixed binary tree, so two runs with
    the same inputs and chunk size agree bit for bit.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ShapeError("dot_chunked needs two vectors of equal length")
    if chunk < 1:
        raise ValueError("chunk must be >= 1")
    return float(_kernels.dot_chunked(x, y, chunk))


def fused_pair_update(x, y, t, c, s, chunk=DEFAULT_CHUNK):
    """Apply x' = (x + s*t*y)*c, y' = (t*x + y)*c in place.

    s must be -1 (trigonometric) or +1 (hyperbolic); c > 0.  Returns the new
    squared norms (dot_chunked of each updated column with itself) as a
    by-product.
    """
    if x.shape != y.shape or x.ndim != 1:
        raise ShapeError("fused_pair_update needs two vectors of equal length")
    if s not in (-1, 1):
        raise ValueError("s must be -1 or +1")
    if not c > 0.0:
        raise ValueError("c must be positive")
    _kernels.fused_pair_update(x, y, float(t), float(c), float(s))
    dx = float(_kernels.dot_chunked(x, x, chunk))
    dy = float(_kernels.dot_chunked(y, y, chunk))
    return dx, dy


def orthonormality_distance(U):
    """Frobenius distance from orthonormality, ||I - U^T U||_F."""
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2:
        raise ShapeError("U must be a matrix")
    r = U.shape[1]
    return float(np.linalg.norm(np.eye(r) - U.T @ U, "fro"))
