"""One Jacobi rotation: construction, predicted effect, convergence code.

A rotation annihilates the off-diagonal entry of a 2x2 pivot Gram block.
Column pairs with matching signs in J get a trigonometric rotation, mixed
pairs a hyperbolic one.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DefinitenessLostError
from .linalg import EPS

#: tangent threshold below which quadratic convergence is detected
TEPS = math.sqrt(EPS) / 2.0  # == 2**-27

#: convergence codes (2-bit, combined by bitwise or)
CODE_NONE = 0b00
CODE_SMALL = 0b01
CODE_BIG = 0b11


@dataclass(frozen=True)
class PivotGram:
    """Pivot block of the implicit Gram matrix: squared norms and the dot."""

    a_ii: float
    a_jj: float
    a_ij: float

    def __post_init__(self):
        if not (self.a_ii > 0.0 and self.a_jj > 0.0):
            raise ValueError("diagonal Gram entries must be positive")


@dataclass(frozen=True)
class Rotation:
    kind: str  # "trigonometric" or "hyperbolic"
    hyp: int  # -1 trigonometric, +1 hyperbolic
    t: float  # tan(phi) or tanh(phi)
    c: float  # cos(phi) or cosh(phi)
    skipped: bool = False


def relatively_orthogonal(g, eps=EPS):
    """True iff |a_ij| < eps * sqrt(a_ii * a_jj)."""
    return abs(g.a_ij) < eps * math.sqrt(g.a_ii * g.a_jj)


def compute_rotation(g, hyp):
    """Rotation annihilating a_ij.

    Trigonometric (hyp=-1): zeta = (a_jj - a_ii)/(2 a_ij),
    t = sign(zeta)/(|zeta| + sqrt(1 + zeta^2)) with sign(0) = +1, so |t| <= 1
    (smaller-angle branch), c = 1/sqrt(1 + t^2).

    Hyperbolic (hyp=+1): theta = -2 a_ij/(a_ii + a_jj) = tanh(2 phi),
    t = theta/(1 + sqrt(1 - theta^2)), c = 1/sqrt(1 - t^2).  |theta| >= 1
    means the pair (A, J) is not definite and raises DefinitenessLostError.

    a_ij == 0 returns the identity rotation with skipped set.
    """
    if hyp not in (-1, 1):
        raise ValueError("hyp must be -1 or +1")
    kind = "trigonometric" if hyp == -1 else "hyperbolic"
    t, c, status = _kernels.rotation_tc(g.a_ii, g.a_jj, g.a_ij, hyp)
    if status != 0:
        raise DefinitenessLostError(-1, -1, -1)
    if g.a_ij == 0.0:
        return Rotation(kind, hyp, 0.0, 1.0, skipped=True)
    return Rotation(kind, hyp, float(t), float(c))


def diagonal_update_predicted(g, rot):
    """Theoretical updated diagonal (a_ii + hyp*t*a_ij, a_jj + t*a_ij).

    Only a test oracle; the solver refreshes the diagonal from recomputed
    column norms instead.
    """
    return (g.a_ii + rot.hyp * rot.t * g.a_ij, g.a_jj + rot.t * g.a_ij)


def convergence_code(prev, rotated, t, teps=TEPS):
    """Combine the block convergence code with one (possible) rotation.

    No rotation leaves prev unchanged; otherwise the code becomes (11)2 when
    |t| > teps and (01)2 or-ed with prev when |t| <= teps.
    """
    if prev not in (CODE_NONE, CODE_SMALL, CODE_BIG):
        raise ValueError(f"invalid convergence code {prev:#b}")
    if not rotated:
        return prev
    if abs(t) > teps:
        return CODE_BIG
    return CODE_SMALL | prev


def rotation_params_batch(a_ii, a_jj, a_ij, hyp):
    """Vectorized (t, c) over arrays of pivot Gram entries.

    Runs the same compiled kernel as compute_rotation, one entry at a time.
    Raises DefinitenessLostError at the first hyperbolic failure.
    """
    a_ii = np.ascontiguousarray(a_ii, dtype=np.float64)
    a_jj = np.ascontiguousarray(a_jj, dtype=np.float64)
    a_ij = np.ascontiguousarray(a_ij, dtype=np.float64)
    hyp = np.ascontiguousarray(hyp, dtype=np.int64)
    t = np.empty_like(a_ii)
    c = np.empty_like(a_ii)
    bad = _kernels.rotation_batch(a_ii, a_jj, a_ij, hyp, t, c)
    if bad >= 0:
        raise DefinitenessLostError(int(bad), -1, -1)
    return t, c
