"""Test-matrix factory.

Reproduces the generation pipeline: random gapped spectrum -> symmetric
matrix by random Householder similarity -> symmetric indefinite
factorization with complete pivoting -> factor pair (G, J).  Generation and
factorization run in compensated (double-double) arithmetic so the factory
error sits far below the solver error; only the final factor is rounded to
float64.  QR shortening of tall factors is provided as well.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _dd as dd
from .errors import NumericalSingularityError, RankDeficiencyError, ShapeError
from .linalg import EPS, SignatureVector, as_factor

#: complete-pivoting 2x2 threshold constant
ALPHA = (1.0 + math.sqrt(17.0)) / 8.0

#: relative spectral gap around zero
GAP = 1e-5


@dataclass(frozen=True)
class SpectrumSpec:
    """Random spectrum: n values uniform in [-a, -a*GAP] u [a*GAP, a].

    pos_count pins the number of positive eigenvalues; None draws each sign
    with probability 1/2.
    """

    n: int
    a: float
    seed: int
    pos_count: int = None

    def __post_init__(self):
        if self.n < 2:
            raise ShapeError("n must be >= 2")
        if not self.a > 0.0:
            raise ValueError("a must be positive")
        if self.pos_count is not None and not 0 <= self.pos_count <= self.n:
            raise ValueError("pos_count must lie in [0, n]")


@dataclass(frozen=True)
class FactorPair:
    """Factor G with signature J (positives leading) and the symmetric
    permutation applied by the factorization."""

    G: np.ndarray
    J: SignatureVector
    perm: np.ndarray = None


@dataclass(frozen=True)
class TestBundle:
    """One generated instance: matrix, exact spectrum, and its factor."""

    M: np.ndarray
    lambda_true: np.ndarray  # sorted ascending
    factor: FactorPair
    spec: SpectrumSpec = None


def draw_spectrum(spec, rng):
    """Eigenvalues honoring the spectral gap; float64 values are exact."""
    mags = rng.uniform(spec.a * GAP, spec.a, spec.n)
    if spec.pos_count is None:
        signs = rng.integers(0, 2, spec.n) * 2 - 1
    else:
        signs = np.where(np.arange(spec.n) < spec.pos_count, 1, -1)
    return mags * signs


def _generate_dd(lam, rng, identity_q=False):
    """M = Q diag(lam) Q^T in double-double, Q a product of n-1 random
    Householder reflectors (or I with the test hook)."""
    n = len(lam)
    M = dd.const(np.diag(lam))
    if identity_q:
        return M
    for _ in range(n - 1):
        v = rng.standard_normal(n)
        beta = dd.div(dd.const(2.0), dd.dot(v, v))
        w = dd.matvec(M, v)  # M v
        alpha = dd.tree_sum(dd.mul_f(w, v), axis=0)  # v^T M v
        # H M H = M - beta (v w^T + w v^T) + beta^2 alpha v v^T
        vw = dd.mul_f((w[0][np.newaxis, :], w[1][np.newaxis, :]), v[:, np.newaxis])
        wv = dd.mul_f((w[0][:, np.newaxis], w[1][:, np.newaxis]), v[np.newaxis, :])
        S = dd.mul(dd.add(vw, wv), beta)
        gamma = dd.mul(dd.mul(beta, beta), alpha)
        T = dd.mul(dd.two_prod(v[:, np.newaxis], v[np.newaxis, :]), gamma)
        M = dd.add(dd.sub(M, S), T)
    # enforce exact symmetry of both components
    Mh = np.triu(M[0]) + np.triu(M[0], 1).T
    Ml = np.triu(M[1]) + np.triu(M[1], 1).T
    return Mh, Ml


def generate_symmetric(spec, eigenvalues=None, identity_q=False):
    """Generate (M, lambda_true); M exactly symmetric, spectrum known.

    eigenvalues overrides the random spectrum (test hook); identity_q skips
    the reflectors so M = diag(lambda).
    """
    rng = np.random.default_rng(spec.seed)
    lam = draw_spectrum(spec, rng) if eigenvalues is None else \
        np.asarray(eigenvalues, dtype=np.float64)
    M = _generate_dd(lam, rng, identity_q)
    return dd.to_float(M), np.sort(lam)


def _swap_sym(Ah, Al, a, b, k):
    """Symmetric swap of positions a and b inside the trailing block [k:]."""
    for X in (Ah, Al):
        X[[a, b], k:] = X[[b, a], k:]
        X[k:, [a, b]] = X[k:, [b, a]]


def _symmetrize(Ah, Al, k):
    h, l = dd.mul_f(dd.add((Ah[k:, k:], Al[k:, k:]),
                           (Ah[k:, k:].T, Al[k:, k:].T)), 0.5)
    Ah[k:, k:] = h
    Al[k:, k:] = l


def _abs_dd(x):
    flip = x[0] < 0.0
    return np.where(flip, -x[0], x[0]), np.where(flip, -x[1], x[1])


def _bunch_parlett_dd(Mdd):
    """Complete-pivoting Bunch-Parlett LDL^T with 1x1/2x2 pivots, followed
    by diagonalization of the 2x2 blocks, all in double-double.

    Returns (Gh, Gl, signs, perm) with P L Q_D |Lambda_D|^{1/2} assembled in
    the pivoted row order (rows still permuted; caller undoes P).
    """
    Ah = Mdd[0].copy()
    Al = Mdd[1].copy()
    n = Ah.shape[0]
    Lh = np.zeros((n, n))
    Ll = np.zeros((n, n))
    np.fill_diagonal(Lh, 1.0)
    perm = np.arange(n)
    blocks = []
    thresh = n * EPS * np.linalg.norm(Mdd[0], "fro")
    k = 0
    while k < n:
        m = n - k
        sub = np.abs(Ah[k:, k:])
        diag = np.diagonal(sub)
        i0 = int(np.argmax(diag))
        mu0 = diag[i0]
        off = sub.copy()
        np.fill_diagonal(off, 0.0)
        flat = int(np.argmax(off))
        i1, j1 = divmod(flat, m)
        mu1 = off[i1, j1]
        if i1 < j1:
            i1, j1 = j1, i1
        if max(mu0, mu1) <= thresh:
            raise NumericalSingularityError(
                f"pivot {max(mu0, mu1):.3e} below threshold {thresh:.3e} "
                f"at stage {k}"
            )
        if m == 1 or mu0 >= ALPHA * mu1:
            # 1x1 pivot on the largest diagonal entry
            if i0 != 0:
                _swap_sym(Ah, Al, k, k + i0, k)
                Lh[[k, k + i0], :k] = Lh[[k + i0, k], :k]
                Ll[[k, k + i0], :k] = Ll[[k + i0, k], :k]
                perm[[k, k + i0]] = perm[[k + i0, k]]
            d = (Ah[k, k], Al[k, k])
            col = (Ah[k + 1:, k].copy(), Al[k + 1:, k].copy())
            l = dd.div(col, d)
            Lh[k + 1:, k], Ll[k + 1:, k] = l
            upd = dd.mul((l[0][:, np.newaxis], l[1][:, np.newaxis]),
                         (col[0][np.newaxis, :], col[1][np.newaxis, :]))
            h, lo = dd.sub((Ah[k + 1:, k + 1:], Al[k + 1:, k + 1:]), upd)
            Ah[k + 1:, k + 1:] = h
            Al[k + 1:, k + 1:] = lo
            _symmetrize(Ah, Al, k + 1)
            blocks.append((k, 1, d))
            k += 1
        else:
            # 2x2 pivot on the largest off-diagonal entry (j1 < i1)
            for dst, src in ((k, k + j1), (k + 1, k + i1)):
                if dst != src:
                    _swap_sym(Ah, Al, dst, src, k)
                    Lh[[dst, src], :k] = Lh[[src, dst], :k]
                    Ll[[dst, src], :k] = Ll[[src, dst], :k]
                    perm[[dst, src]] = perm[[src, dst]]
            ea = (Ah[k, k], Al[k, k])
            eb = (Ah[k + 1, k], Al[k + 1, k])
            ec = (Ah[k + 1, k + 1], Al[k + 1, k + 1])
            det = dd.sub(dd.mul(ea, ec), dd.mul(eb, eb))
            W0 = (Ah[k + 2:, k].copy(), Al[k + 2:, k].copy())
            W1 = (Ah[k + 2:, k + 1].copy(), Al[k + 2:, k + 1].copy())
            l0 = dd.div(dd.sub(dd.mul(W0, ec), dd.mul(W1, eb)), det)
            l1 = dd.div(dd.sub(dd.mul(W1, ea), dd.mul(W0, eb)), det)
            Lh[k + 2:, k], Ll[k + 2:, k] = l0
            Lh[k + 2:, k + 1], Ll[k + 2:, k + 1] = l1
            upd = dd.add(
                dd.mul((l0[0][:, np.newaxis], l0[1][:, np.newaxis]),
                       (W0[0][np.newaxis, :], W0[1][np.newaxis, :])),
                dd.mul((l1[0][:, np.newaxis], l1[1][:, np.newaxis]),
                       (W1[0][np.newaxis, :], W1[1][np.newaxis, :])),
            )
            h, lo = dd.sub((Ah[k + 2:, k + 2:], Al[k + 2:, k + 2:]), upd)
            Ah[k + 2:, k + 2:] = h
            Al[k + 2:, k + 2:] = lo
            _symmetrize(Ah, Al, k + 2)
            blocks.append((k, 2, (ea, eb, ec)))
            k += 2

    # Postprocessing: diagonalize the 2x2 blocks of D and absorb
    # |Lambda_D|^{1/2} into the columns of L.
    Gh = np.zeros((n, n))
    Gl = np.zeros((n, n))
    signs = np.empty(n, dtype=np.int8)
    one = dd.const(1.0)
    for col, size, data in blocks:
        if size == 1:
            d = data
            s = dd.sqrt(_abs_dd(d))
            g = dd.mul((Lh[:, col], Ll[:, col]), (np.full(n, s[0]), np.full(n, s[1])))
            Gh[:, col], Gl[:, col] = g
            signs[col] = 1 if d[0] > 0.0 else -1
        else:
            ea, eb, ec = data
            zeta = dd.div(dd.sub(ec, ea), dd.mul_f(eb, 2.0))
            sgn = 1.0 if zeta[0] >= 0.0 else -1.0
            root = dd.sqrt(dd.add(one, dd.mul(zeta, zeta)))
            t = dd.div(dd.const(sgn), dd.add(_abs_dd(zeta), root))
            cs = dd.div(one, dd.sqrt(dd.add(one, dd.mul(t, t))))
            sn = dd.mul(t, cs)
            lam1 = dd.sub(ea, dd.mul(t, eb))
            lam2 = dd.add(ec, dd.mul(t, eb))
            L0 = (Lh[:, col], Ll[:, col])
            L1 = (Lh[:, col + 1], Ll[:, col + 1])
            bc = lambda x: (np.full(n, x[0]), np.full(n, x[1]))
            u1 = dd.sub(dd.mul(L0, bc(cs)), dd.mul(L1, bc(sn)))
            u2 = dd.add(dd.mul(L0, bc(sn)), dd.mul(L1, bc(cs)))
            s1 = dd.sqrt(_abs_dd(lam1))
            s2 = dd.sqrt(_abs_dd(lam2))
            Gh[:, col], Gl[:, col] = dd.mul(u1, bc(s1))
            Gh[:, col + 1], Gl[:, col + 1] = dd.mul(u2, bc(s2))
            signs[col] = 1 if lam1[0] > 0.0 else -1
            signs[col + 1] = 1 if lam2[0] > 0.0 else -1
    return Gh, Gl, signs, perm


def _assemble_factor(Gh, Gl, signs, perm):
    """Undo the row permutation, order +1 columns first, round to float64."""
    n = Gh.shape[0]
    G = np.zeros((n, n), order="F")
    G[perm, :] = dd.to_float((Gh, Gl))
    order = np.concatenate([np.flatnonzero(signs == 1),
                            np.flatnonzero(signs == -1)])
    G = np.asfortranarray(G[:, order])
    p = int(np.count_nonzero(signs == 1))
    return FactorPair(G, SignatureVector.from_p(n, p), perm)


def bunch_parlett_factor(M):
    """Factor a symmetric M as G J G^T with G of full column rank.

    Complete (Bunch-Parlett) pivoting, computed in compensated arithmetic,
    postprocessed so all +1 signs lead.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError("M must be square")
    if not np.allclose(M, M.T, rtol=0.0, atol=0.0):
        raise ValueError("M must be exactly symmetric")
    Gh, Gl, signs, perm = _bunch_parlett_dd(dd.const(M))
    return _assemble_factor(Gh, Gl, signs, perm)


def generate_factor_pair(spec, identity_q=False):
    """Full pipeline: spectrum -> M -> (G, J), chained in double-double.

    The factorization consumes the unrounded M, so the factor reproduces the
    drawn spectrum far below float64 resolution; M is rounded only for the
    returned bundle.
    """
    rng = np.random.default_rng(spec.seed)
    lam = draw_spectrum(spec, rng)
    Mdd = _generate_dd(lam, rng, identity_q)
    Gh, Gl, signs, perm = _bunch_parlett_dd(Mdd)
    factor = _assemble_factor(Gh, Gl, signs, perm)
    return TestBundle(dd.to_float(Mdd), np.sort(lam), factor, spec)


def qr_shorten(G):
    """Householder QR of a tall factor: G = Q R, R with positive diagonal.

    The HSVD of R then gives the HSVD of G after premultiplying U by Q.
    """
    G = as_factor(G)
    n, r = G.shape
    if n <= r:
        raise ShapeError("qr_shorten needs n > r")
    A = G.copy(order="F")
    vs = []
    for k in range(r):
        x = A[k:, k]
        normx = float(np.linalg.norm(x))
        if normx == 0.0:
            raise RankDeficiencyError(f"column {k} is dependent")
        sgn = 1.0 if x[0] >= 0.0 else -1.0
        alpha = -sgn * normx
        v = x.copy()
        v[0] -= alpha
        beta = 2.0 / float(v @ v)
        A[k:, k:] -= np.outer(beta * v, v @ A[k:, k:])
        A[k, k] = alpha
        A[k + 1:, k] = 0.0
        vs.append((k, v, beta))
    R = np.triu(A[:r, :])
    Q = np.eye(n, r, order="F")
    for k, v, beta in reversed(vs):
        Q[k:, :] -= np.outer(beta * v, v @ Q[k:, :])
    flip = np.diag(R) < 0.0
    R[flip, :] *= -1.0
    Q[:, flip] *= -1.0
    if np.any(np.diag(R) == 0.0):
        raise RankDeficiencyError("R has a zero diagonal entry")
    return np.asfortranarray(R), np.asfortranarray(Q)
