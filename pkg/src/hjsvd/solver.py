"""One-sided hyperbolic Jacobi driver.

The driver orthogonalizes the columns of the factor G by trigonometric and
hyperbolic plane rotations, scheduled by the step-parallel modified modulus
strategy (or sequentially row-cyclic for cross-checking).  Columns are
always addressed through the sorting permutation rho; no physical column
swap ever happens.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DefinitenessLostError, RankDeficiencyError, ShapeError
from .linalg import DEFAULT_CHUNK, EPS, SignatureVector, as_factor
from .strategies import StepperState, stepper_init

_STOP_ORTHOGONAL = "orthogonal"
_STOP_QUADRATIC = "quadratic"
_STOP_MAX_SWEEPS = "max_sweeps"


@dataclass
class DiagonalPackageVector:
    """Per-position packages (d, rho, j).

    d[k] is the squared norm of column rho[k] of the current factor, jsign[k]
    its sign in J.  Packages with j=+1 occupy positions 0..p-1.  Sorting
    moves whole packages; rho and jsign travel with d.
    """

    d: np.ndarray
    rho: np.ndarray
    jsign: np.ndarray
    p: int

    def copy(self):
        return DiagonalPackageVector(
            self.d.copy(), self.rho.copy(), self.jsign.copy(), self.p
        )


@dataclass
class SolverConfig:
    max_sweeps: int = 30
    eps: float = EPS
    teps: float = None  # defaults to sqrt(eps)/2
    accumulate_v: bool = True
    use_rel_orth_skip: bool = True
    chunk: int = DEFAULT_CHUNK
    workers: int = 1
    schedule: str = "modulus"  # or "row-cyclic"
    sort: bool = True

    def __post_init__(self):
        if self.teps is None:
            self.teps = math.sqrt(self.eps) / 2.0
        if self.schedule not in ("modulus", "row-cyclic"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class HsvdResult:
    sigma: np.ndarray  # hyperbolic singular values, original column order
    U: np.ndarray  # left singular vectors, n x r
    lam: np.ndarray  # eigenvalues sigma^2 * j, original column order
    Vinv_t: np.ndarray = None  # accumulated V^{-T}, if requested
    sweeps_used: int = 0
    stop_reason: str = _STOP_MAX_SWEEPS
    rotations: int = 0
    skips: int = 0
    telemetry: list = field(default_factory=list)  # (sweep, rot, skip, max|t|)


def precompute(G, J, chunk=DEFAULT_CHUNK):
    """Initial diagonal packages: squared column norms, identity rho, signs."""
    G = as_factor(G)
    n, r = G.shape
    if len(J) != r:
        raise ShapeError("signature length must match the column count")
    d = np.empty(r)
    for k in range(r):
        d[k] = _kernels.dot_chunked(G[:, k], G[:, k], chunk)
    if np.any(d == 0.0):
        bad = int(np.argmax(d == 0.0))
        raise RankDeficiencyError(f"column {bad} has zero norm")
    rho = np.arange(r, dtype=np.int64)
    jsign = J.signs.astype(np.int64)
    return DiagonalPackageVector(d, rho, jsign, J.p)


def sort_diagonal(D, p=None):
    """Sort packages by d: positions 0..p-1 descending, p..r-1 ascending.

    Stable within ties; operates in place and returns D.
    """
    if p is None:
        p = D.p
    pos = np.argsort(-D.d[:p], kind="stable")
    neg = p + np.argsort(D.d[p:], kind="stable")
    order = np.concatenate([pos, neg])
    D.d[:] = D.d[order]
    D.rho[:] = D.rho[order]
    D.jsign[:] = D.jsign[order]
    return D


def check_convergence(C):
    """Or-reduce the per-block codes into a stop decision."""
    code = int(np.bitwise_or.reduce(C)) if len(C) else 0
    assert code != 0b10, "convergence code (10)2 must be unreachable"
    if code == 0b00:
        return "stop_orthogonal"
    if code == 0b01:
        return "stop_quadratic"
    return "continue"


def _run_ranges(G, V, D, C, iblk, jblk, cfg, executor):
    """Execute one step's blocks, split across worker ranges.

    Blocks of a step touch pairwise disjoint columns and D/C entries, so the
    ranges are data-race free; per-range stats are combined in range order
    (counts by sum, |t| by max) which keeps the result independent of the
    worker count.
    """
    b = len(iblk)
    use_v = V is not None
    Vk = V if use_v else G[:, :0]
    nw = min(cfg.workers, b)
    bounds = np.array([(b * w) // nw for w in range(nw + 1)], dtype=np.int64)
    stats = np.zeros((nw, 3))
    errs = np.full((nw, 3), -1, dtype=np.int64)

    def run(w):
        return _kernels.step_blocks(
            G, Vk, use_v, D.d, D.rho, D.jsign, iblk, jblk, C,
            bounds[w], bounds[w + 1], cfg.eps, cfg.teps,
            cfg.use_rel_orth_skip, cfg.chunk, stats[w], errs[w],
        )

    if nw == 1:
        status = [run(0)]
    else:
        status = list(executor.map(run, range(nw)))
    for w, st in enumerate(status):
        if st != 0:
            raise DefinitenessLostError(int(errs[w, 0]), int(errs[w, 1]),
                                        int(errs[w, 2]))
    return (int(stats[:, 0].sum()), int(stats[:, 1].sum()),
            float(stats[:, 2].max()))


def jacobi_step(G, Vinv_t, D, S, C, cfg=None):
    """One parallel step: orthogonalize every block's pair, then advance.

    Mutates G, Vinv_t, D, C and S in place; returns (rotations, skips,
    max |t|) of the step.
    """
    if cfg is None:
        cfg = SolverConfig()
    executor = None
    try:
        if cfg.workers > 1:
            executor = ThreadPoolExecutor(max_workers=cfg.workers)
        stats = _run_ranges(G, Vinv_t, D, C, S.iblk, S.jblk, cfg, executor)
    finally:
        if executor is not None:
            executor.shutdown()
    _kernels.advance_stepper(S.ip, S.jp, S.iblk, S.jblk, S.r)
    return stats


def drive(G, J, cfg=None):
    """Full HSVD of the factor pair (G, J).

    Loops quasi-sweeps of the configured schedule with diagonal sorting and
    the two-level convergence protocol; extracts sigma, U, lambda (and the
    accumulated V^{-T}) in the original column order.
    """
    if cfg is None:
        cfg = SolverConfig()
    G = as_factor(G).copy(order="F")
    n, r = G.shape
    if r % 2 != 0:
        raise ShapeError("r must be even; use border() first")
    if n < r:
        raise ShapeError("G must have n >= r")
    V = np.eye(r, order="F") if cfg.accumulate_v else None
    D = precompute(G, J, cfg.chunk)
    if cfg.sort:
        sort_diagonal(D)

    if cfg.schedule == "modulus":
        S = stepper_init(r)
        steps_per_sweep = r
        C = np.zeros(r // 2, dtype=np.uint8)
    else:
        # sequential row-cyclic: one pair per step, each with its own code
        pairs = [(i, j) for i in range(r - 1) for j in range(i + 1, r)]
        seq_i = np.array([p[0] for p in pairs], dtype=np.int64)
        seq_j = np.array([p[1] for p in pairs], dtype=np.int64)
        C = np.zeros(len(pairs), dtype=np.uint8)

    executor = None
    stop = _STOP_MAX_SWEEPS
    sweeps_used = 0
    total_rot = 0
    total_skip = 0
    telemetry = []
    try:
        if cfg.workers > 1 and cfg.schedule == "modulus":
            executor = ThreadPoolExecutor(max_workers=cfg.workers)
        for sweep in range(cfg.max_sweeps):
            C[:] = 0
            rot = skip = 0
            max_t = 0.0
            if cfg.schedule == "modulus":
                for _ in range(steps_per_sweep):
                    sr, ss, st = _run_ranges(G, V, D, C, S.iblk, S.jblk, cfg,
                                             executor)
                    rot += sr
                    skip += ss
                    max_t = max(max_t, st)
                    _kernels.advance_stepper(S.ip, S.jp, S.iblk, S.jblk, S.r)
            else:
                stats = np.zeros(3)
                errs = np.full(3, -1, dtype=np.int64)
                status = _kernels.step_blocks(
                    G, G[:, :0] if V is None else V, V is not None,
                    D.d, D.rho, D.jsign, seq_i, seq_j, C, 0, len(seq_i),
                    cfg.eps, cfg.teps, cfg.use_rel_orth_skip, cfg.chunk,
                    stats, errs,
                )
                if status != 0:
                    raise DefinitenessLostError(int(errs[0]), int(errs[1]),
                                                int(errs[2]))
                rot, skip, max_t = int(stats[0]), int(stats[1]), float(stats[2])
            sweeps_used = sweep + 1
            total_rot += rot
            total_skip += skip
            telemetry.append((sweep, rot, skip, max_t))
            decision = check_convergence(C)
            if cfg.sort:
                sort_diagonal(D)
            if decision == "stop_orthogonal":
                stop = _STOP_ORTHOGONAL
                break
            if decision == "stop_quadratic":
                stop = _STOP_QUADRATIC
                break
    finally:
        if executor is not None:
            executor.shutdown()

    # d holds squared hyperbolic singular values at positions rho; permute
    # back by the inverse of the final permutation.
    sigma = np.empty(r)
    lam = np.empty(r)
    sigma[D.rho] = np.sqrt(D.d)
    lam[D.rho] = D.d * D.jsign
    U = np.asfortranarray(G / sigma[np.newaxis, :])
    return HsvdResult(sigma, U, lam, V, sweeps_used, stop, total_rot,
                      total_skip, telemetry)


def recover_V(Vinv_t, J):
    """Right singular vectors from the accumulated V^{-T}: V = J V^{-T} J."""
    s = J.signs.astype(np.float64)
    return s[:, np.newaxis] * Vinv_t * s[np.newaxis, :]


@dataclass(frozen=True)
class BorderInfo:
    """How a factor was embedded: original shape and the synthetic column."""

    orig_n: int
    orig_r: int
    target_n: int
    target_r: int
    synthetic_col: int = -1  # -1 when no column was added


def border(G, J, target_r, target_n):
    """Embed G top-left into a target_n x target_r factor.

    When r is odd, a synthetic +1 column holding a single 1 in the first
    padding row is inserted at position p of J (keeping the sign separation);
    zero rows pad to target_n.  Its singular value is exactly 1 and can be
    stripped from the results with strip_bordered().
    """
    G = as_factor(G)
    n, r = G.shape
    if target_r not in (r, r + 1) or target_r % 2 != 0:
        raise ShapeError("target_r must be r or r+1 and even")
    need_col = target_r == r + 1
    min_n = n + 1 if need_col else n
    if target_n < max(min_n, target_r):
        raise ShapeError("target_n too small for the bordered factor")
    G2 = np.zeros((target_n, target_r), order="F")
    p = J.p
    if need_col:
        cols = list(range(p)) + [None] + list(range(p, r))
        for dst, src in enumerate(cols):
            if src is None:
                G2[n, dst] = 1.0
            else:
                G2[:n, dst] = G[:, src]
        J2 = SignatureVector.from_p(target_r, p + 1)
        info = BorderInfo(n, r, target_n, target_r, p)
    else:
        G2[:n, :r] = G
        J2 = SignatureVector.from_p(target_r, p)
        info = BorderInfo(n, r, target_n, target_r, -1)
    return G2, J2, info


def strip_bordered(result, info):
    """Drop the synthetic column and padding rows from a bordered result."""
    cols = np.arange(info.target_r)
    if info.synthetic_col >= 0:
        cols = np.delete(cols, info.synthetic_col)
    Vinv_t = result.Vinv_t
    if Vinv_t is not None:
        Vinv_t = np.asfortranarray(Vinv_t[np.ix_(cols, cols)])
    return HsvdResult(
        sigma=result.sigma[cols],
        U=np.asfortranarray(result.U[: info.orig_n, :][:, cols]),
        lam=result.lam[cols],
        Vinv_t=Vinv_t,
        sweeps_used=result.sweeps_used,
        stop_reason=result.stop_reason,
        rotations=result.rotations,
        skips=result.skips,
        telemetry=result.telemetry,
    )
