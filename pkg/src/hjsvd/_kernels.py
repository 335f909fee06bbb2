"""Compiled numerical kernels.

Everything here is deliberately scalar-loop code compiled with numba so that
the floating-point evaluation order is fixed: identical inputs give bitwise
identical outputs, independently of how many worker threads drive the solver.
The inner accumulations go through a true fused multiply-add (one rounding
per a*b+c), emitted directly as the llvm.fma intrinsic.
"""

import llvmlite.ir as ir
import numpy as np
from numba import njit, types
from numba.core import cgutils
from numba.extending import intrinsic


@intrinsic
def fma(typingctx, a, b, c):
    """Fused multiply-add a*b + c with a single rounding."""
    sig = types.float64(types.float64, types.float64, types.float64)

    def codegen(context, builder, signature, args):
        f64 = ir.DoubleType()
        fn = cgutils.get_or_insert_function(
            builder.module, ir.FunctionType(f64, [f64, f64, f64]), "llvm.fma.f64"
        )
        return builder.call(fn, args)

    return sig, codegen


@njit(cache=True, nogil=True)
def dot_chunked(x, y, chunk):
    """Deterministic chunked dot product.

    The vectors are cut into consecutive chunks; each chunk is accumulated
    sequentially with FMA, and the partial sums are then combined in a fixed
    binary tree.  The summation order depends only on the length and the
    chunk size.
    """
    n = x.shape[0]
    m = (n + chunk - 1) // chunk
    part = np.empty(m)
    for b in range(m):
        lo = b * chunk
        hi = min(lo + chunk, n)
        acc = 0.0
        for i in range(lo, hi):
            acc = fma(x[i], y[i], acc)
        part[b] = acc
    width = m
    while width > 1:
        half = width // 2
        for i in range(half):
            part[i] = part[2 * i] + part[2 * i + 1]
        if width & 1:
            part[half] = part[width - 1]
        width = half + (width & 1)
    return part[0]


@njit(cache=True, nogil=True)
def fused_pair_update(x, y, t, c, s):
    """In-place plane-rotation update of a column pair.

    x <- (x + s*t*y) * c and y <- (t*x + y) * c, elementwise, with the
    parenthesized part done by a single FMA.  s is -1 for trigonometric and
    +1 for hyperbolic rotations.
    """
    st = s * t
    for i in range(x.shape[0]):
        xi = x[i]
        yi = y[i]
        x[i] = fma(st, yi, xi) * c
        y[i] = fma(t, xi, yi) * c


# Scalar compensated (double-double) helpers for the rotation angle.  The
# tangent is O(1) work against the O(n) column update, but its accuracy
# controls how well the rotation annihilates the Gram entry, so it is worth
# an extra handful of flops; near |tanh 2phi| = 1 a plain evaluation loses
# up to ~5 bits through cancellation.

@njit(cache=True, nogil=True, inline="always")
def _dd_two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True, nogil=True, inline="always")
def _dd_quick(a, b):
    s = a + b
    return s, b - (s - a)


@njit(cache=True, nogil=True, inline="always")
def _dd_add(xh, xl, yh, yl):
    s, e = _dd_two_sum(xh, yh)
    return _dd_quick(s, e + (xl + yl))


@njit(cache=True, nogil=True, inline="always")
def _dd_mul(xh, xl, yh, yl):
    p = xh * yh
    e = fma(xh, yh, -p)
    return _dd_quick(p, e + (xh * yl + xl * yh))


@njit(cache=True, nogil=True, inline="always")
def _dd_div(xh, xl, yh, yl):
    q1 = xh / yh
    ph = yh * q1
    pe = fma(yh, q1, -ph) + yl * q1
    rh, rl = _dd_add(xh, xl, -ph, -pe)
    return _dd_quick(q1, (rh + rl) / yh)


@njit(cache=True, nogil=True, inline="always")
def _dd_sqrt(xh, xl):
    r = np.sqrt(xh)
    ph = r * r
    pe = fma(r, r, -ph)
    dh, dl = _dd_add(xh, xl, -ph, -pe)
    return _dd_quick(r, (dh + dl) / (2.0 * r))


@njit(cache=True, nogil=True)
def rotation_tc(a_ii, a_jj, a_ij, hyp):
    """Tangent and (hyperbolic) cosine of the annihilating rotation.

    Returns (t, c, status).  status 0 means success, 1 means the hyperbolic
    angle does not exist (|tanh 2phi| >= 1, definiteness lost).  a_ij == 0
    yields the identity rotation (t=0, c=1).  The tangent is computed in
    compensated arithmetic and rounded once at the end.
    """
    if a_ij == 0.0:
        return 0.0, 1.0, 0
    if hyp < 0:
        # cotangent formulation; stable when a_ii == a_jj (zeta = 0, t = 1)
        zeta_est = (a_jj - a_ii) / (2.0 * a_ij)
        if abs(zeta_est) > 6.7e7:
            # |zeta| >= 2**26: t = 1/(2 zeta) to machine accuracy, and
            # zeta**2 would overflow for extreme quotients
            return 0.5 / zeta_est, 1.0, 0
        nh, nl = _dd_two_sum(a_jj, -a_ii)
        zh, zl = _dd_div(nh, nl, 2.0 * a_ij, 0.0)
        sgn = 1.0 if zh >= 0.0 else -1.0
        zh *= sgn
        zl *= sgn
        sh, sl = _dd_mul(zh, zl, zh, zl)
        oh, ol = _dd_add(1.0, 0.0, sh, sl)
        wh, wl = _dd_sqrt(oh, ol)
        bh, bl = _dd_add(zh, zl, wh, wl)
        th, tl = _dd_div(sgn, 0.0, bh, bl)
        t = th + tl
        c = 1.0 / np.sqrt(fma(t, t, 1.0))
    else:
        sh, sl = _dd_two_sum(a_ii, a_jj)
        th0, tl0 = _dd_div(-2.0 * a_ij, 0.0, sh, sl)
        qh, ql = _dd_mul(th0, tl0, th0, tl0)
        dh, dl = _dd_add(1.0, 0.0, -qh, -ql)
        if dh <= 0.0:
            return 0.0, 1.0, 1
        wh, wl = _dd_sqrt(dh, dl)
        bh, bl = _dd_add(1.0, 0.0, wh, wl)
        th, tl = _dd_div(th0, tl0, bh, bl)
        t = th + tl
        u = fma(-t, t, 1.0)
        if u <= 0.0:
            return 0.0, 1.0, 1
        c = 1.0 / np.sqrt(u)
    return t, c, 0


@njit(cache=True, nogil=True)
def rotation_batch(a_ii, a_jj, a_ij, hyp, out_t, out_c):
    """Vector form of rotation_tc; returns the first failing index or -1."""
    for i in range(a_ii.shape[0]):
        t, c, status = rotation_tc(a_ii[i], a_jj[i], a_ij[i], hyp[i])
        if status != 0:
            return i
        out_t[i] = t
        out_c[i] = c
    return -1


@njit(cache=True, nogil=True)
def step_blocks(G, V, use_v, d, rho, jsign, iblk, jblk, C, k0, k1,
                eps, teps, use_skip, chunk, stats, err):
    """Orthogonalize the pivot pairs of blocks [k0, k1) of one step.

    Pivot pairs within a step are pairwise disjoint, so ranges of blocks may
    run concurrently; each block touches only its own columns of G (and V)
    and its own entries of d and C.  stats accumulates (rotations, skips,
    max |t|) for this range.  Returns 0, or 1 with (block, i, j) in err when
    a hyperbolic rotation cannot be formed.
    """
    for k in range(k0, k1):
        i = iblk[k]
        j = jblk[k]
        if i > j:
            i, j = j, i
        ci = rho[i]
        cj = rho[j]
        a_ii = d[i]
        a_jj = d[j]
        gi = G[:, ci]
        gj = G[:, cj]
        a_ij = dot_chunked(gi, gj, chunk)
        if a_ij == 0.0 or (use_skip and abs(a_ij) < eps * np.sqrt(a_ii * a_jj)):
            stats[1] += 1.0
            continue
        hyp = -1 if jsign[i] == jsign[j] else 1
        t, c, status = rotation_tc(a_ii, a_jj, a_ij, hyp)
        if status != 0:
            err[0] = k
            err[1] = i
            err[2] = j
            return 1
        s = -1.0 if hyp < 0 else 1.0
        fused_pair_update(gi, gj, t, c, s)
        d[i] = dot_chunked(gi, gi, chunk)
        d[j] = dot_chunked(gj, gj, chunk)
        if use_v:
            fused_pair_update(V[:, ci], V[:, cj], t, c, s)
        at = abs(t)
        if at > teps:
            C[k] = 3
        else:
            C[k] |= 1
        stats[0] += 1.0
        if at > stats[2]:
            stats[2] = at
    return 0


@njit(cache=True)
def advance_stepper(ip, jp, iblk, jblk, r):
    """Advance every block of the modified modulus stepper by one step."""
    half = r // 2
    for k in range(ip.shape[0]):
        if ip[k] + jp[k] >= r - 1:
            ip[k] += 1
            if ip[k] == jp[k]:
                ip[k] -= half
                jp[k] = ip[k]
            iblk[k] = ip[k]
        else:
            jp[k] += 1
            jblk[k] = jp[k]
