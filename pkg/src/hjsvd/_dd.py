"""Vectorized double-double (compensated) arithmetic.

Error-free transformations (two_sum, Dekker's two_prod) on float64 numpy
arrays, giving roughly 106 bits of working precision.  Used by the test
matrix factory so that the generated factor is accurate well below the
solver error being measured.  Values are (hi, lo) array pairs with
|lo| <= ulp(hi)/2.
"""

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def const(a):
    """Lift a float or float array to double-double."""
    a = np.asarray(a, dtype=np.float64)
    return a.copy(), np.zeros_like(a)


def to_float(x):
    """Round to nearest float64."""
    return x[0] + x[1]


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def two_prod(a, b):
    """Exact product of two float64 arrays as a double-double."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def add(x, y):
    s, e = _two_sum(x[0], y[0])
    e = e + (x[1] + y[1])
    return _quick_two_sum(s, e)


def neg(x):
    return -x[0], -x[1]


def sub(x, y):
    return add(x, neg(y))


def mul(x, y):
    p, e = two_prod(x[0], y[0])
    e = e + (x[0] * y[1] + x[1] * y[0])
    return _quick_two_sum(p, e)


def mul_f(x, f):
    """double-double times plain float64."""
    p, e = two_prod(x[0], f)
    e = e + x[1] * f
    return _quick_two_sum(p, e)


def div(x, y):
    q1 = x[0] / y[0]
    r = sub(x, mul_f(y, q1))
    q2 = (r[0] + r[1]) / y[0]
    return _quick_two_sum(q1, q2)


def sqrt(x):
    """Square root by one Newton correction of the float64 root."""
    r = np.sqrt(x[0])
    rr = two_prod(r, r)
    diff = sub(x, rr)
    corr = np.where(r > 0.0, (diff[0] + diff[1]) / (2.0 * r), 0.0)
    return _quick_two_sum(r, corr)


def tree_sum(x, axis):
    """Pairwise double-double reduction along an axis (fixed order)."""
    hi = np.moveaxis(x[0], axis, 0)
    lo = np.moveaxis(x[1], axis, 0)
    m = hi.shape[0]
    while m > 1:
        half = m // 2
        h, l = add((hi[0:2 * half:2], lo[0:2 * half:2]),
                   (hi[1:2 * half:2], lo[1:2 * half:2]))
        if m & 1:
            h = np.concatenate([h, hi[m - 1:m]], axis=0)
            l = np.concatenate([l, lo[m - 1:m]], axis=0)
        hi, lo = h, l
        m = hi.shape[0]
    return hi[0], lo[0]


def dot(v, w):
    """Compensated dot product of two float64 vectors (double-double)."""
    return tree_sum(two_prod(v, w), axis=0)


def matvec(Mdd, v):
    """double-double matrix times float64 vector."""
    prod = mul_f((Mdd[0], Mdd[1]), v[np.newaxis, :])
    return tree_sum(prod, axis=1)
