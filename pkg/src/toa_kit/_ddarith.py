"""Vectorized double-double (compensated) arithmetic kernels.

A double-double value is an unevaluated sum ``hi + lo`` with
``|lo| <= ulp(hi)/2``, giving roughly 31 significant decimal digits.  Only
the handful of operations needed by the hypergeometric series are provided:
addition, multiplication by a double, and division by a double.  All kernels
are plain elementwise numpy expressions, so they accept scalars or arrays.

Error-free transforms follow Dekker (1971) and Knuth TAOCP 4.2.2; no FMA is
assumed (Dekker splitting is exact in IEEE binary64 for |x| < 2**996).
"""

import numpy as np

# 2**27 + 1, splits a 53-bit significand into two 26-bit halves
_SPLITTER = 134217729.0

# Unit roundoff of the hi+lo pair, ~2**-104
DD_EPS = 4.93e-32


def two_sum(a, b):
    """Exact sum: returns (s, e) with s = fl(a+b) and a + b = s + e."""
    s = a + b
    t = s - a
    e = (a - (s - t)) + (b - t)
    return s, e


def two_prod(a, b):
    """Exact product: returns (p, e) with p = fl(a*b) and a * b = p + e."""
    p = a * b
    ca = _SPLITTER * a
    ah = ca - (ca - a)
    al = a - ah
    cb = _SPLITTER * b
    bh = cb - (cb - b)
    bl = b - bh
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def _renorm(h, e):
    s = h + e
    return s, e - (s - h)


def dd_add(xh, xl, yh, yl):
    """Double-double addition (sloppy variant, error O(DD_EPS))."""
    sh, se = two_sum(xh, yh)
    return _renorm(sh, se + (xl + yl))


def dd_mul_d(xh, xl, d):
    """Double-double times double."""
    ph, pe = two_prod(xh, d)
    return _renorm(ph, pe + xl * d)


def dd_div_d(xh, xl, d):
    """Double-double divided by double."""
    q1 = xh / d
    ph, pe = two_prod(q1, d)
    q2 = (((xh - ph) - pe) + xl) / d
    return _renorm(q1, q2)


def zeros_like_dd(shape):
    return np.zeros(shape), np.zeros(shape)
