"""Compiled inner loops for piecewise-constant propagation.

The Hamiltonian is handled in its real symmetric frame (see
``TransmonModel.real_frame``), where each slice propagator is
``exp(-iX) = cos(X) - i sin(X)`` with ``X = H dt`` real symmetric. Both
functions are evaluated by a degree-13 Taylor polynomial in Paterson-Stockmeyer
form; the truncation error is below 1e-15 for ``||X||_1 <= 0.5``, and larger
slices are scaled down and squared back.
"""

import math

import numpy as np
from numba import njit

_NORM_LIMIT = 0.5


def _taylor_coefficients():
    cos_c = np.empty(7)
    sin_c = np.empty(7)
    fact = 1.0
    for k in range(14):
        if k > 0:
            fact *= k
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            cos_c[k // 2] = sign / fact
        else:
            sin_c[k // 2] = sign / fact
    return cos_c, sin_c


COS_C, SIN_C = _taylor_coefficients()


@njit(cache=True, inline="always")
def _mm(a, b, out):
    n = a.shape[0]
    p = b.shape[1]
    for i in range(n):
        for j in range(p):
            out[i, j] = 0.0
        for k in range(n):
            aik = a[i, k]
            for j in range(p):
                out[i, j] += aik * b[k, j]


@njit(cache=True)
def _slice_exp(x, cos_c, sin_c, cm, sm, w1, w2, w3, w4, w5):
    """Fill ``cm``, ``sm`` with cos(x), sin(x). ``x`` is overwritten."""
    d = x.shape[0]
    norm = 0.0
    for j in range(d):
        col = 0.0
        for i in range(d):
            col += abs(x[i, j])
        norm = max(norm, col)
    squarings = 0
    if norm > _NORM_LIMIT:
        squarings = int(math.ceil(math.log2(norm / _NORM_LIMIT)))
        scale = 0.5**squarings
        for i in range(d):
            for j in range(d):
                x[i, j] *= scale

    y, y2, y3 = w1, w2, w3
    _mm(x, x, y)
    _mm(y, y, y2)
    _mm(y2, y, y3)
    # p(Y) = c0 + c1 Y + c2 Y^2 + Y^3 (c3 + c4 Y + c5 Y^2 + c6 Y^3)
    for i in range(d):
        for j in range(d):
            cm[i, j] = cos_c[4] * y[i, j] + cos_c[5] * y2[i, j] + cos_c[6] * y3[i, j]
            w4[i, j] = sin_c[4] * y[i, j] + sin_c[5] * y2[i, j] + sin_c[6] * y3[i, j]
        cm[i, i] += cos_c[3]
        w4[i, i] += sin_c[3]
    _mm(y3, cm, w5)
    _mm(y3, w4, sm)
    for i in range(d):
        for j in range(d):
            w5[i, j] += cos_c[1] * y[i, j] + cos_c[2] * y2[i, j]
            sm[i, j] += sin_c[1] * y[i, j] + sin_c[2] * y2[i, j]
        w5[i, i] += cos_c[0]
        sm[i, i] += sin_c[0]
    for i in range(d):
        for j in range(d):
            cm[i, j] = w5[i, j]
    # sin(X) = X * q(Y)
    _mm(x, sm, w4)
    for i in range(d):
        for j in range(d):
            sm[i, j] = w4[i, j]

    for _ in range(squarings):
        # (C - iS)^2 = (C^2 - S^2) - i (CS + SC)
        _mm(cm, cm, w1)
        _mm(sm, sm, w2)
        _mm(cm, sm, w3)
        _mm(sm, cm, w4)
        for i in range(d):
            for j in range(d):
                cm[i, j] = w1[i, j] - w2[i, j]
                sm[i, j] = w3[i, j] + w4[i, j]


@njit(cache=True)
def propagate_real_frame(drift, controls, values, dt, columns, cos_c, sin_c):
    """Time-ordered product applied to identity ``columns``.

    Returns real and imaginary parts of ``U[:, columns]`` in the real frame,
    where ``U = prod_m exp(-i (drift + sum_c values[c, m] controls[c]) dt)``
    with the latest slice leftmost.
    """
    d = drift.shape[0]
    nchan = controls.shape[0]
    nsteps = values.shape[1]
    p = columns.shape[0]

    ur = np.zeros((d, p))
    ui = np.zeros((d, p))
    for j in range(p):
        ur[columns[j], j] = 1.0
    nr = np.empty((d, p))
    ni = np.empty((d, p))

    x = np.empty((d, d))
    cm = np.empty((d, d))
    sm = np.empty((d, d))
    w1 = np.empty((d, d))
    w2 = np.empty((d, d))
    w3 = np.empty((d, d))
    w4 = np.empty((d, d))
    w5 = np.empty((d, d))

    for m in range(nsteps):
        for i in range(d):
            for j in range(d):
                s = drift[i, j]
                for c in range(nchan):
                    s += values[c, m] * controls[c, i, j]
                x[i, j] = s * dt
        _slice_exp(x, cos_c, sin_c, cm, sm, w1, w2, w3, w4, w5)
        # (C - iS)(Ur + i Ui) = (C Ur + S Ui) + i (C Ui - S Ur)
        for i in range(d):
            for j in range(p):
                nr[i, j] = 0.0
                ni[i, j] = 0.0
            for k in range(d):
                c = cm[i, k]
                s = sm[i, k]
                for j in range(p):
                    nr[i, j] += c * ur[k, j] + s * ui[k, j]
                    ni[i, j] += c * ui[k, j] - s * ur[k, j]
        ur, nr = nr, ur
        ui, ni = ni, ui
    return ur, ui


@njit(cache=True)
def expm_real_symmetric(x, cos_c, sin_c):
    """cos(x), sin(x) for a single real symmetric matrix (test hook)."""
    d = x.shape[0]
    xx = x.copy()
    cm = np.empty((d, d))
    sm = np.empty((d, d))
    w = np.empty((5, d, d))
    _slice_exp(xx, cos_c, sin_c, cm, sm, w[0], w[1], w[2], w[3], w[4])
    return cm, sm
