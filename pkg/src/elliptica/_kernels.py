"""Compiled inner loops for the relaxation solver.

The arithmetic mirrors the NumPy reference path term for term (same
operand order, symmetric tap pairing as in ``scipy.ndimage.correlate1d``)
so both paths produce bitwise-identical iterates.
"""

import math

import numba as nb
import numpy as np


@nb.njit(cache=True)
def reflect_table(n, radius):
    """Source index for each padded position ``-radius .. n - 1 + radius``."""
    out = np.empty(n + 2 * radius, dtype=np.int64)
    period = 2 * n
    for p in range(n + 2 * radius):
        m = (p - radius) % period
        if m >= n:
            m = period - 1 - m
        out[p] = m
    return out


@nb.njit(cache=True)
def conv_buffers(rows, cols, radius):
    """Scratch space for :func:`convolve_into` on a ``rows x cols`` field."""
    width = cols + 2 * radius
    return (
        np.empty((rows + 2 * radius) * cols),
        np.empty(rows * cols),
        np.empty(rows * width),
        np.empty(rows * width),
    )


@nb.njit(cache=True)
def convolve_into(u, taps, row_tab, col_tab, first, last, ebuf, rbuf, tbuf, abuf, out):
    """Separable reflect-extended correlation of ``u``, output rows ``first..last-1``.

    Each entry is accumulated in the same order as ``correlate1d`` (centre
    tap, then symmetric pairs from the outermost inwards), so the result is
    bitwise equal to the reference. The loops run over flattened blocks so
    the compiler can vectorize them on small grids.
    """
    rows, cols = u.shape
    r = (taps.size - 1) // 2
    t0 = taps[r]
    nr = last - first
    width = cols + 2 * r
    # reflect-extend along axis 0 once, then each tap is one flat loop
    for p in range(nr + 2 * r):
        dst = ebuf[p * cols : (p + 1) * cols]
        src = u[row_tab[first + p]]
        for c in range(cols):
            dst[c] = src[c]
    m = nr * cols
    sbuf = rbuf[:m]
    centre = ebuf[r * cols : r * cols + m]
    for q in range(m):
        sbuf[q] = centre[q] * t0
    for k in range(r, 0, -1):
        w = taps[r + k]
        above = ebuf[(r - k) * cols : (r - k) * cols + m]
        below = ebuf[(r + k) * cols : (r + k) * cols + m]
        for q in range(m):
            sbuf[q] += (above[q] + below[q]) * w
    # copy into a row-padded block: tbuf[i * width + r + c]
    for i in range(nr):
        dst = tbuf[i * width + r : (i + 1) * width - r]
        src = sbuf[i * cols : (i + 1) * cols]
        for c in range(cols):
            dst[c] = src[c]
    # reflect-fill the column padding, then pass along axis 1 over the flat block
    for i in range(nr):
        row = tbuf[i * width : (i + 1) * width]
        for p in range(r):
            row[p] = row[r + col_tab[p]]
            row[width - 1 - p] = row[r + col_tab[width - 1 - p]]
    n = nr * width - 2 * r
    centre = tbuf[r : r + n]
    acc = abuf[:n]
    for q in range(n):
        acc[q] = centre[q] * t0
    for k in range(r, 0, -1):
        w = taps[r + k]
        left = tbuf[r - k : r - k + n]
        right = tbuf[r + k : r + k + n]
        for q in range(n):
            acc[q] += (left[q] + right[q]) * w
    for i in range(nr):
        dst = out[first + i]
        res = abuf[i * width : i * width + cols]
        for c in range(cols):
            dst[c] = res[c]


@nb.njit(cache=True)
def relax(u, f, lam, tau, taps, max_iter, tol, history):
    """Run the explicit relaxation in place on ``u`` (boundary must be zero).

    Returns ``(iterations, status)`` with status 1 converged, 0 exhausted,
    -1 non-finite residual at iteration ``iterations``.
    """
    rows, cols = u.shape
    r = (taps.size - 1) // 2
    row_tab = reflect_table(rows, r)
    col_tab = reflect_table(cols, r)
    g = np.zeros((rows, cols))
    ebuf, rbuf, tbuf, abuf = conv_buffers(rows, cols, r)
    cur = u.copy()
    nxt = np.zeros((rows, cols))
    use_g = lam != 0.0
    status = 0
    n_done = max_iter
    for it in range(max_iter):
        if use_g:
            convolve_into(cur, taps, row_tab, col_tab, 1, rows - 1, ebuf, rbuf, tbuf, abuf, g)
        ss = 0.0
        for i in range(1, rows - 1):
            for j in range(1, cols - 1):
                lap = cur[i + 1, j] + cur[i - 1, j] + cur[i, j + 1] + cur[i, j - 1] - 4.0 * cur[i, j]
                res = f[i, j] + lap - lam * g[i, j]
                ss += res * res
                nxt[i, j] = cur[i, j] + tau * res
        norm = math.sqrt(ss)
        history[it] = norm
        if not math.isfinite(norm):
            n_done = it + 1
            status = -1
            break
        cur, nxt = nxt, cur
        if norm < tol:
            n_done = it + 1
            status = 1
            break
    u[:, :] = cur
    return n_done, status
