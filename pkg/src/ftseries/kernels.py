"""Numeric inner loops, each with a numba and a pure-numpy implementation.

The numba path is used when numba imports and ``FT_SERIES_NUMBA`` is not
``"0"``.  Both paths are always importable as :data:`NUMPY` and
:data:`NUMBA` (the latter is ``None`` without numba) so they can be
compared directly; see ``benchmarks/bench_kernels.py``.

Mode systems reach the RK4 kernel in first-order form, described by flat
arrays:

* ``orders[q]`` and ``offsets[q]``: derivative order and state offset of
  unknown ``q``; the state has ``S = sum(orders)`` components.
* ``ent_row, ent_col, ent_lo, ent_hi``: coefficient entries.  Column
  ``c < S`` is a state component, column ``S + q`` the top derivative of
  unknown ``q``.  Each entry is the exp-polynomial held in terms
  ``ent_lo:ent_hi`` of ``tc, tp, tq``.
* ``src_lo, src_hi``: per-row source terms in the same term arrays.
"""
from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


# ---------------------------------------------------------------- numpy path


def _exppoly_eval_np(c, p, q, t):
    t = np.asarray(t, dtype=np.float64)
    if c.size == 0:
        return np.zeros(t.shape, dtype=np.complex128)
    tt = t[:, None]
    return (c[None, :] * tt ** p[None, :] * np.exp(q[None, :] * tt)).sum(axis=1)


def _rhs_np(t, y, n, S, orders, offsets, ent_row, ent_col, ent_lo, ent_hi,
            src_lo, src_hi, tc, tp, tq):
    vals = tc * t ** tp * np.exp(tq * t)
    cs = np.concatenate(([0j], np.cumsum(vals)))
    A = np.zeros((n, S + n), dtype=np.complex128)
    np.add.at(A, (ent_row, ent_col), cs[ent_hi] - cs[ent_lo])
    rhs = (cs[src_hi] - cs[src_lo]) - A[:, :S] @ y
    z = np.linalg.solve(A[:, S:], rhs)
    dy = np.empty(S, dtype=np.complex128)
    for k in range(n):
        o, m = offsets[k], orders[k]
        dy[o:o + m - 1] = y[o + 1:o + m]
        dy[o + m - 1] = z[k]
    return dy


def _rk4_np(y0, t_end, steps, orders, offsets, ent_row, ent_col, ent_lo, ent_hi,
            src_lo, src_hi, tc, tp, tq):
    n = orders.size
    S = y0.size
    h = t_end / steps
    Y = np.empty((steps + 1, S), dtype=np.complex128)
    dY = np.empty((steps + 1, S), dtype=np.complex128)
    args = (n, S, orders, offsets, ent_row, ent_col, ent_lo, ent_hi, src_lo, src_hi, tc, tp, tq)
    y = y0.astype(np.complex128).copy()
    Y[0] = y
    k1 = _rhs_np(0.0, y, *args)
    for i in range(steps):
        t = i * h
        dY[i] = k1
        k2 = _rhs_np(t + h / 2, y + h / 2 * k1, *args)
        k3 = _rhs_np(t + h / 2, y + h / 2 * k2, *args)
        k4 = _rhs_np(t + h, y + h * k3, *args)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        Y[i + 1] = y
        k1 = _rhs_np((i + 1) * h, y, *args)
    dY[steps] = k1
    return Y, dY


def _hermite_np(t_end, Y, dY, t):
    steps = Y.shape[0] - 1
    h = t_end / steps
    t = np.asarray(t, dtype=np.float64)
    s = t / h
    i = np.clip(np.floor(s).astype(np.int64), 0, steps - 1)
    u = (s - i)[:, None]
    h00 = 2 * u**3 - 3 * u**2 + 1
    h10 = u**3 - 2 * u**2 + u
    h01 = -2 * u**3 + 3 * u**2
    h11 = u**3 - u**2
    return h00 * Y[i] + h * h10 * dY[i] + h01 * Y[i + 1] + h * h11 * dY[i + 1]


NUMPY = SimpleNamespace(
    name="numpy",
    exppoly_eval=_exppoly_eval_np,
    rk4_system=_rk4_np,
    hermite=_hermite_np,
)


# ---------------------------------------------------------------- numba path


def _njit(f):
    # without numba the jitted names stay plain Python and NUMBA is None
    return numba.njit(cache=True, nogil=True)(f) if numba is not None else f


@_njit
def _exppoly_eval_nb(c, p, q, t):
    out = np.zeros(t.size, dtype=np.complex128)
    for j in range(t.size):
        acc = 0j
        for m in range(c.size):
            acc += c[m] * t[j] ** p[m] * np.exp(q[m] * t[j])
        out[j] = acc
    return out


@_njit
def _rhs_nb(t, y, n, S, orders, offsets, ent_row, ent_col, ent_lo, ent_hi,
        src_lo, src_hi, tc, tp, tq, A, b, dy):
    A[:, :] = 0j
    for e in range(ent_row.size):
        acc = 0j
        for m in range(ent_lo[e], ent_hi[e]):
            acc += tc[m] * t ** tp[m] * np.exp(tq[m] * t)
        A[ent_row[e], ent_col[e]] += acc
    for r in range(n):
        acc = 0j
        for m in range(src_lo[r], src_hi[r]):
            acc += tc[m] * t ** tp[m] * np.exp(tq[m] * t)
        for c in range(S):
            acc -= A[r, c] * y[c]
        b[r] = acc
    if n == 1:
        z0 = b[0] / A[0, S]
        z = np.empty(1, dtype=np.complex128)
        z[0] = z0
    else:
        z = np.linalg.solve(np.ascontiguousarray(A[:, S:]), b)
    for k in range(n):
        o = offsets[k]
        m = orders[k]
        for h in range(m - 1):
            dy[o + h] = y[o + h + 1]
        dy[o + m - 1] = z[k]


@_njit
def _rk4_nb(y0, t_end, steps, orders, offsets, ent_row, ent_col, ent_lo, ent_hi,
               src_lo, src_hi, tc, tp, tq):
    n = orders.size
    S = y0.size
    h = t_end / steps
    Y = np.empty((steps + 1, S), dtype=np.complex128)
    dY = np.empty((steps + 1, S), dtype=np.complex128)
    A = np.empty((n, S + n), dtype=np.complex128)
    b = np.empty(n, dtype=np.complex128)
    k1 = np.empty(S, dtype=np.complex128)
    k2 = np.empty(S, dtype=np.complex128)
    k3 = np.empty(S, dtype=np.complex128)
    k4 = np.empty(S, dtype=np.complex128)
    y = y0.astype(np.complex128).copy()
    Y[0] = y
    _rhs_nb(0.0, y, n, S, orders, offsets, ent_row, ent_col, ent_lo, ent_hi,
        src_lo, src_hi, tc, tp, tq, A, b, k1)
    for i in range(steps):
        t = i * h
        dY[i] = k1
        _rhs_nb(t + h / 2, y + h / 2 * k1, n, S, orders, offsets, ent_row, ent_col,
            ent_lo, ent_hi, src_lo, src_hi, tc, tp, tq, A, b, k2)
        _rhs_nb(t + h / 2, y + h / 2 * k2, n, S, orders, offsets, ent_row, ent_col,
            ent_lo, ent_hi, src_lo, src_hi, tc, tp, tq, A, b, k3)
        _rhs_nb(t + h, y + h * k3, n, S, orders, offsets, ent_row, ent_col,
            ent_lo, ent_hi, src_lo, src_hi, tc, tp, tq, A, b, k4)
        for j in range(S):
            y[j] = y[j] + h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j])
        Y[i + 1] = y
        _rhs_nb((i + 1) * h, y, n, S, orders, offsets, ent_row, ent_col, ent_lo, ent_hi,
            src_lo, src_hi, tc, tp, tq, A, b, k1)
    dY[steps] = k1
    return Y, dY


@_njit
def _hermite_kernel_nb(t_end, Y, dY, t):
    steps = Y.shape[0] - 1
    h = t_end / steps
    out = np.empty((t.size, Y.shape[1]), dtype=np.complex128)
    for j in range(t.size):
        s = t[j] / h
        i = int(np.floor(s))
        if i < 0:
            i = 0
        elif i > steps - 1:
            i = steps - 1
        u = s - i
        h00 = 2 * u**3 - 3 * u**2 + 1
        h10 = u**3 - 2 * u**2 + u
        h01 = -2 * u**3 + 3 * u**2
        h11 = u**3 - u**2
        for c in range(Y.shape[1]):
            out[j, c] = (h00 * Y[i, c] + h * h10 * dY[i, c]
                         + h01 * Y[i + 1, c] + h * h11 * dY[i + 1, c])
    return out


def _hermite_nb(t_end, Y, dY, t):
    return _hermite_kernel_nb(float(t_end), Y, dY, np.ascontiguousarray(t, dtype=np.float64).ravel())


def _exppoly_eval_call_nb(c, p, q, t):
    return _exppoly_eval_nb(c, p, q, np.ascontiguousarray(t, dtype=np.float64).ravel())


NUMBA = SimpleNamespace(
    name="numba",
    exppoly_eval=_exppoly_eval_call_nb,
    rk4_system=_rk4_nb,
    hermite=_hermite_nb,
) if numba is not None else None


def _select():
    if NUMBA is not None and os.environ.get("FT_SERIES_NUMBA", "1") != "0":
        return NUMBA
    return NUMPY


_active = _select()


def backend() -> str:
    """Name of the active kernel implementation."""
    return _active.name


def exppoly_eval(c, p, q, t):
    return _active.exppoly_eval(c, p, q, t)


def rk4_system(*args):
    return _active.rk4_system(*args)


def hermite(t_end, Y, dY, t):
    return _active.hermite(t_end, Y, dY, t)
