"""Numeric kernels with two interchangeable backends.

Every public kernel exists as a loop implementation (compiled with numba when
available) and a vectorised numpy implementation.  The module-level names
bind to one of them according to :data:`orlicz._accel.USE_JIT`; both stay
importable as ``numba_kernels`` / ``numpy_kernels`` for benchmarking and
cross-checking.

Young functions are passed to kernels as the flat tuple
``(code, p, a, tx, ty, sl)``:

=====  ==================================  ==========================
code   family                              parameters used
=====  ==================================  ==========================
0      ``a * x**p``                        ``p``, ``a``
1      ``exp(x) - 1``                      none
2      ``x**p * log(1 + x)``               ``p``
3      piecewise linear through knots      ``tx, ty, sl``
=====  ==================================  ==========================

For tables ``tx[0] == ty[0] == 0``, ``sl[j]`` is the slope on
``[tx[j], tx[j+1]]`` and the last slope is used to extrapolate.
"""
import math
from types import SimpleNamespace

import numpy as np

from . import _accel

POWER, EXPM1, PLOG, TABLE = 0, 1, 2, 3

_MAX_BISECT = 400


# ---------------------------------------------------------------------------
# loop implementations (numba-compatible subset of Python)


def _eval1(code, p, a, tx, ty, sl, x):
    if x <= 0.0:
        return 0.0
    if code == 0:
        return a * x ** p
    if code == 1:
        if x > 709.0:
            return np.inf
        return math.expm1(x)
    if code == 2:
        return x ** p * math.log1p(x)
    n = tx.shape[0]
    if x >= tx[n - 1]:
        return ty[n - 1] + sl[n - 2] * (x - tx[n - 1])
    j = np.searchsorted(tx, x, side="right") - 1
    return ty[j] + sl[j] * (x - tx[j])


def _inv1(code, p, a, tx, ty, sl, y):
    if y <= 0.0:
        return 0.0
    if code == 0:
        return (y / a) ** (1.0 / p)
    if code == 1:
        return math.log1p(y)
    if code == 3:
        n = ty.shape[0]
        if y >= ty[n - 1]:
            return tx[n - 1] + (y - ty[n - 1]) / sl[n - 2]
        j = np.searchsorted(ty, y, side="right") - 1
        return tx[j] + (y - ty[j]) / sl[j]
    lo = 0.0
    hi = 1.0
    while _eval1(code, p, a, tx, ty, sl, hi) < y:
        lo = hi
        hi *= 2.0
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _eval1(code, p, a, tx, ty, sl, mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _loop_eval(code, p, a, tx, ty, sl, x):
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        out[i] = _eval1(code, p, a, tx, ty, sl, x[i])
    return out


def _loop_inverse(code, p, a, tx, ty, sl, y):
    out = np.empty(y.shape[0])
    for i in range(y.shape[0]):
        out[i] = _inv1(code, p, a, tx, ty, sl, y[i])
    return out


def _modular_row(code, p, a, tx, ty, sl, w, c, k):
    s = 0.0
    for i in range(w.shape[0]):
        if c[i] != 0.0:
            s += w[i] * _eval1(code, p, a, tx, ty, sl, c[i] / k)
    return s


def _loop_modular(code, p, a, tx, ty, sl, w2, c2, scale):
    out = np.empty(w2.shape[0])
    for r in range(w2.shape[0]):
        out[r] = _modular_row(code, p, a, tx, ty, sl, w2[r], np.abs(c2[r]), 1.0 / scale[r])
    return out


def _loop_gauge(code, p, a, tx, ty, sl, w2, c2, rtol):
    rows = w2.shape[0]
    out = np.zeros(rows)
    iters = np.zeros(rows, dtype=np.int64)
    for r in range(rows):
        w = w2[r]
        c = np.abs(c2[r])
        cmax = 0.0
        total = 0.0
        klo = 0.0
        for i in range(w.shape[0]):
            if c[i] != 0.0:
                total += w[i]
                if c[i] > cmax:
                    cmax = c[i]
                ki = c[i] / _inv1(code, p, a, tx, ty, sl, 1.0 / w[i])
                if ki > klo:
                    klo = ki
        if cmax == 0.0:
            continue
        khi = cmax / _inv1(code, p, a, tx, ty, sl, 1.0 / total)
        while _modular_row(code, p, a, tx, ty, sl, w, c, khi) > 1.0:
            khi *= 2.0
        while klo > 0.0 and _modular_row(code, p, a, tx, ty, sl, w, c, klo) <= 1.0:
            klo *= 0.5
        n = 0
        while khi - klo > rtol * khi and n < _MAX_BISECT:
            mid = math.sqrt(klo * khi) if klo > 0.0 else 0.5 * khi
            if mid <= klo or mid >= khi:
                break
            if _modular_row(code, p, a, tx, ty, sl, w, c, mid) > 1.0:
                klo = mid
            else:
                khi = mid
            n += 1
        out[r] = khi
        iters[r] = n
    return out, iters


def _loop_pair_extrema(ell, n_max, lo, hi):
    sup = np.full(n_max, -np.inf)
    inf = np.full(n_max, np.inf)
    for n in range(1, n_max + 1):
        for j in range(lo, hi - n + 1):
            d = (ell[j + n] - ell[j]) / n
            if d > sup[n - 1]:
                sup[n - 1] = d
            if d < inf[n - 1]:
                inf[n - 1] = d
    return sup, inf


# ---------------------------------------------------------------------------
# numpy implementations


def _np_eval(code, p, a, tx, ty, sl, x):
    x = np.asarray(x, dtype=float)
    pos = np.maximum(x, 0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        if code == POWER:
            out = a * pos ** p
        elif code == EXPM1:
            out = np.expm1(pos)
        elif code == PLOG:
            out = pos ** p * np.log1p(pos)
        else:
            out = np.interp(pos, tx, ty)
            beyond = pos > tx[-1]
            out = np.where(beyond, ty[-1] + sl[-1] * (pos - tx[-1]), out)
    return np.where(x > 0.0, out, 0.0)


def _np_inverse(code, p, a, tx, ty, sl, y):
    y = np.asarray(y, dtype=float)
    pos = np.maximum(y, 0.0)
    if code == POWER:
        out = (pos / a) ** (1.0 / p)
    elif code == EXPM1:
        out = np.log1p(pos)
    elif code == TABLE:
        out = np.interp(pos, ty, tx)
        out = np.where(pos > ty[-1], tx[-1] + (pos - ty[-1]) / sl[-1], out)
    else:
        lo = np.zeros_like(pos)
        hi = np.ones_like(pos)
        grow = _np_eval(code, p, a, tx, ty, sl, hi) < pos
        while grow.any():
            lo = np.where(grow, hi, lo)
            hi = np.where(grow, 2.0 * hi, hi)
            grow = _np_eval(code, p, a, tx, ty, sl, hi) < pos
        for _ in range(_MAX_BISECT):
            mid = 0.5 * (lo + hi)
            active = (mid > lo) & (mid < hi)
            if not active.any():
                break
            below = _np_eval(code, p, a, tx, ty, sl, mid) < pos
            lo = np.where(active & below, mid, lo)
            hi = np.where(active & ~below, mid, hi)
        out = 0.5 * (lo + hi)
    return np.where(y > 0.0, out, 0.0)


def _np_modular_k(code, p, a, tx, ty, sl, w2, c2, k):
    vals = _np_eval(code, p, a, tx, ty, sl, c2 / k[:, None])
    return np.where(c2 != 0.0, w2 * vals, 0.0).sum(axis=1)


def _np_modular(code, p, a, tx, ty, sl, w2, c2, scale):
    c2 = np.abs(np.asarray(c2, dtype=float))
    return _np_modular_k(code, p, a, tx, ty, sl, w2, c2, 1.0 / np.asarray(scale, dtype=float))


def _np_gauge(code, p, a, tx, ty, sl, w2, c2, rtol):
    w2 = np.asarray(w2, dtype=float)
    c2 = np.abs(np.asarray(c2, dtype=float))
    live = c2 != 0.0
    rows = w2.shape[0]
    nonzero = live.any(axis=1)
    wsafe = np.where(live, w2, 1.0)
    ki = np.where(live, c2 / _np_inverse(code, p, a, tx, ty, sl, 1.0 / wsafe), 0.0)
    klo = ki.max(axis=1)
    total = np.where(live, w2, 0.0).sum(axis=1)
    cmax = c2.max(axis=1)
    khi = np.where(nonzero, cmax / _np_inverse(code, p, a, tx, ty, sl, 1.0 / np.where(nonzero, total, 1.0)), 1.0)
    cs = np.where(nonzero[:, None], c2, 0.0)
    while True:
        bad = nonzero & (_np_modular_k(code, p, a, tx, ty, sl, w2, cs, khi) > 1.0)
        if not bad.any():
            break
        khi = np.where(bad, 2.0 * khi, khi)
    while True:
        bad = nonzero & (klo > 0.0) & (_np_modular_k(code, p, a, tx, ty, sl, w2, cs, np.where(klo > 0, klo, 1.0)) <= 1.0)
        if not bad.any():
            break
        klo = np.where(bad, 0.5 * klo, klo)
    iters = np.zeros(rows, dtype=np.int64)
    for _ in range(_MAX_BISECT):
        mid = np.where(klo > 0.0, np.sqrt(klo * khi), 0.5 * khi)
        active = nonzero & (khi - klo > rtol * khi) & (mid > klo) & (mid < khi)
        if not active.any():
            break
        over = _np_modular_k(code, p, a, tx, ty, sl, w2, cs, mid) > 1.0
        klo = np.where(active & over, mid, klo)
        khi = np.where(active & ~over, mid, khi)
        iters += active
    return np.where(nonzero, khi, 0.0), iters


def _np_pair_extrema(ell, n_max, lo, hi):
    ell = np.asarray(ell, dtype=float)
    sup = np.full(n_max, -np.inf)
    inf = np.full(n_max, np.inf)
    for n in range(1, n_max + 1):
        if hi - n + 1 <= lo:
            continue
        d = (ell[lo + n:hi + 1] - ell[lo:hi - n + 1]) / n
        sup[n - 1] = d.max()
        inf[n - 1] = d.min()
    return sup, inf


numpy_kernels = SimpleNamespace(
    name="numpy",
    eval=_np_eval,
    inverse=_np_inverse,
    modular=_np_modular,
    gauge=_np_gauge,
    pair_extrema=_np_pair_extrema,
)


def _build_numba():
    global _eval1, _inv1, _modular_row
    _eval1 = _accel.njit(_eval1)
    _inv1 = _accel.njit(_inv1)
    _modular_row = _accel.njit(_modular_row)
    return SimpleNamespace(
        name="numba",
        eval=_accel.njit(_loop_eval),
        inverse=_accel.njit(_loop_inverse),
        modular=_accel.njit(_loop_modular),
        gauge=_accel.njit(_loop_gauge),
        pair_extrema=_accel.njit(_loop_pair_extrema),
    )


numba_kernels = _build_numba() if _accel.HAS_NUMBA else None

active = numba_kernels if _accel.USE_JIT else numpy_kernels


def _f(x):
    return np.ascontiguousarray(np.asarray(x, dtype=float))


def phi_eval(params, x):
    code, p, a, tx, ty, sl = params
    return active.eval(code, p, a, tx, ty, sl, _f(np.atleast_1d(x)))


def phi_inverse(params, y):
    code, p, a, tx, ty, sl = params
    return active.inverse(code, p, a, tx, ty, sl, _f(np.atleast_1d(y)))


def modular_batch(params, weights, coeffs, scale=None):
    """Row-wise modular of ``coeffs * scale`` against atom ``weights``."""
    code, p, a, tx, ty, sl = params
    w2 = _f(np.atleast_2d(weights))
    c2 = _f(np.atleast_2d(coeffs))
    s = np.ones(w2.shape[0]) if scale is None else _f(np.broadcast_to(scale, (w2.shape[0],)))
    return active.modular(code, p, a, tx, ty, sl, w2, c2, s)


def gauge_batch(params, weights, coeffs, rtol=1e-13):
    """Row-wise gauge norms; padding entries carry coefficient 0."""
    code, p, a, tx, ty, sl = params
    return active.gauge(code, p, a, tx, ty, sl, _f(np.atleast_2d(weights)), _f(np.atleast_2d(coeffs)), float(rtol))


def pair_extrema(ell, n_max, lo, hi):
    """For n = 1..n_max: sup and inf of (ell[j+n] - ell[j]) / n over lo <= j, j+n <= hi."""
    return active.pair_extrema(_f(ell), int(n_max), int(lo), int(hi))
