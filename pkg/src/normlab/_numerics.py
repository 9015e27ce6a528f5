"""Small numerical helpers shared across modules."""

from __future__ import annotations

import numpy as np

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator so streams are identical across platforms."""
    return np.random.Generator(np.random.Philox(int(seed)))


def golden_min(fun, lo, hi, steps: int = 60):
    """Vectorized golden-section search; returns ``(argmin, min)`` per bracket."""
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(steps):
        left = fc < fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        newp = np.where(left, b - _INVPHI * (b - a), a + _INVPHI * (b - a))
        fnew = fun(newp)
        c, d = np.where(left, newp, d), np.where(left, c, newp)
        fc, fd = np.where(left, fnew, fd), np.where(left, fc, fnew)
    best = fc < fd
    return np.where(best, c, d), np.where(best, fc, fd)


def golden_max(fun, lo, hi, steps: int = 60):
    x, f = golden_min(lambda t: -fun(t), lo, hi, steps)
    return x, -f


def periodic_max(fun, n: int, period: float, top: int = 6, steps: int = 50):
    """Max of a scalar function of one periodic variable.

    Samples ``n`` equally spaced points, then polishes the ``top`` largest
    local maxima by golden section on one grid step either side.  Returns
    ``(argmax, max)``; the grid value is kept if refinement does not improve it.
    """
    t = np.arange(n) * (period / n)
    v = fun(t)
    peak = (v >= np.roll(v, 1)) & (v >= np.roll(v, -1))
    idx = np.flatnonzero(peak)
    if idx.size == 0:
        idx = np.array([int(np.argmax(v))])
    idx = idx[np.argsort(-v[idx], kind="stable")[:top]]
    h = period / n
    x, fx = golden_max(fun, t[idx] - h, t[idx] + h, steps)
    k = int(np.argmax(fx))
    i = int(np.argmax(v))
    if fx[k] >= v[i]:
        return float(np.remainder(x[k], period)), float(fx[k])
    return float(t[i]), float(v[i])
