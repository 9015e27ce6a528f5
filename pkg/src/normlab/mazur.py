"""Mazur maps between l_q^n and l_p^n spheres."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numerics import make_rng
from .duality import LipschitzEstimate
from .errors import DiagonalPoint, NotOnSphere

__all__ = [
    "LpVector",
    "lp_norm",
    "mazur_map",
    "swap_pair_ratio",
    "mazur_ratio",
    "mazur_lipschitz",
    "lp_duality_map",
    "sphere_sample_lp",
]

SPHERE_TOL = 1e-12
# closer pairs lose digits to cancellation faster than the ratio approaches its limit
MIN_SEPARATION = 1e-6


@dataclass(frozen=True)
class LpVector:
    coords: tuple[float, ...]
    p: float

    @property
    def norm(self) -> float:
        return float(lp_norm(self.coords, self.p))

    def on_sphere(self, tol: float = SPHERE_TOL) -> bool:
        return abs(self.norm - 1.0) <= tol


def lp_norm(x, p: float):
    """``(sum |x_i|^p)^(1/p)`` over the last axis, factoring out the max for stability."""
    a = np.abs(np.asarray(x, dtype=float))
    m = a.max(axis=-1)
    safe = np.where(m > 0, m, 1.0)
    s = np.sum((a / safe[..., None]) ** p, axis=-1)
    return np.where(m > 0, safe * s ** (1.0 / p), 0.0)


def _signed_power(x, e: float) -> np.ndarray:
    # copysign keeps the sign bit even when a tiny magnitude underflows to zero
    x = np.asarray(x, dtype=float)
    return np.copysign(np.abs(x) ** e, x)


def mazur_map(x, q: float, p: float) -> np.ndarray:
    """``sigma(x_i) |x_i|^(q/p)``: sends the unit sphere of l_q onto that of l_p."""
    if not (1 < p < np.inf and 1 < q < np.inf):
        raise ValueError("Mazur map needs 1 < p, q < inf")
    return _signed_power(x, q / p)


def sphere_sample_lp(n: int, q: float, count: int, seed: int) -> np.ndarray:
    """Seeded points on the l_q^n sphere (normalised Gaussians)."""
    z = make_rng(seed).standard_normal((count, n))
    return z / lp_norm(z, q)[:, None]


def swap_pair_ratio(p: float, q: float, x: float) -> float:
    """Ratio ``|M(x,y) - M(y,x)|_p / |(x,y) - (y,x)|_q`` with ``(x, y)`` on the l_q^2 sphere.

    Tends to ``q/p`` as ``x`` tends to the diagonal point ``2^(-1/q)``.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    y = (1.0 - x**q) ** (1.0 / q)
    if abs(x - y) <= 1e-14:
        raise DiagonalPoint("swap pair degenerates at the diagonal point")
    e = q / p
    return float(2 ** (1 / p - 1 / q) * abs(x**e - y**e) / abs(x - y))


def mazur_ratio(X, Y, q: float, p: float) -> np.ndarray:
    """``|M(x) - M(y)|_p / |x - y|_q`` row-wise; zero for coincident rows."""
    num = lp_norm(mazur_map(X, q, p) - mazur_map(Y, q, p), p)
    den = lp_norm(np.asarray(X) - np.asarray(Y), q)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > MIN_SEPARATION, num / den, 0.0)


def _swap_family(n: int, q: float) -> tuple[np.ndarray, np.ndarray]:
    d = 2 ** (-1 / q)
    deltas = np.concatenate([-np.logspace(-1, -5, 9), np.logspace(-5, -1, 9), np.linspace(0.05, 1 - d, 8)])
    xs = np.clip(d + deltas, 0.0, 1.0)
    ys = (1.0 - xs**q) ** (1.0 / q)
    X = np.zeros((len(xs), n))
    Y = np.zeros((len(xs), n))
    X[:, 0], X[:, 1] = xs, ys
    Y[:, 0], Y[:, 1] = ys, xs
    keep = np.abs(xs - ys) > 1e-14
    return X[keep], Y[keep]


def mazur_lipschitz(p: float, q: float, n: int = 2, samples: int = 10_000, seed: int = 0) -> LipschitzEstimate:
    """Estimate the Lipschitz constant of ``M_qp`` on the l_q^n sphere.

    Candidates are the swap family, near-diagonal pairs around random points
    and ``samples`` random pairs; the best is polished by coordinate ascent.
    """
    if not (1 < p <= q < np.inf):
        raise ValueError("mazur_lipschitz needs 1 < p <= q < inf")
    if n < 2:
        raise ValueError("mazur_lipschitz needs n >= 2")
    rng = make_rng(seed)
    SX, SY = _swap_family(n, q)
    base = sphere_sample_lp(n, q, 256, seed + 1)
    near = base + 1e-4 * rng.standard_normal(base.shape)
    near /= lp_norm(near, q)[:, None]
    X = np.vstack([SX, base])
    Y = np.vstack([SY, near])
    if samples > 0:
        A = rng.standard_normal((samples, n))
        B = rng.standard_normal((samples, n))
        X = np.vstack([X, A / lp_norm(A, q)[:, None]])
        Y = np.vstack([Y, B / lp_norm(B, q)[:, None]])
    vals = mazur_ratio(X, Y, q, p)
    i = int(np.argmax(vals))
    x, y, best = X[i].copy(), Y[i].copy(), float(vals[i])

    step = 1e-2
    for _ in range(200):
        improved = False
        for k in range(2 * n):
            for sgn in (1.0, -1.0):
                cx, cy = x.copy(), y.copy()
                (cx if k < n else cy)[k % n] += sgn * step
                cx /= lp_norm(cx, q)
                cy /= lp_norm(cy, q)
                v = float(mazur_ratio(cx[None], cy[None], q, p)[0])
                if v > best:
                    x, y, best, improved = cx, cy, v, True
        if not improved:
            step *= 0.5
            if step < 1e-12:
                break
    value = float(mazur_ratio(x[None], y[None], q, p)[0])
    return LipschitzEstimate(value, (x, y), int(samples), True)


def lp_duality_map(x, q: float) -> np.ndarray:
    """Norming functional ``sigma(x_i) |x_i|^(q-1)`` of a unit vector of l_q (a Mazur map)."""
    x = np.asarray(x, dtype=float)
    if abs(float(lp_norm(x, q)) - 1.0) > SPHERE_TOL:
        raise NotOnSphere(f"|x|_{q:g} = {float(lp_norm(x, q))!r}, expected 1")
    return mazur_map(x, q, q / (q - 1))
