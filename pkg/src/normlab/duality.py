"""Duality maps, dual norms and Lipschitz estimates of ``J`` on the sphere."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ._numerics import golden_max, make_rng
from .convexity import hessian, require_norm
from .errors import (
    FitResidualTooLarge,
    KinkPoint,
    NewtonDiverged,
    SingularHessian,
)
from .gauge import PolarGauge, TrigPolyGauge, _require_vector, polar, unit

__all__ = [
    "LipschitzEstimate",
    "DualGauge",
    "duality_map",
    "sphere_duality_map",
    "dual_norm",
    "dual_norm_argmax",
    "exact_dual_profile",
    "dual_gauge",
    "duality_lipschitz",
    "contraction_defect",
    "inverse_duality",
    "ratio_field",
]

DUAL_GRID = 1024
FIT_TOL = 1e-6
ROOT_TOL = 1e-10
STRATA = 64
ADJACENT = 1024
ASCENT_STEPS = 200
_CHUNK = 2048
# closer pairs lose digits to cancellation faster than the ratio approaches its limit
MIN_SEPARATION = 1e-5


# -- duality map ------------------------------------------------------------


def _J_polar(gauge: PolarGauge, r, theta) -> np.ndarray:
    """``J = (r/g^2) (e_r - (g'/g) e_theta)`` in Cartesian coordinates."""
    g, g1, _ = gauge.jet(theta)
    c, s = np.cos(theta), np.sin(theta)
    k = r / g**2
    q = g1 / g
    return np.stack([k * (c + q * s), k * (s - q * c)], axis=-1)


def sphere_duality_map(gauge: PolarGauge, theta) -> np.ndarray:
    """``J`` at the sphere points ``g(theta) u(theta)`` (vectorized over *theta*)."""
    theta = np.asarray(theta, dtype=float)
    return _J_polar(gauge, gauge(theta), theta)


def _require_smooth_norm(gauge: PolarGauge, theta) -> None:
    if not np.all(gauge.is_smooth_at(theta)):
        raise KinkPoint(f"{gauge.kind} gauge is not smooth at the requested point")
    require_norm(gauge)


def duality_map(gauge: PolarGauge, v) -> np.ndarray:
    """Gradient of ``|.|^2 / 2`` at ``v``: the unique norming functional scaled to ``|v|``."""
    v = _require_vector(v)
    r, theta = polar(v)
    _require_smooth_norm(gauge, theta)
    return _J_polar(gauge, r, theta)


# -- dual norm --------------------------------------------------------------


def _grid(gauge: PolarGauge):
    cached = gauge._cache.get("dual_grid")
    if cached is None:
        theta = 2 * np.pi * np.arange(DUAL_GRID) / DUAL_GRID
        cached = gauge._cache["dual_grid"] = (theta, gauge.boundary(theta))
    return cached


def _support_newton(gauge: PolarGauge, F: np.ndarray, t: np.ndarray, lo, hi):
    """Safeguarded Newton on ``h'(theta) = 0`` for ``h = g <f, u>`` inside ``[lo, hi]``."""
    f1, f2 = F[:, 0], F[:, 1]
    for _ in range(40):
        g, g1, g2 = gauge.jet(t)
        c, s = np.cos(t), np.sin(t)
        a = f1 * c + f2 * s
        b = -f1 * s + f2 * c
        h1 = g1 * a + g * b
        h2 = g2 * a + 2 * g1 * b - g * a
        lo = np.where(h1 > 0, t, lo)
        hi = np.where(h1 > 0, hi, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = t - h1 / h2
        ok = (h2 < 0) & (newton > lo) & (newton < hi)
        t_new = np.where(ok, newton, 0.5 * (lo + hi))
        # h is stationary at the root, so 1e-13 in angle is far below value noise
        done = np.all(np.abs(t_new - t) < 1e-13)
        t = t_new
        if done:
            break
    return t


def dual_norm_argmax(gauge: PolarGauge, f) -> tuple[np.ndarray, np.ndarray]:
    """Dual norm of covectors ``f`` (shape ``(..., 2)``) and the maximizing polar angle."""
    F = np.asarray(f, dtype=float)
    shape = F.shape[:-1]
    F = F.reshape(-1, 2)
    theta, P = _grid(gauge)
    step = theta[1] - theta[0]
    values = np.empty(len(F))
    angles = np.empty(len(F))
    for start in range(0, len(F), _CHUNK):
        Fc = F[start : start + _CHUNK]
        H = Fc @ P.T
        k = np.argmax(H, axis=1)
        t0 = theta[k]
        lo, hi = t0 - step, t0 + step
        if gauge.smooth:
            t = _support_newton(gauge, Fc, t0.copy(), lo, hi)
            val = gauge(t) * np.einsum("ij,ij->i", Fc, unit(t))
        else:
            def h(tt, Fc=Fc):
                return gauge(tt) * np.einsum("ij,ij->i", Fc, unit(tt))

            t, val = golden_max(h, lo, hi, 80)
        grid_val = H[np.arange(len(Fc)), k]
        better = val >= grid_val
        values[start : start + _CHUNK] = np.where(better, val, grid_val)
        angles[start : start + _CHUNK] = np.where(better, t, t0)
    zero = ~np.any(F != 0, axis=1)
    values[zero] = 0.0
    return values.reshape(shape), np.remainder(angles, 2 * np.pi).reshape(shape)


def dual_norm(gauge: PolarGauge, f):
    """``sup { <f, x> : |x| <= 1 }``, by a 1024-angle sweep plus Newton refinement."""
    val, _ = dual_norm_argmax(gauge, f)
    return float(val) if np.ndim(val) == 0 else val


def exact_dual_profile(gauge: PolarGauge, phi) -> np.ndarray:
    """Polar profile of the dual ball: ``1 / |u(phi)|_*``."""
    return 1.0 / dual_norm(gauge, unit(np.asarray(phi, dtype=float)))


# -- dual gauge -------------------------------------------------------------


@dataclass(frozen=True)
class DualGauge:
    """Trig-polynomial fit of the dual profile, with its sup residual."""

    fit: TrigPolyGauge
    residual: float
    harmonics: int
    source: PolarGauge = field(repr=False, compare=False)

    def exact(self, phi):
        """The dual profile computed directly (no fit)."""
        return exact_dual_profile(self.source, phi)


def _design(phi: np.ndarray, m: int) -> np.ndarray:
    w = 2.0 * np.arange(1, m + 1)
    wt = np.multiply.outer(phi, w)
    return np.hstack([np.ones((len(phi), 1)), np.cos(wt), np.sin(wt)])


def dual_gauge(gauge: PolarGauge, m: int = 32) -> DualGauge:
    """Least-squares trig-polynomial fit (``m`` harmonics) of the dual profile.

    The fit uses ``4 m`` equally spaced samples on ``[0, pi)``; the reported
    residual is the sup error on those samples and on the interleaved
    midpoints.  Raises :class:`FitResidualTooLarge` only for smooth, strictly
    convex inputs, where the dual profile is analytic and a good fit is owed.
    """
    if m < 4:
        raise ValueError("dual_gauge needs m >= 4 harmonics")
    rep = require_norm(gauge)
    n = 4 * m
    phi = np.pi * np.arange(n) / n
    mid = phi + np.pi / (2 * n)
    y = exact_dual_profile(gauge, phi)
    A = _design(phi, m)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = max(
        float(np.max(np.abs(A @ coef - y))),
        float(np.max(np.abs(_design(mid, m) @ coef - exact_dual_profile(gauge, mid)))),
    )
    if gauge.smooth and rep.curvatureMargin > 1e-9 and res > FIT_TOL:
        raise FitResidualTooLarge(f"dual profile fit residual {res:.3g} with {m} harmonics")
    fit = TrigPolyGauge(coef[0], tuple(coef[1 : m + 1]), tuple(coef[m + 1 :]))
    return DualGauge(fit, res, m, gauge)


# -- Lipschitz estimation ---------------------------------------------------


@dataclass
class LipschitzEstimate:
    value: float
    witnessPair: tuple[np.ndarray, np.ndarray]
    sampleCount: int
    refined: bool
    witnessAngles: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        d: dict = {"value": self.value, "samples": self.sampleCount, "refined": self.refined}
        if self.witnessAngles is not None:
            d["witness"] = {"theta_x": self.witnessAngles[0], "theta_y": self.witnessAngles[1]}
        else:
            d["witness"] = {"x": [float(t) for t in self.witnessPair[0]],
                            "y": [float(t) for t in self.witnessPair[1]]}
        return d


def _pair_ratio(gauge: PolarGauge, tx, ty) -> np.ndarray:
    """``|J(x) - J(y)|_* / |x - y|`` for sphere points at polar angles ``tx, ty``."""
    tx, ty = np.atleast_1d(np.asarray(tx, float)), np.atleast_1d(np.asarray(ty, float))
    x, y = gauge.boundary(tx), gauge.boundary(ty)
    num = dual_norm(gauge, sphere_duality_map(gauge, tx) - sphere_duality_map(gauge, ty))
    den = gauge.norm(x - y)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > MIN_SEPARATION, num / den, 0.0)
    return out


def _ascent(gauge: PolarGauge, tx: float, ty: float, best: float, steps: int):
    h = np.pi / STRATA
    for _ in range(steps):
        cand = np.array([[tx + h, ty], [tx - h, ty], [tx, ty + h], [tx, ty - h]])
        sep = np.abs(np.remainder(cand[:, 0] - cand[:, 1] + np.pi, 2 * np.pi) - np.pi)
        vals = np.where(sep > MIN_SEPARATION, _pair_ratio(gauge, cand[:, 0], cand[:, 1]), -np.inf)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best = float(vals[k])
            tx, ty = float(cand[k, 0]), float(cand[k, 1])
        else:
            h *= 0.5
            if h < 1e-12:
                break
    return tx, ty, best


def duality_lipschitz(gauge: PolarGauge, samples: int = 10_000, seed: int = 0) -> LipschitzEstimate:
    """Estimate ``sup |J(x) - J(y)|_* / |x - y|`` over pairs of sphere points.

    Candidates: a jittered 64x64 stratification of angle pairs, all adjacent
    pairs of a 1024-angle grid and ``samples`` uniform random pairs.  The best
    stratified or adjacent pair is then polished by 200 steps of coordinate
    ascent with step halving; random pairs only ever raise the maximum, so the
    estimate is non-decreasing in ``samples`` for a fixed seed.
    """
    require_norm(gauge)
    if not gauge.smooth:
        raise KinkPoint(f"{gauge.kind} gauge has kinks; the duality map is not defined everywhere")
    key = ("lipschitz", int(samples), int(seed))
    if key not in gauge._cache:
        gauge._cache[key] = _lipschitz_search(gauge, samples, seed)
    return replace(gauge._cache[key])


def _lipschitz_search(gauge: PolarGauge, samples: int, seed: int) -> LipschitzEstimate:
    rng = make_rng(seed)
    two_pi = 2 * np.pi
    ij = np.stack(np.meshgrid(np.arange(STRATA), np.arange(STRATA), indexing="ij"), -1).reshape(-1, 2)
    strat = (ij + rng.random(ij.shape)) * (two_pi / STRATA)
    k = np.arange(ADJACENT)
    adj = np.stack([k, k + 1], -1) * (two_pi / ADJACENT)
    det = np.vstack([strat, adj])
    det_vals = _pair_ratio(gauge, det[:, 0], det[:, 1])
    i = int(np.argmax(det_vals))
    tx, ty, best = _ascent(gauge, det[i, 0], det[i, 1], float(det_vals[i]), ASCENT_STEPS)

    if samples > 0:
        rnd = rng.random((samples, 2)) * two_pi
        for start in range(0, samples, 8 * _CHUNK):
            chunk = rnd[start : start + 8 * _CHUNK]
            vals = _pair_ratio(gauge, chunk[:, 0], chunk[:, 1])
            j = int(np.argmax(vals))
            if vals[j] > best:
                best = float(vals[j])
                tx, ty = float(chunk[j, 0]), float(chunk[j, 1])

    tx, ty = float(np.remainder(tx, two_pi)), float(np.remainder(ty, two_pi))
    value = float(_pair_ratio(gauge, tx, ty)[0])
    return LipschitzEstimate(
        value=value,
        witnessPair=(gauge.boundary(tx), gauge.boundary(ty)),
        sampleCount=int(samples),
        refined=True,
        witnessAngles=(tx, ty),
    )


def contraction_defect(gauge: PolarGauge, samples: int = 10_000, seed: int = 0) -> LipschitzEstimate:
    """Lipschitz constant of ``J: S -> S*``; exceeds 1 exactly for non-Euclidean norms.

    Same computation as :func:`duality_lipschitz`.  A smooth planar norm
    admitting a contractive pairing-preserving map from the sphere to the dual
    sphere is Euclidean, so a value above ``1 + tol`` witnesses non-Euclidean
    geometry.
    """
    return duality_lipschitz(gauge, samples, seed)


def ratio_field(gauge: PolarGauge, strata: int = STRATA) -> tuple[np.ndarray, np.ndarray]:
    """Pair ratios on the cell-centred ``strata x strata`` angle grid (for CSV dumps)."""
    t = (np.arange(strata) + 0.5) * (2 * np.pi / strata)
    TX, TY = np.meshgrid(t, t, indexing="ij")
    vals = _pair_ratio(gauge, TX.ravel(), TY.ravel()).reshape(strata, strata)
    return t, vals


# -- inverse duality --------------------------------------------------------


def inverse_duality(gauge: PolarGauge, f, max_iter: int = 50) -> np.ndarray:
    """Solve ``J(x) = f`` by damped Newton iteration on the Hessian of ``|.|^2 / 2``.

    The starting point is the dual-norm maximizer scaled to ``|f|_*``, which is
    already the exact answer up to the angular resolution of that search.
    """
    f = _require_vector(f)
    if not gauge.smooth:
        raise KinkPoint(f"{gauge.kind} gauge has kinks; J is not invertible in closed form")
    require_norm(gauge)
    fn, t0 = dual_norm_argmax(gauge, f)
    x = float(fn) * gauge.boundary(float(t0))
    scale = max(1.0, float(np.hypot(*f)))

    def resid(z):
        return duality_map(gauge, z) - f

    r = resid(x)
    for _ in range(max_iter):
        H = hessian(gauge, x)
        if abs(np.linalg.det(H)) < 1e-14 * max(1.0, float(np.trace(H))) ** 2:
            raise SingularHessian("Hessian of |.|^2/2 is singular on the Newton path")
        rn = float(np.hypot(*r))
        if rn <= ROOT_TOL * scale:
            return x
        dx = np.linalg.solve(H, -r)
        lam = 1.0
        while lam > 1e-6:
            cand = x + lam * dx
            rc = resid(cand)
            if np.hypot(*rc) < rn:
                x, r = cand, rc
                break
            lam *= 0.5
        else:
            # no descent possible: either converged to rounding level or stuck
            if rn <= 1e3 * ROOT_TOL * scale:
                return x
            raise NewtonDiverged(f"inverse duality stalled at residual {rn:.3g}")
    if float(np.hypot(*r)) <= ROOT_TOL * scale:
        return x
    raise NewtonDiverged(f"inverse duality did not converge in {max_iter} iterations")

