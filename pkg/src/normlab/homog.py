"""Lipschitz bounds for homogeneous extensions and Taylor-growth diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from ._numerics import make_rng
from .convexity import require_norm
from .duality import dual_norm, duality_lipschitz, sphere_duality_map
from .errors import IllConditioned, KinkPoint, NotOnSphere
from .gauge import PolarGauge, _require_vector

__all__ = [
    "homog_bound",
    "global_homog_bound",
    "HomogCheck",
    "homog_extend_check",
    "TaylorReport",
    "taylor_diagnostic",
]

RICHARDSON_STEPS = (0.1, 0.05, 0.025)
TAYLOR_TOL = 1e-4


def _check_inputs(L, M, r, R):
    if L < 0 or M < 0:
        raise ValueError("L and M must be non-negative")
    if not 0 < r <= R:
        raise ValueError("need 0 < r <= R")


def homog_bound(L: float, M: float, alpha: float, r: float, R: float) -> float:
    """Lipschitz constant on ``r <= |z| <= R`` of the alpha-homogeneous extension of a sphere map.

    ``2 L max(r^a, R^a) / r + M |a| max(r^(a-1), R^(a-1))``, where ``L`` and
    ``M`` are the Lipschitz constant and sup norm on the sphere.  For ``a = 1``
    the global bound ``2 L + M`` also holds and the smaller value is returned.
    """
    _check_inputs(L, M, r, R)
    a = float(alpha)
    b = 2 * L * max(r**a, R**a) / r + M * abs(a) * max(r ** (a - 1), R ** (a - 1))
    if a == 1:
        b = min(b, global_homog_bound(L, M))
    return float(b)


def global_homog_bound(L: float, M: float) -> float:
    """Global Lipschitz bound ``2 L + M`` of the 1-homogeneous extension."""
    return float(2 * L + M)


@dataclass
class HomogCheck:
    L: float
    M: float
    alpha: float
    r: float
    R: float
    bound: float
    worstRatio: float
    passed: bool

    def to_dict(self) -> dict:
        return {"L": self.L, "M": self.M, "alpha": self.alpha, "r": self.r, "R": self.R,
                "bound": self.bound, "worstRatio": self.worstRatio, "pass": self.passed}


def _extension(gauge: PolarGauge, alpha: float, rad, theta) -> np.ndarray:
    # f(z) = |z|^alpha J(z / |z|), with z = rad * (unit sphere point at theta)
    return (rad**alpha)[..., None] * sphere_duality_map(gauge, theta)


def homog_extend_check(gauge: PolarGauge, alpha: float, r: float, R: float,
                       samples: int = 10_000, seed: int = 0) -> HomogCheck:
    """Sample the alpha-homogeneous extension of ``J`` on an annulus against :func:`homog_bound`.

    ``L`` is the sampled Lipschitz constant of ``J`` on the sphere and ``M``
    the largest sampled dual norm of ``J`` there.  Half the pairs are
    uniform in the annulus, half are close pairs probing the local slope.
    """
    if not gauge.smooth:
        raise KinkPoint(f"{gauge.kind} gauge has kinks; J is not defined everywhere")
    require_norm(gauge)
    _check_inputs(0.0, 0.0, r, R)
    L = duality_lipschitz(gauge, samples=2000, seed=seed).value
    grid = 2 * np.pi * np.arange(1024) / 1024
    M = float(np.max(dual_norm(gauge, sphere_duality_map(gauge, grid))))
    bound = homog_bound(L, M, alpha, r, R)

    rng = make_rng(seed)
    half = samples // 2
    ra, rb = rng.uniform(r, R, (2, samples))
    ta, tb = rng.uniform(0, 2 * np.pi, (2, samples))
    # close pairs: small radial and angular offsets kept inside the annulus
    rb[half:] = np.clip(ra[half:] * (1 + 1e-3 * rng.standard_normal(samples - half)), r, R)
    tb[half:] = ta[half:] + 1e-3 * rng.standard_normal(samples - half)
    x = ra[:, None] * gauge.boundary(ta)
    y = rb[:, None] * gauge.boundary(tb)
    num = dual_norm(gauge, _extension(gauge, alpha, ra, ta) - _extension(gauge, alpha, rb, tb))
    den = gauge.norm(x - y)
    ok = den > 1e-12
    worst = float(np.max(num[ok] / den[ok]))
    return HomogCheck(float(L), M, float(alpha), float(r), float(R), bound, worst,
                      bool(worst <= bound * (1 + 1e-9)))


# -- Taylor diagnostics -----------------------------------------------------


@dataclass
class TaylorReport:
    coeffs: list[float]
    residuals: list[float]
    ratioFit: dict
    radiusEstimate: float
    growthConstant: float

    def to_dict(self) -> dict:
        rad = self.radiusEstimate
        return {"coeffs": self.coeffs, "residuals": self.residuals, "ratioFit": self.ratioFit,
                "radiusEstimate": rad if np.isfinite(rad) else None,
                "growthConstant": self.growthConstant if np.isfinite(self.growthConstant) else None}


def _central_weights(k: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and weights of the smallest central stencil for the k-th derivative."""
    m = (k + 1) // 2
    j = np.arange(-m, m + 1, dtype=float)
    V = np.vander(j, increasing=True).T
    rhs = np.zeros(2 * m + 1)
    rhs[k] = factorial(k)
    return j, np.linalg.solve(V, rhs)


def _richardson(F, k: int, steps) -> tuple[float, float]:
    j, w = _central_weights(k)
    D = [float(w @ F(j * s)) / s**k for s in steps]
    # error expands in even powers of the step; steps halve each time
    T1 = [(4 * D[i + 1] - D[i]) / 3 for i in range(len(D) - 1)]
    T2 = (16 * T1[1] - T1[0]) / 15
    return T2, abs(T2 - T1[1])


def taylor_diagnostic(gauge: PolarGauge, x, h, max_order: int = 6) -> TaylorReport:
    """Taylor coefficients of ``t -> |x + t h|`` at 0 and a radius-of-convergence estimate.

    Derivatives come from central differences extrapolated over the steps
    (0.1, 0.05, 0.025), halved up to three times when the extrapolation
    residual stays large.  The radius is read off a Domb-Sykes fit: the
    ratios ``c_k / c_{k-s}`` are linear in ``1/k`` and extrapolate to
    ``rho^(-s)``, with ``s = 2`` when odd coefficients vanish.  Fewer than two
    usable ratios (a polynomial, say) give an infinite radius.
    """
    if not 0 <= max_order <= 6:
        raise ValueError("max_order must be between 0 and 6")
    if not gauge.smooth:
        raise KinkPoint(f"{gauge.kind} gauge is not analytic")
    x, h = _require_vector(x), _require_vector(h)
    for name, v in (("x", x), ("h", h)):
        if abs(float(gauge.norm(v)) - 1) > 1e-9:
            raise NotOnSphere(f"{name} must be a unit vector of the gauge norm")

    def F(t):
        return gauge.norm(x + np.multiply.outer(t, h))

    coeffs, resid = [float(F(np.zeros(1))[0])], [0.0]
    for k in range(1, max_order + 1):
        best = None
        for shrink in range(4):
            steps = tuple(s / 2**shrink for s in RICHARDSON_STEPS)
            d, e = _richardson(F, k, steps)
            c, ec = d / factorial(k), e / factorial(k)
            if best is None or ec < best[1]:
                best = (c, ec)
            if ec < 1e-9:
                break
        if best[1] > TAYLOR_TOL:
            raise IllConditioned(f"order-{k} extrapolation residual {best[1]:.3g} exceeds {TAYLOR_TOL:g}")
        coeffs.append(best[0])
        resid.append(best[1])

    c = np.array(coeffs)
    scale = np.max(np.abs(c))
    noise = max(1e-7 * scale, 10 * max(resid))
    odd = np.abs(c[1::2])
    s = 2 if odd.size and np.all(odd <= noise) else 1
    ks, rs = [], []
    for k in range(s, len(c)):
        if abs(c[k - s]) > noise and abs(c[k]) > noise:
            ks.append(1.0 / k)
            rs.append(c[k] / c[k - s])
    fit = {"stride": s, "points": len(ks), "intercept": None, "slope": None}
    rho, growth = np.inf, np.inf
    if len(ks) >= 2:
        slope, icpt = np.polyfit(ks, rs, 1)
        fit["intercept"], fit["slope"] = float(icpt), float(slope)
        if abs(icpt) > 1e-12:
            rho = float(abs(icpt) ** (-1.0 / s))
    if np.isfinite(rho):
        growth = float(np.max(np.abs(c) * rho ** np.arange(len(c))))
    return TaylorReport([float(v) for v in c], [float(v) for v in resid], fit, rho, growth)
