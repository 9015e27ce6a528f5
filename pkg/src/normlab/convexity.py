"""Convexity certificates for polar gauges.

The authoritative test is the sign of the polar curvature numerator
``g^2 + 2 g'^2 - g g''``.  The two classical sufficient conditions (a) and (b)
are evaluated alongside it and reported verbatim.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from ._numerics import golden_min
from .errors import NotANorm
from .gauge import PolarGauge, _require_vector, polar

__all__ = [
    "ValidityReport",
    "curvature_numerator",
    "check_condition_a",
    "check_condition_b",
    "validate",
    "require_norm",
    "hessian",
    "hessian_polar",
    "margin_table",
]

IS_NORM_TOL = -1e-9
GOLDEN_STEPS = 60


def _cond_a(g, g1, g2):
    return g - g1 * g1 - g * g2


def _cond_b(g, g1, g2):
    return g2 * g - 4 * g1 * g1 + g * g


def _kappa(g, g1, g2):
    return g * g + 2 * g1 * g1 - g * g2


_MARGINS = {"condA": _cond_a, "condB": _cond_b, "curvature": _kappa}


@dataclass
class ValidityReport:
    gridSize: int
    condAMargin: float
    condBMargin: float
    curvatureMargin: float
    isNorm: bool
    argminAngles: tuple[float, float, float]
    # angles dropped from the sweep because the profile has a kink there
    kinkAngles: list[float] = field(default_factory=list, compare=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("kinkAngles")
        d["argminAngles"] = list(self.argminAngles)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def curvature_numerator(gauge: PolarGauge, theta):
    """``g^2 + 2 g'^2 - g g''``; same sign as the curvature of ``r = g(theta)``."""
    out = _kappa(*gauge.jet(theta))
    return float(out) if np.ndim(out) == 0 else out


def _grid(gauge: PolarGauge, grid_size: int):
    theta = np.arange(grid_size) * (np.pi / grid_size)
    ok = gauge.is_smooth_at(theta)
    return theta, ok


def _refined_min(gauge: PolarGauge, expr, grid_size: int) -> tuple[float, float]:
    theta, ok = _grid(gauge, grid_size)
    th = theta[ok]
    vals = expr(*gauge.jet(th))
    i = int(np.argmin(vals))
    step = np.pi / grid_size
    lo, hi = th[i] - step, th[i] + step
    if not gauge.smooth:
        # keep the bracket off the kinks at multiples of pi/2
        q = np.pi / 2
        k_lo = np.floor(th[i] / q) * q
        lo, hi = max(lo, k_lo + 1e-9), min(hi, k_lo + q - 1e-9)

    def f(t):
        return expr(*gauge.jet(t))

    x, fx = golden_min(f, lo, hi, GOLDEN_STEPS)
    if fx < vals[i]:
        return float(fx), float(np.remainder(x, np.pi))
    return float(vals[i]), float(th[i])


def _check_grid(grid_size: int):
    if grid_size < 64:
        raise ValueError("gridSize must be at least 64")


def check_condition_a(gauge: PolarGauge, grid_size: int = 1024) -> float:
    """Minimum of ``g - g'^2 - g g''`` (positive means condition (a) holds)."""
    _check_grid(grid_size)
    return _refined_min(gauge, _cond_a, grid_size)[0]


def check_condition_b(gauge: PolarGauge, grid_size: int = 1024) -> float:
    """Minimum of ``g'' g - 4 g'^2 + g^2`` (positive means condition (b) holds)."""
    _check_grid(grid_size)
    return _refined_min(gauge, _cond_b, grid_size)[0]


def validate(gauge: PolarGauge, grid_size: int = 1024) -> ValidityReport:
    """Sweep all three margins over ``[0, pi)`` and decide whether the gauge is a norm.

    Kinked angles (``l_p`` with ``p`` not even, at the axes) are excluded from
    the sweep and listed in ``kinkAngles``.
    """
    _check_grid(grid_size)
    (a, ta), (b, tb), (k, tk) = (_refined_min(gauge, e, grid_size) for e in _MARGINS.values())
    theta, ok = _grid(gauge, grid_size)
    return ValidityReport(
        gridSize=grid_size,
        condAMargin=a,
        condBMargin=b,
        curvatureMargin=k,
        isNorm=k >= IS_NORM_TOL,
        argminAngles=(ta, tb, tk),
        kinkAngles=[float(t) for t in theta[~ok]],
    )


def require_norm(gauge: PolarGauge) -> ValidityReport:
    """Cached :func:`validate`; raises :class:`NotANorm` on failure."""
    rep = gauge._cache.get("validity")
    if rep is None:
        rep = gauge._cache["validity"] = validate(gauge, 1024)
    if not rep.isNorm:
        raise NotANorm(
            f"curvature numerator reaches {rep.curvatureMargin:.3g} at theta={rep.argminAngles[2]:.6f}"
        )
    return rep


def margin_table(gauge: PolarGauge, grid_size: int = 1024) -> str:
    """CSV of the three margin expressions at every smooth grid angle."""
    theta, ok = _grid(gauge, grid_size)
    th = theta[ok]
    jet = gauge.jet(th)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "condA", "condB", "curvature"])
    for row in zip(th, _cond_a(*jet), _cond_b(*jet), _kappa(*jet)):
        w.writerow([f"{x:.12g}" for x in row])
    return buf.getvalue()


def hessian_polar(g, g1, g2) -> np.ndarray:
    """Hessian of ``phi = |x|^2 / 2`` in the orthonormal frame ``(e_r, e_theta)``.

    It is 0-homogeneous, so only the jet at the polar angle matters.
    """
    g = np.asarray(g, dtype=float)
    h_rr = 1.0 / g**2
    h_rt = -g1 / g**3
    h_tt = 1.0 / g**2 - g2 / g**3 + 3.0 * g1**2 / g**4
    return np.stack([np.stack([h_rr, h_rt], -1), np.stack([h_rt, h_tt], -1)], -2)


def hessian(gauge: PolarGauge, v) -> np.ndarray:
    """Cartesian Hessian of ``phi(x) = |x|_g^2 / 2`` at ``v != 0``."""
    v = _require_vector(v)
    _, theta = polar(v)
    g, g1, g2 = gauge.jet(theta)
    hp = hessian_polar(g, g1, g2)
    c, s = np.cos(theta), np.sin(theta)
    R = np.array([[c, -s], [s, c]])
    return R @ hp @ R.T

