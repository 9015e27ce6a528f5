"""Planar norms given in polar form.

A gauge is a positive pi-periodic profile ``g``; the unit sphere of the norm is
the curve ``r = g(theta)`` and the norm itself is ``|v|_g = r / g(theta)``.
Three kinds are supported: even-harmonic trigonometric polynomials, the
``l_p`` profiles and the Euclidean (ellipse) profiles.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np

from .errors import KinkPoint, NonPositiveGauge, ParseError, ZeroVector

__all__ = [
    "PolarGauge",
    "TrigPolyGauge",
    "LpGauge",
    "EllipseGauge",
    "GaugeJet",
    "normalize_angle",
    "polar",
    "unit",
    "gauge_jet",
    "norm_eval",
    "sphere_sample",
    "gauge_parse",
    "gauge_dumps",
    "gauge_to_dict",
    "circle",
    "sin_power_gauge",
    "ellipse_from_quadratic",
    "quadratic_form",
    "rotate_gauge",
]

KINK_TOL = 1e-12
POSITIVITY_GRID = 4096


def normalize_angle(theta):
    """Map angles to the canonical interval (-pi, pi]."""
    t = np.remainder(np.asarray(theta, dtype=float) + np.pi, 2 * np.pi) - np.pi
    t = np.where(t <= -np.pi, np.pi, t)
    return float(t) if t.ndim == 0 else t


def polar(v) -> tuple[Any, Any]:
    """Return ``(r, theta)`` for one vector or a stack of shape ``(..., 2)``."""
    v = np.asarray(v, dtype=float)
    r = np.hypot(v[..., 0], v[..., 1])
    theta = normalize_angle(np.arctan2(v[..., 1], v[..., 0]))
    return r, theta


def unit(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


@dataclass(frozen=True)
class GaugeJet:
    theta: float
    g: float
    g1: float
    g2: float


class PolarGauge:
    """Common interface of the three gauge kinds.

    Subclasses provide ``_profile`` and ``_derivatives``; everything else is
    shared.  Instances are immutable and hashable, so results that only depend
    on the gauge can be cached.
    """

    kind: str = ""

    def __call__(self, theta):
        return self._profile(np.asarray(theta, dtype=float))

    # -- smoothness ---------------------------------------------------------
    @property
    def smooth(self) -> bool:
        """True when the profile is analytic at every angle."""
        return True

    def is_smooth_at(self, theta) -> np.ndarray:
        return np.ones(np.shape(theta), dtype=bool)

    def jet(self, theta, order: int = 2):
        """Return ``(g, g', g'')`` (arrays broadcasting like *theta*).

        Raises :class:`KinkPoint` if a derivative is requested at a point
        where the profile is not differentiable.
        """
        theta = np.asarray(theta, dtype=float)
        if order >= 1 and not np.all(self.is_smooth_at(theta)):
            bad = np.asarray(theta)[~self.is_smooth_at(theta)]
            raise KinkPoint(
                f"{self.kind} gauge is not differentiable at theta={float(np.ravel(bad)[0])!r}"
            )
        return self._derivatives(theta)

    # -- geometry -----------------------------------------------------------
    def norm(self, v):
        # the profile is 2 pi periodic, so the raw atan2 angle needs no wrapping
        v = np.asarray(v, dtype=float)
        return np.hypot(v[..., 0], v[..., 1]) / self._profile(np.arctan2(v[..., 1], v[..., 0]))

    def boundary(self, theta) -> np.ndarray:
        """Points ``g(theta) (cos theta, sin theta)`` of the unit sphere."""
        theta = np.asarray(theta, dtype=float)
        return np.asarray(self._profile(theta))[..., None] * unit(theta)

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _profile(self, theta: np.ndarray):
        raise NotImplementedError

    def _derivatives(self, theta: np.ndarray):
        raise NotImplementedError

    @cached_property
    def _cache(self) -> dict:
        # per-instance memo for expensive gauge-only results (validity, John ellipse)
        return {}


@dataclass(frozen=True)
class TrigPolyGauge(PolarGauge):
    """``g(theta) = a0 + sum_j cos[j] cos(2(j+1)theta) + sin[j] sin(2(j+1)theta)``."""

    a0: float
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()

    kind = "trigpoly"

    def __post_init__(self):
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "cos", tuple(float(c) for c in self.cos))
        object.__setattr__(self, "sin", tuple(float(s) for s in self.sin))
        vals = (self.a0, *self.cos, *self.sin)
        if not all(math.isfinite(x) for x in vals):
            raise ParseError("trig-polynomial coefficients must be finite")
        # certified positivity: grid minimum minus a Lipschitz padding over half a step
        theta = np.arange(POSITIVITY_GRID) * (np.pi / POSITIVITY_GRID)
        lip = float(np.sum(self._freqs * np.hypot(self._c, self._s)))
        low = float(np.min(self._profile(theta))) - lip * np.pi / (2 * POSITIVITY_GRID)
        if low <= 0:
            raise NonPositiveGauge(f"trig-polynomial gauge is not positive (lower bound {low:.3g})")

    @cached_property
    def _nharm(self) -> int:
        return max(len(self.cos), len(self.sin))

    @cached_property
    def _freqs(self) -> np.ndarray:
        return 2.0 * np.arange(1, self._nharm + 1)

    @cached_property
    def _c(self) -> np.ndarray:
        c = np.zeros(self._nharm)
        c[: len(self.cos)] = self.cos
        return c

    @cached_property
    def _s(self) -> np.ndarray:
        s = np.zeros(self._nharm)
        s[: len(self.sin)] = self.sin
        return s

    def _profile(self, theta):
        if self._nharm == 0:
            return np.full(np.shape(theta), self.a0) if np.ndim(theta) else self.a0
        wt = np.multiply.outer(theta, self._freqs)
        return self.a0 + np.cos(wt) @ self._c + np.sin(wt) @ self._s

    def _derivatives(self, theta):
        if self._nharm == 0:
            z = np.zeros(np.shape(theta))
            return z + self.a0, z, z.copy()
        w = self._freqs
        wt = np.multiply.outer(theta, w)
        cw, sw = np.cos(wt), np.sin(wt)
        g = self.a0 + cw @ self._c + sw @ self._s
        g1 = cw @ (w * self._s) - sw @ (w * self._c)
        g2 = -(cw @ (w * w * self._c) + sw @ (w * w * self._s))
        return g, g1, g2

    def to_dict(self) -> dict:
        return {"kind": "trigpoly", "a0": self.a0, "cos": list(self.cos), "sin": list(self.sin)}


def _is_even_integer(p: float) -> bool:
    return float(p).is_integer() and int(p) % 2 == 0


@dataclass(frozen=True)
class LpGauge(PolarGauge):
    """The unit sphere of ``l_p^2``: ``g = (|cos|^p + |sin|^p)^(-1/p)``."""

    p: float

    kind = "lp"

    def __post_init__(self):
        object.__setattr__(self, "p", float(self.p))
        if not (self.p > 1 and math.isfinite(self.p)):
            raise ParseError(f"l_p gauge needs 1 < p < inf, got {self.p}")

    @property
    def smooth(self) -> bool:
        return _is_even_integer(self.p)

    def is_smooth_at(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.smooth:
            return np.ones(theta.shape, dtype=bool)
        q = np.pi / 2
        return np.abs(theta - q * np.round(theta / q)) > KINK_TOL

    def _scaled(self, theta):
        c, s = np.cos(theta), np.sin(theta)
        ac, as_ = np.abs(c), np.abs(s)
        m = np.maximum(ac, as_)
        a, b = ac / m, as_ / m
        return c, s, m, a, b

    def _profile(self, theta):
        _, _, m, a, b = self._scaled(theta)
        p = self.p
        return 1.0 / (m * (a**p + b**p) ** (1.0 / p))

    def _derivatives(self, theta):
        p = self.p
        c, s, m, a, b = self._scaled(theta)
        denom = a**p + b**p
        g = 1.0 / (m * denom ** (1.0 / p))
        with np.errstate(divide="ignore", invalid="ignore"):
            ap2, bp2 = a ** (p - 2), b ** (p - 2)
            m2 = m * m
            # F = |cos|^p + |sin|^p; f1 = F'/F, f2 = F''/F, all rescaled by max(|cos|, |sin|)
            f1 = p * c * s * (bp2 - ap2) / (m2 * denom)
            f2 = (-p * ap2 * (c * c - (p - 1) * s * s) + p * bp2 * ((p - 1) * c * c - s * s)) / (
                m2 * denom
            )
        g1 = -g * f1 / p
        g2 = g * ((1.0 / p) * (1.0 / p + 1.0) * f1 * f1 - f2 / p)
        return g, g1, g2

    def norm(self, v):
        a = np.abs(np.asarray(v, dtype=float))
        m = np.maximum(a[..., 0], a[..., 1])
        safe = np.where(m > 0, m, 1.0)
        p = self.p
        return m * ((a[..., 0] / safe) ** p + (a[..., 1] / safe) ** p) ** (1.0 / p)

    def to_dict(self) -> dict:
        return {"kind": "lp", "p": self.p}


@dataclass(frozen=True)
class EllipseGauge(PolarGauge):
    """Euclidean profile ``g = b / sqrt(1 - e^2 cos^2(theta - theta0))``."""

    b: float
    e: float
    theta0: float = 0.0

    kind = "ellipse"

    def __post_init__(self):
        for name in ("b", "e", "theta0"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.b > 0 and math.isfinite(self.b)):
            raise NonPositiveGauge(f"ellipse gauge needs b > 0, got {self.b}")
        if not (0 <= self.e < 1):
            raise ParseError(f"ellipse gauge needs 0 <= e < 1, got {self.e}")
        if not math.isfinite(self.theta0):
            raise ParseError("theta0 must be finite")

    def _profile(self, theta):
        e2 = self.e * self.e
        return self.b / np.sqrt(1.0 - e2 * np.cos(theta - self.theta0) ** 2)

    def _derivatives(self, theta):
        e2 = self.e * self.e
        phi = theta - self.theta0
        d = 1.0 - e2 * np.cos(phi) ** 2
        d1 = e2 * np.sin(2 * phi) / d
        d2 = 2 * e2 * np.cos(2 * phi) / d
        g = self.b / np.sqrt(d)
        return g, -0.5 * g * d1, g * (0.75 * d1 * d1 - 0.5 * d2)

    def to_dict(self) -> dict:
        return {"kind": "ellipse", "b": self.b, "e": self.e, "theta0": self.theta0}


# -- operations -------------------------------------------------------------


def gauge_jet(gauge: PolarGauge, theta: float) -> GaugeJet:
    g, g1, g2 = gauge.jet(float(theta))
    return GaugeJet(float(theta), float(g), float(g1), float(g2))


def norm_eval(gauge: PolarGauge, v):
    """``|v|_g``; works on a single vector or a stack of shape ``(..., 2)``."""
    out = gauge.norm(v)
    return float(out) if np.ndim(out) == 0 else out


def sphere_sample(gauge: PolarGauge, n: int) -> np.ndarray:
    """``n`` unit-sphere points at equally spaced polar angles, shape ``(n, 2)``."""
    if n < 3:
        raise ValueError("sphere_sample needs n >= 3")
    return gauge.boundary(2 * np.pi * np.arange(n) / n)


def _require_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (2,):
        raise ValueError(f"expected a planar vector, got shape {v.shape}")
    if v[0] == 0 and v[1] == 0:
        raise ZeroVector("operation undefined at the origin")
    return v


# -- (de)serialization -----------------------------------------------------


def _num(doc: dict, key: str) -> float:
    if key not in doc:
        raise ParseError(f"missing field {key!r}")
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ParseError(f"field {key!r} must be a number")
    return float(val)


def _numlist(doc: dict, key: str) -> tuple[float, ...]:
    val = doc.get(key, [])
    if not isinstance(val, list) or any(
        isinstance(x, bool) or not isinstance(x, (int, float)) for x in val
    ):
        raise ParseError(f"field {key!r} must be a list of numbers")
    return tuple(float(x) for x in val)


def gauge_parse(text) -> PolarGauge:
    """Build a gauge from a JSON document (string, bytes or already-parsed dict)."""
    if isinstance(text, (str, bytes)):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from exc
    else:
        doc = text
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ParseError("gauge document must be an object with a 'kind' field")
    kind = doc["kind"]
    if kind == "trigpoly":
        return TrigPolyGauge(_num(doc, "a0"), _numlist(doc, "cos"), _numlist(doc, "sin"))
    if kind == "lp":
        return LpGauge(_num(doc, "p"))
    if kind == "ellipse":
        return EllipseGauge(_num(doc, "b"), _num(doc, "e"), _num(doc, "theta0"))
    raise ParseError(f"unknown gauge kind {kind!r}")


def gauge_to_dict(gauge: PolarGauge) -> dict:
    return gauge.to_dict()


def gauge_dumps(gauge: PolarGauge) -> str:
    return json.dumps(gauge.to_dict(), sort_keys=True)


# -- constructors -----------------------------------------------------------


def circle(radius: float = 1.0) -> TrigPolyGauge:
    return TrigPolyGauge(radius)


def sin_power_gauge(eps: float, k: int, n: int, base: float = 1.0) -> TrigPolyGauge:
    """``g = base + eps * sin(n theta)^k`` rewritten as an even-harmonic trig polynomial.

    Uses the binomial expansion of ``((e^{ix} - e^{-ix}) / 2i)^k``.  Only
    ``(k, n)`` with ``n*k`` even give a pi-periodic profile.
    """
    if k < 1 or n < 1:
        raise ValueError("k and n must be positive integers")
    harm: dict[int, complex] = {}
    for j in range(k + 1):
        f = k - 2 * j
        harm[f] = harm.get(f, 0) + math.comb(k, j) * (-1) ** j / (2j) ** k
    a0 = base + eps * harm.get(0, 0).real
    cos: dict[int, float] = {}
    sin: dict[int, float] = {}
    for f, cf in harm.items():
        if f <= 0:
            continue
        freq = f * n
        cc, ss = 2 * cf.real * eps, -2 * cf.imag * eps
        if abs(cc) < 1e-15 and abs(ss) < 1e-15:
            continue
        if freq % 2:
            raise ValueError(f"sin^{k}({n} theta) is not pi-periodic")
        cos[freq // 2] = cos.get(freq // 2, 0.0) + cc
        sin[freq // 2] = sin.get(freq // 2, 0.0) + ss
    nh = max([*cos, *sin, 0])
    return TrigPolyGauge(
        a0,
        tuple(cos.get(i, 0.0) for i in range(1, nh + 1)),
        tuple(sin.get(i, 0.0) for i in range(1, nh + 1)),
    )


def ellipse_from_quadratic(A) -> EllipseGauge:
    """Gauge of the norm ``sqrt(x^T A x)`` for a symmetric positive-definite ``A``."""
    A = np.asarray(A, dtype=float)
    A = 0.5 * (A + A.T)
    lam, vec = np.linalg.eigh(A)
    if lam[0] <= 0:
        raise NonPositiveGauge("quadratic form is not positive definite")
    # u^T A u = lam_max (1 - e^2 cos^2(theta - theta_min))
    e2 = 1.0 - lam[0] / lam[1]
    theta0 = math.atan2(vec[1, 0], vec[0, 0])
    return EllipseGauge(1.0 / math.sqrt(lam[1]), math.sqrt(max(e2, 0.0)), theta0)


def quadratic_form(gauge: EllipseGauge) -> np.ndarray:
    """The matrix ``A`` with ``|v|_g^2 = v^T A v``."""
    u0 = np.array([math.cos(gauge.theta0), math.sin(gauge.theta0)])
    return (np.eye(2) - gauge.e**2 * np.outer(u0, u0)) / gauge.b**2


def rotate_gauge(gauge: PolarGauge, alpha: float) -> PolarGauge:
    """The gauge of the unit ball rotated by *alpha*: ``g_new(theta) = g(theta - alpha)``."""
    if isinstance(gauge, EllipseGauge):
        return EllipseGauge(gauge.b, gauge.e, gauge.theta0 + alpha)
    if isinstance(gauge, TrigPolyGauge):
        w = 2.0 * np.arange(1, gauge._nharm + 1)
        ca, sa = np.cos(w * alpha), np.sin(w * alpha)
        c, s = gauge._c, gauge._s
        return TrigPolyGauge(gauge.a0, tuple(c * ca - s * sa), tuple(s * ca + c * sa))
    raise TypeError(f"cannot rotate a {gauge.kind} gauge in closed form")
