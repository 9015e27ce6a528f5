"""John ellipses, contact sets, tangent inner/outer ellipses and contraction certificates.

Every ellipse here is centred and stored as an SPD shape matrix ``M`` with
``E = M (unit disc)``.  Points of ``E`` are pulled back to the disc by
``M^{-1}``; the *parameter angle* of a boundary point ``M u(phi)`` is ``phi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ._numerics import make_rng, periodic_max
from .convexity import hessian, require_norm
from .duality import duality_map
from .errors import (
    CertificateFailed,
    KinkPoint,
    NoInnerEllipsoid,
    NoOuterEllipsoid,
    NotInscribed,
    SolverStalled,
)
from .gauge import PolarGauge, _require_vector, polar, unit

__all__ = [
    "Ellipsoid",
    "ContactSet",
    "ClosureReport",
    "ContractionCertificate",
    "john_ellipse",
    "max_gauge_on_ellipse",
    "contact_set",
    "sigma_bisector_closure",
    "inner_ellipsoid_at",
    "outer_ellipsoid_at",
    "verify_inner",
    "verify_outer",
    "st_certificate",
]

CONTACT_GRID = 2048
INCLUSION_GRID = 8192
RECHECK_GRID = 2**16
INCLUSION_MARGIN = 1e-9
B_MIN, B_MAX = 1e-6, 1e6
BISECTIONS = 40
CERT_SAMPLES = 10_000
CERT_TOL = 1e-7


@dataclass(frozen=True)
class Ellipsoid:
    shape: np.ndarray
    b: float | None = field(default=None, compare=False)

    def __post_init__(self):
        M = np.array(self.shape, dtype=float).reshape(2, 2)
        M = 0.5 * (M + M.T)
        if np.linalg.eigvalsh(M)[0] <= 1e-12:
            raise ValueError("ellipsoid shape must be symmetric positive definite")
        M.setflags(write=False)
        object.__setattr__(self, "shape", M)

    @classmethod
    def from_frame(cls, L, b: float | None = None) -> "Ellipsoid":
        """The ellipse ``L (unit disc)`` for any invertible ``L``, as its SPD shape."""
        L = np.asarray(L, dtype=float)
        w, V = np.linalg.eigh(L @ L.T)
        return cls((V * np.sqrt(w)) @ V.T, b)

    @property
    def area(self) -> float:
        return float(np.pi * np.linalg.det(self.shape))

    @property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.shape)

    def norm(self, v) -> np.ndarray:
        """Euclidean norm whose unit ball is this ellipse."""
        z = np.asarray(v, dtype=float) @ self.inverse.T
        return np.hypot(z[..., 0], z[..., 1])

    def contains(self, v, tol: float = 0.0):
        return self.norm(v) <= 1.0 + tol

    def boundary(self, phi) -> np.ndarray:
        return unit(np.asarray(phi, dtype=float)) @ self.shape.T

    def to_dict(self) -> dict:
        M = self.shape
        d = {"m11": float(M[0, 0]), "m12": float(M[0, 1]), "m22": float(M[1, 1])}
        if self.b is not None:
            d["b"] = float(self.b)
        return d


def max_gauge_on_ellipse(gauge: PolarGauge, M, n: int = 256, steps: int = 50) -> tuple[float, float]:
    """``max_phi |M u(phi)|_X`` and its parameter angle, by grid plus golden polish."""
    M = np.asarray(M, dtype=float)
    phi, val = periodic_max(lambda t: gauge.norm(unit(t) @ M.T), n, np.pi, top=4, steps=steps)
    return val, phi


# -- John ellipse -----------------------------------------------------------


def _traceless_exp(a: float, c: float) -> np.ndarray:
    """``expm([[a, c], [c, -a]])`` in closed form; determinant one."""
    rho = np.hypot(a, c)
    sh = np.sinh(rho) / rho if rho > 1e-300 else 1.0
    ch = np.cosh(rho)
    return np.array([[ch + sh * a, sh * c], [sh * c, ch - sh * a]])


def _moment_start(gauge: PolarGauge) -> np.ndarray:
    th = np.arange(256) * (np.pi / 256)
    P = gauge.boundary(th)
    C = P.T @ P / len(th)
    w, V = np.linalg.eigh(C)
    # log of the determinant-one square root of C, written as (a, c)
    L = (V * (0.5 * np.log(w / np.sqrt(w[0] * w[1])))) @ V.T
    return np.array([L[0, 0], L[0, 1]])


def john_ellipse(gauge: PolarGauge, m: int = 256) -> Ellipsoid:
    """Maximal-area centred ellipse inside the unit ball.

    Area is scale-free after normalising by the constraint ``c(M) = max_phi
    |M u(phi)|_X``, so the problem reduces to minimising ``log c`` over
    determinant-one shapes ``expm([[a, c], [c, -a]])``; a Nelder-Mead search
    handles the non-smooth max.  The result is rescaled by ``1 / c`` so that
    it touches the sphere.
    """
    if m < 256:
        raise ValueError("john_ellipse needs m >= 256 boundary samples")
    key = ("john", m)
    if key in gauge._cache:
        return gauge._cache[key]
    require_norm(gauge)

    def objective(p):
        # 32 golden steps already pin the max to ~1e-16 relative
        return np.log(max_gauge_on_ellipse(gauge, _traceless_exp(*p), m, 32)[0])

    opts = {"xatol": 1e-9, "fatol": 1e-14, "maxiter": 4000}
    x0 = _moment_start(gauge)
    best = minimize(objective, x0, method="Nelder-Mead",
                    options={**opts, "initial_simplex": x0 + np.array([[0, 0], [0.05, 0], [0, 0.05]])})
    # restart from the best point with a small simplex to shake off a premature collapse
    x0 = best.x
    res = minimize(objective, x0, method="Nelder-Mead",
                   options={**opts, "initial_simplex": x0 + np.array([[0, 0], [1e-4, 0], [0, 1e-4]])})
    if res.fun <= best.fun:
        best = res
    if not best.success:
        raise SolverStalled(f"John ellipse search did not converge: {best.message}")
    S = _traceless_exp(*best.x)
    c, _ = max_gauge_on_ellipse(gauge, S, m)
    E = Ellipsoid(S / c)
    gauge._cache[key] = E
    return E


# -- contact set and bisector closure ---------------------------------------


@dataclass(frozen=True)
class ContactSet:
    angles: tuple[float, ...]
    tol: float
    arcs: tuple[tuple[float, float], ...] = ()
    full: bool = False

    def to_dict(self) -> dict:
        return {"angles": list(self.angles), "tol": self.tol,
                "arcs": [list(a) for a in self.arcs], "full": self.full}


def contact_set(gauge: PolarGauge, e: Ellipsoid, tol: float = 1e-6) -> ContactSet:
    """Parameter angles (mod pi) where ``|M u(phi)|_X >= 1 - tol``.

    Runs of contact grid points become arcs; short runs are represented by
    their refined maximizer, longer ones by their midpoint.  A run covering
    the whole grid is full contact, the arc ``[0, pi)``.
    """
    M = e.shape
    n = CONTACT_GRID
    h = np.pi / n
    phi = np.arange(n) * h

    def f(t):
        return gauge.norm(unit(t) @ M.T)

    v = f(phi)
    if v.max() > 1 + tol:
        raise NotInscribed(f"ellipse pokes out of the unit ball by {v.max() - 1:.3g}")
    hit = v >= 1 - tol
    if hit.all():
        return ContactSet((), tol, ((0.0, float(np.pi)),), True)
    if not hit.any():
        return ContactSet((), tol)
    # rotate so the grid starts outside a run, then split into runs
    s = int(np.argmin(hit))
    order = (np.arange(n) + s) % n
    runs, cur = [], []
    for i in order:
        if hit[i]:
            cur.append(i)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)
    angles, arcs = [], []
    for run in runs:
        lo = phi[run[0]]
        hi = lo + h * (len(run) - 1)
        if len(run) <= 3:
            t, _ = periodic_max(lambda t: f(t + lo - h), 4 * (len(run) + 1), h * (len(run) + 1), top=1)
            rep = t + lo - h
        else:
            rep = 0.5 * (lo + hi)
        angles.append(float(np.remainder(rep, np.pi)))
        arcs.append((float(lo), float(np.remainder(hi, np.pi))))
    idx = np.argsort(angles)
    return ContactSet(tuple(angles[i] for i in idx), tol, tuple(arcs[i] for i in idx))


@dataclass(frozen=True)
class ClosureReport:
    closed: bool
    ellipse: Ellipsoid
    contacts: ContactSet
    witness: tuple[float, float] | None = None
    bisector: float | None = None

    def to_dict(self) -> dict:
        d = {"closed": self.closed, "john": self.ellipse.to_dict(), "contacts": self.contacts.to_dict()}
        if self.witness is not None:
            M = self.ellipse.shape
            x, y = (unit(t) @ M.T for t in self.witness)
            d["witness"] = {"phi_x": self.witness[0], "phi_y": self.witness[1],
                            "x": x.tolist(), "y": y.tolist(), "bisector_phi": self.bisector}
        return d


def sigma_bisector_closure(gauge: PolarGauge, tol: float = 1e-6) -> ClosureReport:
    """Is the John contact set closed under normalized bisectors?

    For contacts ``x = M u(a)`` and ``y = M u(b)`` the E-normalized bisectors
    of ``x, y`` and ``x, -y`` are ``M u((a+b)/2)`` and ``M u((a+b+pi)/2)``.
    Any bisector off the contact set is returned as the witness pair.
    """
    require_norm(gauge)
    E = john_ellipse(gauge)
    cs = contact_set(gauge, E, tol)
    if cs.full:
        return ClosureReport(True, E, cs)
    M = E.shape
    ang = cs.angles
    for i in range(len(ang)):
        for j in range(i + 1, len(ang)):
            for bis in (0.5 * (ang[i] + ang[j]), 0.5 * (ang[i] + ang[j] + np.pi)):
                if gauge.norm(unit(bis) @ M.T) < 1 - tol:
                    return ClosureReport(False, E, cs, (ang[i], ang[j]), float(np.remainder(bis, np.pi)))
    # a single contact pair cannot carry the John decomposition of the identity
    return ClosureReport(len(ang) >= 2, E, cs)


# -- tangent ellipses E_b ---------------------------------------------------


def _tangent_frame(gauge: PolarGauge, x):
    """Unit ``x`` and the kernel direction of ``J(x)``, normalised in the John metric."""
    x = _require_vector(x)
    _, th = polar(x)
    if not gauge.is_smooth_at(th):
        raise KinkPoint(f"{gauge.kind} gauge has a kink at theta={float(th)!r}")
    require_norm(gauge)
    x = x / gauge.norm(x)
    J = duality_map(gauge, x)
    Mi = john_ellipse(gauge).inverse
    k = np.array([-J[1], J[0]])
    k = k * (np.hypot(*(Mi @ x)) / np.hypot(*(Mi @ k)))
    h = float(k @ hessian(gauge, x) @ k)
    return x, k, h


def _inner_gap(gauge: PolarGauge, L, n: int) -> float:
    return periodic_max(lambda t: gauge.norm(unit(t) @ L.T), n, np.pi)[1]


def _outer_gap(gauge: PolarGauge, L, n: int) -> float:
    Li = np.linalg.inv(L)

    def f(t):
        z = gauge.boundary(t) @ Li.T
        return np.hypot(z[..., 0], z[..., 1])

    return periodic_max(f, n, np.pi)[1]


def _b_search(gauge: PolarGauge, x, inner: bool) -> Ellipsoid:
    x, k, h = _tangent_frame(gauge, x)

    def frame(b):
        return np.column_stack([x, k / b])

    def ok(b):
        # second-order contact at x: the ball's tangent curvature in this frame is h
        if inner and b * b < h * (1 - 1e-9):
            return False
        if not inner and b * b > h * (1 + 1e-9):
            return False
        gap = _inner_gap if inner else _outer_gap
        return gap(gauge, frame(b), INCLUSION_GRID) <= 1 + INCLUSION_MARGIN

    # ok(b) is monotone: increasing in b for inner ellipses, decreasing for outer
    if inner:
        if ok(1.0):
            hi, lo = 1.0, 0.5
            while ok(lo) and lo > B_MIN:
                hi, lo = lo, lo / 2
        else:
            lo, hi = 1.0, 2.0
            while not ok(hi):
                lo, hi = hi, hi * 2
                if hi > B_MAX:
                    raise NoInnerEllipsoid(f"no inscribed ellipse tangent at x up to b={B_MAX:g}")
        for _ in range(BISECTIONS):
            mid = np.sqrt(lo * hi)
            lo, hi = (lo, mid) if ok(mid) else (mid, hi)
        b = hi
    else:
        if ok(1.0):
            lo, hi = 1.0, 2.0
            while ok(hi) and hi < B_MAX:
                lo, hi = hi, hi * 2
        else:
            hi, lo = 1.0, 0.5
            while not ok(lo):
                hi, lo = lo, lo / 2
                if lo < B_MIN:
                    raise NoOuterEllipsoid(f"no enclosing ellipse tangent at x down to b={B_MIN:g}")
        for _ in range(BISECTIONS):
            mid = np.sqrt(lo * hi)
            lo, hi = (mid, hi) if ok(mid) else (lo, mid)
        b = lo
    return Ellipsoid.from_frame(frame(b), b)


def inner_ellipsoid_at(gauge: PolarGauge, x) -> Ellipsoid:
    """Ellipse ``E_b`` inside the unit ball and tangent to it at ``x / |x|``.

    ``E_b`` is the unit ball of ``|t x + s k| = sqrt(t^2 + b^2 s^2)`` where ``k``
    spans ``ker J(x)`` with unit length in the John metric scaled so
    ``|x| = 1``; the returned ``b`` is near-minimal.
    """
    return _b_search(gauge, x, inner=True)


def outer_ellipsoid_at(gauge: PolarGauge, x) -> Ellipsoid:
    """Ellipse ``E_b`` containing the unit ball and tangent to it at ``x / |x|`` (b near-maximal)."""
    return _b_search(gauge, x, inner=False)


def verify_inner(gauge: PolarGauge, e: Ellipsoid, n: int = RECHECK_GRID, margin: float = INCLUSION_MARGIN) -> bool:
    """Plain dense-sample check that ``e`` lies in the unit ball."""
    t = np.arange(n) * (2 * np.pi / n)
    return bool(np.max(gauge.norm(e.boundary(t))) <= 1 + margin)


def verify_outer(gauge: PolarGauge, e: Ellipsoid, n: int = RECHECK_GRID, margin: float = INCLUSION_MARGIN) -> bool:
    """Plain dense-sample check that the unit sphere lies in ``e``."""
    t = np.arange(n) * (2 * np.pi / n)
    return bool(np.max(e.norm(gauge.boundary(t))) <= 1 + margin)


# -- contraction certificates -----------------------------------------------


@dataclass(frozen=True)
class ContractionCertificate:
    T: np.ndarray
    source: np.ndarray
    target: np.ndarray
    outer: Ellipsoid
    inner: Ellipsoid
    maxSampledNorm: float
    sampleCount: int

    def to_dict(self) -> dict:
        return {
            "T": [float(v) for v in self.T.ravel()],
            "source": self.source.tolist(),
            "target": self.target.tolist(),
            "outer": self.outer.to_dict(),
            "inner": self.inner.to_dict(),
            "maxSampledNorm": self.maxSampledNorm,
            "sampleCount": self.sampleCount,
            "mapResidual": float(np.hypot(*(self.T @ self.source - self.target))),
        }


def sampled_operator_norm(gauge: PolarGauge, T, n: int = CERT_SAMPLES) -> float:
    """``max |T s|_X`` over ``n`` equally spaced sphere points ``s``."""
    t = np.arange(n) * (2 * np.pi / n)
    return float(np.max(gauge.norm(gauge.boundary(t) @ np.asarray(T).T)))


def st_certificate(gauge: PolarGauge, x, y, samples: int = CERT_SAMPLES) -> ContractionCertificate:
    """A contraction ``T`` of the unit ball with ``T x = y``.

    ``T = M_F R M_E^{-1}`` maps the outer ellipse ``E`` tangent at ``x`` onto
    the inner ellipse ``F`` tangent at ``y``, so ``T(B) ⊆ T(E) = F ⊆ B``.
    Inputs are normalised onto the unit sphere.
    """
    x, y = _require_vector(x), _require_vector(y)
    x, y = x / gauge.norm(x), y / gauge.norm(y)
    E = outer_ellipsoid_at(gauge, x)
    F = inner_ellipsoid_at(gauge, y)
    a = E.inverse @ x
    c = F.inverse @ y
    ang = np.arctan2(a[0] * c[1] - a[1] * c[0], a @ c)
    R = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
    T = F.shape @ R @ E.inverse
    resid = float(np.hypot(*(T @ x - y)))
    Q = F.inverse @ T @ E.shape
    if resid > 1e-9 or np.max(np.abs(Q.T @ Q - np.eye(2))) > 1e-9:
        raise CertificateFailed(f"certificate map misses its target (residual {resid:.3g})")
    top = sampled_operator_norm(gauge, T, samples)
    if top > 1 + CERT_TOL:
        raise CertificateFailed(f"sampled norm of T is {top!r}, above 1 + {CERT_TOL:g}")
    return ContractionCertificate(T, x, y, E, F, top, int(samples))


def random_sphere_pairs(gauge: PolarGauge, count: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded pairs of unit vectors (uniform polar angles)."""
    rng = make_rng(seed)
    th = rng.random((count, 2)) * 2 * np.pi
    return [(gauge.boundary(a), gauge.boundary(b)) for a, b in th]
