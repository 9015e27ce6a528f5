"""One test per acceptance criterion; the summary hook in conftest prints a line for each."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import random_ellipses
from normlab import cli
from normlab.convexity import curvature_numerator, hessian
from normlab.duality import contraction_defect, dual_gauge, dual_norm, duality_map, exact_dual_profile
from normlab.ellipsoid import (
    john_ellipse,
    outer_ellipsoid_at,
    sampled_operator_norm,
    sigma_bisector_closure,
    st_certificate,
)
from normlab.errors import NoOuterEllipsoid
from normlab.gauge import EllipseGauge, LpGauge, TrigPolyGauge, circle, quadratic_form, sin_power_gauge, unit
from normlab.homog import homog_extend_check, taylor_diagnostic
from normlab.isometry import gap_bound, min_gap
from normlab.mazur import mazur_lipschitz, swap_pair_ratio

# members of 1 + 0.05 sin^k(n theta) that are norms with a well-resolved dual
SIN_FAMILY = [(1, 2), (2, 1), (2, 2), (3, 2), (4, 1), (4, 2), (6, 1), (6, 2), (8, 1), (10, 1)]


def _dense_max(gauge, M, n=2**16):
    t = np.arange(n) * (np.pi / n)
    return float(np.max(gauge.norm(unit(t) @ np.asarray(M).T)))


def _perturbed_family(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        c = rng.uniform(-0.02, 0.02, 2)
        s = rng.uniform(-0.02, 0.02, 2)
        out.append(TrigPolyGauge(1.0, tuple(c), tuple(s)))
    return out


@pytest.mark.criterion(1, "contraction defect separates Euclidean from non-Euclidean norms")
def test_criterion_01_defect_separation(perturbed, lp4):
    for g in random_ellipses(10, seed=11):
        assert abs(contraction_defect(g, 4000, seed=1).value - 1.0) <= 1e-6
    assert contraction_defect(perturbed, 10_000, seed=1).value > 1 + 1e-3
    assert contraction_defect(lp4, 10_000, seed=1).value > 1 + 1e-3


@pytest.mark.criterion(2, "dual of the dual gauge returns the gauge on a 512-grid")
def test_criterion_02_duality_involution():
    phi = np.pi * np.arange(512) / 512
    for k, n in SIN_FAMILY:
        g = sin_power_gauge(0.05, k, n)
        gstar = dual_gauge(g, 128).fit
        assert np.max(np.abs(exact_dual_profile(gstar, phi) - g(phi))) <= 1e-6, (k, n)


@pytest.mark.criterion(3, "<J(x), x> = 1 and |J(x)|_* = 1 on the sphere")
def test_criterion_03_duality_identities(perturbed, lp4):
    gauges = [circle(), perturbed, lp4, EllipseGauge(0.8, 0.6, 0.3), sin_power_gauge(0.05, 3, 2)]
    rng = np.random.default_rng(3)
    for g in gauges:
        th = rng.uniform(0, 2 * np.pi, 1000)
        X = g.boundary(th)
        J = np.array([duality_map(g, x) for x in X])
        assert np.max(np.abs(np.einsum("ij,ij->i", J, X) - 1)) <= 1e-8
        assert np.max(np.abs(dual_norm(g, J) - 1)) <= 1e-8


def _phi(g, x):
    return 0.5 * g.norm(x) ** 2


def _fd_hessian(g, x, h=1e-4):
    H = np.empty((2, 2))
    E = np.eye(2) * h
    for i in range(2):
        for j in range(2):
            H[i, j] = (_phi(g, x + E[i] + E[j]) - _phi(g, x + E[i] - E[j])
                       - _phi(g, x - E[i] + E[j]) + _phi(g, x - E[i] - E[j])) / (4 * h * h)
    return H


@pytest.mark.criterion(4, "closed-form Hessian against finite differences and the curvature numerator")
def test_criterion_04_hessian_oracle(perturbed, lp4):
    gauges = [perturbed, EllipseGauge(0.9, 0.5, 1.0), lp4, sin_power_gauge(0.05, 2, 1), LpGauge(6)]
    rng = np.random.default_rng(4)
    for i in range(500):
        g = gauges[i % len(gauges)]
        th = rng.uniform(0, 2 * np.pi)
        x = rng.uniform(0.5, 2.0) * unit(th)
        H = hessian(g, x)
        Hfd = _fd_hessian(g, x)
        assert np.linalg.norm(H - Hfd) <= 1e-5 * np.linalg.norm(H)
        assert abs(np.linalg.det(H) * g(th) ** 6 - curvature_numerator(g, th)) <= 1e-8
    assert abs(curvature_numerator(lp4, 0.0)) <= 1e-9


@pytest.mark.criterion(5, "Mazur map Lipschitz constant reaches q/p")
def test_criterion_05_mazur_bound():
    for p, q in [(2, 3), (2, 4), (1.5, 3), (3, 4)]:
        for n in (2, 3):
            assert mazur_lipschitz(p, q, n, 5000, seed=5).value >= q / p - 0.01
        d = 2 ** (-1 / q)
        for x in (d - 1e-4, d + 1e-4):
            assert abs(swap_pair_ratio(p, q, x) - q / p) <= 1e-3


@pytest.mark.criterion(6, "isometry gap min |T - I| >= max(2^(1/p), 2^(1/q)) > sqrt 2")
def test_criterion_06_isometry_gap():
    for p in (1.5, 3, 4):
        for n in (2, 3):
            m = min_gap(n, p)
            assert m.value >= gap_bound(p) - 1e-6
            assert gap_bound(p) - 1e-6 > np.sqrt(2)


@pytest.mark.criterion(7, "John ellipse: +-1e-5 scaling flips feasibility; ellipses recover themselves")
def test_criterion_07_john_scaling():
    gauges = [circle(), EllipseGauge(0.7, 0.8, 0.4), LpGauge(64), *_perturbed_family(5, seed=7)]
    for g in gauges:
        M = john_ellipse(g).shape
        assert _dense_max(g, M * (1 + 1e-5)) > 1
        assert _dense_max(g, M * (1 - 1e-5)) < 1
    E = EllipseGauge(0.7, 0.8, 0.4)
    w, V = np.linalg.eigh(quadratic_form(E))
    assert np.max(np.abs(john_ellipse(E).shape - (V / np.sqrt(w)) @ V.T)) <= 1e-6


@pytest.mark.criterion(8, "bisector closure: closed for ellipses, open with a witness for p=64")
def test_criterion_08_sigma_closure():
    for g in random_ellipses(4, seed=8):
        assert sigma_bisector_closure(g).closed
    rep = sigma_bisector_closure(LpGauge(64))
    assert not rep.closed
    assert rep.witness is not None
    g = LpGauge(64)
    M = rep.ellipse.shape
    assert g.norm(unit(rep.bisector) @ M.T) < 1 - 1e-6
    for phi in rep.witness:
        assert g.norm(unit(phi) @ M.T) >= 1 - 1e-6


@pytest.mark.criterion(9, "contraction certificates between seeded sphere points and their compositions")
def test_criterion_09_st_certificates(perturbed):
    rng = np.random.default_rng(9)
    pts = perturbed.boundary(rng.uniform(0, 2 * np.pi, 21))
    certs = [st_certificate(perturbed, pts[i], pts[i + 1]) for i in range(20)]
    for i, c in enumerate(certs):
        assert np.linalg.norm(c.T @ pts[i] - pts[i + 1]) <= 1e-9
        assert c.sampleCount >= 10_000
        assert c.maxSampledNorm <= 1 + 1e-7
    for i in range(19):
        T = certs[i + 1].T @ certs[i].T
        assert np.linalg.norm(T @ pts[i] - pts[i + 2]) <= 1e-8
        assert sampled_operator_norm(perturbed, T) <= 1 + 1e-7


@pytest.mark.criterion(10, "no outer ellipse at an l4 axis point, one at the diagonal")
def test_criterion_10_outer_failure(lp4):
    with pytest.raises(NoOuterEllipsoid):
        outer_ellipsoid_at(lp4, np.array([1.0, 0.0]))
    E = outer_ellipsoid_at(lp4, lp4.boundary(np.pi / 4))
    assert E.b > 0


HOMOG_CASES = [
    ("circle", 1.0, 0.5, 2.0), ("circle", 2.0, 1.0, 2.0), ("circle", -1.0, 0.5, 1.5),
    ("perturbed", 1.0, 0.5, 2.0), ("perturbed", 2.0, 1.0, 2.0), ("perturbed", 0.5, 0.2, 3.0),
    ("ellipse", 1.0, 1.0, 1.0), ("ellipse", 3.0, 0.5, 1.5), ("ellipse", -0.5, 0.3, 2.0),
    ("lp4", 1.0, 0.5, 2.0), ("lp4", 2.0, 1.0, 2.0), ("lp4", 0.5, 0.5, 4.0),
]


@pytest.mark.criterion(11, "sampled annulus ratios stay under the homogeneous-extension bound")
def test_criterion_11_homog_bound(perturbed, lp4):
    gauges = {"circle": circle(), "perturbed": perturbed, "ellipse": EllipseGauge(0.8, 0.6, 0.3), "lp4": lp4}
    for name, alpha, r, R in HOMOG_CASES:
        rep = homog_extend_check(gauges[name], alpha, r, R, samples=10_000, seed=11)
        assert rep.worstRatio <= rep.bound + 1e-9, (name, alpha, r, R)
        assert rep.passed


@pytest.mark.criterion(12, "Taylor coefficients of the circle along a tangent match the binomial series")
def test_criterion_12_taylor_circle():
    rep = taylor_diagnostic(circle(), [1.0, 0.0], [0.0, 1.0], 6)
    expected = [1.0, 0.0, 0.5, 0.0, -0.125]
    assert np.max(np.abs(np.array(rep.coeffs[:5]) - expected)) <= 1e-6
    assert 0.9 <= rep.radiusEstimate <= 1.1


@pytest.mark.criterion(13, "the report battery is byte-identical across runs with the same seed")
def test_criterion_13_determinism(tmp_path):
    a = cli.run_battery(tmp_path / "a", seed=3)
    b = cli.run_battery(tmp_path / "b", seed=3)
    assert [p.name for p in a] == [p.name for p in b]
    assert {p.suffix for p in a} == {".json", ".csv", ".svg"}
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes(), pa.name
