from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normlab.duality import (
    contraction_defect,
    dual_gauge,
    dual_norm,
    dual_norm_argmax,
    duality_lipschitz,
    duality_map,
    exact_dual_profile,
    inverse_duality,
    ratio_field,
    sphere_duality_map,
)
from normlab.errors import FitResidualTooLarge, KinkPoint, NotANorm, SingularHessian, ZeroVector
from normlab.gauge import EllipseGauge, LpGauge, TrigPolyGauge, circle, quadratic_form, sin_power_gauge, unit

PERTURBED = TrigPolyGauge(1.025, (0.0, -0.025))
ELLIPSE = EllipseGauge(0.8, 0.6, 0.3)
covectors = st.tuples(st.floats(-3, 3), st.floats(-3, 3)).map(np.array).filter(lambda f: np.hypot(*f) > 1e-3)


def _brute_dual(g, f, n=2**16):
    # sup of <f, x> over a dense sample of the sphere; a lower bound accurate to O(n^-2)
    return float(np.max(g.boundary(2 * np.pi * np.arange(n) / n) @ f))


@settings(max_examples=40)
@given(st.floats(0, 2 * np.pi), st.floats(0.2, 3))
def test_duality_map_is_gradient(t, r):
    h = 1e-6
    for g in (PERTURBED, ELLIPSE, LpGauge(4)):
        x = r * unit(t)
        fd = [(g.norm(x + h * e) ** 2 - g.norm(x - h * e) ** 2) / (4 * h) for e in np.eye(2)]
        assert np.allclose(duality_map(g, x), fd, atol=1e-7)


def test_duality_map_ellipse_is_linear():
    A = quadratic_form(ELLIPSE)
    v = np.array([0.3, -1.2])
    assert np.allclose(duality_map(ELLIPSE, v), A @ v, atol=1e-14)


def test_duality_map_l4_diagonal():
    s = 2 ** -0.25
    assert np.allclose(duality_map(LpGauge(4), [s, s]), [2 ** -0.75] * 2, atol=1e-15)


def test_duality_map_errors():
    with pytest.raises(ZeroVector):
        duality_map(circle(), [0.0, 0.0])
    with pytest.raises(KinkPoint):
        duality_map(LpGauge(3), [1.0, 0.0])
    with pytest.raises(NotANorm):
        duality_map(TrigPolyGauge(1.0, (0.0, 0.0, 0.2)), [1.0, 0.0])


@settings(max_examples=30)
@given(covectors)
def test_dual_norm_against_closed_forms(f):
    assert dual_norm(ELLIPSE, f) == pytest.approx(np.sqrt(f @ np.linalg.solve(quadratic_form(ELLIPSE), f)), rel=1e-12)
    assert dual_norm(LpGauge(4), f) == pytest.approx(np.linalg.norm(f, 4 / 3), rel=1e-12)
    # kinked primal: golden-section path
    assert dual_norm(LpGauge(3), f) == pytest.approx(np.linalg.norm(f, 1.5), rel=1e-10)


@settings(max_examples=20)
@given(covectors)
def test_dual_norm_against_dense_sweep(f):
    for g in (PERTURBED, sin_power_gauge(0.05, 3, 2)):
        val = dual_norm(g, f)
        brute = _brute_dual(g, f)
        assert brute <= val + 1e-12
        assert val - brute <= 1e-8 * np.hypot(*f)


@settings(max_examples=30)
@given(covectors, st.floats(0, 2 * np.pi))
def test_hoelder_inequality(f, t):
    x = PERTURBED.boundary(t)
    assert f @ x <= dual_norm(PERTURBED, f) + 1e-12


def test_dual_norm_argmax_attains():
    f = np.array([0.4, -1.1])
    val, t = dual_norm_argmax(PERTURBED, f)
    assert PERTURBED.boundary(t) @ f == pytest.approx(val, rel=1e-14)
    assert dual_norm(PERTURBED, [0.0, 0.0]) == 0.0


def test_sphere_duality_identities():
    t = np.linspace(0, 2 * np.pi, 200)
    for g in (PERTURBED, ELLIPSE, LpGauge(6)):
        J = sphere_duality_map(g, t)
        assert np.allclose(np.einsum("ij,ij->i", J, g.boundary(t)), 1, atol=1e-12)
        assert np.allclose(dual_norm(g, J), 1, atol=1e-12)


def test_dual_gauge_of_ellipse():
    # dual of sqrt(x^T A x) is sqrt(f^T A^-1 f)
    d = dual_gauge(ELLIPSE, 32)
    Ainv = np.linalg.inv(quadratic_form(ELLIPSE))
    phi = np.linspace(0, np.pi, 101)
    U = unit(phi)
    assert np.allclose(d.fit(phi), 1 / np.sqrt(np.einsum("ij,jk,ik->i", U, Ainv, U)), atol=1e-7)
    assert d.residual <= 1e-7
    assert np.allclose(d.exact(phi), exact_dual_profile(ELLIPSE, phi))


def test_dual_gauge_of_lp4_is_lp43():
    d = dual_gauge(LpGauge(4), 32)
    phi = np.linspace(0, np.pi, 101)
    assert np.allclose(d.exact(phi), 1 / np.linalg.norm(unit(phi), 4 / 3, axis=1), atol=1e-13)
    # the dual ball has flat-curvature points, so a trig fit is not owed to be accurate
    assert d.residual > 1e-6


def test_dual_gauge_errors():
    with pytest.raises(ValueError):
        dual_gauge(circle(), 3)
    with pytest.raises(FitResidualTooLarge):
        dual_gauge(sin_power_gauge(0.05, 4, 3), 4)


def test_defect_euclidean_and_not():
    assert contraction_defect(ELLIPSE, 2000).value == pytest.approx(1.0, abs=1e-6)
    assert contraction_defect(PERTURBED, 2000).value == pytest.approx(29 / 21, abs=1e-6)
    assert contraction_defect(LpGauge(4), 2000).value == pytest.approx(3.0, abs=1e-6)


def test_lipschitz_monotone_in_samples():
    vals = [duality_lipschitz(sin_power_gauge(0.05, 2, 3), n, seed=2).value for n in (0, 500, 5000)]
    assert vals[0] <= vals[1] <= vals[2]


def test_lipschitz_witness_reproduces_value():
    est = duality_lipschitz(PERTURBED, 1000, seed=4)
    x, y = est.witnessPair
    ratio = dual_norm(PERTURBED, duality_map(PERTURBED, x) - duality_map(PERTURBED, y)) / PERTURBED.norm(x - y)
    assert ratio == pytest.approx(est.value, rel=1e-10)
    d = est.to_dict()
    assert set(d) == {"value", "samples", "refined", "witness"}
    assert set(d["witness"]) == {"theta_x", "theta_y"}


def test_lipschitz_rejects_kinks():
    with pytest.raises(KinkPoint):
        duality_lipschitz(LpGauge(3), 10)


def test_inverse_duality_ellipse():
    f = np.array([0.7, -0.2])
    x = inverse_duality(ELLIPSE, f)
    assert np.allclose(x, np.linalg.solve(quadratic_form(ELLIPSE), f), atol=1e-10)


@settings(max_examples=30)
@given(st.floats(0, 2 * np.pi), st.floats(0.3, 3))
def test_inverse_duality_roundtrip(t, r):
    x = r * unit(t)
    assert np.allclose(inverse_duality(PERTURBED, duality_map(PERTURBED, x)), x, atol=1e-9 * r)


def test_inverse_duality_singular_at_flat_point():
    with pytest.raises(SingularHessian):
        inverse_duality(LpGauge(4), [1.0, 0.0])


def test_ratio_field_shape():
    t, vals = ratio_field(circle(), 8)
    assert vals.shape == (8, 8)
    off = ~np.eye(8, dtype=bool)
    assert np.allclose(vals[off], 1.0)
