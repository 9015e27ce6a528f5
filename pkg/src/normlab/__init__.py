"""Numerical geometry of planar norms given in polar form."""

from __future__ import annotations

from .convexity import ValidityReport, curvature_numerator, hessian, require_norm, validate
from .duality import (
    LipschitzEstimate,
    contraction_defect,
    dual_gauge,
    dual_norm,
    duality_lipschitz,
    duality_map,
    inverse_duality,
)
from .ellipsoid import (
    Ellipsoid,
    contact_set,
    inner_ellipsoid_at,
    john_ellipse,
    outer_ellipsoid_at,
    sigma_bisector_closure,
    st_certificate,
)
from .errors import NormlabError
from .gauge import (
    EllipseGauge,
    LpGauge,
    PolarGauge,
    TrigPolyGauge,
    circle,
    gauge_parse,
    sin_power_gauge,
)
from .homog import homog_bound, homog_extend_check, taylor_diagnostic
from .isometry import SignedPermutation, enumerate_isometries, min_gap, operator_gap
from .mazur import lp_duality_map, mazur_lipschitz, mazur_map, swap_pair_ratio

__version__ = "0.1.0"
