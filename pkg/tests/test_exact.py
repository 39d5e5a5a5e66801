import numpy as np
import pytest

import anisotube as at
from anisotube.contents import kneser_check
from anisotube.errors import NonPositiveRadius, RadiusOutsideValidity
from anisotube.exact import (
    TRIANGLE_NORMALS,
    GasketProfile,
    TriangleAnisotropy,
    gasket_content_limits,
    gasket_profile,
    polygon_aniso_perimeter,
    triangle_tube_volume,
)
from anisotube.sets import PolygonRegion

from oracles import min_gauge_to_segments, polygon_area_doubled

# unit-factor coefficients of the four gasket limits and the optimizer
# abscissae, evaluated from the defining expressions at 50-digit precision
S_LOWER_COEF = 1.1074915690459780
M_LOWER_COEF = 1.1477638769537447
M_UPPER_COEF = 1.1500877174514067
S_UPPER_COEF = 1.1700858042885817
ALPHA_MAX = 1.4762809857141703
BETA_MAX = 1.7670205455230878
BETA_MIN = 1.1855414259052527

ASYM = [[1.2, 0.1], [-0.3, 0.9], [-0.8, -0.2], [0.3, -0.7]]


# ---------------------------------------------------------------------------
# anisotropic perimeter


def test_square_perimeter_isotropic(disk64):
    square = PolygonRegion(np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]], dtype=float))
    per = polygon_aniso_perimeter(square, disk64)
    assert per == pytest.approx(8.0, abs=8 * (1 - np.cos(np.pi / 64)))


def test_triangle_perimeter_is_support_sum(disk64):
    body = at.make_body(ASYM)
    for s in (1.0, 2.5):
        tri = np.array([[0, 0], [s, 0], [s / 2, s * np.sqrt(3) / 2]])
        per = polygon_aniso_perimeter(PolygonRegion(tri), body)
        u_out = body.support(TRIANGLE_NORMALS).sum()
        assert per == pytest.approx(s * u_out, rel=1e-12)


def test_perimeter_of_body_itself_hits_isoperimetric_equality():
    # for E = C the edge sum equals n * vol(C): sum of edge * support(normal)
    # is twice the area in the plane, and the isoperimetric bound is met exactly
    for verts in (ASYM, [[1, 1], [-1, 1], [-1, -1], [1, -1]]):
        body = at.make_body(verts)
        region = PolygonRegion(body.vertices)
        per = polygon_aniso_perimeter(region, body)
        assert per == pytest.approx(polygon_area_doubled(region.outer), rel=1e-12)
        assert per == pytest.approx(2 * body.volume, rel=1e-12)
        bound = 2 * body.volume ** (1 / 2) * body.volume ** (1 / 2)
        assert per == pytest.approx(bound, rel=1e-12)


def test_perimeter_with_hole():
    body = at.preset_body("square")
    outer = np.array([[0, 0], [4, 0], [4, 4], [0, 4]], dtype=float)
    hole = np.array([[1, 1], [2, 1], [2, 2], [1, 2]], dtype=float)
    per = polygon_aniso_perimeter(PolygonRegion(outer, (hole,)), body)
    assert per == pytest.approx(16.0 + 4.0)  # support of +-e_i is 1 for the square


# ---------------------------------------------------------------------------
# triangle tube volumes


def test_filled_triangle_at_zero_is_area():
    tri = TriangleAnisotropy.for_body(at.preset_body("disk64"), side=2.0)
    assert triangle_tube_volume(tri, 0.0, "filled") == pytest.approx(np.sqrt(3.0))


def test_boundary_tube_at_zero_is_null():
    tri = TriangleAnisotropy.for_body(at.preset_body("disk64"))
    assert triangle_tube_volume(tri, 0.0, "boundary") == 0.0


def test_filled_triangle_disk64_value(disk64):
    tri = TriangleAnisotropy.for_body(disk64)
    expected = disk64.volume * 0.01 + tri.support_sum_out * 0.1 + np.sqrt(3) / 4
    assert triangle_tube_volume(tri, 0.1, "filled") == pytest.approx(expected, rel=1e-15)
    assert tri.support_sum_out == pytest.approx(3.0, abs=3 * (1 - np.cos(np.pi / 64)))


def test_boundary_validity_window():
    body = at.make_body(ASYM)
    tri = TriangleAnisotropy.for_body(body)
    edge = tri.boundary_validity_radius
    triangle_tube_volume(tri, edge, "boundary")
    with pytest.raises(RadiusOutsideValidity):
        triangle_tube_volume(tri, edge * 1.01, "boundary")


def test_tube_volumes_against_segment_oracle():
    """Both tube polynomials against a brute grid with exact segment distances."""
    body = at.make_body(ASYM)
    tri_pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
    segs = [(tri_pts[i], tri_pts[(i + 1) % 3]) for i in range(3)]
    h = 1 / 600
    r = 0.1
    pad = r * body.outradius + 2 * h
    xs = np.arange(-pad, 1 + pad, h) + h / 2
    ys = np.arange(-pad, np.sqrt(3) / 2 + pad, h) + h / 2
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    d = min_gauge_to_segments(pts, segs, body, bound=1.3 * r * body.outradius)

    def crosses(a, b):
        return (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0])

    inside = (crosses(tri_pts[0], tri_pts[1]) >= 0) & (crosses(tri_pts[1], tri_pts[2]) >= 0) \
        & (crosses(tri_pts[2], tri_pts[0]) >= 0)
    tri = TriangleAnisotropy.for_body(body)
    v_filled = np.count_nonzero(inside | (d <= r)) * h * h
    v_bnd = np.count_nonzero(d <= r) * h * h
    assert v_filled == pytest.approx(triangle_tube_volume(tri, r, "filled"), rel=2e-3)
    assert v_bnd == pytest.approx(triangle_tube_volume(tri, r, "boundary"), rel=2e-3)


# ---------------------------------------------------------------------------
# gasket piecewise profile


def test_gasket_window_resolution(disk64):
    gp = GasketProfile(disk64)
    left, right = gp.window(0)
    assert gp.level_of(left * 1.0001) == 0
    assert gp.level_of(left * 5.0) == 0
    assert gp.level_of(left * 0.9999) == 1
    assert gp.level_of(gp.scale * 2.0**-7 * 1.3) == 7
    with pytest.raises(NonPositiveRadius):
        gp.level_of(0.0)


def test_gasket_volume_continuous_at_breakpoints():
    for body in (at.preset_body("disk64"), at.make_body(ASYM)):
        gp = GasketProfile(body)
        for level in range(1, 12):
            edge = gp.scale * 2.0 ** (1 - level)  # right end of window(level)
            quad_lo, lin_lo, const_lo = gp.poly_coeffs(level)      # window below the edge
            quad_hi, lin_hi, const_hi = gp.poly_coeffs(level - 1)  # window above
            v_lo = quad_lo * edge**2 + lin_lo * edge + const_lo
            v_hi = quad_hi * edge**2 + lin_hi * edge + const_hi
            assert v_hi == pytest.approx(v_lo, rel=1e-9)
            # the rate is continuous across these breakpoints as well
            s_lo = 2 * quad_lo * edge + lin_lo
            s_hi = 2 * quad_hi * edge + lin_hi
            assert s_hi == pytest.approx(s_lo, rel=1e-9)


def test_gasket_profile_values_on_outer_window(disk64):
    gp = GasketProfile(disk64)
    r = gp.scale * 1.5  # inside the outermost window
    v, s = gasket_profile(gp, r)
    u = gp.support_sum_out
    assert v == pytest.approx(disk64.volume * r**2 + u * r + np.sqrt(3) / 4, rel=1e-15)
    assert s == pytest.approx(2 * disk64.volume * r + u, rel=1e-15)


def test_gasket_volume_monotone_and_kappa_decreasing(disk64):
    gp = GasketProfile(disk64)
    radii = np.geomspace(gp.scale * 2.0**-6, gp.scale * 1.99, 400)  # spans 7 windows
    vols = gp.volume(radii)
    assert np.all(np.diff(vols) > 0)
    kappa = gp.rate(radii) / radii
    assert np.all(np.diff(kappa) < 1e-9)


def test_gasket_tube_matches_segment_oracle():
    """Exact piecewise values against a brute grid on a depth-4 skeleton."""
    body = at.make_body(ASYM)
    gp = GasketProfile(body)
    g = at.sierpinski_gasket(4)
    r = gp.scale * 2.0**-2 * 1.4  # level-2 window; skeleton holes are closed there
    h = 1 / 700
    pad = r * body.outradius + 2 * h
    xs = np.arange(-pad, 1 + pad, h) + h / 2
    ys = np.arange(-pad, np.sqrt(3) / 2 + pad, h) + h / 2
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    d = min_gauge_to_segments(pts, list(g.segments), body, bound=1.3 * r * body.outradius)
    v_grid = np.count_nonzero(d <= r) * h * h
    assert v_grid == pytest.approx(gp.volume(r), rel=3e-3)


# ---------------------------------------------------------------------------
# exact content limits


def test_limit_coefficients(disk64):
    lim = gasket_content_limits(GasketProfile(disk64))
    s_lo, m_lo, m_hi, s_hi = lim.coefficients()
    assert s_lo == pytest.approx(S_LOWER_COEF, abs=1e-12)
    assert m_lo == pytest.approx(M_LOWER_COEF, abs=1e-12)
    assert m_hi == pytest.approx(M_UPPER_COEF, abs=1e-12)
    assert s_hi == pytest.approx(S_UPPER_COEF, abs=1e-12)
    # printed three-decimal values
    assert round(s_lo, 3) == 1.107
    assert round(m_lo, 3) == 1.148
    assert round(m_hi, 3) == 1.150
    assert round(s_hi, 3) == 1.170


def test_limit_coefficients_body_independent():
    lims = [gasket_content_limits(GasketProfile(b))
            for b in (at.preset_body("square"), at.make_body(ASYM), at.preset_body("disk16"))]
    coefs = np.array([lim.coefficients() for lim in lims])
    assert np.allclose(coefs, coefs[0], atol=1e-12)


def test_optimizer_abscissae(disk64):
    lim = gasket_content_limits(GasketProfile(disk64))
    assert lim.alpha_max == pytest.approx(ALPHA_MAX, abs=1e-12)
    assert lim.beta_max == pytest.approx(BETA_MAX, abs=1e-12)
    assert lim.beta_min == pytest.approx(BETA_MIN, abs=1e-12)
    for val in (lim.alpha_max, lim.beta_max, lim.beta_min):
        assert 1.0 <= val <= 2.0


def test_limits_strictly_ordered(disk64):
    lim = gasket_content_limits(GasketProfile(disk64))
    assert lim.s_lower < lim.m_lower < lim.m_upper < lim.s_upper


def test_sweep_envelope_matches_limits(disk64):
    gp = GasketProfile(disk64)
    lim = gasket_content_limits(gp)
    d = gp.similarity_dim
    alphas = np.linspace(1.0, 2.0, 10_000)
    rate_q = gp.rate_quotient(alphas, level=40) / (2 - d)
    vol_q = gp.volume_quotient(alphas, level=40)
    assert rate_q.min() == pytest.approx(lim.s_lower, rel=1e-6)
    assert rate_q.max() == pytest.approx(lim.s_upper, rel=1e-6)
    assert vol_q.min() == pytest.approx(lim.m_lower, rel=1e-6)
    assert vol_q.max() == pytest.approx(lim.m_upper, rel=1e-6)


def test_quotient_curves_periodic(disk64):
    # the window parametrization closes up: the limit curves agree at alpha 1 and 2
    gp = GasketProfile(disk64)
    assert gp.rate_quotient(1.0) == pytest.approx(gp.rate_quotient(2.0), rel=1e-12)
    assert gp.volume_quotient(1.0) == pytest.approx(gp.volume_quotient(2.0), rel=1e-12)


def test_closed_form_kneser(disk64):
    gp = GasketProfile(disk64)
    verdict = kneser_check(gp.volume, 2, (gp.scale * 2.0**-5, gp.scale * 1.9),
                           trials=10_000, seed=0, tol=1e-9)
    assert verdict.passed, verdict.violations[:3]
