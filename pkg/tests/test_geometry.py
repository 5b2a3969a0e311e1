import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate as sp_integrate

from revspec import geometry as geo
from revspec.quadrature import sphere_volume


def suite():
    return [
        geo.sphere(1.0), geo.sphere(2.0, 3), geo.spheroid(1.3, 1.0), geo.spheroid(1.0, 1.5, 3),
        geo.dumbbell(2, 0.1), geo.dumbbell(3, 0.05),
        geo.bispherical_immersion(2, 0, eps=0.05), geo.bispherical_immersion(3, 1, eps=0.05),
        geo.bispherical_immersion(4, 2, eps=0.1), geo.sphere_with_tube(0.1, 0.5),
        geo.sphere_with_tube(0.05, 0.25, bulb=0.2),
    ]


# -- round spheres ----------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("R", [0.5, 1.0, 3.0])
def test_sphere_curvature_and_volume(n, R):
    imm = geo.sphere(R, n)
    q = imm.quadrature()
    assert_allclose(q.jet.mean_curvature, 1.0 / R, rtol=1e-12)
    assert_allclose(q.jet.B_op, 1.0 / R, rtol=1e-12)
    assert imm.volume == pytest.approx(sphere_volume(n) * R**n, rel=1e-12)
    assert geo.h2norm(imm) == pytest.approx(1.0 / R, rel=1e-12)
    assert geo.extrinsic_radius(imm)[0] == pytest.approx(R, rel=1e-10)


def test_sphere_concentration_is_trivial():
    rep = geo.concentration_report(geo.sphere(1.0), 0.1)
    assert rep.XT < 1e-7 and rep.X_minus_Hnu < 1e-7 and rep.phiZ < 1e-7
    assert rep.phi_sq == pytest.approx(1.0)
    assert geo.annulus_fraction(geo.sphere(1.0), 0.1) == 0.0


# -- spheroids against the implicit ellipsoid formulas ------------------------


@pytest.mark.parametrize("a,b", [(1.3, 1.0), (1.0, 1.5), (2.0, 0.7), (1.02, 1.0)])
def test_spheroid_curvature_matches_implicit_formulas(a, b):
    # x^2/b^2 + y^2/b^2 + z^2/a^2 = 1, with z the axis
    q = geo.spheroid(a, b).quadrature(4, 10)
    c1, c2 = q.jet.position
    S = c1**2 / b**4 + c2**2 / a**4
    gauss = 1.0 / (a**2 * b**4 * S**2)
    mean = np.abs(c1**2 + c2**2 - (2 * b * b + a * a)) / (2 * a**2 * b**4 * S**1.5)
    k0, k1, _ = q.jet.principal_curvatures
    assert_allclose(k0 * k1, gauss, rtol=1e-12, atol=1e-13)
    assert_allclose(q.jet.mean_curvature, mean, rtol=1e-12)


@pytest.mark.parametrize("a,b", [(1.3, 1.0), (1.0, 1.5)])
def test_spheroid_extrinsic_radius_is_major_semi_axis(a, b):
    r, centre, _ = geo.extrinsic_radius(geo.spheroid(a, b))
    assert r == pytest.approx(max(a, b), rel=1e-9)
    assert_allclose(centre, 0.0, atol=1e-6)


@given(st.floats(0.5, 2.5), st.floats(0.5, 2.5))
def test_hk_inequality_on_spheroids(a, b):
    imm = geo.spheroid(a, b)
    r, _, _ = geo.extrinsic_radius(imm)
    assert r * geo.h2norm(imm) >= 1 - 1e-9


# -- identities and invariances ------------------------------------------------


@pytest.mark.parametrize("imm", suite(), ids=lambda m: m.info.get("constructor"))
def test_hsiung_identity(imm):
    assert geo.hsiung_residual(imm) < 1e-8


@given(st.floats(0.2, 5.0), st.sampled_from([0, 1, 2]))
def test_homothety(c, which):
    base = [geo.spheroid(1.3, 1.0), geo.dumbbell(2, 0.1), geo.bispherical_immersion(3, 1, eps=0.05)][which]
    big = base.scaled(c)
    n = base.n
    assert big.volume == pytest.approx(c**n * base.volume, rel=1e-9)
    assert geo.h2norm(big) == pytest.approx(geo.h2norm(base) / c, rel=1e-9)
    assert geo.extrinsic_radius(big)[0] == pytest.approx(c * geo.extrinsic_radius(base)[0], rel=1e-9)
    assert geo.hsiung_residual(big) < 1e-8
    assert geo.mean_position_norm(big) == pytest.approx(c * geo.mean_position_norm(base), rel=1e-9)


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_translation_invariance(v):
    base = geo.spheroid(1.3, 1.0)
    moved = base.translated(v)
    assert geo.h2norm(moved) == pytest.approx(geo.h2norm(base), rel=1e-12)
    assert geo.extrinsic_radius(moved)[0] == pytest.approx(geo.extrinsic_radius(base)[0], rel=1e-9)
    assert_allclose(moved.mean_position, base.mean_position + np.asarray(v), atol=1e-12)


@given(st.floats(1.0, 8.0), st.floats(1.0, 8.0))
def test_normalized_lp_norms_are_monotone_in_p(p, q):
    imm = geo.spheroid(1.5, 1.0)
    lo, hi = sorted((p, q))
    assert geo.lp_norm(imm, "B_op", lo).value <= geo.lp_norm(imm, "B_op", hi).value * (1 + 1e-10)
    assert geo.lp_norm(imm, "B_op", hi).value <= geo.lp_norm(imm, "B_op", math.inf).value * (1 + 1e-10)


def test_lp_norm_rejects_unknown_field_and_small_p():
    with pytest.raises(geo.GeometryError):
        geo.lp_norm(geo.sphere(), "K", 2)
    with pytest.raises(geo.GeometryError):
        geo.lp_norm(geo.sphere(), "H", 0.5)


@pytest.mark.parametrize("imm", suite(), ids=lambda m: m.info.get("constructor"))
def test_serialization_roundtrip(imm):
    again = geo.from_dict(imm.to_dict())
    assert again.to_dict() == imm.to_dict()
    assert again.volume == pytest.approx(imm.volume, rel=1e-14)


def test_scaled_translated_roundtrip():
    imm = geo.spheroid(1.3, 1.0).scaled(2.0).translated([0.0, 1.0, 2.0])
    d = imm.to_dict()
    d["scale"] = 2.0
    again = geo.from_dict(d)
    assert again.volume == pytest.approx(imm.volume)
    assert_allclose(again.center, imm.center)


# -- two-sheet construction ---------------------------------------------------


def test_constant_profile_gives_round_sphere():
    imm = geo.bispherical_immersion(3, 1, geo.ConstantProfile(0.25))
    assert imm.n == 3
    assert geo.h2norm(imm) == pytest.approx(1 / 1.25, rel=1e-12)
    assert geo.extrinsic_radius(imm)[0] == pytest.approx(1.25, rel=1e-10)


@pytest.mark.parametrize("n,k", [(2, 0), (3, 0), (3, 1), (4, 1), (4, 2)])
def test_sheet_closed_form_matches_meridian_route(n, k):
    imm = geo.bispherical_immersion(n, k, eps=0.05, a=0.3)
    prof = geo.catenoidal_profile(n, k, 0.05, 0.3)
    br = imm.breaks
    checked = 0
    for i, seg in enumerate(imm.segments):
        if not isinstance(seg, geo.ProfileSegment):
            continue
        t = np.linspace(br[i], br[i + 1], 40)[1:-1]
        jet = imm.jet(t)
        c1, c2 = jet.position
        r = np.arctan2(c1, np.abs(c2))
        sj = geo.sheet_curvature(prof, n, k, r, seg.branch)
        # the global normal points inward on the inner sheet, so compare |H|
        assert_allclose(np.abs(jet.mean_curvature), np.abs(sj.mean_curvature), atol=1e-12)
        assert_allclose(jet.B_op, sj.B_op, atol=1e-12)
        checked += 1
    assert checked >= 4


@pytest.mark.parametrize("branch", [1, -1])
@pytest.mark.parametrize("r", [0.06, 0.1, 0.35, 0.5, 1.2])
def test_sheet_normal_against_finite_differences(branch, r):
    prof = geo.catenoidal_profile(3, 1, 0.05, 0.3)
    rng = np.random.default_rng(11)
    y = rng.standard_normal(2)
    z = rng.standard_normal(2)
    y /= np.linalg.norm(y)
    z /= np.linalg.norm(z)
    X, N = geo.sheet_point_normal(prof, y, z, r, branch)
    h = 1e-6
    dX = (geo.sheet_point_normal(prof, y, z, r + h, branch)[0]
          - geo.sheet_point_normal(prof, y, z, r - h, branch)[0]) / (2 * h)
    assert abs(N @ dX) / np.linalg.norm(dX) < 1e-8
    assert abs(N[:2] @ np.array([-y[1], y[0]])) < 1e-12
    assert abs(N[2:] @ np.array([-z[1], z[0]])) < 1e-12
    assert np.linalg.norm(N) == pytest.approx(1.0)


@pytest.mark.parametrize("n,k", [(2, 0), (3, 0), (3, 1), (4, 2)])
def test_curvature_is_continuous_across_junctions(n, k):
    imm = geo.bispherical_immersion(n, k, eps=0.05)
    br = imm.breaks
    for i in range(len(imm.segments) - 1):
        x = np.array([br[i + 1]])
        a = geo.jet_from_values(imm.eval_segment(i, x), imm.p1, imm.p2)
        b = geo.jet_from_values(imm.eval_segment(i + 1, x), imm.p1, imm.p2)
        assert abs(a.B_op[0] - b.B_op[0]) < 1e-6
        assert abs(a.mean_curvature[0] - b.mean_curvature[0]) < 1e-6


@pytest.mark.parametrize("n,k", [(2, 0), (3, 0), (4, 1), (4, 2)])
def test_neck_profile_solves_its_ode(n, k):
    prof = geo.catenoidal_profile(n, k, 0.05, 0.25)
    r = np.linspace(0.06, 0.3, 9)
    h = 1e-5
    f = prof.neck_value
    d1 = (f(r + h) - f(r - h)) / (2 * h)
    d2 = (f(r + h) - 2 * f(r) + f(r - h)) / h**2
    assert_allclose(d1, prof.neck_slope(r), atol=1e-6)
    resid = d2 + prof.m * (1 + d1**2) * d1 / r
    assert np.max(np.abs(resid) / np.abs(d2)) < 1e-5
    # closed form (m = 1) or series route against adaptive quadrature
    for x in (0.07, 0.15, 0.3):
        assert float(f(x)) == pytest.approx(prof.neck_value_quad(x), rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("n,k,eps", [(2, 0, 0.05), (3, 1, 0.02), (4, 0, 0.1)])
def test_plateau_height_by_integrating_the_slope(n, k, eps):
    prof = geo.catenoidal_profile(n, k, eps, 0.3)
    r0, r1 = eps + 0.3, eps + 0.6
    bridge, _ = sp_integrate.quad(lambda r: float(prof(np.array([r]))[1][0]), r0, r1,
                                  epsabs=1e-14, epsrel=1e-13)
    assert prof.b == pytest.approx(prof.neck_value_quad(r0) + bridge, rel=1e-12)
    phi, d1, d2 = prof(np.array([r1 + 0.1]))
    assert phi[0] == prof.b and d1[0] == 0.0 and d2[0] == 0.0


@pytest.mark.parametrize("kwargs", [
    {"n": 3, "k": 1, "eps": 0.4, "a": 0.3},      # eps > a
    {"n": 3, "k": 2, "eps": 0.05, "a": 0.3},     # k > n-2
    {"n": 3, "k": 1, "eps": 0.05, "a": 0.5},     # a > pi/10
])
def test_invalid_profiles(kwargs):
    with pytest.raises(geo.GeometryError):
        geo.catenoidal_profile(**kwargs)


@given(st.floats(0.001, 0.3), st.floats(0.01, 0.999), st.sampled_from([(2, 0), (3, 0), (4, 1)]))
def test_plateau_stays_below_one_half(eps, frac, nk):
    # eps < a < pi/10 keeps 1 - phi > 1/2 on the inner sheet
    a = eps + frac * (math.pi / 10 - eps)
    assume(a > eps)
    try:
        prof = geo.catenoidal_profile(*nk, eps, a)
    except geo.GeometryError:
        assume(False)
    assert 0 < prof.b < 0.5


def test_k0_meridian_closes_and_crosses_the_axis_plane():
    imm = geo.bispherical_immersion(2, 0, eps=0.05)
    assert imm.closed and imm.is_closed_surface
    start = imm.eval_global(np.array([imm.breaks[0]]))[:4, 0]
    end = imm.eval_global(np.array([imm.breaks[-1]]))[:4, 0]
    assert_allclose(start[:2], end[:2], atol=1e-12)


# -- dumbbells and tubes ---------------------------------------------------------


@pytest.mark.parametrize("eps", [0.2, 0.05, 0.01])
def test_dumbbell_neck_meets_spheres_at_root_eps(eps):
    imm = geo.dumbbell(2, eps)
    br = imm.breaks
    c1 = imm.eval_global(br[1:3])[0]
    assert_allclose(c1, math.sqrt(eps), rtol=1e-12)
    # catenoid is minimal: H = 0 on the neck
    neck = imm.eval_segment(1, np.linspace(br[1], br[2], 11))
    assert_allclose(geo.jet_from_values(neck, 1, 0).mean_curvature, 0.0, atol=1e-12)


def test_dumbbell_volume_tends_to_two_spheres():
    vols = [geo.dumbbell(2, e).volume for e in (0.1, 0.01, 0.001)]
    gaps = [abs(v - 8 * math.pi) for v in vols]
    assert gaps[0] > gaps[1] > gaps[2]


def test_invalid_dumbbell():
    with pytest.raises(geo.GeometryError):
        geo.dumbbell(2, 0.6)
    with pytest.raises(geo.GeometryError):
        geo.dumbbell(2, 0.1, n=3)


def test_tube_piece_has_boundary_and_closed_surface_has_poles():
    imm = geo.sphere_with_tube(0.1, 0.5)
    assert imm.endpoint_kinds() == ("pole", "pole")
    piece = geo.tube_piece(imm)
    assert piece.endpoint_kinds() == ("pole", "boundary")
    assert not piece.is_closed_surface


def test_cylinder_is_flat_in_the_meridian():
    q = geo.cylinder(2.0, 0.5).quadrature(2, 6)
    k0, k1, _ = q.jet.principal_curvatures
    assert_allclose(k0, 0.0, atol=1e-14)
    assert_allclose(np.abs(k1), 2.0)


# -- cutoff ------------------------------------------------------------------------


@given(st.floats(0.01, 0.45), st.floats(0.3, 3.0))
def test_band_cutoff_shape(inner, h2):
    cut = geo.BandCutoff(h2, inner, 2 * inner)
    R = 1.0 / h2
    s = (R * np.linspace(0.0, 3.0, 121)) ** 2
    val, d1, _ = cut(s)
    assert np.all((val >= 0) & (val <= 1))
    x = np.sqrt(s) * h2
    assert np.all(val[np.abs(x - 1) <= inner] == 1.0)
    assert np.all(val[np.abs(x - 1) >= 2 * inner] == 0.0)


def test_band_cutoff_derivatives_by_finite_differences():
    cut = geo.BandCutoff(1.0, 0.1, 0.2)
    s = np.linspace(0.5, 1.6, 301)
    h = 1e-6
    v, d1, d2 = cut(s)
    fd1 = (cut(s + h)[0] - cut(s - h)[0]) / (2 * h)
    fd2 = (cut(s + h)[1] - cut(s - h)[1]) / (2 * h)
    assert_allclose(d1, fd1, atol=1e-5)
    assert_allclose(d2, fd2, atol=1e-3)


def test_wide_band_keeps_the_origin():
    cut = geo.BandCutoff(1.0, 0.6, 1.2)
    assert cut.knots[0] is None
    assert cut(np.array([0.0]))[0][0] == 1.0
    with pytest.raises(geo.GeometryError):
        geo.BandCutoff(1.0, 0.2, 0.1)


@pytest.mark.parametrize("inner,expected", [(0.05, True), (0.1, True), (0.2, False), (0.3, False),
                                            (0.6, True)])
def test_reference_derivative_bounds(inner, expected):
    # the lower transition is the steep one; it disappears once outer >= 1
    for h2 in (0.5, 1.0, 2.0):
        assert geo.BandCutoff(h2, inner, 2 * inner).satisfies_reference_bounds() is expected


@pytest.mark.parametrize("eps", [0.2, 0.05])
def test_dumbbell_junction_is_c1_with_reported_curvature_jump(eps):
    imm = geo.dumbbell(2, eps)
    x = np.array([imm.breaks[1]])
    a = geo.jet_from_values(imm.eval_segment(0, x), imm.p1, imm.p2)
    b = geo.jet_from_values(imm.eval_segment(1, x), imm.p1, imm.p2)
    assert_allclose(a.position, b.position, atol=1e-12)
    assert abs(abs(a.unit_normal[:, 0] @ b.unit_normal[:, 0]) - 1) < 1e-12
    jump = abs(a.principal_curvatures[0, 0] - b.principal_curvatures[0, 0])
    assert jump == pytest.approx(imm.info["junction_curvature_jump"], abs=1e-9)
    assert abs(a.principal_curvatures[1, 0]) == pytest.approx(abs(b.principal_curvatures[1, 0]), abs=1e-9)
