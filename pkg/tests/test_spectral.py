import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from revspec import geometry as geo
from revspec import spectral
from revspec.harmonic_poly import multiplicity


def model_oracle(d: int, lam_max: float) -> np.ndarray:
    """Eigenvalues of dr^2 + d^2 sin^2 r dtheta^2 + cos^2 r dphi^2 on [0, pi/2].

    Separation gives u = sin^(a/d) r cos^b r P_j(cos 2r) with Jacobi P_j and
    lambda = s(s+2), s = a/d + b + 2j; each nonzero angular index is doubled.
    """
    vals = []
    for a in range(80):
        for b in range(40):
            for j in range(40):
                s = a / d + b + 2 * j
                if s * (s + 2) <= lam_max:
                    vals += [s * (s + 2)] * ((2 if a else 1) * (2 if b else 1))
    return np.sort(vals)


# -- exact spectra ---------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("R", [1.0, 2.0])
def test_sphere_clusters(n, R):
    res = spectral.spectrum(geo.sphere(R, n), lam_max=3 * (n + 2) / R**2 * 1.05, mesh_size=2000)
    clusters = res.clustered()
    assert len(clusters) == 4
    for k, (val, mult, _) in enumerate(clusters):
        assert val == pytest.approx(k * (n + k - 1) / R**2, rel=1e-4, abs=1e-10)
        assert mult == multiplicity(n, k)
    assert res.completeness_bound > res.lam_max


@pytest.mark.parametrize("d,rtol", [(1, 1e-5), (2, 1e-3), (3, 1e-3)])
def test_model_metric_against_jacobi_closed_form(d, rtol):
    res = spectral.model_metric_spectrum(3, d, lam_max=12.0, mesh_size=2000)
    oracle = model_oracle(d, 12.0)
    assert res.eigenvalues.size == oracle.size
    assert_allclose(res.eigenvalues, oracle, rtol=rtol, atol=1e-8)


@pytest.mark.parametrize("L,radius", [(1.0, 1.0), (2.5, 0.5), (0.4, 2.0)])
def test_cylinder_dirichlet_spectrum(L, radius):
    res = spectral.dirichlet_spectrum(geo.cylinder(L, radius), lam_max=60.0)
    oracle = sorted((j * math.pi / L) ** 2 + (l / radius) ** 2
                    for j in range(1, 40) for l in range(-40, 41)
                    if (j * math.pi / L) ** 2 + (l / radius) ** 2 <= 60.0)
    assert_allclose(res.eigenvalues, oracle, rtol=1e-5)


def test_hemisphere_first_dirichlet_eigenvalue():
    assert spectral.first_dirichlet(geo.hemisphere()) == pytest.approx(2.0, rel=1e-6)


def test_dirichlet_requires_boundary():
    with pytest.raises(spectral.SpectralError):
        spectral.dirichlet_spectrum(geo.sphere())


# -- invariants --------------------------------------------------------------------


@settings(max_examples=10)
@given(st.floats(0.3, 4.0))
def test_homothety_scales_eigenvalues(c):
    base = spectral.spectrum(geo.spheroid(1.3, 1.0), lam_max=8.0, mesh_size=800, estimate=False)
    big = spectral.spectrum(geo.spheroid(1.3, 1.0).scaled(c), lam_max=8.0 / c**2, mesh_size=800,
                            estimate=False)
    tol = 1e-10 / c**2
    assert_allclose(big.eigenvalues, base.eigenvalues / c**2, rtol=1e-9, atol=tol)
    assert_allclose(base.scaled(c).eigenvalues, big.eigenvalues, rtol=1e-9, atol=tol)


@settings(max_examples=10)
@given(st.floats(0.5, 3.0), st.floats(1.05, 2.0))
def test_dirichlet_domain_monotonicity(L, stretch):
    short = spectral.first_dirichlet(geo.cylinder(L), mesh_size=400)
    long = spectral.first_dirichlet(geo.cylinder(L * stretch), mesh_size=400)
    assert long < short


def test_tube_dirichlet_decreases_with_bulb_radius():
    fam = spectral.bulb_family(0.05, 5.0)
    vals = [spectral.first_dirichlet(fam(R), 1500) for R in (0.1, 0.15, 0.2, 0.3)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_mesh_self_convergence_is_second_order():
    imm = geo.spheroid(1.3, 1.0)
    vals = [spectral.spectrum(imm, lam_max=8, mesh_size=N, estimate=False).eigenvalues[1]
            for N in (250, 500, 1000, 2000)]
    diffs = np.abs(np.diff(vals))
    ratios = diffs[:-1] / diffs[1:]
    assert np.all(ratios > 3.0) and np.all(ratios < 5.0)


def test_discretization_estimate_bounds_true_error():
    res = spectral.spectrum(geo.sphere(1.0), lam_max=13.0, mesh_size=1000)
    for e in res.entries:
        k = round((-1 + math.sqrt(1 + 4 * e.value)) / 2)
        err = abs(e.value - k * (k + 1)) / max(e.value, 1.0)
        assert err <= 10 * e.discretization + 1e-9


def test_spectrum_by_count_and_errors():
    res = spectral.spectrum(geo.sphere(1.0), count=9)
    assert res.eigenvalues.size >= 9
    with pytest.raises(spectral.SpectralError):
        spectral.spectrum(geo.sphere(1.0))


def test_fixed_modes_cap_the_certified_range():
    res = spectral.spectrum(geo.sphere(1.0), lam_max=50.0, modes=range(6))
    assert res.lam_max <= 36.0 + 1e-9
    assert {e.mode[0] for e in res.entries} <= set(range(6))


def test_csv_and_dict_outputs():
    res = spectral.spectrum(geo.sphere(1.0), lam_max=7.0)
    rows = res.to_csv().strip().splitlines()
    assert rows[0].startswith("index,eigenvalue")
    assert len(rows) == 1 + res.eigenvalues.size
    assert res.to_dict()["eigenvalues"] == res.eigenvalues.tolist()


# -- regression values (verified runs) ---------------------------------------------


# dumbbell(p=2, eps): lambda_1 and lambda_2 at mesh 2000
DUMBBELL = {
    0.2: (0.20024680975715659, 1.963565563176946),
    0.1: (0.15526833700939452, 1.984507975436002),
    0.05: (0.12742293081724182, 1.9947014426403276),
    0.025: (0.10824320844230817, 1.9983378693848453),
}


@pytest.mark.parametrize("eps", sorted(DUMBBELL))
def test_dumbbell_regression(eps):
    ev = spectral.spectrum(geo.dumbbell(2, eps), lam_max=3.0, mesh_size=2000).eigenvalues
    assert ev[0] == pytest.approx(0.0, abs=1e-9)
    assert ev[1] == pytest.approx(DUMBBELL[eps][0], rel=1e-8)
    assert ev[2] == pytest.approx(DUMBBELL[eps][1], rel=1e-8)


# -- Galerkin bounds -----------------------------------------------------------------


def test_galerkin_exact_on_sphere():
    g = spectral.galerkin_upper_bounds(geo.sphere(1.0), max_degree=3)
    expected = np.repeat([0.0, 2.0, 6.0, 12.0], [1, 3, 5, 7])
    assert_allclose(g.bounds, expected, atol=1e-10)


@pytest.mark.parametrize("a", [1.05, 1.3])
def test_galerkin_bounds_dominate_and_improve_with_degree(a):
    imm = geo.spheroid(a, 1.0)
    # the finite element values are upper bounds too; Richardson-extrapolate
    # the two meshes to get a reference that sits below both
    fine = spectral.spectrum(imm, lam_max=25.0, mesh_size=4000, estimate=False).eigenvalues
    coarse = spectral.spectrum(imm, lam_max=25.0, mesh_size=2000, estimate=False).eigenvalues
    exact = (4 * fine - coarse) / 3
    prev = None
    for K in (1, 2, 3):
        b = spectral.galerkin_upper_bounds(imm, max_degree=K).bounds
        assert np.all(b >= exact[: b.size] - 1e-9)
        if prev is not None:
            assert np.all(b[: prev.size] <= prev + 1e-9)
        prev = b
    if a == 1.05:
        assert np.all((prev - exact[: prev.size]) / np.maximum(exact[: prev.size], 1.0) < 0.05)


# -- residual norms --------------------------------------------------------------------


@pytest.mark.parametrize("k", [1, 2, 3])
def test_residual_vanishes_on_sphere(k):
    rep = spectral.residual_norm(geo.sphere(1.0), k, 0.2)
    assert rep.relative.max() < 1e-10
    assert rep.mass_deviation.max() < 1e-10
    assert rep.identity_gap < 1e-12


def test_residual_shrinks_with_pinching():
    rel = [spectral.residual_norm(geo.spheroid(1 + d, 1.0), 1, 0.3).relative.max()
           for d in (0.2, 0.1, 0.05)]
    assert rel[0] > rel[1] > rel[2]


def test_laplacian_routes_agree_off_the_sphere():
    rep = spectral.residual_norm(geo.spheroid(1.3, 1.0), 2, 0.3)
    assert rep.identity_gap < 1e-10


# -- neck tuning ------------------------------------------------------------------------


def test_cylinder_tuning():
    res = spectral.tune_neck(3.0, spectral.cylinder_family(), (0.5, 10.0))
    assert res.parameter == pytest.approx(math.pi / math.sqrt(3.0), abs=1e-5)
    assert res.eigenvalue == pytest.approx(3.0, rel=1e-6)


def test_tuning_without_bracket():
    with pytest.raises(spectral.SpectralError, match="no bracket"):
        spectral.tune_neck(3.0, spectral.cylinder_family(), (3.0, 10.0), mesh_size=400)


def test_added_eigenvalue_sits_below_target():
    a = spectral.added_eigenvalue(0.05, 2.5)
    assert a.dirichlet == pytest.approx(3.0, rel=1e-6)
    assert 2.0 < a.added <= 3.0
    assert a.gap == pytest.approx(3.0 - a.added)
