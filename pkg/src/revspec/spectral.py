"""Laplace-Beltrami spectra of warped products by separation of variables.

A revolution immersion carries the metric

    w(t)^2 dt^2 + R1(t)^2 g_{S^{p1}} + R2(t)^2 g_{S^{p2}}

and an eigenfunction u(t) Y_a Z_b (Y_a, Z_b fibre spherical harmonics)
reduces the eigenproblem to the Sturm-Liouville problem

    -(theta/w) u')' + theta w V u = lambda theta w u,
    theta = R1^p1 R2^p2,  V = a(a+p1-1)/R1^2 + b(b+p2-1)/R2^2,

discretized here with linear finite elements in t.  The Laplacian is the
positive one, so the round unit S^n has eigenvalues k(n+k-1).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy import optimize
from scipy.sparse.linalg import eigsh

from . import geometry as geo
from .harmonic_poly import build_basis, evaluate_jet, harmonic_dimension
from .quadrature import composite_nodes, gauss_legendre, sphere_rule, sphere_volume


class SpectralError(RuntimeError):
    pass


ZERO_THRESHOLD = 1e-9
POLE_GRADING = 24   # geometric refinement levels next to each pole


# --------------------------------------------------------------------------
# warped products


@dataclass(frozen=True)
class WarpedProduct:
    """Metric data of a (possibly singular) warped product over [t0, t1].

    ``coeffs(t)`` returns (w, R1, R2); ``ends`` tells for each end whether a
    fibre collapses there ("pole1", "pole2"), the end is a Dirichlet boundary
    ("boundary") or the meridian is periodic (``ends is None``).
    """

    p1: int
    p2: int
    breaks: tuple
    coeffs: Callable
    ends: tuple | None
    fibre_volume: float = 1.0
    monitor: Callable | None = None
    label: str = ""
    angular1: Callable | None = None

    @property
    def periodic(self) -> bool:
        return self.ends is None

    def angular(self, which: int, deg: int) -> float:
        if which == 1:
            if self.angular1 is not None:
                return self.angular1(deg)
            return deg * (deg + self.p1 - 1)
        return deg * (deg + self.p2 - 1)

    def multiplicity(self, a: int, b: int) -> int:
        m1 = harmonic_dimension(self.p1, a) if self.p1 > 0 else 1
        m2 = harmonic_dimension(self.p2, b) if self.p2 > 0 else 1
        return m1 * m2

    def radius_max(self):
        t = np.linspace(self.breaks[0], self.breaks[-1], 20001)
        _, R1, R2 = self.coeffs(t)
        return float(np.max(R1)), float(np.max(R2))


def _imm_coeffs(imm: geo.RevolutionImmersion):
    def coeffs(t):
        v = imm.eval_global(t)
        w = np.hypot(v[2], v[3])
        R1 = np.abs(v[0])
        R2 = np.abs(v[1]) if imm.p2 > 0 else np.ones_like(w)
        return w, R1, R2

    return coeffs


def warped_from_immersion(imm: geo.RevolutionImmersion) -> WarpedProduct:
    if imm.closed:
        ends = None
    else:
        kinds = imm.endpoint_kinds()
        ends = []
        for t, kind in zip((imm.breaks[0], imm.breaks[-1]), kinds):
            if kind == "boundary":
                ends.append("boundary")
            else:
                c1, c2 = imm.eval_global(t)[:2, 0]
                ends.append("pole1" if abs(c1) <= abs(c2) or imm.p2 == 0 else "pole2")
        ends = tuple(ends)
    tt = np.linspace(imm.breaks[0], imm.breaks[-1], 4001)
    length = float(np.trapezoid(imm.jet(tt).speed, tt))

    def monitor(t):
        jet = imm.jet(t)
        # resolve features of size 1/|B| (necks, thin tubes)
        return jet.speed * (1.0 + 0.5 * length / math.pi * jet.B_op)

    return WarpedProduct(imm.p1, imm.p2, tuple(imm.breaks), _imm_coeffs(imm), ends,
                         imm.fibre_volume, monitor, imm.info.get("constructor") or "immersion")


def model_metric(n: int, d: int) -> WarpedProduct:
    """dr^2 + d^2 sin^2 r g_{S^1} + cos^2 r g_{S^{n-2}} on [0, pi/2]."""
    if n < 3 or d < 1:
        raise SpectralError("model metric needs n >= 3 and d >= 1")

    def coeffs(t):
        t = np.asarray(t, dtype=float)
        return np.ones_like(t), d * np.sin(t), np.cos(t)

    return WarpedProduct(1, n - 2, (0.0, math.pi / 2), coeffs, ("pole1", "pole2"),
                         sphere_volume(1) * d * sphere_volume(n - 2), None,
                         f"model(n={n},d={d})")


# --------------------------------------------------------------------------
# mesh and assembly


@dataclass(frozen=True)
class RadialMesh:
    nodes: np.ndarray
    A: np.ndarray     # theta / w at element quadrature points, (E, q)
    B: np.ndarray     # theta * w
    R1: np.ndarray
    R2: np.ndarray
    xi: np.ndarray    # reference quadrature nodes in (0, 1)
    wq: np.ndarray


def _segment_nodes(wp: WarpedProduct, size: int) -> np.ndarray:
    br = np.asarray(wp.breaks, dtype=float)
    if wp.monitor is None:
        mass = np.diff(br)
        dens = None
    else:
        dens = []
        mass = []
        for a, b in zip(br[:-1], br[1:]):
            t = np.linspace(a, b, 4001)
            m = wp.monitor(t)
            cum = np.concatenate([[0.0], np.cumsum(0.5 * (m[1:] + m[:-1]) * np.diff(t))])
            dens.append((t, cum))
            mass.append(cum[-1])
        mass = np.asarray(mass)
    counts = np.maximum(4, np.round(size * mass / mass.sum()).astype(int))
    pieces = []
    for i, (a, b) in enumerate(zip(br[:-1], br[1:])):
        if dens is None:
            pts = np.linspace(a, b, counts[i] + 1)
        else:
            t, cum = dens[i]
            pts = np.interp(np.linspace(0, cum[-1], counts[i] + 1), cum, t)
            pts[0], pts[-1] = a, b
        pieces.append(pts if i == 0 else pts[1:])
    nodes = np.concatenate(pieces)
    if not wp.periodic:
        # eigenfunctions behave like r^alpha at a pole with alpha possibly
        # fractional (model metrics); geometric grading restores convergence
        extra = []
        for end, (t0, t1) in zip(wp.ends, ((nodes[0], nodes[1]), (nodes[-1], nodes[-2]))):
            if end != "boundary":
                extra.append(t0 + (t1 - t0) * 0.5 ** np.arange(1, POLE_GRADING + 1))
        if extra:
            nodes = np.sort(np.concatenate([nodes] + extra))
    return nodes


def build_mesh(wp: WarpedProduct, size: int, order: int = 4) -> RadialMesh:
    if size < 64:
        raise SpectralError("mesh_size must be >= 64")
    nodes = _segment_nodes(wp, size)
    h = np.diff(nodes)
    if np.any(h <= 0):
        raise SpectralError("degenerate mesh (non-increasing nodes)")
    x, wq = gauss_legendre(order)
    xi = 0.5 * (x + 1)
    wq = 0.5 * wq
    tq = nodes[:-1, None] + h[:, None] * xi[None, :]
    w, R1, R2 = wp.coeffs(tq.ravel())
    w, R1, R2 = (a.reshape(tq.shape) for a in (w, R1, R2))
    theta = R1**wp.p1 * R2**wp.p2
    if np.any(w <= 0) or np.any(theta <= 0):
        raise SpectralError("metric weights not positive at interior quadrature points")
    return RadialMesh(nodes, theta / w, theta * w, R1, R2, xi, wq)


@dataclass(frozen=True)
class RadialProblem:
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    active: np.ndarray      # indices of unconstrained nodes
    mode: tuple
    nodes: np.ndarray


def assemble_radial(wp: WarpedProduct, mode: tuple, mesh: RadialMesh | int) -> RadialProblem:
    if isinstance(mode, int):
        mode = (mode, 0)
    if isinstance(wp, geo.RevolutionImmersion):
        wp = warped_from_immersion(wp)
    if isinstance(mesh, (int, np.integer)):
        mesh = build_mesh(wp, int(mesh))
    a, b = mode
    if wp.p2 == 0 and b != 0:
        raise SpectralError("no second fibre: mode degree b must be 0")
    h = np.diff(mesh.nodes)
    lam1 = wp.angular(1, a)
    lam2 = wp.angular(2, b) if wp.p2 > 0 else 0.0
    V = lam1 / mesh.R1**2 + lam2 / mesh.R2**2
    Bv = mesh.B * V
    xi, wq = mesh.xi, mesh.wq
    phi0, phi1 = 1 - xi, xi
    kA = (mesh.A * wq).sum(1) / h
    m00 = (mesh.B * phi0**2) @ wq * h
    m01 = (mesh.B * phi0 * phi1) @ wq * h
    m11 = (mesh.B * phi1**2) @ wq * h
    v00 = (Bv * phi0**2) @ wq * h
    v01 = (Bv * phi0 * phi1) @ wq * h
    v11 = (Bv * phi1**2) @ wq * h
    N = mesh.nodes.size
    E = N - 1
    i0 = np.arange(E)
    i1 = i0 + 1
    if wp.periodic:
        i1 = np.where(i1 == N - 1, 0, i1)
        N = N - 1
    rows = np.concatenate([i0, i0, i1, i1])
    cols = np.concatenate([i0, i1, i0, i1])
    K = sp.coo_matrix((np.concatenate([kA + v00, -kA + v01, -kA + v01, kA + v11]), (rows, cols)),
                      shape=(N, N)).tocsr()
    M = sp.coo_matrix((np.concatenate([m00, m01, m01, m11]), (rows, cols)), shape=(N, N)).tocsr()
    drop = []
    if not wp.periodic:
        for idx, end in zip((0, N - 1), wp.ends):
            if end == "boundary" or (end == "pole1" and lam1 > 0) or (end == "pole2" and lam2 > 0):
                drop.append(idx)
    active = np.setdiff1d(np.arange(N), drop)
    K = K[active][:, active]
    M = M[active][:, active]
    return RadialProblem(K.tocsr(), M.tocsr(), active, (a, b), mesh.nodes)


def _lowest(prob: RadialProblem, lam_max: float, sigma: float, min_count: int = 0):
    """All generalized eigenvalues <= lam_max (and at least min_count of them)."""
    n = prob.stiffness.shape[0]
    if n <= 400:
        # shift-invert form: graded meshes make M nearly singular, K - sigma M is not
        K, M = prob.stiffness.toarray(), prob.mass.toarray()
        mu = sla.eigh(M, K - sigma * M, eigvals_only=True)
        mu = mu[mu > 0]
        vals = np.sort(sigma + 1.0 / mu)
        return vals[(vals <= lam_max) | (np.arange(vals.size) < min_count)]
    k = min(max(8, min_count + 2), n - 2)
    v0 = np.ones(n)
    while True:
        vals = eigsh(prob.stiffness, k=k, M=prob.mass, sigma=sigma, which="LM", v0=v0,
                     return_eigenvectors=False, tol=0)
        vals = np.sort(vals)
        if (vals[-1] > lam_max and k > min_count) or k >= n - 2:
            break
        k = min(2 * k, n - 2)
    return vals[(vals <= lam_max) | (np.arange(vals.size) < min_count)]


# --------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class Eigen:
    value: float
    multiplicity: int
    mode: tuple
    radial_index: int
    discretization: float   # relative error estimate


@dataclass(frozen=True)
class SpectrumResult:
    entries: tuple                   # distinct (per mode) eigenvalues, sorted
    completeness_bound: float
    lam_max: float
    label: str = ""
    mesh_size: int = 0

    @property
    def eigenvalues(self) -> np.ndarray:
        vals = [e.value for e in self.entries for _ in range(e.multiplicity)]
        return np.array(sorted(vals))

    @property
    def distinct(self) -> np.ndarray:
        return np.array([e.value for e in self.entries])

    def first_nonzero(self, scale: float = 1.0) -> float:
        for v in self.eigenvalues:
            if v > ZERO_THRESHOLD * scale:
                return float(v)
        raise SpectralError("no nonzero eigenvalue below the certified bound")

    def clustered(self, factor: float = 10.0, floor: float = 1e-7):
        """Merge per-mode eigenvalues that agree within factor x their error estimates."""
        groups = []
        for e in self.entries:
            tol_e = factor * e.discretization * max(abs(e.value), 1.0) + floor * max(abs(e.value), 1.0)
            if groups:
                g = groups[-1]
                if abs(e.value - g["value"]) <= max(tol_e, g["tol"]):
                    tot = g["multiplicity"] + e.multiplicity
                    g["value"] = (g["value"] * g["multiplicity"] + e.value * e.multiplicity) / tot
                    g["multiplicity"] = tot
                    g["tol"] = max(tol_e, g["tol"])
                    g["members"].append((e.mode, e.radial_index))
                    continue
            groups.append({"value": e.value, "multiplicity": e.multiplicity, "tol": tol_e,
                           "members": [(e.mode, e.radial_index)]})
        return [(g["value"], g["multiplicity"], g["members"]) for g in groups]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "mesh_size": self.mesh_size,
            "lam_max": self.lam_max,
            "completeness_bound": self.completeness_bound,
            "eigenvalues": self.eigenvalues.tolist(),
            "labels": [{"value": e.value, "multiplicity": e.multiplicity, "mode": list(e.mode),
                        "radial_index": e.radial_index, "discretization": e.discretization}
                       for e in self.entries],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf)
        wr.writerow(["index", "eigenvalue", "mode_a", "mode_b", "radial_index", "rel_error_estimate"])
        i = 0
        for e in self.entries:
            for _ in range(e.multiplicity):
                wr.writerow([i, repr(e.value), e.mode[0], e.mode[1], e.radial_index,
                             repr(e.discretization)])
                i += 1
        return buf.getvalue()

    def scaled(self, c: float) -> "SpectrumResult":
        """Spectrum of the c-homothetic space."""
        ents = tuple(Eigen(e.value / c**2, e.multiplicity, e.mode, e.radial_index, e.discretization)
                     for e in self.entries)
        return SpectrumResult(ents, self.completeness_bound / c**2, self.lam_max / c**2, self.label,
                              self.mesh_size)


def _mode_bound(wp: WarpedProduct, a: int, b: int, rmax) -> float:
    v = wp.angular(1, a) / rmax[0] ** 2
    if wp.p2 > 0:
        v += wp.angular(2, b) / rmax[1] ** 2
    return v


def _mode_list(wp: WarpedProduct, lam_max: float, modes=None):
    rmax = wp.radius_max()
    if modes is not None:
        modes = [(m, 0) if isinstance(m, (int, np.integer)) else tuple(m) for m in modes]
        amax = max(m[0] for m in modes)
        bmax = max(m[1] for m in modes)
        cands = [(amax + 1, 0)]
        if wp.p2 > 0:
            cands.append((0, bmax + 1))
        excluded = min(_mode_bound(wp, a, b, rmax) for a, b in cands)
        return modes, excluded
    included = []
    excluded = math.inf
    bmax_possible = 0 if wp.p2 == 0 else 10**6
    a = 0
    while True:
        if _mode_bound(wp, a, 0, rmax) > lam_max:
            excluded = min(excluded, _mode_bound(wp, a, 0, rmax))
            break
        b = 0
        while b <= bmax_possible:
            bound = _mode_bound(wp, a, b, rmax)
            if bound > lam_max:
                excluded = min(excluded, bound)
                break
            included.append((a, b))
            b += 1
        a += 1
    return included, excluded


def spectrum(target, lam_max: float | None = None, count: int | None = None,
             mesh_size: int = 2000, modes=None, estimate: bool = True) -> SpectrumResult:
    """Eigenvalues <= lam_max of a closed immersion or warped product.

    With ``count`` instead of ``lam_max``, lam_max is doubled until at least
    ``count`` eigenvalues (with multiplicity) are certified.
    """
    wp = warped_from_immersion(target) if isinstance(target, geo.RevolutionImmersion) else target
    if lam_max is None:
        if count is None:
            raise SpectralError("give lam_max or count")
        lam = 4.0 / max(wp.radius_max()) ** 2 + 1.0
        while True:
            res = spectrum(wp, lam, None, mesh_size, modes, estimate)
            if res.eigenvalues.size >= count:
                return res
            if modes is not None and lam > 1e6:
                raise SpectralError("requested count not certifiable under the fixed mode cutoff")
            lam *= 2
    mode_list, bound = _mode_list(wp, lam_max, modes)
    if bound <= lam_max and modes is not None:
        lam_cap = bound
    else:
        lam_cap = lam_max
    fine = build_mesh(wp, mesh_size)
    coarse = build_mesh(wp, max(64, mesh_size // 2)) if estimate else None
    sigma = -0.05 * max(lam_cap, 1.0 / max(wp.radius_max()) ** 2)
    entries = []
    for mode in mode_list:
        vals = _lowest(assemble_radial(wp, mode, fine), lam_cap, sigma)
        if vals.size == 0:
            continue
        if estimate:
            cvals = _lowest(assemble_radial(wp, mode, coarse), lam_cap, sigma, min_count=vals.size)
            est = np.abs(vals - cvals[: vals.size]) / 3.0 / np.maximum(np.abs(vals), 1.0)
        else:
            est = np.zeros_like(vals)
        mult = wp.multiplicity(*mode)
        for j, (v, e) in enumerate(zip(vals, est)):
            entries.append(Eigen(float(v), mult, tuple(int(x) for x in mode), j, float(e)))
    entries.sort(key=lambda e: (e.value, e.mode, e.radial_index))
    return SpectrumResult(tuple(entries), float(bound), float(lam_cap), wp.label, mesh_size)


def dirichlet_spectrum(target, count: int = 5, mesh_size: int = 2000, lam_max=None) -> SpectrumResult:
    """Spectrum with zero boundary values on the boundary circles of an open piece."""
    wp = warped_from_immersion(target) if isinstance(target, geo.RevolutionImmersion) else target
    if wp.periodic or "boundary" not in wp.ends:
        raise SpectralError("Dirichlet spectrum needs a piece with nonempty boundary")
    return spectrum(wp, lam_max=lam_max, count=None if lam_max else count, mesh_size=mesh_size)


def first_dirichlet(target, mesh_size: int = 2000) -> float:
    """Lowest Dirichlet eigenvalue (its mode is found by the spectrum cutoff)."""
    res = dirichlet_spectrum(target, count=1, mesh_size=mesh_size)
    return float(res.eigenvalues[0])


def model_metric_spectrum(n: int, d: int, count: int = 20, mesh_size: int = 2000,
                          lam_max: float | None = None) -> SpectrumResult:
    return spectrum(model_metric(n, d), lam_max=lam_max, count=None if lam_max else count,
                    mesh_size=mesh_size)


# --------------------------------------------------------------------------
# neck tuning


@dataclass(frozen=True)
class TuneResult:
    parameter: float
    eigenvalue: float
    target: float
    iterations: int


def tune_neck(target_lambda: float, family: Callable, bracket: tuple, mesh_size: int = 2000,
              rtol: float = 1e-6) -> TuneResult:
    """Parameter p in ``bracket`` with lambda_1^D(family(p)) = target_lambda."""
    lo, hi = bracket
    calls = [0]

    def f(p):
        calls[0] += 1
        return first_dirichlet(family(p), mesh_size) - target_lambda

    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise SpectralError(
            f"no bracket: lambda_1^D - target has the same sign at both ends "
            f"({flo + target_lambda:.6g}, {fhi + target_lambda:.6g}) vs target {target_lambda}")
    p = optimize.brentq(f, lo, hi, xtol=1e-14, rtol=rtol * 1e-3, maxiter=200)
    return TuneResult(float(p), float(f(p) + target_lambda), target_lambda, calls[0])


def cylinder_family(radius: float = 1.0, n: int = 2):
    return lambda L: geo.cylinder(L, radius, n)


def bulb_family(rho: float, L: float, fillet: float | None = None, n: int = 2):
    """Tube of radius rho and length rho*L ending in a bulb, as a function of the
    bulb radius; Dirichlet condition at the base of the tube."""
    return lambda R: geo.tube_piece(geo.sphere_with_tube(rho, rho * L, fillet, R, n))


@dataclass(frozen=True)
class AddedEigenvalue:
    rho: float
    L: float
    bulb: float
    dirichlet: float
    added: float
    gap: float
    constant: float   # C(M1) realized by the gap: gap * sqrt(L) / (1 + target)

    def as_dict(self):
        return dict(self.__dict__)


def added_eigenvalue(rho: float, L: float, target: float = 3.0, fillet: float | None = None,
                     n: int = 2, mesh_size: int = 3000, bracket=None) -> AddedEigenvalue:
    """Tune the bulb so the tube has lambda_1^D = target, glue it to the unit
    sphere and return the eigenvalue of the closed surface closest to target
    in the rotation-invariant mode."""
    bracket = bracket or (1.05 * rho, 0.9)
    tuned = tune_neck(target, bulb_family(rho, L, fillet, n), bracket, mesh_size)
    closed = geo.sphere_with_tube(rho, rho * L, fillet, tuned.parameter, n)
    wp = warped_from_immersion(closed)
    vals = _lowest(assemble_radial(wp, (0, 0), build_mesh(wp, mesh_size)), 2 * target + 10, -1.0)
    lam = float(vals[np.argmin(np.abs(vals - target))])
    gap = target - lam
    return AddedEigenvalue(rho, L, tuned.parameter, tuned.eigenvalue, lam, gap,
                           gap * math.sqrt(L) / (1 + target))


# --------------------------------------------------------------------------
# full-dimensional quadrature on a revolution immersion


@dataclass(frozen=True)
class FullQuadrature:
    X: np.ndarray        # (Q, n+1), recentred at the mean position
    nu: np.ndarray       # (Q, n+1)
    H: np.ndarray        # (Q,)
    weight: np.ndarray   # (Q,), normalized to sum 1
    volume: float


def full_quadrature(imm: geo.RevolutionImmersion, fibre_degree: int, panels: int = 12,
                    order: int = 20) -> FullQuadrature:
    q = imm.quadrature(panels, order)
    c1, c2 = q.jet.position
    c2 = c2 - imm.axial_mean
    N1, N2 = q.jet.unit_normal
    Yn, Yw = sphere_rule(imm.p1, fibre_degree)
    Zn, Zw = sphere_rule(imm.p2, fibre_degree)
    # axis case: Z = [+1] with weight 1; c2 is signed
    P = c1.size
    nY, nZ = len(Yw), len(Zw)
    X = np.concatenate([
        (c1[:, None, None, None] * Yn[None, :, None, :]).repeat(nZ, axis=2),
        (c2[:, None, None, None] * Zn[None, None, :, :]).repeat(nY, axis=1),
    ], axis=3).reshape(P * nY * nZ, -1)
    nu = np.concatenate([
        (N1[:, None, None, None] * Yn[None, :, None, :]).repeat(nZ, axis=2),
        (N2[:, None, None, None] * Zn[None, None, :, :]).repeat(nY, axis=1),
    ], axis=3).reshape(P * nY * nZ, -1)
    w = (q.weight[:, None, None] * Yw[None, :, None] * Zw[None, None, :]).ravel()
    H = np.repeat(q.jet.mean_curvature, nY * nZ)
    return FullQuadrature(X, nu, H, w / w.sum(), q.volume)


# --------------------------------------------------------------------------
# Galerkin upper bounds


@dataclass(frozen=True)
class GalerkinResult:
    bounds: np.ndarray
    max_degree: int
    mass_condition: float


def galerkin_upper_bounds(imm: geo.RevolutionImmersion, max_degree: int = 3,
                          cond_limit: float = 1e12) -> GalerkinResult:
    """Rayleigh-Ritz bounds from restrictions of harmonic polynomials of degree <= K."""
    n = imm.n
    fq = full_quadrature(imm, 2 * max_degree + 2)
    vals, grads = [], []
    for k in range(max_degree + 1):
        jet = evaluate_jet(build_basis(n, k), fq.X)
        vals.append(jet.values)
        grads.append(jet.gradients)
    V = np.concatenate(vals, axis=1)            # (Q, m)
    G = np.concatenate(grads, axis=1)           # (Q, m, N)
    Gn = np.einsum("qmj,qj->qm", G, fq.nu)
    GT = G - Gn[:, :, None] * fq.nu[:, None, :]
    w = fq.weight
    M = (V * w[:, None]).T @ V
    S = np.einsum("q,qaj,qbj->ab", w, GT, GT)
    M = 0.5 * (M + M.T)
    S = 0.5 * (S + S.T)
    ev = np.linalg.eigvalsh(M)
    cond = ev[-1] / max(ev[0], 1e-300)
    if ev[0] <= 0 or cond > cond_limit:
        raise SpectralError(f"mass matrix rank deficient (condition {cond:.3e})")
    bounds = sla.eigh(S, M, eigvals_only=True)
    bounds[np.abs(bounds) < 1e-12 * max(1.0, bounds[-1])] = 0.0
    return GalerkinResult(np.sort(bounds), max_degree, float(cond))


# --------------------------------------------------------------------------
# residual norms of the cut-off harmonic polynomials


@dataclass(frozen=True)
class ResidualReport:
    degree: int
    eta: float
    mu: float                 # k(n+k-1) ||H||_2^2
    relative: np.ndarray      # ||Delta(phi P) - mu phi P||_2 / ||phi P||_2, per basis element
    mass_deviation: np.ndarray  # | ||H||^{2k} ||phi P||_2^2 - ||P||_{S^n}^2 |
    identity_gap: float       # max |Delta P (Z form) - Delta P (nu form)|

    def as_dict(self):
        return {"degree": self.degree, "eta": self.eta, "mu": self.mu,
                "relative_max": float(self.relative.max()),
                "relative": self.relative.tolist(),
                "mass_deviation_max": float(self.mass_deviation.max()),
                "identity_gap": self.identity_gap}


def laplacian_of_polynomial(jet, X, nu, H, n: int, k: int):
    """Delta P on M in the Z = nu - H X form and in the nu form (two routes)."""
    P = jet.values
    g = jet.gradients
    Hs = jet.hessians
    Z = nu - H[:, None] * X
    mu = k * (n + k - 1)
    dPZ = np.einsum("qmj,qj->qm", g, Z)
    hZZ = np.einsum("qmij,qi,qj->qm", Hs, Z, Z)
    z_form = mu * (H**2)[:, None] * P + (n + 2 * k - 2) * H[:, None] * dPZ + hZZ
    dPn = np.einsum("qmj,qj->qm", g, nu)
    hnn = np.einsum("qmij,qi,qj->qm", Hs, nu, nu)
    nu_form = n * H[:, None] * dPn + hnn
    return z_form, nu_form


def residual_norm(imm: geo.RevolutionImmersion, k: int, eta: float,
                  outer: float | None = None) -> ResidualReport:
    n = imm.n
    fq = full_quadrature(imm, 2 * k + 8, panels=24)
    X, nu, H, w = fq.X, fq.nu, fq.H, fq.weight
    h2 = math.sqrt(float(np.dot(w, H**2)))
    cut = geo.BandCutoff(h2, eta, outer if outer is not None else 2 * eta)
    s = np.einsum("qj,qj->q", X, X)
    psi, d1, d2 = cut(s)
    xn = np.einsum("qj,qj->q", X, nu)
    XT = X - xn[:, None] * nu
    XT2 = np.maximum(s - xn**2, 0.0)
    lap_phi = -4 * d2 * XT2 + d1 * (2 * n * H * xn - 2 * n)
    jet = evaluate_jet(build_basis(n, k), X)
    lapP, lapP2 = laplacian_of_polynomial(jet, X, nu, H, n, k)
    dP_XT = np.einsum("qmj,qj->qm", jet.gradients, XT)
    P = jet.values
    lap = P * lap_phi[:, None] - 2 * (2 * d1[:, None] * dP_XT) + psi[:, None] * lapP
    mu = k * (n + k - 1) * h2**2
    res = lap - mu * psi[:, None] * P
    num = np.sqrt(w @ res**2)
    den = np.sqrt(w @ (psi[:, None] * P) ** 2)
    rel = num / np.maximum(den, 1e-300)
    mass_dev = np.abs(h2 ** (2 * k) * den**2 - 1.0)
    gap = float(np.max(np.abs(lapP - lapP2)) / max(1.0, float(np.max(np.abs(lapP2)))))
    return ResidualReport(k, eta, mu, rel, mass_dev, gap)
