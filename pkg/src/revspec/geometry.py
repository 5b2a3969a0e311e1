"""Hypersurfaces of revolution in R^{n+1} and their extrinsic geometry.

Every immersion here is described by a meridian curve t -> (c1(t), c2(t))
in a half plane, swept by two fibre spheres:

    X(t, Y, Z) = center + (c1(t) Y, c2(t) Z),   Y in S^{p1}, Z in S^{p2}

with n = p1 + p2 + 1.  ``p2 = 0`` is the generatrix case: c2 is then a signed
coordinate along the symmetry axis and there is no second fibre.  The unit
normal is (N1 Y, N2 Z) with (N1, N2) = (-c2', c1') / |c'|, so the meridian
must be traversed in the direction that makes it point outward.

Principal curvatures (with respect to that normal):
    meridian direction, once:   (c1'' c2' - c2'' c1') / |c'|^3
    Y-fibre, p1 times:          N1 / c1
    Z-fibre, p2 times:          N2 / c2
Mean curvature H is their weighted average, so a unit sphere has H = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate as sp_integrate
from scipy import optimize
from scipy.interpolate import CubicSpline

from .quadrature import composite_nodes, gauss_legendre, sphere_volume


class GeometryError(ValueError):
    pass


# --------------------------------------------------------------------------
# profiles phi(r) for the bi-spherical construction


@dataclass(frozen=True)
class ConstantProfile:
    value: float = 0.0
    eps: float = 0.0
    kind: str = "constant"

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.full_like(r, self.value), np.zeros_like(r), np.zeros_like(r)

    @property
    def b(self) -> float:
        return self.value

    def describe(self) -> dict:
        return {"kind": self.kind, "value": self.value}


@dataclass(frozen=True)
class SplineProfile:
    """phi given by a natural cubic spline through (knots, values)."""

    knots: tuple
    values: tuple
    eps: float = 0.0
    kind: str = "spline"

    @cached_property
    def _spline(self):
        return CubicSpline(np.asarray(self.knots), np.asarray(self.values), bc_type="natural")

    def __call__(self, r):
        s = self._spline
        r = np.asarray(r, dtype=float)
        return s(r), s(r, 1), s(r, 2)

    @property
    def b(self) -> float:
        return float(np.max(np.abs(self.values)))

    def describe(self) -> dict:
        return {"kind": self.kind, "knots": list(self.knots), "values": list(self.values)}


def _neck_height(u, eps: float, m: int):
    """(eps/m) * integral_0^u cosh(v)^(1/m - 1) dv, odd in u.

    For m = 1 this is eps*u.  Otherwise composite Gauss-Legendre on panels of
    width <= 1/2, where the integrand is analytic well beyond the panel.
    """
    u = np.asarray(u, dtype=float)
    if m == 1:
        return eps * u
    expo = 1.0 / m - 1.0
    au = np.abs(u).ravel()
    npan = max(1, int(math.ceil(au.max(initial=0.0) / 0.5)))
    x, w = gauss_legendre(20)
    j = np.arange(npan)
    # nodes: (points, panels, order)
    loc = (j[None, :, None] + 0.5 * (x[None, None, :] + 1.0)) / npan
    v = au[:, None, None] * loc
    vals = np.cosh(v) ** expo
    out = (vals * w[None, None, :]).sum(axis=(1, 2)) * 0.5 * au / npan
    return (eps / m) * np.sign(u) * out.reshape(u.shape)


@dataclass(frozen=True)
class CatenoidalProfile:
    """Three-piece neck profile on [eps, pi/2].

    On [eps, a+eps] phi solves phi'' = -m (1+phi'^2) phi'/r with phi(eps) = 0
    and phi' -> +inf at eps (m = n-k-1); explicitly
    phi(r) = eps * int_1^{r/eps} dt / sqrt(t^(2m) - 1).
    On [a+eps, 2a+eps] a concave quartic bridge u with u'' = (1-s)(A + c s)
    (s the rescaled abscissa) matches value, slope and curvature at a+eps and
    flattens with zero slope and curvature onto the constant b at 2a+eps.
    """

    n: int
    k: int
    eps: float
    a: float
    kind: str = "catenoidal"

    def __post_init__(self):
        if not (0 <= self.k <= self.n - 2):
            raise GeometryError(f"need 0 <= k <= n-2, got n={self.n}, k={self.k}")
        if not (0 < self.eps < self.a < math.pi / 10):
            raise GeometryError(
                f"need 0 < eps < a < pi/10, got eps={self.eps}, a={self.a}")
        A, c, D = self._bridge_coefficients()
        if not A < 0:
            raise GeometryError("bridge not concave: phi'' at a+eps must be negative")
        if not A + c < 0:
            raise GeometryError(
                "no concave C2 bridge: |phi''(a+eps)| exceeds 3 phi'(a+eps)/a "
                f"(phi''={A:.4g}, phi'={D:.4g})")

    @property
    def m(self) -> int:
        return self.n - self.k - 1

    # neck piece ------------------------------------------------------------
    def neck_value(self, r):
        r = np.asarray(r, dtype=float)
        tau = r / self.eps
        if self.m == 1:
            return self.eps * np.arccosh(tau)
        u = np.arccosh(tau ** self.m)
        return _neck_height(u, self.eps, self.m)

    def neck_value_quad(self, r: float) -> float:
        """Adaptive-quadrature evaluation of the defining integral (cosh substitution)."""
        m = self.m
        U = math.acosh((r / self.eps) ** m)
        val, _ = sp_integrate.quad(lambda v: math.cosh(v) ** (1.0 / m - 1.0), 0.0, U,
                                   epsabs=1e-14, epsrel=1e-13, limit=200)
        return self.eps * val / m

    def neck_slope(self, r):
        tau = np.asarray(r, dtype=float) / self.eps
        with np.errstate(divide="ignore"):
            return 1.0 / np.sqrt(tau ** (2 * self.m) - 1.0)

    def neck_curvature(self, r):
        r = np.asarray(r, dtype=float)
        d = self.neck_slope(r)
        return -self.m * (1.0 + d * d) * d / r

    @cached_property
    def u_max(self) -> float:
        return float(np.arccosh(((self.a + self.eps) / self.eps) ** self.m))

    def neck_by_u(self, u):
        """(r, r_u, r_uu, h, h_u, h_uu) along the smooth neck parameter u.

        r = eps cosh(u)^(1/m) and h = +-phi; u > 0 is the + sheet.
        """
        u = np.asarray(u, dtype=float)
        m, e = self.m, self.eps
        ch, sh = np.cosh(u), np.sinh(u)
        q = 1.0 / m
        r = e * ch ** q
        r_u = e * q * ch ** (q - 1) * sh
        r_uu = e * q * ((q - 1) * ch ** (q - 2) * sh * sh + ch ** q)
        h = _neck_height(u, e, m)
        h_u = e * q * ch ** (q - 1)
        h_uu = e * q * (q - 1) * ch ** (q - 2) * sh
        return r, r_u, r_uu, h, h_u, h_uu

    def inverse(self, t):
        """phi~(t) = phi^{-1}(|t|) with first and second derivative (neck piece only)."""
        t = np.asarray(t, dtype=float)
        if self.m == 1:
            y = self.eps * np.cosh(t / self.eps)
            return y, np.sinh(t / self.eps), np.cosh(t / self.eps) / self.eps
        at = np.abs(t)
        r = np.array([optimize.brentq(lambda rr: float(self.neck_value(rr)) - tt,
                                      self.eps, self.a + self.eps, xtol=1e-15)
                      if tt > 0 else self.eps for tt in at.ravel()]).reshape(t.shape)
        y1 = np.sign(t) * np.sqrt((r / self.eps) ** (2 * self.m) - 1.0)
        y2 = self.m * (1 + y1 ** 2) / r
        return r, y1, y2

    # bridge ----------------------------------------------------------------
    def _bridge_coefficients(self):
        r0 = self.a + self.eps
        D = float(self.neck_slope(r0))
        A = float(self.neck_curvature(r0))
        c = -6.0 * D / self.a - 3.0 * A
        return A, c, D

    @cached_property
    def f_end(self) -> float:
        return float(self.neck_value(self.a + self.eps))

    @cached_property
    def b(self) -> float:
        A, c, D = self._bridge_coefficients()
        a = self.a
        return self.f_end + a * (D + a * (A / 2 + (c - A) / 6 - c / 12))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        phi = np.empty_like(r)
        d1 = np.empty_like(r)
        d2 = np.empty_like(r)
        e, a = self.eps, self.a
        neck = r <= a + e
        mid = (r > a + e) & (r < 2 * a + e)
        flat = r >= 2 * a + e
        if np.any(neck):
            rn = r[neck]
            phi[neck] = self.neck_value(rn)
            d1[neck] = self.neck_slope(rn)
            d2[neck] = self.neck_curvature(rn)
        if np.any(mid):
            A, c, D = self._bridge_coefficients()
            s = (r[mid] - a - e) / a
            phi[mid] = self.f_end + a * (D * s + a * (A * s**2 / 2 + (c - A) * s**3 / 6
                                                       - c * s**4 / 12))
            d1[mid] = D + a * (A * s + (c - A) * s**2 / 2 - c * s**3 / 3)
            d2[mid] = A + (c - A) * s - c * s**2
        phi[flat] = self.b
        d1[flat] = 0.0
        d2[flat] = 0.0
        return phi, d1, d2

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.n, "k": self.k, "eps": self.eps, "a": self.a,
                "b": self.b}


def catenoidal_profile(n: int, k: int, eps: float, a: float) -> CatenoidalProfile:
    return CatenoidalProfile(n, k, eps, a)


# --------------------------------------------------------------------------
# meridian segments.  eval(t) -> array (6, P): c1, c2, c1', c2', c1'', c2''


@dataclass(frozen=True)
class ArcSegment:
    """Circle arc (cc1 + R sin th, cc2 + R cos th), th = th0 + s t.

    s = +1 bends away from the centre's side of the normal (convex), s = -1
    traverses backwards so the normal faces the centre (concave fillet).
    """

    cc1: float
    cc2: float
    radius: float
    th0: float
    th1: float

    @property
    def t0(self):
        return 0.0

    @property
    def t1(self):
        return abs(self.th1 - self.th0) * self.radius

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        s = 1.0 if self.th1 >= self.th0 else -1.0
        R = self.radius
        th = self.th0 + s * t / R
        sn, cs = np.sin(th), np.cos(th)
        return np.array([
            self.cc1 + R * sn, self.cc2 + R * cs,
            s * cs, -s * sn,
            -sn / R, -cs / R,
        ])

    def describe(self):
        return {"type": "arc", "center": [self.cc1, self.cc2], "radius": self.radius,
                "theta": [self.th0, self.th1]}


@dataclass(frozen=True)
class LineSegment:
    p0: tuple
    p1: tuple

    @property
    def t0(self):
        return 0.0

    @property
    def t1(self):
        return float(np.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1]))

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        L = self.t1
        d1 = (self.p1[0] - self.p0[0]) / L
        d2 = (self.p1[1] - self.p0[1]) / L
        z = np.zeros_like(t)
        return np.array([self.p0[0] + d1 * t, self.p0[1] + d2 * t, z + d1, z + d2, z, z])

    def describe(self):
        return {"type": "line", "from": list(self.p0), "to": list(self.p1)}


@dataclass(frozen=True)
class CatenoidSegment:
    """rho = w cosh(u), x = x_mid - w u, for u in [u0, u1] (x decreasing)."""

    waist: float
    x_mid: float
    u0: float
    u1: float

    @property
    def t0(self):
        return self.u0

    @property
    def t1(self):
        return self.u1

    def eval(self, u):
        u = np.asarray(u, dtype=float)
        w = self.waist
        ch, sh = np.cosh(u), np.sinh(u)
        z = np.zeros_like(u)
        return np.array([w * ch, self.x_mid - w * u, w * sh, z - w, w * ch, z])

    def describe(self):
        return {"type": "catenoid", "waist": self.waist, "x_mid": self.x_mid,
                "u": [self.u0, self.u1]}


@dataclass(frozen=True)
class EllipseSegment:
    """(b sin t, a cos t) for t in [t0, t1]; a is the axial semi-axis."""

    a_axis: float
    b_axis: float
    t0: float = 0.0
    t1: float = math.pi

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        a, b = self.a_axis, self.b_axis
        sn, cs = np.sin(t), np.cos(t)
        return np.array([b * sn, a * cs, b * cs, -a * sn, -b * sn, -a * cs])

    def describe(self):
        return {"type": "ellipse", "a_axis": self.a_axis, "b_axis": self.b_axis,
                "t": [self.t0, self.t1]}


@dataclass(frozen=True)
class ProfileSegment:
    """Sheet g(r) (sin r, z cos r) with g = 1 + branch*phi(r), r running r_start -> r_end."""

    profile: object
    branch: int
    zsign: int
    r_start: float
    r_end: float

    @property
    def t0(self):
        return 0.0

    @property
    def t1(self):
        return abs(self.r_end - self.r_start)

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        d = 1.0 if self.r_end >= self.r_start else -1.0
        r = self.r_start + d * t
        phi, p1, p2 = self.profile(r)
        s = self.branch
        g, g1, g2 = 1 + s * phi, s * p1, s * p2
        sn, cs = np.sin(r), np.cos(r)
        z = self.zsign
        c1 = g * sn
        c2 = z * g * cs
        c1r = g1 * sn + g * cs
        c2r = z * (g1 * cs - g * sn)
        c1rr = g2 * sn + 2 * g1 * cs - g * sn
        c2rr = z * (g2 * cs - 2 * g1 * sn - g * cs)
        return np.array([c1, c2, d * c1r, d * c2r, c1rr, c2rr])

    def describe(self):
        return {"type": "sheet", "branch": self.branch, "z": self.zsign,
                "r": [self.r_start, self.r_end]}


@dataclass(frozen=True)
class NeckSegment:
    """The junction of the two sheets, parametrized by the smooth neck variable u."""

    profile: CatenoidalProfile
    zsign: int
    u_start: float
    u_end: float

    @property
    def t0(self):
        return 0.0

    @property
    def t1(self):
        return abs(self.u_end - self.u_start)

    def eval(self, t):
        t = np.asarray(t, dtype=float)
        d = 1.0 if self.u_end >= self.u_start else -1.0
        u = self.u_start + d * t
        r, r1, r2, h, h1, h2 = self.profile.neck_by_u(u)
        g = 1 + h
        sn, cs = np.sin(r), np.cos(r)
        z = self.zsign
        c1 = g * sn
        c2 = z * g * cs
        c1u = h1 * sn + g * cs * r1
        c2u = z * (h1 * cs - g * sn * r1)
        c1uu = h2 * sn + 2 * h1 * cs * r1 - g * sn * r1**2 + g * cs * r2
        c2uu = z * (h2 * cs - 2 * h1 * sn * r1 - g * cs * r1**2 - g * sn * r2)
        return np.array([c1, c2, d * c1u, d * c2u, c1uu, c2uu])

    def describe(self):
        return {"type": "neck", "z": self.zsign, "u": [self.u_start, self.u_end]}


@dataclass(frozen=True)
class ScaledSegment:
    base: object
    factor: float

    @property
    def t0(self):
        return self.base.t0

    @property
    def t1(self):
        return self.base.t1

    def eval(self, t):
        v = self.base.eval(t)
        # parameter kept, so first derivatives scale with lengths and the
        # second ones too
        return self.factor * v

    def describe(self):
        return {"type": "scaled", "factor": self.factor, "base": self.base.describe()}


# --------------------------------------------------------------------------
# samples and jets


@dataclass(frozen=True)
class GeometryJet:
    """Pointwise extrinsic data along the meridian (arrays, one entry per parameter)."""

    position: np.ndarray          # (2, P) meridian coordinates (c1, c2)
    unit_normal: np.ndarray       # (2, P) meridian components (N1, N2)
    mean_curvature: np.ndarray    # (P,)
    principal_curvatures: np.ndarray  # (3, P): meridian, Y-fibre, Z-fibre
    multiplicities: tuple         # (1, p1, p2)
    B_op: np.ndarray
    B_frob: np.ndarray
    volume_density: np.ndarray    # per unit fibre measure and unit parameter
    speed: np.ndarray


def jet_from_values(v: np.ndarray, p1: int, p2: int) -> GeometryJet:
    c1, c2, d1, d2, e1, e2 = v
    w = np.hypot(d1, d2)
    N1, N2 = -d2 / w, d1 / w
    k0 = (e1 * d2 - e2 * d1) / w**3
    with np.errstate(divide="ignore", invalid="ignore"):
        k1 = np.where(np.abs(c1) > 1e-300, N1 / c1, k0) if p1 else np.zeros_like(c1)
        k2 = np.where(np.abs(c2) > 1e-300, N2 / c2, k0) if p2 else np.zeros_like(c2)
    n = 1 + p1 + p2
    H = (k0 + p1 * k1 + p2 * k2) / n
    kap = np.array([k0, k1, k2])
    absk = [np.abs(k0)]
    if p1:
        absk.append(np.abs(k1))
    if p2:
        absk.append(np.abs(k2))
    Bop = np.max(np.array(absk), axis=0)
    Bf = np.sqrt(k0**2 + p1 * k1**2 + p2 * k2**2)
    theta = np.abs(c1) ** p1 * np.abs(c2) ** p2 * w
    return GeometryJet(np.array([c1, c2]), np.array([N1, N2]), H, kap, (1, p1, p2),
                       Bop, Bf, theta, w)


@dataclass(frozen=True)
class Quadrature:
    """Nodes along the meridian with weights for integrals over M."""

    t: np.ndarray          # global parameter
    seg: np.ndarray        # segment index
    weight: np.ndarray     # includes fibre volumes and density
    jet: GeometryJet

    @property
    def volume(self) -> float:
        return float(self.weight.sum())

    def mean(self, values) -> float:
        return float(np.dot(self.weight, values) / self.weight.sum())


# --------------------------------------------------------------------------
# immersions


@dataclass(frozen=True)
class RevolutionImmersion:
    n: int
    p1: int
    p2: int
    segments: tuple
    closed: bool = False
    variant: str = "generatrix"
    center: tuple = ()
    info: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.p1 < 1 or self.p2 < 0 or self.n != self.p1 + self.p2 + 1:
            raise GeometryError("fibre dimensions inconsistent with n")
        if not self.center:
            object.__setattr__(self, "center", tuple([0.0] * (self.n + 1)))
        if len(self.center) != self.n + 1:
            raise GeometryError("center must have n+1 coordinates")
        self._validate()

    # -- structure ---------------------------------------------------------
    @property
    def axis_index(self) -> int:
        return self.n  # last ambient coordinate carries c2 when p2 == 0

    @cached_property
    def breaks(self) -> np.ndarray:
        lengths = [s.t1 - s.t0 for s in self.segments]
        return np.concatenate([[0.0], np.cumsum(lengths)])

    def eval_segment(self, i: int, tglob):
        s = self.segments[i]
        return s.eval(np.asarray(tglob) - self.breaks[i] + s.t0)

    def eval_global(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(self.breaks, t, side="right") - 1, 0, len(self.segments) - 1)
        out = np.empty((6, t.size))
        for i in np.unique(idx):
            sel = idx == i
            out[:, sel] = self.eval_segment(i, t[sel])
        return out

    def jet(self, t) -> GeometryJet:
        return jet_from_values(self.eval_global(t), self.p1, self.p2)

    def curvature_at(self, t) -> GeometryJet:
        return self.jet(t)

    @property
    def fibre_volume(self) -> float:
        return sphere_volume(self.p1) * sphere_volume(self.p2)

    def endpoint_kinds(self):
        """('pole' | 'boundary', ...) for the two meridian ends; None if closed."""
        if self.closed:
            return None
        kinds = []
        for t in (self.breaks[0], self.breaks[-1]):
            c1, c2 = self.eval_global(t)[:2, 0]
            scale = 1e-9 * max(1.0, float(np.max(np.abs(self.eval_global(self.breaks)[:2]))))
            if abs(c1) < scale or (self.p2 > 0 and abs(c2) < scale):
                kinds.append("pole")
            else:
                kinds.append("boundary")
        return tuple(kinds)

    @property
    def is_closed_surface(self) -> bool:
        return self.closed or self.endpoint_kinds() == ("pole", "pole")

    def _validate(self):
        t = np.linspace(self.breaks[0], self.breaks[-1], 4001)
        v = self.eval_global(t)
        c1 = v[0]
        if np.any(c1 < -1e-12):
            raise GeometryError("orbit radius c1 must be >= 0")
        if self.p2 > 0 and np.any(v[1] < -1e-12):
            raise GeometryError("second fibre radius c2 must be >= 0")
        scale = max(1.0, float(np.max(np.abs(v[:2]))))
        interior = t[1:-1]
        vi = v[:, 1:-1]
        small = np.abs(vi[0]) < 1e-9 * scale
        if self.p2 > 0:
            small |= np.abs(vi[1]) < 1e-9 * scale
        if np.any(small):
            raise GeometryError(f"interior pole near parameter {interior[small][0]:.6g}")
        # junction continuity (C1 up to reparametrization)
        for i in range(len(self.segments) - 1):
            a = self.eval_segment(i, self.breaks[i + 1])
            b = self.eval_segment(i + 1, self.breaks[i + 1])
            if np.max(np.abs(a[:2] - b[:2])) > 1e-8 * scale:
                raise GeometryError(f"segments {i} and {i + 1} do not meet")
            ta = a[2:4] / np.hypot(*a[2:4])
            tb = b[2:4] / np.hypot(*b[2:4])
            if np.max(np.abs(ta - tb)) > 1e-6:
                raise GeometryError(f"tangent jump between segments {i} and {i + 1}")

    # -- quadrature ----------------------------------------------------------
    def quadrature(self, panels: int = 12, order: int = 20) -> Quadrature:
        return self._quadrature(panels, order)

    def _quadrature(self, panels, order):
        key = (panels, order)
        cache = self.__dict__.setdefault("_qcache", {})
        if key in cache:
            return cache[key]
        ts, segs, ws = [], [], []
        for i, s in enumerate(self.segments):
            t, w = composite_nodes(self.breaks[i], self.breaks[i + 1], panels, order)
            ts.append(t)
            segs.append(np.full(t.size, i))
            ws.append(w)
        t = np.concatenate(ts)
        seg = np.concatenate(segs)
        v = np.empty((6, t.size))
        for i in range(len(self.segments)):
            sel = seg == i
            v[:, sel] = self.eval_segment(i, t[sel])
        jet = jet_from_values(v, self.p1, self.p2)
        weight = np.concatenate(ws) * jet.volume_density * self.fibre_volume
        q = Quadrature(t, seg, weight, jet)
        cache[key] = q
        return q

    @cached_property
    def volume(self) -> float:
        return self.quadrature().volume

    @cached_property
    def axial_mean(self) -> float:
        """Axial offset of the mean position (zero when a second fibre exists)."""
        if self.p2 > 0:
            return 0.0
        q = self.quadrature()
        return q.mean(q.jet.position[1])

    @property
    def mean_position(self) -> np.ndarray:
        out = np.array(self.center, dtype=float)
        out[self.axis_index] += self.axial_mean
        return out

    def recentred_fields(self, q: Quadrature | None = None, origin_offset: float | None = None):
        """|X|^2 and <X, nu> in coordinates centred at the mean position."""
        q = q or self.quadrature()
        off = self.axial_mean if origin_offset is None else origin_offset
        c1, c2 = q.jet.position
        c2 = c2 - off
        N1, N2 = q.jet.unit_normal
        return c1**2 + c2**2, c1 * N1 + c2 * N2

    # -- transforms ------------------------------------------------------------
    def scaled(self, factor: float) -> "RevolutionImmersion":
        segs = tuple(ScaledSegment(s, factor) for s in self.segments)
        center = tuple(factor * c for c in self.center)
        info = dict(self.info)
        info["scale"] = info.get("scale", 1.0) * factor
        return RevolutionImmersion(self.n, self.p1, self.p2, segs, self.closed, self.variant,
                                   center, info)

    def translated(self, vec) -> "RevolutionImmersion":
        vec = np.asarray(vec, dtype=float)
        info = dict(self.info)
        info["translation"] = (np.asarray(info.get("translation", np.zeros(self.n + 1)))
                               + vec).tolist()
        return RevolutionImmersion(self.n, self.p1, self.p2, self.segments, self.closed,
                                   self.variant, tuple(np.asarray(self.center) + vec), info)

    def subsegments(self, start: int, stop: int) -> "RevolutionImmersion":
        """Piece of the meridian made of segments[start:stop] (an open hypersurface)."""
        info = {"parent": self.info.get("constructor"), "segments": [start, stop]}
        return RevolutionImmersion(self.n, self.p1, self.p2, self.segments[start:stop], False,
                                   self.variant, self.center, info)

    # -- serialization ---------------------------------------------------------
    def to_dict(self) -> dict:
        d = {
            "variant": self.variant,
            "n": self.n,
            "k": self.info.get("k"),
            "fibres": [self.p1, self.p2],
            "closed": self.closed,
            "center": list(self.center),
            "constructor": self.info.get("constructor"),
            "params": self.info.get("params", {}),
            "profile": self.info.get("profile"),
            "assembly": [s.describe() for s in self.segments],
        }
        return d


def from_dict(d: dict) -> RevolutionImmersion:
    """Rebuild an immersion from ``to_dict`` output via its constructor."""
    name = d.get("constructor")
    if name not in CONSTRUCTORS:
        raise GeometryError(f"unknown constructor {name!r}")
    imm = CONSTRUCTORS[name](**d.get("params", {}))
    scale = d.get("scale")
    if scale:
        imm = imm.scaled(scale)
    center = np.asarray(d.get("center", np.zeros(imm.n + 1)), dtype=float)
    if np.any(center != np.asarray(imm.center)):
        imm = imm.translated(center - np.asarray(imm.center))
    return imm


# --------------------------------------------------------------------------
# constructors


def sphere(R: float = 1.0, n: int = 2) -> RevolutionImmersion:
    if R <= 0:
        raise GeometryError("radius must be positive")
    seg = ArcSegment(0.0, 0.0, R, 0.0, math.pi)
    return RevolutionImmersion(n, n - 1, 0, (seg,), info={
        "constructor": "sphere", "params": {"R": R, "n": n}})


def spheroid(a_axis: float, b_axis: float, n: int = 2) -> RevolutionImmersion:
    """Ellipsoid of revolution: semi-axis a_axis along the axis, b_axis across it."""
    if a_axis <= 0 or b_axis <= 0:
        raise GeometryError("semi-axes must be positive")
    seg = EllipseSegment(a_axis, b_axis)
    return RevolutionImmersion(n, n - 1, 0, (seg,), info={
        "constructor": "spheroid", "params": {"a_axis": a_axis, "b_axis": b_axis, "n": n}})


def generatrix_immersion(segments, n: int, closed: bool = False) -> RevolutionImmersion:
    """Generic generatrix: c1 is the orbit radius, c2 the axial coordinate."""
    return RevolutionImmersion(n, n - 1, 0, tuple(segments), closed, "generatrix",
                               info={"constructor": None})


def dumbbell_spacing(eps: float) -> float:
    """Half distance between neighbouring sphere centres for neck waist eps."""
    return eps * math.acosh(eps ** -0.5) + math.sqrt(1.0 - eps)


def dumbbell(p: int = 2, eps=0.05, n: int = 2) -> RevolutionImmersion:
    """p unit spheres on a common axis joined by catenoidal necks.

    Only n = 2 is supported: catenoids are the minimal necks of R^3.  The
    neck of waist eps meets each sphere tangentially along the circle of
    radius sqrt(eps), which fixes the axis spacing.
    """
    if n != 2:
        raise GeometryError("dumbbell necks are catenoids, available for n = 2 only")
    if p < 1:
        raise GeometryError("need at least one sphere")
    eps_list = list(eps) if np.ndim(eps) else [float(eps)] * (p - 1)
    if len(eps_list) != p - 1:
        raise GeometryError("need one neck waist per junction")
    for e in eps_list:
        if not 0 < e < 0.5:
            raise GeometryError(f"neck waist must lie in (0, 0.5), got {e}")
    half = [dumbbell_spacing(e) for e in eps_list]
    centres = [0.0]
    for h in half:
        centres.append(centres[-1] - 2 * h)
    shift = 0.5 * (centres[0] + centres[-1])
    centres = [c - shift for c in centres]
    segs = []
    for i, xc in enumerate(centres):
        th_start = 0.0 if i == 0 else math.asin(math.sqrt(eps_list[i - 1]))
        th_end = math.pi if i == p - 1 else math.pi - math.asin(math.sqrt(eps_list[i]))
        segs.append(ArcSegment(0.0, xc, 1.0, th_start, th_end))
        if i < p - 1:
            e = eps_list[i]
            uj = math.acosh(e ** -0.5)
            segs.append(CatenoidSegment(e, xc - half[i], -uj, uj))
    return RevolutionImmersion(2, 1, 0, tuple(segs), info={
        "constructor": "dumbbell",
        "params": {"p": p, "eps": eps if np.ndim(eps) == 0 else list(eps), "n": n},
        "axis_spacing": [2 * h for h in half],
        # C^1 gluing: at the junction circle the catenoid's meridian curvature
        # is -1 against +1 on the sphere, so the second fundamental form jumps
        "junction_curvature_jump": 2.0})


def sphere_with_tube(rho: float, length: float, fillet: float | None = None,
                     bulb: float | None = None, n: int = 2) -> RevolutionImmersion:
    """Unit sphere with a cylindrical tube of radius rho and given length on its north pole.

    The tube ends in a hemispherical cap of radius rho, or, when ``bulb`` is
    given, in a sphere of that radius joined by a second concave fillet.
    Junctions use concave torus fillets of radius ``fillet`` (default rho/2)
    so the meridian is C^1.  ``info["tube_segments"]`` counts the leading
    segments that make up the tube: cutting there puts the boundary circle at
    the base of the cylinder.
    """
    r_f = 0.5 * rho if fillet is None else fillet
    if not (0 < rho < 1 and length > 0 and r_f > 0):
        raise GeometryError("need 0 < rho < 1, length > 0, fillet > 0")
    if bulb is not None and not bulb > rho:
        raise GeometryError("bulb radius must exceed the tube radius")
    x_f = math.sqrt((1 + r_f) ** 2 - (rho + r_f) ** 2)
    cc1, cc2 = rho + r_f, x_f
    x_top = x_f + length
    if bulb is None:
        segs = [ArcSegment(0.0, x_top, rho, 0.0, math.pi / 2)]
    else:
        x_b = x_top + math.sqrt((bulb + r_f) ** 2 - (rho + r_f) ** 2)
        segs = [
            ArcSegment(0.0, x_b, bulb, 0.0, math.atan2(cc1, x_top - x_b)),
            ArcSegment(cc1, x_top, r_f, math.atan2(-cc1, x_b - x_top), -math.pi / 2),
        ]
    segs.append(LineSegment((rho, x_top), (rho, x_f)))
    tube = len(segs)
    segs += [
        ArcSegment(cc1, cc2, r_f, -math.pi / 2, math.atan2(-cc1, -cc2)),
        ArcSegment(0.0, 0.0, 1.0, math.atan2(cc1, cc2), math.pi),
    ]
    return RevolutionImmersion(n, n - 1, 0, tuple(segs), info={
        "constructor": "sphere_with_tube",
        "params": {"rho": rho, "length": length, "fillet": fillet, "bulb": bulb, "n": n},
        "tube_segments": tube})


def tube_piece(imm: RevolutionImmersion) -> RevolutionImmersion:
    """The tube of a ``sphere_with_tube`` surface, cut at the base of its cylinder."""
    return imm.subsegments(0, imm.info["tube_segments"])


def cylinder(length: float, radius: float = 1.0, n: int = 2) -> RevolutionImmersion:
    """Open flat cylinder [0, length] x S^{n-1}(radius); both ends are boundary."""
    seg = LineSegment((radius, length), (radius, 0.0))
    return RevolutionImmersion(n, n - 1, 0, (seg,), info={
        "constructor": "cylinder", "params": {"length": length, "radius": radius, "n": n}})


def hemisphere(R: float = 1.0, n: int = 2) -> RevolutionImmersion:
    seg = ArcSegment(0.0, 0.0, R, 0.0, math.pi / 2)
    return RevolutionImmersion(n, n - 1, 0, (seg,), info={
        "constructor": "hemisphere", "params": {"R": R, "n": n}})


def bispherical_immersion(n: int, k: int, profile=None, eps: float | None = None,
                          a: float = 0.3) -> RevolutionImmersion:
    """Two sheets (1 +- phi)(y sin r + z cos r) joined along the neck at r = eps.

    With a constant profile this returns the single sheet, a round sphere of
    radius 1 + c.  For k = 0 the z-sphere is {+-1}, so the meridian closes up
    into a loop crossing the axis plane at the equator of both sheets.
    """
    if profile is None:
        profile = CatenoidalProfile(n, k, eps, a)
    if isinstance(profile, ConstantProfile):
        R = 1.0 + profile.value
        if R <= 0:
            raise GeometryError("1 + phi must be positive")
        imm = sphere(R, n)
        return RevolutionImmersion(n, n - 1, 0, imm.segments, variant="bispherical",
                                   info={"constructor": "bispherical_constant",
                                         "params": {"n": n, "k": k, "value": profile.value},
                                         "profile": profile.describe(), "k": k})
    if not isinstance(profile, CatenoidalProfile):
        raise GeometryError("two-sheet construction needs a catenoidal profile")
    if profile.n != n or profile.k != k:
        raise GeometryError("profile built for different (n, k)")
    if not profile.b < 0.5:
        raise GeometryError(f"plateau b = {profile.b:.4f} violates 1 - phi > 1/2")
    e, aa = profile.eps, profile.a
    U = profile.u_max
    r1, r2, r3 = e + aa, e + 2 * aa, math.pi / 2

    def sheet_up(branch, z):
        return [ProfileSegment(profile, branch, z, r1, r2), ProfileSegment(profile, branch, z, r2, r3)]

    def sheet_down(branch, z):
        return [ProfileSegment(profile, branch, z, r3, r2), ProfileSegment(profile, branch, z, r2, r1)]

    params = {"n": n, "k": k, "eps": e, "a": aa}
    if k == 0:
        segs = (sheet_up(+1, +1) + sheet_down(+1, -1) + [NeckSegment(profile, -1, U, -U)]
                + sheet_up(-1, -1) + sheet_down(-1, +1) + [NeckSegment(profile, +1, -U, U)])
        return RevolutionImmersion(n, n - 1, 0, tuple(segs), closed=True, variant="bispherical",
                                   info={"constructor": "bispherical", "params": params,
                                         "profile": profile.describe(), "k": k})
    segs = sheet_down(-1, +1) + [NeckSegment(profile, +1, -U, U)] + sheet_up(+1, +1)
    return RevolutionImmersion(n, n - k - 1, k, tuple(segs), variant="bispherical",
                               info={"constructor": "bispherical", "params": params,
                                     "profile": profile.describe(), "k": k})


def _bispherical_constant(n, k, value):
    return bispherical_immersion(n, k, ConstantProfile(value))


def _generic_bispherical(n, k, eps, a=0.3):
    return bispherical_immersion(n, k, eps=eps, a=a)


CONSTRUCTORS = {
    "sphere": sphere,
    "spheroid": spheroid,
    "dumbbell": dumbbell,
    "sphere_with_tube": sphere_with_tube,
    "cylinder": cylinder,
    "hemisphere": hemisphere,
    "bispherical": _generic_bispherical,
    "bispherical_constant": _bispherical_constant,
}


# --------------------------------------------------------------------------
# closed-form sheet formulas in (y, z, r) coordinates


@dataclass(frozen=True)
class SheetJet:
    mean_curvature: np.ndarray
    principal_curvatures: np.ndarray  # (3, P) ordered (y-fibre, z-fibre, radial)
    multiplicities: tuple
    B_op: np.ndarray
    volume_density: np.ndarray


def sheet_curvature(profile, n: int, k: int, r, branch: int = 1) -> SheetJet:
    """Curvature of the sheet (1 + branch*phi)(y sin r + z cos r), r > eps.

    Uses the sheet's own outward normal (pointing away from the origin when
    phi' = 0), so both sheets of the two-sheet construction get H close to 1.
    """
    r = np.asarray(r, dtype=float)
    phi, d1, d2 = profile(r)
    g, g1, g2 = 1 + branch * phi, branch * d1, branch * d2
    W = g1**2 + g**2
    pref = 1.0 / np.sqrt(W)
    ky = pref * (1 - (g1 / g) / np.tan(r))
    kz = pref * (1 + (g1 / g) * np.tan(r))
    kr = pref * (1 + (g1**2 - g * g2) / W)
    nH = (W ** -1.5 * (-g * g2 + g**2 + 2 * g1**2)
          + W ** -0.5 / g * (-(n - k - 1) * g1 / np.tan(r) + (n - 1) * g + k * g1 * np.tan(r)))
    mags = [np.abs(kr), np.abs(ky)] + ([np.abs(kz)] if k > 0 else [])
    Bop = np.max(np.array(mags), axis=0)
    theta = g**n * np.sqrt(1 + (g1 / g) ** 2) * np.sin(r) ** (n - k - 1) * np.cos(r) ** k
    return SheetJet(nH / n, np.array([ky, kz, kr]), (n - k - 1, k, 1), Bop, theta)


def sheet_point_normal(profile, y, z, r, branch: int = 1):
    """Point Phi(y, z, r) and the normalized normal in R^{n-k} + R^{k+1}."""
    phi, d1, _ = profile(np.atleast_1d(r))
    g, g1 = 1 + branch * phi[0], branch * d1[0]
    y = np.asarray(y, dtype=float)
    z = np.asarray(z, dtype=float)
    X = g * np.concatenate([y * math.sin(r), z * math.cos(r)])
    N = (-g1 * np.concatenate([y * math.cos(r), -z * math.sin(r)])
         + g * np.concatenate([y * math.sin(r), z * math.cos(r)]))
    return X, N / np.linalg.norm(N)


# --------------------------------------------------------------------------
# integrated quantities


FIELDS = ("H", "absH", "B_op", "B_frob", "X-c", "absH-c", "H-c")


@dataclass(frozen=True)
class NormValue:
    value: float        # volume-normalized norm
    integral: float     # unnormalized integral of |f|^p (nan for p = inf)
    error: float        # relative change between two quadrature levels

    def __float__(self):
        return self.value


def _field(imm: RevolutionImmersion, q: Quadrature, name: str, c: float):
    jet = q.jet
    if name == "H":
        return jet.mean_curvature
    if name == "absH":
        return np.abs(jet.mean_curvature)
    if name == "B_op":
        return jet.B_op
    if name == "B_frob":
        return jet.B_frob
    if name == "X-c":
        r2, _ = imm.recentred_fields(q)
        return np.sqrt(r2) - c
    if name == "absH-c":
        return np.abs(jet.mean_curvature) - c
    if name == "H-c":
        return jet.mean_curvature - c
    raise GeometryError(f"unknown field {name!r}; expected one of {FIELDS}")


def lp_norm(imm: RevolutionImmersion, field_name: str, p=2.0, c: float = 0.0,
            panels: int = 24, order: int = 20, tol: float = 1e-3) -> NormValue:
    """(1/v_M int |f|^p)^(1/p) together with the raw integral int |f|^p."""
    if p != math.inf and p < 1:
        raise GeometryError("p must be >= 1 or inf")
    if p == math.inf:
        t = np.linspace(imm.breaks[0], imm.breaks[-1], 20001)
        t = np.unique(np.concatenate([t, imm.breaks]))
        q = imm.quadrature(panels, order)
        vals = np.abs(_field(imm, q, field_name, c))
        dense = _field_dense(imm, t, field_name, c)
        return NormValue(float(max(vals.max(), dense.max())), float("nan"), 0.0)
    out = []
    for pan in (panels // 2 or 1, panels):
        q = imm.quadrature(pan, order)
        f = np.abs(_field(imm, q, field_name, c))
        out.append(float(np.dot(q.weight, f**p)))
    err = abs(out[1] - out[0]) / max(abs(out[1]), 1e-300)
    if err > tol:
        raise GeometryError(f"quadrature for {field_name} not converged (rel change {err:.2e})")
    vol = imm.volume
    return NormValue((out[1] / vol) ** (1.0 / p), out[1], err)


def _field_dense(imm, t, name, c):
    jet = imm.jet(t)
    if name in ("X-c",):
        c1, c2 = jet.position
        c2 = c2 - imm.axial_mean
        return np.abs(np.sqrt(c1**2 + c2**2) - c)
    fake = Quadrature(t, np.zeros(t.size, int), np.ones(t.size), jet)
    return np.abs(_field(imm, fake, name, c))


def h2norm(imm: RevolutionImmersion) -> float:
    return lp_norm(imm, "H", 2).value


def extrinsic_radius(imm: RevolutionImmersion, samples: int = 20001):
    """Least radius of a ball containing M, with its centre.

    By symmetry the centre lies on the axis through the mean position; the
    radius is the minimum over axial offsets a of the max distance, a convex
    function of a.  Returns (radius, centre, achieved tolerance).
    """
    t = np.unique(np.concatenate([np.linspace(imm.breaks[0], imm.breaks[-1], samples),
                                  imm.breaks]))
    v = imm.eval_global(t)
    c1, c2 = v[0], v[1]

    def refine_max(a):
        d2 = c1**2 + (c2 - a) ** 2
        i = int(np.argmax(d2))
        lo, hi = t[max(i - 1, 0)], t[min(i + 1, t.size - 1)]
        if hi <= lo:
            return math.sqrt(d2[i])
        def neg_dist2(s):
            p = imm.eval_global(s)[:2, 0]
            return -float(p[0] ** 2 + (p[1] - a) ** 2)

        res = optimize.minimize_scalar(neg_dist2, bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-13})
        return math.sqrt(max(-res.fun, d2[i]))

    if imm.p2 > 0:
        a_opt = 0.0
        radius = refine_max(0.0)
        tol = 0.0
    else:
        res = optimize.minimize_scalar(refine_max, bounds=(float(c2.min()), float(c2.max())),
                                       method="bounded", options={"xatol": 1e-12})
        a_opt = float(res.x)
        radius = float(res.fun)
        tol = 1e-12
    centre = np.array(imm.center, dtype=float)
    centre[imm.axis_index] += a_opt
    return radius, centre, tol


def hsiung_residual(imm: RevolutionImmersion, panels: int = 12, order: int = 20) -> float:
    """|(1/v_M) int H <nu, X> - 1|; zero for every closed hypersurface."""
    q = imm.quadrature(panels, order)
    _, xn = imm.recentred_fields(q)
    return abs(q.mean(q.jet.mean_curvature * xn) - 1.0)


def mean_position_norm(imm: RevolutionImmersion) -> float:
    """||X - Xbar||_2 (volume normalized)."""
    q = imm.quadrature()
    r2, _ = imm.recentred_fields(q)
    return math.sqrt(q.mean(r2))


# --------------------------------------------------------------------------
# cutoff and concentration


def _smoothstep(x):
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10 - 15 * x + 6 * x * x), 30 * x**2 * (1 - x) ** 2, 60 * x * (2 * x * x - 3 * x + 1)


@dataclass(frozen=True)
class BandCutoff:
    """psi(s) of s = |X|^2: 1 where | |X| h - 1 | <= inner, 0 where it is >= outer.

    h = ||H||_2.  Quintic smoothstep transitions, so psi is C^2.  When the
    outer band reaches the origin (outer >= 1) there is no inner transition
    and psi stays 1 down to s = 0.
    """

    h2: float  # ||H||_2
    inner: float
    outer: float

    def __post_init__(self):
        if not (0 < self.inner < self.outer):
            raise GeometryError("need 0 < inner < outer for the cutoff band")

    @property
    def knots(self):
        h = self.h2**2
        lo0 = (1 - self.outer) ** 2 / h if self.outer < 1 else None
        lo1 = (1 - self.inner) ** 2 / h if self.outer < 1 else None
        return (lo0, lo1, (1 + self.inner) ** 2 / h, (1 + self.outer) ** 2 / h)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        a0, a1, b1, b0 = self.knots
        val = np.zeros_like(s)
        d1 = np.zeros_like(s)
        d2 = np.zeros_like(s)
        if a0 is not None:
            lo = (s > a0) & (s < a1)
            x = (s[lo] - a0) / (a1 - a0)
            S, S1, S2 = _smoothstep(x)
            val[lo], d1[lo], d2[lo] = S, S1 / (a1 - a0), S2 / (a1 - a0) ** 2
            mid = (s >= a1) & (s <= b1)
        else:
            mid = s <= b1
        val[mid] = 1.0
        hi = (s > b1) & (s < b0)
        x = (b0 - s[hi]) / (b0 - b1)
        S, S1, S2 = _smoothstep(x)
        val[hi], d1[hi], d2[hi] = S, -S1 / (b0 - b1), S2 / (b0 - b1) ** 2
        return val, d1, d2

    def derivative_bounds(self):
        """sup|psi'| and sup|psi''| realized by the smoothstep transitions."""
        a0, a1, b1, b0 = self.knots
        widths = [b0 - b1] + ([a1 - a0] if a0 is not None else [])
        wmin = min(widths)
        return 15.0 / 8.0 / wmin, (10.0 / math.sqrt(3.0)) / wmin**2

    def satisfies_reference_bounds(self) -> bool:
        """Whether |psi'| <= 4 h^2/outer and |psi''| <= 8 h^4/outer^2 hold.

        The lower transition is the binding one: with it present the bounds
        hold for inner <= 0.1; once outer >= 1 only the upper transition is
        left and they always hold.
        """
        d1, d2 = self.derivative_bounds()
        h = self.h2**2
        return d1 <= 4 * h / self.outer and d2 <= 8 * h * h / self.outer**2


@dataclass
class ConcentrationReport:
    eta: float
    band: float
    h2: float
    xnorm: float
    XT: float
    X_minus_Hnu: float
    phiZ: float
    absH_dev: float
    absX_dev: float
    outside_annulus: float
    phi_sq: float
    phi2_H2_dev: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def concentration_report(imm: RevolutionImmersion, eta: float, band: float | None = None,
                         panels: int = 24, order: int = 20) -> ConcentrationReport:
    """Concentration diagnostics after recentring the mean position to 0.

    ``eta`` sets the annulus A_eta = {| |X| - 1/h | <= eta/h}; ``band`` sets the
    cutoff phi = psi(|X|^2) (1 on the band, 0 outside twice the band).
    """
    if not 0 < eta < 1:
        raise GeometryError("eta must lie in (0, 1)")
    band = eta if band is None else band
    q = imm.quadrature(panels, order)
    H = q.jet.mean_curvature
    r2, xn = imm.recentred_fields(q)
    h2 = math.sqrt(q.mean(H**2))
    xnorm = math.sqrt(q.mean(r2))
    XT = math.sqrt(q.mean(np.maximum(r2 - xn**2, 0.0)))
    # |X - (H/h^2) nu|^2 = |X|^2 - 2 (H/h^2)<X,nu> + H^2/h^4
    xh = math.sqrt(q.mean(np.maximum(r2 - 2 * H * xn / h2**2 + H**2 / h2**4, 0.0)))
    cut = BandCutoff(h2, band, 2 * band)
    phi, _, _ = cut(r2)
    Z2 = np.maximum(1 - 2 * H * xn + H**2 * r2, 0.0)
    phiZ = math.sqrt(q.mean(phi**2 * Z2))
    absH = math.sqrt(q.mean((np.abs(H) - h2) ** 2))
    absX = math.sqrt(q.mean((np.sqrt(r2) - 1 / h2) ** 2))
    outside = q.mean((np.abs(np.sqrt(r2) - 1 / h2) > eta / h2).astype(float))
    phisq = q.mean(phi**2)
    phi2H2 = q.mean(np.abs(phi**2 * (H**2 - h2**2)))
    return ConcentrationReport(eta, band, h2, xnorm, XT, xh, phiZ, absH, absX, outside, phisq,
                               phi2H2)


def annulus_fraction(imm: RevolutionImmersion, eta: float, samples: int = 400001) -> float:
    """Vol(M \\ A_eta)/v_M by dense midpoint quadrature (indicator is discontinuous)."""
    t = np.linspace(imm.breaks[0], imm.breaks[-1], samples)
    tm = 0.5 * (t[1:] + t[:-1])
    jet = imm.jet(tm)
    wts = jet.volume_density * np.diff(t)
    q = imm.quadrature()
    h2 = math.sqrt(q.mean(q.jet.mean_curvature**2))
    c1, c2 = jet.position
    r = np.hypot(c1, c2 - imm.axial_mean)
    return float(np.sum(wts * (np.abs(r - 1 / h2) > eta / h2)) / np.sum(wts))
