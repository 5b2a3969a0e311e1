"""Pinching gaps, concentration inequalities and eigenvalue cluster counts."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .harmonic_poly import multiplicity
from .spectral import SpectrumResult


class PinchError(ValueError):
    pass


DEFAULT_TAU_GRID = (1e-4, 1e-3, 0.01, 0.02, 0.05, 0.1, 0.2)


@dataclass(frozen=True)
class ClusterRow:
    k: int
    mu: float        # k(n+k-1) ||H||_2^2
    m_k: int
    tau: float
    count: int

    @property
    def ok(self) -> bool:
        return self.count >= self.m_k


@dataclass
class PinchReport:
    n: int
    h2: float
    radius: float
    lambda1: float
    hk_gap: float
    reilly_gap: float
    cluster_table: list
    minimal_tau: dict
    concentration: dict = field(default_factory=dict)

    @property
    def epsilon_hk(self) -> float:
        return self.hk_gap - 1.0

    @property
    def epsilon_reilly(self) -> float:
        return self.reilly_gap - 1.0

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "h2": self.h2,
            "extrinsic_radius": self.radius,
            "lambda1": self.lambda1,
            "hk_gap": self.hk_gap,
            "reilly_gap": self.reilly_gap,
            "epsilon_hk": self.epsilon_hk,
            "epsilon_reilly": self.epsilon_reilly,
            "minimal_tau": {str(k): v for k, v in self.minimal_tau.items()},
            "cluster_table": [{"k": r.k, "mu": r.mu, "m_k": r.m_k, "tau": r.tau,
                               "count": r.count, "ok": r.ok} for r in self.cluster_table],
            "concentration": self.concentration,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf)
        wr.writerow(["k", "mu", "m_k", "tau", "count", "ok"])
        for r in self.cluster_table:
            wr.writerow([r.k, repr(r.mu), r.m_k, r.tau, r.count, int(r.ok)])
        return buf.getvalue()


def cluster_count(eigenvalues, mu: float, tau: float) -> int:
    """Eigenvalues in the window |lambda - mu| <= tau mu (same arithmetic as minimal_tau)."""
    ev = np.asarray(eigenvalues)
    return int(np.count_nonzero(np.abs(ev - mu) / mu <= tau))


def minimal_tau(eigenvalues, mu: float, m_k: int, lam_cap: float) -> float:
    """Smallest tau whose window around mu holds m_k eigenvalues (inf if not certifiable)."""
    ev = np.asarray(eigenvalues)
    rel = np.sort(np.abs(ev - mu) / mu)
    if rel.size < m_k:
        return math.inf
    tau = float(rel[m_k - 1])
    if (1 + tau) * mu > lam_cap:
        return math.inf
    return tau


def pinch_report(imm: geo.RevolutionImmersion, spec: SpectrumResult,
                 tau_grid=DEFAULT_TAU_GRID, kmax: int = 3, eta: float | None = None) -> PinchReport:
    n = imm.n
    h2 = geo.h2norm(imm)
    radius, _, _ = geo.extrinsic_radius(imm)
    lam1 = spec.first_nonzero(h2**2)
    hk = radius * h2
    reilly = n * h2**2 / lam1
    cap = min(spec.lam_max, spec.completeness_bound)
    ev = spec.eigenvalues
    rows, taus = [], {}
    for k in range(1, kmax + 1):
        mu = k * (n + k - 1) * h2**2
        mk = multiplicity(n, k)
        if (1 + max(tau_grid)) * mu > cap:
            raise PinchError(
                f"degree {k}: window up to {(1 + max(tau_grid)) * mu:.4g} exceeds the certified "
                f"spectral range {cap:.4g}")
        for tau in tau_grid:
            rows.append(ClusterRow(k, mu, mk, float(tau), cluster_count(ev, mu, tau)))
        taus[k] = minimal_tau(ev, mu, mk, cap)
    conc = {}
    if eta is not None:
        conc = geo.concentration_report(imm, eta).as_dict()
    return PinchReport(n, h2, radius, lam1, hk, reilly, rows, taus, conc)


# --------------------------------------------------------------------------
# concentration inequalities


@dataclass(frozen=True)
class InequalityRow:
    group: str
    quantity: str
    lhs: float
    rhs: float
    status: str          # pass | fail | hypothesis unmet

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def as_dict(self):
        return {"group": self.group, "quantity": self.quantity, "lhs": self.lhs,
                "rhs": self.rhs, "margin": self.margin, "status": self.status}


@dataclass
class InequalitySuite:
    branch: str
    epsilon: float
    constant: float
    rows: list

    @property
    def ok(self) -> bool:
        return all(r.status != "fail" for r in self.rows)

    def to_dict(self):
        return {"branch": self.branch, "epsilon": self.epsilon, "constant": self.constant,
                "rows": [r.as_dict() for r in self.rows]}


def _status(lhs, rhs, hypothesis=True, atol=1e-8):
    if not hypothesis:
        return "hypothesis unmet"
    return "pass" if lhs <= rhs + atol else "fail"


def inequality_suite(imm: geo.RevolutionImmersion, spec: SpectrumResult | None = None,
                     branch: str = "hk", p: float | None = None,
                     cutoff_constant: float = 100.0) -> InequalitySuite:
    """Evaluate the concentration inequalities with the measured pinching epsilon.

    ``branch`` selects the pinching hypothesis: "hk" (extrinsic radius),
    "reilly" (first eigenvalue, needs ``spec``) or "p" (||H||_p ||X||_2 with
    p > 2).  Each of them implies the L^2 pinching used by the radial group.
    """
    n = imm.n
    h2 = geo.h2norm(imm)
    xnorm = geo.mean_position_norm(imm)
    if branch == "hk":
        radius, _, _ = geo.extrinsic_radius(imm)
        eps = max(0.0, radius * h2 - 1.0)
        C = 100.0
    elif branch == "reilly":
        if spec is None:
            raise PinchError("the reilly branch needs a spectrum")
        eps = max(0.0, n * h2**2 / spec.first_nonzero(h2**2) - 1.0)
        C = 100.0
    elif branch == "p":
        if p is None or p <= 2:
            raise PinchError("the p branch needs p > 2")
        hp = geo.lp_norm(imm, "H", p).value
        eps = max(0.0, hp * xnorm - 1.0)
        C = 6.0 * 2 ** (2 * p / (p - 2))
    else:
        raise PinchError(f"unknown pinching branch {branch!r}")

    e8 = eps ** 0.125
    e16 = eps ** 0.0625
    small = eps <= 0.01
    eta = max(e8, 1e-6)
    band = max(e16, 1e-6)
    rep = geo.concentration_report(imm, eta, band)
    frac = geo.annulus_fraction(imm, eta)
    s3 = math.sqrt(3 * eps) * xnorm
    rows = [
        InequalityRow("radial", "||X^T||_2", rep.XT, s3, _status(rep.XT, s3)),
        InequalityRow("radial", "||X - H nu/||H||^2||_2", rep.X_minus_Hnu, s3,
                      _status(rep.X_minus_Hnu, s3)),
        InequalityRow("annulus", "|| |X| - 1/||H|| ||_2", rep.absX_dev, C * e8 / h2,
                      _status(rep.absX_dev, C * e8 / h2, small)),
        InequalityRow("annulus", "|| |H| - ||H|| ||_2", rep.absH_dev, C * e8 * h2,
                      _status(rep.absH_dev, C * e8 * h2, small)),
        InequalityRow("annulus", "Vol(M \\ A)/v_M", frac, C * e8, _status(frac, C * e8, small)),
        InequalityRow("cutoff", "||phi^2 (H^2 - ||H||^2)||_1", rep.phi2_H2_dev,
                      cutoff_constant * e8 * h2**2,
                      _status(rep.phi2_H2_dev, cutoff_constant * e8 * h2**2)),
        InequalityRow("cutoff", "||phi Z||_2", rep.phiZ, cutoff_constant * eps ** (3 / 32),
                      _status(rep.phiZ, cutoff_constant * eps ** (3 / 32))),
        InequalityRow("cutoff", "| ||phi||_2^2 - 1 |", abs(rep.phi_sq - 1), cutoff_constant * e8,
                      _status(abs(rep.phi_sq - 1), cutoff_constant * e8)),
    ]
    return InequalitySuite(branch, eps, C, rows)
