"""Homogeneous harmonic polynomials on R^{n+1}.

Bases are built in three deterministic steps: enumerate the degree-k
monomials in lexicographic order, solve the harmonicity constraints exactly
(rational arithmetic), then orthonormalize against exact sphere moments.
All inner products are normalized by the volume of the unit sphere S^n, so
the constant polynomial 1 has unit norm.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np

DEFAULT_MAX_DEGREE = 6
DEFAULT_MAX_DIM = 6
DEFAULT_SEED = 20240611


class BasisError(ValueError):
    """Raised when a harmonic basis cannot be built reliably."""


def _check_nk(n: int, k: int) -> None:
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    if int(k) != k or k < 0:
        raise ValueError(f"k must be a non-negative integer, got {k!r}")


def multiplicity(n: int, k: int) -> int:
    """Dimension m_k of degree-k harmonic polynomials on R^{n+1}.

    Uses binom(n+k-1, k) (n+2k-1) / (n+k-1).
    """
    _check_nk(n, k)
    value = Fraction(math.comb(n + k - 1, k) * (n + 2 * k - 1), n + k - 1)
    assert value.denominator == 1
    return int(value)


def harmonic_dimension(p: int, a: int) -> int:
    """Dimension of degree-a harmonic polynomials on R^{p+1}, any p >= 1.

    Counted as (degree-a polynomials) minus (degree-(a-2) polynomials); this
    is the form used for fibre multiplicities, where circles (p=1) occur.
    """
    if p < 1 or a < 0:
        raise ValueError("need p >= 1 and a >= 0")
    full = math.comb(p + a, a)
    lower = math.comb(p + a - 2, a - 2) if a >= 2 else 0
    return full - lower


def sphere_eigenvalue(n: int, k: int, h2norm: float) -> float:
    """k(n+k-1) ||H||_2^2, the k-th distinct eigenvalue of the comparison sphere."""
    _check_nk(n, k)
    if not (h2norm > 0 and math.isfinite(h2norm)):
        raise ValueError(f"h2norm must be positive, got {h2norm!r}")
    return k * (n + k - 1) * float(h2norm) ** 2


# --------------------------------------------------------------------------
# exact sphere moments


def _double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


@lru_cache(maxsize=None)
def _moment_exact(alpha: tuple[int, ...]) -> Fraction:
    if any(a % 2 for a in alpha):
        return Fraction(0)
    dim = len(alpha)
    total = sum(alpha)
    num = 1
    for a in alpha:
        num *= _double_factorial(a - 1)
    den = 1
    for j in range(total // 2):
        den *= dim + 2 * j
    return Fraction(num, den)


def sphere_monomial_moment(alpha, n: int, exact: bool = False):
    """Normalized mean of x^alpha over the unit sphere S^n in R^{n+1}.

    Zero as soon as one exponent is odd. Otherwise
    prod (alpha_i - 1)!! / (N (N+2) ... (N + |alpha| - 2)) with N = n+1.
    Returns a Fraction when ``exact`` is set.
    """
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != n + 1:
        raise ValueError(f"multi-index has length {len(alpha)}, expected {n + 1}")
    if any(a < 0 for a in alpha):
        raise ValueError("negative exponent")
    val = _moment_exact(alpha)
    return val if exact else float(val)


def sphere_monomial_moment_gamma(alpha, n: int) -> float:
    """Same moment through the Gamma-function closed form (floating point)."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(np.mod(alpha, 2) == 1):
        return 0.0
    dim = n + 1
    logv = math.lgamma(dim / 2) - math.lgamma((alpha.sum() + dim) / 2)
    logv += sum(math.lgamma((a + 1) / 2) for a in alpha) - dim * math.lgamma(0.5)
    return math.exp(logv)


@dataclass(frozen=True)
class SphereMomentTable:
    ambient_dim_plus_one: int
    max_total_degree: int
    moments: dict = field(repr=False)

    @classmethod
    def build(cls, n: int, max_total_degree: int) -> "SphereMomentTable":
        table = {}
        for d in range(max_total_degree + 1):
            for alpha in monomial_exponents(n + 1, d):
                table[alpha] = _moment_exact(alpha)
        return cls(n + 1, max_total_degree, table)

    def __getitem__(self, alpha):
        return self.moments[tuple(alpha)]


# --------------------------------------------------------------------------
# monomials


@lru_cache(maxsize=None)
def monomial_exponents(dim: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """Exponent tuples of degree-`degree` monomials in `dim` variables, lex order.

    Lexicographic means x_0^k comes first and x_{dim-1}^k last.
    """
    if degree < 0:
        return ()
    out = []
    for combo in combinations_with_replacement(range(dim), degree):
        alpha = [0] * dim
        for i in combo:
            alpha[i] += 1
        out.append(tuple(alpha))
    out.sort(reverse=True)
    return tuple(out)


@lru_cache(maxsize=None)
def _index(dim: int, degree: int) -> dict:
    return {a: i for i, a in enumerate(monomial_exponents(dim, degree))}


@lru_cache(maxsize=None)
def _derivative_matrix(dim: int, degree: int, j: int) -> np.ndarray:
    """D with (c @ D) the coefficients of d/dx_j of the polynomial with coefficients c."""
    rows = monomial_exponents(dim, degree)
    cols = _index(dim, degree - 1) if degree >= 1 else {}
    D = np.zeros((len(rows), max(len(cols), 0)))
    for r, alpha in enumerate(rows):
        if alpha[j] > 0:
            beta = list(alpha)
            beta[j] -= 1
            D[r, cols[tuple(beta)]] = alpha[j]
    return D


def coefficient_laplacian(dim: int, degree: int) -> np.ndarray:
    """Matrix L with (c @ L) the coefficients of the Euclidean Laplacian of c."""
    if degree < 2:
        return np.zeros((len(monomial_exponents(dim, degree)), 0))
    L = 0
    for j in range(dim):
        L = L + _derivative_matrix(dim, degree, j) @ _derivative_matrix(dim, degree - 1, j)
    return L


def monomial_values(points: np.ndarray, degree: int) -> np.ndarray:
    """Values of all degree-`degree` monomials at `points` (shape (P, dim)) -> (P, count)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    dim = points.shape[1]
    exps = monomial_exponents(dim, degree)
    if not exps:
        return np.zeros((points.shape[0], 0))
    E = np.array(exps)
    powers = points[:, None, :] ** E[None, :, :]
    return np.prod(powers, axis=2)


def _harmonic_nullspace(dim: int, k: int) -> list[dict]:
    """Exact rational basis of harmonic degree-k polynomials.

    Free coefficients are those of monomials with x_0-degree 0 or 1; the
    coefficients with higher x_0-degree follow from Laplace's equation,
    which links c_{beta+2e_0} to the c_{beta+2e_i}, i >= 1.
    """
    exps = monomial_exponents(dim, k)
    free = [a for a in exps if a[0] <= 1]
    # process monomials by increasing x_0 degree so the recursion is explicit
    order = sorted(exps, key=lambda a: a[0])
    basis = []
    for seed in free:
        c = {a: Fraction(0) for a in exps}
        c[seed] = Fraction(1)
        for alpha in order:
            if alpha[0] < 2:
                continue
            beta = list(alpha)
            beta[0] -= 2
            acc = Fraction(0)
            for i in range(1, dim):
                g = list(beta)
                g[i] += 2
                acc += (beta[i] + 2) * (beta[i] + 1) * c[tuple(g)]
            c[alpha] = -acc / ((beta[0] + 2) * (beta[0] + 1))
        basis.append(c)
    return basis


@lru_cache(maxsize=None)
def _gram_moments(dim: int, k: int) -> np.ndarray:
    """G[a, b] = sphere mean of x^(a+b) for degree-k monomials a, b."""
    exps = monomial_exponents(dim, k)
    m = len(exps)
    G = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            alpha = tuple(x + y for x, y in zip(exps[i], exps[j]))
            G[i, j] = G[j, i] = float(_moment_exact(alpha))
    return G


@dataclass(frozen=True)
class HarmonicBasis:
    """Orthonormal basis of degree-k harmonic polynomials on R^{n+1}.

    ``coefficients[i]`` holds basis polynomial i in the monomial basis
    ``exponents`` (lexicographic order).
    """

    n: int
    degree: int
    exponents: tuple
    coefficients: np.ndarray
    gram_tolerance: float = 1e-10

    @property
    def ambient_dim_plus_one(self) -> int:
        return self.n + 1

    @property
    def size(self) -> int:
        return self.coefficients.shape[0]

    def gram(self) -> np.ndarray:
        G = _gram_moments(self.n + 1, self.degree)
        return self.coefficients @ G @ self.coefficients.T

    def laplacian_residual(self) -> float:
        """Largest coefficient-level Laplacian, relative to the coefficient norm."""
        L = coefficient_laplacian(self.n + 1, self.degree)
        if L.shape[1] == 0:
            return 0.0
        lap = self.coefficients @ L
        scale = np.linalg.norm(self.coefficients, axis=1)
        return float(np.max(np.linalg.norm(lap, axis=1) / scale))

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "k": self.degree,
                "monomial_order": "lex",
                "exponents": [list(a) for a in self.exponents],
                "coefficients": self.coefficients.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "HarmonicBasis":
        d = json.loads(text)
        if d.get("monomial_order") != "lex":
            raise ValueError("only lex monomial order is supported")
        n, k = int(d["n"]), int(d["k"])
        exps = monomial_exponents(n + 1, k)
        if "exponents" in d and [tuple(a) for a in d["exponents"]] != list(exps):
            raise ValueError("exponent list does not match lex order")
        coef = np.asarray(d["coefficients"], dtype=float)
        if coef.shape != (multiplicity(n, k), len(exps)):
            raise ValueError(f"coefficient array has shape {coef.shape}")
        return cls(n, k, exps, coef)


def build_basis(n: int, k: int, max_degree: int = DEFAULT_MAX_DEGREE,
                max_dim: int = DEFAULT_MAX_DIM, cond_limit: float = 1e12) -> HarmonicBasis:
    """Orthonormal basis of H^k(R^{n+1}), deterministic in (n, k)."""
    _check_nk(n, k)
    if k > max_degree:
        raise ValueError(f"degree {k} exceeds configured cap {max_degree}")
    if n > max_dim:
        raise ValueError(f"dimension {n} exceeds configured cap {max_dim}")
    return _build_basis_cached(n, k, cond_limit)


@lru_cache(maxsize=None)
def _build_basis_cached(n: int, k: int, cond_limit: float) -> HarmonicBasis:
    dim = n + 1
    exps = monomial_exponents(dim, k)
    raw = _harmonic_nullspace(dim, k)
    C = np.array([[float(c[a]) for a in exps] for c in raw])
    G = _gram_moments(dim, k)
    gram = C @ G @ C.T
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > cond_limit:
        raise BasisError(f"Gram matrix condition number {cond:.3e} exceeds {cond_limit:.1e}")
    # in-order Gram-Schmidt == inverse Cholesky factor; one refinement pass
    # brings orthonormality to round-off level
    B = C
    for _ in range(2):
        Lc = np.linalg.cholesky(B @ G @ B.T)
        B = np.linalg.solve(Lc, B)
    if B.shape[0] != multiplicity(n, k):
        raise BasisError("nullspace dimension does not match m_k")
    return HarmonicBasis(n, k, exps, B)


# --------------------------------------------------------------------------
# jets and identities


@dataclass(frozen=True)
class Jet:
    values: np.ndarray     # (P, m)
    gradients: np.ndarray  # (P, m, N)
    hessians: np.ndarray   # (P, m, N, N)


def evaluate_jet(basis: HarmonicBasis, x) -> Jet:
    """Values, gradients and Hessians of every basis polynomial at the points x.

    ``x`` may be a single point or an array of shape (P, n+1).
    """
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    dim = basis.n + 1
    k = basis.degree
    if pts.shape[1] != dim:
        raise ValueError(f"points must have {dim} coordinates")
    if not np.all(np.isfinite(pts)):
        raise ValueError("non-finite evaluation point")
    C = basis.coefficients
    m = C.shape[0]
    P = pts.shape[0]
    vals = monomial_values(pts, k) @ C.T
    grads = np.zeros((P, m, dim))
    hess = np.zeros((P, m, dim, dim))
    if k >= 1:
        mono1 = monomial_values(pts, k - 1)
        for j in range(dim):
            grads[:, :, j] = mono1 @ (C @ _derivative_matrix(dim, k, j)).T
    if k >= 2:
        mono2 = monomial_values(pts, k - 2)
        for i in range(dim):
            Di = C @ _derivative_matrix(dim, k, i)
            for j in range(i, dim):
                h = mono2 @ (Di @ _derivative_matrix(dim, k - 1, j)).T
                hess[:, :, i, j] = h
                hess[:, :, j, i] = h
    return Jet(vals, grads, hess)


def hessian_constant(n: int, k: int) -> float:
    """(k-1)(k^2 + mu_k)(n+2k-3) with mu_k = k(n+k-1)."""
    mu = k * (n + k - 1)
    return (k - 1) * (k * k + mu) * (n + 2 * k - 3)


@dataclass
class IdentityReport:
    n: int
    k: int
    samples: int
    addition: float
    gradient: float
    hessian: float
    euler_value: float
    euler_hessian: float
    tolerance: float = 1e-9

    @property
    def max_deviation(self) -> float:
        return max(self.addition, self.gradient, self.hessian)

    @property
    def ok(self) -> bool:
        return self.max_deviation <= self.tolerance and max(self.euler_value, self.euler_hessian) <= 1e-10

    def as_dict(self) -> dict:
        return {
            "n": self.n, "k": self.k, "samples": self.samples,
            "addition_rel_dev": self.addition,
            "gradient_rel_dev": self.gradient,
            "hessian_rel_dev": self.hessian,
            "euler_value_rel_dev": self.euler_value,
            "euler_hessian_rel_dev": self.euler_hessian,
            "max_rel_dev": self.max_deviation,
            "ok": self.ok,
        }


def identity_report(basis: HarmonicBasis, sample_points, direction_samples,
                    tolerance: float = 1e-9, strict: bool = False) -> IdentityReport:
    """Check the addition, gradient and Hessian sum rules on samples.

    Each deviation is relative to the natural magnitude of its right-hand
    side, so samples near the origin do not blow up the ratio.
    """
    x = np.atleast_2d(np.asarray(sample_points, dtype=float))
    u = np.atleast_2d(np.asarray(direction_samples, dtype=float))
    if x.shape[0] == 0 or u.shape != x.shape:
        raise ValueError("need matching, nonempty point and direction samples")
    n, k = basis.n, basis.degree
    m = basis.size
    mu = k * (n + k - 1)
    jet = evaluate_jet(basis, x)
    r2 = np.sum(x * x, axis=1)
    u2 = np.sum(u * u, axis=1)
    ux = np.sum(u * x, axis=1)

    lhs = np.sum(jet.values ** 2, axis=1)
    rhs = m * r2 ** k
    addition = float(np.max(np.abs(lhs - rhs) / np.maximum(rhs, 1e-300)))

    gradient = 0.0
    hessian = 0.0
    if k >= 1:
        du = np.einsum("pmj,pj->pm", jet.gradients, u)
        lhs = np.sum(du ** 2, axis=1)
        rhs = m * (mu / n) * r2 ** (k - 1) * u2
        c2 = k * k - mu / n
        if c2 != 0.0:
            rhs = rhs + m * c2 * ux ** 2 * r2 ** (k - 2)
        scale = m * k * k * r2 ** (k - 1) * u2
        gradient = float(np.max(np.abs(lhs - rhs) / np.maximum(scale, 1e-300)))
    if k >= 2:
        lhs = np.sum(jet.hessians ** 2, axis=(1, 2, 3))
        rhs = m * hessian_constant(n, k) * r2 ** (k - 2)
        hessian = float(np.max(np.abs(lhs - rhs) / np.maximum(rhs, 1e-300)))

    # Euler: dP(x) = k P(x) and Hess P(x, .) = (k-1) dP
    dx = np.einsum("pmj,pj->pm", jet.gradients, x)
    vscale = np.sqrt(np.sum(jet.values ** 2, axis=1, keepdims=True)) * max(k, 1) + 1e-300
    euler_value = float(np.max(np.abs(dx - k * jet.values) / vscale))
    euler_hessian = 0.0
    if k >= 1:
        hx = np.einsum("pmij,pj->pmi", jet.hessians, x)
        gscale = (np.sqrt(np.sum(jet.gradients ** 2, axis=(1, 2)))[:, None, None] * max(k - 1, 1)
                  + 1e-300)
        euler_hessian = float(np.max(np.abs(hx - (k - 1) * jet.gradients) / gscale))

    rep = IdentityReport(n, k, x.shape[0], addition, gradient, hessian,
                         euler_value, euler_hessian, tolerance)
    if strict and not rep.ok:
        raise BasisError(f"identity deviation {rep.max_deviation:.3e} for n={n}, k={k}")
    return rep


def random_samples(n: int, count: int, radius: float = 2.0, seed: int = DEFAULT_SEED):
    """Points uniform in the ball of the given radius and Gaussian directions."""
    rng = np.random.default_rng(seed)
    dim = n + 1
    g = rng.standard_normal((count, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / dim)
    return g * r[:, None], rng.standard_normal((count, dim))
