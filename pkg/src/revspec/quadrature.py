"""Quadrature helpers: composite Gauss-Legendre and exact rules on spheres."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi


@lru_cache(maxsize=None)
def gauss_legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def composite_nodes(a: float, b: float, panels: int, order: int = 16):
    """Nodes and weights of a composite Gauss-Legendre rule on [a, b]."""
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate(f, a: float, b: float, panels: int = 8, order: int = 16) -> float:
    t, w = composite_nodes(a, b, panels, order)
    return float(np.dot(w, f(t)))


@lru_cache(maxsize=None)
def sphere_rule(p: int, degree: int):
    """Nodes on S^p in R^{p+1} with weights summing to one.

    Exact for polynomials of total degree <= ``degree``. Built recursively:
    the last coordinate u carries the weight (1-u^2)^{(p-2)/2} and is
    sampled with Gauss-Jacobi nodes, the rest is a scaled S^{p-1} rule.
    p = 0 means a single axial point (+1).
    """
    if p < 0:
        raise ValueError("sphere dimension must be >= 0")
    if p == 0:
        return np.ones((1, 1)), np.ones(1)
    if p == 1:
        m = degree + 1
        th = 2 * np.pi * (np.arange(m) + 0.5) / m
        return np.column_stack([np.cos(th), np.sin(th)]), np.full(m, 1.0 / m)
    m = degree // 2 + 1
    a = (p - 2) / 2.0
    u, wu = roots_jacobi(m, a, a)
    wu = wu / wu.sum()
    sub, wsub = sphere_rule(p - 1, degree)
    s = np.sqrt(1.0 - u * u)
    nodes = np.concatenate(
        [np.column_stack([s[i] * sub, np.full(len(sub), u[i])]) for i in range(m)]
    )
    weights = np.concatenate([wu[i] * wsub for i in range(m)])
    return nodes, weights


def sphere_volume(p: int) -> float:
    """Volume of the unit sphere S^p; the axial point (p = 0) counts as 1."""
    from math import gamma, pi

    if p == 0:
        return 1.0
    return 2 * pi ** ((p + 1) / 2) / gamma((p + 1) / 2)
