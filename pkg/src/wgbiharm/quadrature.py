"""Gauss quadrature of arbitrary degree on triangles, polygons, and edges.

Triangle rules are collapsed tensor-product Gauss rules (square-to-triangle
map), so any requested degree up to the cap is available; tabulated symmetric
rules would run out around degree 20 while the weak-Hessian pairings here need
mass matrices on polynomial spaces of degree up to ~16, i.e. integrands of
degree above 30 on hexagons.  Polygon integration goes through triangulate().
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .mesh import Element, Edge, triangulate

DEGREE_CAP = 40

# Extra quadrature degree added when an integrand contains a non-polynomial
# (manufactured analytic) factor; Gauss error is then far below 1e-12.
DEGREE_MARGIN = 20


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    exact_degree: int


def _check_degree(degree: int) -> None:
    if degree < 0:
        raise ValueError("quadrature degree must be nonnegative")
    if degree > DEGREE_CAP:
        raise ValueError(f"quadrature degree {degree} exceeds the cap {DEGREE_CAP}")


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> QuadratureRule:
    """Rule on the unit reference triangle {x,y >= 0, x+y <= 1}.

    Built by collapsing a tensor Gauss rule through (u, v) -> (u, v(1-u));
    the Jacobian 1-u raises the u-degree by one, hence the extra point.
    """
    _check_degree(degree)
    n = (degree + 3) // 2
    x, w = leggauss(n)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    U, V = np.meshgrid(u, u, indexing="ij")
    WU, WV = np.meshgrid(wu, wu, indexing="ij")
    pts = np.column_stack([U.ravel(), (V * (1.0 - U)).ravel()])
    wts = (WU * WV * (1.0 - U)).ravel()
    return QuadratureRule(points=pts, weights=wts, exact_degree=2 * n - 2)


@lru_cache(maxsize=None)
def edge_rule(degree: int) -> QuadratureRule:
    """Gauss-Legendre rule on [-1, 1]."""
    _check_degree(degree)
    n = degree // 2 + 1
    x, w = leggauss(n)
    return QuadratureRule(points=x, weights=w, exact_degree=2 * n - 1)


def edge_param_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss points and weights on the arc parameter interval [0, 1]."""
    rule = edge_rule(degree)
    return 0.5 * (rule.points + 1.0), 0.5 * rule.weights


def map_rule_to_triangle(rule: QuadratureRule, tri: np.ndarray):
    """Push a reference-triangle rule to the physical triangle `tri` (3, 2)."""
    v0 = tri[0]
    J = np.column_stack([tri[1] - v0, tri[2] - v0])
    pts = rule.points @ J.T + v0
    det = abs(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    return pts, rule.weights * det


def element_quadrature(element: Element, degree: int):
    """Points and weights integrating polynomials of `degree` exactly on the element."""
    rule = triangle_rule(degree)
    pts_list, wts_list = [], []
    for tri in triangulate(element):
        p, w = map_rule_to_triangle(rule, tri)
        pts_list.append(p)
        wts_list.append(w)
    return np.vstack(pts_list), np.concatenate(wts_list)


def integrate_element(element: Element, f, degree: int) -> float:
    """Integrate the scalar field f(x, y) over a (possibly non-convex) element."""
    pts, w = element_quadrature(element, degree)
    return float(w @ np.asarray(f(pts[:, 0], pts[:, 1]), dtype=float))


def integrate_edge(edge: Edge, f, degree: int) -> float:
    """Integrate the scalar field f(x, y) along an edge (arc-length measure)."""
    t, w = edge_param_rule(degree)
    pts = edge.point_at(t)
    vals = np.asarray(f(pts[:, 0], pts[:, 1]), dtype=float)
    return float(edge.length * (w @ vals))


# ---------------------------------------------------------------------------
# self-tests (monomial exactness against closed forms)


def triangle_monomial_integral(a: int, b: int) -> float:
    """Exact integral of x^a y^b over the unit reference triangle."""
    return math.factorial(a) * math.factorial(b) / math.factorial(a + b + 2)


def interval_monomial_integral(a: int) -> float:
    """Exact integral of x^a over [-1, 1]."""
    return 0.0 if a % 2 else 2.0 / (a + 1)


def max_monomial_error(rule: QuadratureRule, domain: str = "triangle") -> float:
    """Largest relative error over all monomials up to rule.exact_degree."""
    worst = 0.0
    if domain == "triangle":
        x, y = rule.points[:, 0], rule.points[:, 1]
        for d in range(rule.exact_degree + 1):
            for a in range(d + 1):
                b = d - a
                exact = triangle_monomial_integral(a, b)
                approx = float(rule.weights @ (x**a * y**b))
                worst = max(worst, abs(approx - exact) / abs(exact))
    elif domain == "interval":
        x = rule.points
        for a in range(rule.exact_degree + 1):
            exact = interval_monomial_integral(a)
            approx = float(rule.weights @ x**a)
            scale = abs(exact) if exact else 1.0
            worst = max(worst, abs(approx - exact) / scale)
    else:
        raise ValueError(f"unknown domain {domain!r}")
    return worst
