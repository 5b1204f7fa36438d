"""Polynomial bases on elements and edges, and the L2 projections onto them.

Element bases are scaled monomials ((x-xc)/h_T)^a ((y-yc)/h_T)^b.  From degree
8 upward the monomials are replaced by an element-L2-orthonormalized set: the
high projection degrees forced on non-convex elements (up to ~16 on hexagons)
make monomial Gram matrices numerically singular.  Orthonormal functions
cannot be *represented* accurately as monomial combinations either (the
coefficients grow like the Gram condition number), so the orthonormal set is
built and evaluated by a Gram-Schmidt recurrence: each new function is a
scaled coordinate times an earlier one, orthogonalized against all previous
functions in the element L2 inner product at quadrature points, and fresh
evaluations re-run the stored recurrence.  Derivative evaluators come from
differentiating the recurrence.  This keeps Gram matrices equal to the
identity to ~1e-13 at every degree used here.

Edge bases are Legendre polynomials shifted to the canonical arc parameter
t in [0, 1], so edge mass matrices are diagonal and projections are
orientation-stable by construction.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import legvander
from scipy.linalg import cho_factor, cho_solve

from .mesh import Edge, Element
from .quadrature import DEGREE_CAP, DEGREE_MARGIN, edge_param_rule, element_quadrature

ORTHONORMALIZE_FROM_DEGREE = 8

# second-derivative component order used everywhere: (xx, xy, yy)
HESS_COMP = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 2}


class ConditioningError(RuntimeError):
    """A Gram matrix is numerically singular; enable orthonormalization."""


def polynomial_dim(degree: int) -> int:
    return (degree + 1) * (degree + 2) // 2


def monomial_exponents(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Exponent pairs (a, b), a+b <= degree, ordered by total degree."""
    a, b = [], []
    for d in range(degree + 1):
        for i in range(d, -1, -1):
            a.append(i)
            b.append(d - i)
    return np.array(a), np.array(b)


def _analytic_degree(base: int) -> int:
    return min(base + DEGREE_MARGIN, DEGREE_CAP)


class ElementBasis:
    """Evaluators for a polynomial basis of given total degree on one element.

    The plain basis is the scaled, centroid-centered monomial set; with
    orthonormalize=True (automatic from degree 8) it is replaced by the
    element-L2-orthonormal set described in the module docstring.
    """

    def __init__(self, element: Element, degree: int, orthonormalize: bool | None = None):
        self.element = element
        self.degree = degree
        self._a, self._b = monomial_exponents(degree)
        self.dim = len(self._a)
        self._mass: np.ndarray | None = None
        self._mass_cho = None
        if orthonormalize is None:
            orthonormalize = degree >= ORTHONORMALIZE_FROM_DEGREE
        self.orthonormalized = bool(orthonormalize)
        if self.orthonormalized:
            # bounding-box coordinates keep the recurrence multipliers in [-1, 1]
            lo = element.coords.min(axis=0)
            hi = element.coords.max(axis=0)
            self._center = 0.5 * (lo + hi)
            self._halfwidth = np.maximum(0.5 * (hi - lo), 1e-300)
            self._build_recurrence()
        else:
            self._center = element.centroid
            self._halfwidth = np.array([element.diameter, element.diameter])

    def _scaled(self, pts):
        pts = np.asarray(pts, dtype=float)
        X = (pts[:, 0] - self._center[0]) / self._halfwidth[0]
        Y = (pts[:, 1] - self._center[1]) / self._halfwidth[1]
        return X, Y

    # -- plain scaled-monomial evaluators ------------------------------------

    @staticmethod
    def _powers(z: np.ndarray, m: int) -> np.ndarray:
        P = np.empty((z.size, m + 1))
        P[:, 0] = 1.0
        for j in range(1, m + 1):
            P[:, j] = P[:, j - 1] * z
        return P

    def _monomial_eval(self, pts):
        X, Y = self._scaled(pts)
        XP, YP = self._powers(X, self.degree), self._powers(Y, self.degree)
        return XP[:, self._a] * YP[:, self._b]

    def _monomial_grad(self, pts):
        X, Y = self._scaled(pts)
        XP, YP = self._powers(X, self.degree), self._powers(Y, self.degree)
        a, b = self._a, self._b
        s = self._halfwidth[0]
        gx = (a / s) * XP[:, np.maximum(a - 1, 0)] * YP[:, b]
        gy = (b / s) * XP[:, a] * YP[:, np.maximum(b - 1, 0)]
        return np.stack([gx, gy], axis=-1)

    def _monomial_hess(self, pts):
        X, Y = self._scaled(pts)
        XP, YP = self._powers(X, self.degree), self._powers(Y, self.degree)
        a, b = self._a, self._b
        s2 = self._halfwidth[0] ** 2
        hxx = (a * (a - 1) / s2) * XP[:, np.maximum(a - 2, 0)] * YP[:, b]
        hxy = (a * b / s2) * XP[:, np.maximum(a - 1, 0)] * YP[:, np.maximum(b - 1, 0)]
        hyy = (b * (b - 1) / s2) * XP[:, a] * YP[:, np.maximum(b - 2, 0)]
        return np.stack([hxx, hxy, hyy], axis=-1)

    # -- orthonormal recurrence ------------------------------------------------

    def _build_recurrence(self) -> None:
        """Gram-Schmidt in the element L2 inner product at quadrature points.

        Basis function m (exponents (a, b)) is generated from the parent with
        exponents (a//2, b//2) times the bounded monomial factor
        X^(a-a//2) Y^(b-b//2), orthogonalized twice against all previous
        functions, and normalized.  Halving the exponents keeps dependency
        chains logarithmic in the degree, so roundoff does not compound when
        the recurrence is re-run by the evaluators.
        """
        order = {}
        parents = np.zeros(self.dim, dtype=np.int64)
        powers = np.zeros((self.dim, 2), dtype=np.int64)
        for m, (a, b) in enumerate(zip(self._a, self._b)):
            order[(a, b)] = m
            if m == 0:
                continue
            pa, pb = a // 2, b // 2
            parents[m] = order[(pa, pb)]
            powers[m] = (a - pa, b - pb)
        self._parents, self._powers = parents, powers

        pts, w = element_quadrature(self.element, min(2 * self.degree, DEGREE_CAP))
        X, Y = self._scaled(pts)
        max_pow = int(powers.max()) if self.dim > 1 else 0
        XP, YP = self._powers_table(X, max_pow), self._powers_table(Y, max_pow)
        Q = np.empty((len(w), self.dim))
        H = np.zeros((self.dim, self.dim))
        norms = np.empty(self.dim)
        norms[0] = np.sqrt(w.sum())
        Q[:, 0] = 1.0 / norms[0]
        for m in range(1, self.dim):
            da, db = powers[m]
            cand = XP[:, da] * YP[:, db] * Q[:, parents[m]]
            h = Q[:, :m].T @ (w * cand)
            cand = cand - Q[:, :m] @ h
            h2 = Q[:, :m].T @ (w * cand)
            cand = cand - Q[:, :m] @ h2
            H[m, :m] = h + h2
            norms[m] = np.sqrt(float(w @ cand**2))
            if not norms[m] > 0.0:
                raise ConditioningError(
                    f"orthonormalization broke down on element {self.element.id} at degree {self.degree}"
                )
            Q[:, m] = cand / norms[m]
        self._norms = norms
        self._H = H
        # Final polish: the evaluators re-run the recurrence, which carries a
        # few-1e-12 of roundoff of its own at high degree.  Orthonormalize the
        # *re-evaluated* functions once more with a dense correction factor.
        self._polish = None
        V, _, _ = self._ortho_tables(pts, 0)
        G0 = (V * w[:, None]).T @ V
        try:
            L = np.linalg.cholesky(G0)
        except np.linalg.LinAlgError as exc:
            raise ConditioningError(
                f"orthonormalization failed on element {self.element.id} at degree {self.degree}"
            ) from exc
        self._polish = np.linalg.inv(L).T

    @staticmethod
    def _powers_table(z: np.ndarray, m: int) -> np.ndarray:
        P = np.empty((z.size, m + 1))
        P[:, 0] = 1.0
        for j in range(1, m + 1):
            P[:, j] = P[:, j - 1] * z
        return P

    def tables(self, pts, order: int = 2):
        """(values, gradients, hessians) up to the requested derivative order.

        One combined call shares the recurrence work; entries beyond `order`
        are None.  Shapes: (npts, dim), (npts, dim, 2), (npts, dim, 3).
        """
        if self.orthonormalized:
            return self._ortho_tables(pts, order)
        V = self._monomial_eval(pts)
        G = self._monomial_grad(pts) if order >= 1 else None
        H = self._monomial_hess(pts) if order >= 2 else None
        return V, G, H

    def eval(self, pts) -> np.ndarray:
        """Basis values, shape (npts, dim)."""
        return self.tables(pts, 0)[0]

    def eval_grad(self, pts) -> np.ndarray:
        """First derivatives, shape (npts, dim, 2)."""
        return self.tables(pts, 1)[1]

    def eval_hess(self, pts) -> np.ndarray:
        """Second derivatives (xx, xy, yy), shape (npts, dim, 3)."""
        return self.tables(pts, 2)[2]

    def _ortho_tables(self, pts, order: int):
        """Re-run the stored recurrence at new points (with derivatives).

        Each step applies the product rule to mu * psi_parent, where mu is the
        stored monomial multiplier; mu and its derivatives are exact, so only
        the short parent chains propagate roundoff.  Arrays are kept
        transposed (functions along the leading axis) so the inner reductions
        run on contiguous memory.
        """
        X, Y = self._scaled(pts)
        n = X.size
        nb = self.dim
        max_pow = int(self._powers.max()) if nb > 1 else 0
        XP = self._powers_table(X, max_pow)
        YP = self._powers_table(Y, max_pow)
        V = np.empty((nb, n))
        V[0] = 1.0 / self._norms[0]
        G = np.zeros((2, nb, n)) if order >= 1 else None
        H2 = np.zeros((3, nb, n)) if order >= 2 else None
        sx, sy = self._halfwidth
        for m in range(1, nb):
            par = self._parents[m]
            da, db = self._powers[m]
            h = self._H[m, :m]
            nm = self._norms[m]
            mu = XP[:, da] * YP[:, db]
            vp = V[par]
            V[m] = (mu * vp - h @ V[:m]) / nm
            if G is None:
                continue
            mux = (da / sx) * XP[:, max(da - 1, 0)] * YP[:, db] if da else 0.0
            muy = (db / sy) * XP[:, da] * YP[:, max(db - 1, 0)] if db else 0.0
            gpx, gpy = G[0, par], G[1, par]
            G[0, m] = (mu * gpx + mux * vp - h @ G[0, :m]) / nm
            G[1, m] = (mu * gpy + muy * vp - h @ G[1, :m]) / nm
            if H2 is None:
                continue
            muxx = (da * (da - 1) / sx**2) * XP[:, max(da - 2, 0)] * YP[:, db] if da > 1 else 0.0
            muxy = (da * db / (sx * sy)) * XP[:, max(da - 1, 0)] * YP[:, max(db - 1, 0)] if da and db else 0.0
            muyy = (db * (db - 1) / sy**2) * XP[:, da] * YP[:, max(db - 2, 0)] if db > 1 else 0.0
            H2[0, m] = (mu * H2[0, par] + 2.0 * mux * gpx + muxx * vp - h @ H2[0, :m]) / nm
            H2[1, m] = (mu * H2[1, par] + mux * gpy + muy * gpx + muxy * vp - h @ H2[1, :m]) / nm
            H2[2, m] = (mu * H2[2, par] + 2.0 * muy * gpy + muyy * vp - h @ H2[2, :m]) / nm
        if self._polish is not None:
            Wt = self._polish.T
            V = Wt @ V
            if G is not None:
                G = np.stack([Wt @ G[0], Wt @ G[1]])
            if H2 is not None:
                H2 = np.stack([Wt @ H2[0], Wt @ H2[1], Wt @ H2[2]])
        Vt = V.T
        Gt = G.transpose(2, 1, 0) if G is not None else None
        Ht = H2.transpose(2, 1, 0) if H2 is not None else None
        return Vt, Gt, Ht

    # -- mass matrix and projection ---------------------------------------------

    def mass_matrix(self) -> np.ndarray:
        """Gram matrix of the basis in the element L2 inner product."""
        if self._mass is None:
            pts, w = element_quadrature(self.element, min(2 * self.degree, DEGREE_CAP))
            V = self.eval(pts)
            self._mass = (V * w[:, None]).T @ V
        return self._mass

    def _mass_factor(self):
        if self._mass_cho is None:
            try:
                self._mass_cho = cho_factor(self.mass_matrix())
            except np.linalg.LinAlgError as exc:
                raise ConditioningError(
                    f"Gram matrix of degree {self.degree} on element {self.element.id} "
                    "is numerically singular; enable orthonormalization"
                ) from exc
        return self._mass_cho

    def project(self, f, quad_degree: int | None = None) -> np.ndarray:
        """L2-projection coefficients of the scalar field f(x, y)."""
        if quad_degree is None:
            quad_degree = _analytic_degree(self.degree)
        pts, w = element_quadrature(self.element, quad_degree)
        V = self.eval(pts)
        rhs = V.T @ (w * np.asarray(f(pts[:, 0], pts[:, 1]), dtype=float))
        return cho_solve(self._mass_factor(), rhs)

    def project_values(self, pts, w, values) -> np.ndarray:
        """Projection from precomputed quadrature data (values at pts)."""
        V = self.eval(pts)
        return cho_solve(self._mass_factor(), V.T @ (w * values))


def mass_matrix_element(element: Element, degree: int, orthonormalize: bool | None = None) -> np.ndarray:
    """Element mass matrix for the polynomial basis of the given degree."""
    return ElementBasis(element, degree, orthonormalize=orthonormalize).mass_matrix()


def project_element(f, element: Element, degree: int, quad_degree: int | None = None,
                    orthonormalize: bool | None = None) -> np.ndarray:
    """L2 projection of f onto polynomials of total degree <= degree on the element."""
    return ElementBasis(element, degree, orthonormalize=orthonormalize).project(f, quad_degree)


# ---------------------------------------------------------------------------
# edge bases


class EdgeBasis:
    """Shifted Legendre basis in the canonical arc parameter t in [0, 1]."""

    def __init__(self, edge: Edge, degree: int):
        self.edge = edge
        self.degree = degree
        self.dim = degree + 1

    def eval(self, t) -> np.ndarray:
        return legvander(2.0 * np.asarray(t, dtype=float) - 1.0, self.degree)

    def mass_diagonal(self) -> np.ndarray:
        """Diagonal of the edge mass matrix in the arc-length measure."""
        n = np.arange(self.degree + 1)
        return self.edge.length / (2.0 * n + 1.0)


def edge_basis_eval(t, degree: int) -> np.ndarray:
    return legvander(2.0 * np.asarray(t, dtype=float) - 1.0, degree)


def project_edge(f, edge: Edge, degree: int, quad_degree: int | None = None) -> np.ndarray:
    """L2 projection of the field f(x, y) restricted to the edge.

    The Legendre basis is orthogonal in t, so the coefficients come from plain
    weighted sums; the arc-length factor cancels between numerator and mass.
    """
    if quad_degree is None:
        quad_degree = _analytic_degree(degree)
    t, w = edge_param_rule(quad_degree)
    pts = edge.point_at(t)
    vals = np.asarray(f(pts[:, 0], pts[:, 1]), dtype=float)
    V = edge_basis_eval(t, degree)
    scale = 2.0 * np.arange(degree + 1) + 1.0
    return scale * (V.T @ (w * vals))
