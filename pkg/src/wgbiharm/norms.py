"""Energy and mesh-dependent norms, and the error measures reported by studies.

The energy seminorm is induced directly by the weak-Hessian operators.  The
discrete second-order seminorm combines the interior second derivatives with
h-weighted trace jumps; its first term is implemented in two variants.  The
"as_printed" variant takes the norm of the *sum* of all four second
derivatives of the interior polynomial; the "frobenius" variant sums the
squared norms of the individual entries.  The sum placement looks like it may
be unintended (the sum annihilates e.g. x^2 - y^2 while the jump terms do
not), so the entrywise variant is the one used in the norm-coupling checks;
both are computed and reported.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .basis import ElementBasis, HESS_COMP, edge_basis_eval
from .dofs import WeakFunction
from .hessian import LocalHessianOp
from .mesh import Mesh
from .quadrature import DEGREE_CAP, DEGREE_MARGIN, edge_param_rule, element_quadrature


@dataclass
class ErrorTriple:
    triple_bar: float
    discrete_h2: float
    l2_interior: float


def energy_norm(v: WeakFunction, ops: list[LocalHessianOp]) -> float:
    """Square root of the sum over elements and direction pairs of the
    mass-weighted squares of the weak-Hessian coefficients of v."""
    total = 0.0
    for op in ops:
        coeffs = op.apply(v.local_vector(op.element))
        total += float(np.einsum("ijr,rs,ijs->", coeffs, op.mass, coeffs))
    return sqrt(max(total, 0.0))


def discrete_h2_norm(v: WeakFunction, mesh: Mesh, variant: str = "as_printed",
                     ops: list[LocalHessianOp] | None = None) -> float:
    """Mesh-dependent second-order seminorm of a weak function.

    Per element: the interior second-derivative term (see module docstring for
    the two variants), plus h_T^-3 times the squared trace mismatch v0 - vb
    and h_T^-1 times the squared gradient mismatch grad v0 - vg over the
    element boundary, using the element-side trace of v0.
    """
    if variant not in ("as_printed", "frobenius"):
        raise ValueError(f"unknown variant {variant!r}")
    dofmap = v.dofmap
    k, p, q = dofmap.k, dofmap.p, dofmap.q
    total = 0.0
    t, wt = edge_param_rule(2 * max(k, p))
    for idx, element in enumerate(mesh.elements):
        basis = ops[idx].interior_basis if ops is not None else ElementBasis(element, k)
        c0 = v.interior_coeffs(element.id)
        pts, w = element_quadrature(element, max(2 * (k - 2), 0))
        H = basis.eval_hess(pts)
        if variant == "as_printed":
            s = (H[:, :, 0] + 2.0 * H[:, :, 1] + H[:, :, 2]) @ c0
            total += float(w @ s**2)
        else:
            hxx, hxy, hyy = (H[:, :, m] @ c0 for m in range(3))
            total += float(w @ (hxx**2 + 2.0 * hxy**2 + hyy**2))
        hm3 = element.diameter ** -3
        hm1 = element.diameter ** -1
        for edge_id in element.edge_ids:
            edge = mesh.edges[edge_id]
            pts_e = edge.point_at(t)
            ds = wt * edge.length
            v0 = basis.eval(pts_e) @ c0
            vb = edge_basis_eval(t, p) @ v.trace_coeffs(edge.id)
            total += hm3 * float(ds @ (v0 - vb) ** 2)
            G = basis.eval_grad(pts_e)
            Tg = edge_basis_eval(t, q)
            g0x, g0y = G[:, :, 0] @ c0, G[:, :, 1] @ c0
            gx = Tg @ v.grad_coeffs(edge.id, 0)
            gy = Tg @ v.grad_coeffs(edge.id, 1)
            total += hm1 * float(ds @ ((g0x - gx) ** 2 + (g0y - gy) ** 2))
    return sqrt(max(total, 0.0))


def true_energy_error(hess, u_h: WeakFunction, ops: list[LocalHessianOp]) -> float:
    """Energy-norm distance between the exact solution and the discrete one.

    Because the weak Hessian of an exactly embedded smooth function equals the
    degree-r projection of its analytic Hessian, the error can be evaluated
    without embedding u: per element and direction pair, project the analytic
    second derivative onto the operator's degree-r basis and compare with the
    weak-Hessian coefficients of u_h.  hess = (uxx, uxy, uyy) callables.
    """
    total = 0.0
    for op in ops:
        quad_degree = min(op.r + DEGREE_MARGIN, DEGREE_CAP)
        pts, w = element_quadrature(op.element, quad_degree)
        vals = [np.asarray(h(pts[:, 0], pts[:, 1]), dtype=float) for h in hess]
        projected = [op.hess_basis.project_values(pts, w, vl) for vl in vals]
        coeffs = op.apply(u_h.local_vector(op.element))
        for i in range(2):
            for j in range(2):
                diff = projected[HESS_COMP[(i, j)]] - coeffs[i, j]
                total += float(diff @ (op.mass @ diff))
    return sqrt(max(total, 0.0))


def l2_interior_error(u, u_h: WeakFunction, mesh: Mesh,
                      quad_degree: int | None = None) -> float:
    """L2 distance between u and the interior component of u_h over the domain."""
    k = u_h.dofmap.k
    if quad_degree is None:
        quad_degree = min(2 * k + DEGREE_MARGIN, DEGREE_CAP)
    total = 0.0
    for element in mesh.elements:
        basis = ElementBasis(element, k)
        pts, w = element_quadrature(element, quad_degree)
        diff = np.asarray(u(pts[:, 0], pts[:, 1]), dtype=float) - basis.eval(pts) @ u_h.interior_coeffs(element.id)
        total += float(w @ diff**2)
    return sqrt(max(total, 0.0))
