"""Discrete weak second-derivative operators on single elements.

For a weak function v = (interior v0, edge trace vb, edge gradient vg) the
weak second derivative in directions (i, j) is the polynomial of degree r on
the element whose moments against every test polynomial phi of degree <= r
equal

    (v0, d2_ji phi)_T  -  <vb n_i, d_j phi>_dT  +  <vg_i, phi n_j>_dT ,

with n the outward unit normal.  Testing against the whole degree-r basis
turns this into four matrices (one per direction pair) mapping the local DOF
vector to coefficients, obtained by a single SPD mass-matrix solve.  The
projection degree r defaults to N+k-2 on convex elements and 2N+k-2 on
non-convex ones (N = number of edges), which is large enough for the energy
seminorm built from these operators to control the full jump seminorm without
any added stabilization term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .basis import ConditioningError, ElementBasis, HESS_COMP, edge_basis_eval, project_edge
from .mesh import Element, Mesh
from .quadrature import DEGREE_CAP, edge_param_rule, element_quadrature


def default_hessian_degree(element: Element, k: int) -> int:
    """Projection degree for the weak Hessian (N = number of edges).

    Non-convex elements use 2N+k-2, convex ones N+k-2 floored at k+2.  The
    floor matters only for triangles: at r = N+k-2 = k+1 the element energy
    matrix picks up spurious kernel modes beyond the global linears and the
    scheme goes singular, while r = k+2 restores the exact 3-dimensional
    kernel (measured; quads sit exactly at the floor and need no change).
    """
    if k < 1:
        raise ValueError("interior degree k must be at least 1")
    n = element.n_edges
    if element.is_convex:
        return max(n + k - 2, k + 2)
    return 2 * n + k - 2


def local_dimension(element: Element, k: int, p: int, q: int) -> int:
    nk = (k + 1) * (k + 2) // 2
    return nk + element.n_edges * ((p + 1) + 2 * (q + 1))


@dataclass
class LocalHessianOp:
    """Per-element matrices mapping local weak DOFs to weak-Hessian coefficients.

    maps[i, j] has shape (dim P_r, local dim); mass is the degree-r Gram
    matrix, so moments of the (i, j) weak derivative of v against the basis
    are mass @ (maps[i, j] @ v_local).
    """

    element: Element
    r: int
    k: int
    p: int
    q: int
    maps: np.ndarray          # (2, 2, nr, nloc)
    mass: np.ndarray          # (nr, nr)
    hess_basis: ElementBasis  # degree-r basis the coefficients refer to
    interior_basis: ElementBasis
    rhs: np.ndarray | None = None  # (2, 2, nr, nloc) moment matrices, kept on request

    @property
    def n_local(self) -> int:
        return self.maps.shape[-1]

    def apply(self, v_local: np.ndarray) -> np.ndarray:
        """Weak-Hessian coefficients of a local DOF vector, shape (2, 2, nr)."""
        return np.einsum("ijrm,m->ijr", self.maps, v_local)


def build_local_hessian(element: Element, mesh: Mesh, k: int, p: int, q: int,
                        r: int | None = None, keep_rhs: bool = False) -> LocalHessianOp:
    """Assemble the four weak-derivative matrices for one element.

    Moment matrices are filled column-by-column over the local DOF blocks:
    interior columns get the volume term, edge columns the two boundary terms
    (only gradient component i couples with the (i, j) derivative).  All
    pairings are polynomial, and the quadrature degree 2r+2 makes them exact.
    """
    if not (k >= p >= q >= 1):
        raise ValueError(f"degrees must satisfy k >= p >= q >= 1, got k={k}, p={p}, q={q}")
    if r is None:
        r = default_hessian_degree(element, k)
    if r < k - 2:
        raise ValueError(f"projection degree r={r} is below k-2={k - 2}")

    hess_basis = ElementBasis(element, r)
    interior_basis = ElementBasis(element, k)
    nr, nk = hess_basis.dim, interior_basis.dim
    nloc = local_dimension(element, k, p, q)
    pair_degree = min(2 * r + 2, DEGREE_CAP)

    pts, w = element_quadrature(element, pair_degree)
    Vr, _, Hr = hess_basis.tables(pts, 2)   # (np, nr), -, (np, nr, 3)
    Vk = interior_basis.eval(pts)           # (np, nk)

    rhs = np.zeros((2, 2, nr, nloc))
    for i in range(2):
        for j in range(2):
            comp = HESS_COMP[(j, i)]
            rhs[i, j, :, :nk] = (Hr[:, :, comp] * w[:, None]).T @ Vk

    t, wt = edge_param_rule(min(2 * r + 2, DEGREE_CAP))
    trace_dim, grad_dim = p + 1, q + 1
    offset = nk
    for edge_id in element.edge_ids:
        edge = mesh.edges[edge_id]
        normal = edge.normals[element.id]
        pts_e = edge.point_at(t)
        ds = wt * edge.length
        Ve, Ge, _ = hess_basis.tables(pts_e, 1)   # (ne, nr), (ne, nr, 2)
        Tb = edge_basis_eval(t, p)
        Tg = edge_basis_eval(t, q)
        tr = slice(offset, offset + trace_dim)
        g = [slice(offset + trace_dim + c * grad_dim,
                   offset + trace_dim + (c + 1) * grad_dim) for c in range(2)]
        for i in range(2):
            for j in range(2):
                rhs[i, j, :, tr] += -normal[i] * (Ge[:, :, j] * ds[:, None]).T @ Tb
                rhs[i, j, :, g[i]] += normal[j] * (Ve * ds[:, None]).T @ Tg
        offset += trace_dim + 2 * grad_dim

    mass = (Vr * w[:, None]).T @ Vr
    try:
        cho = cho_factor(mass)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(
            f"degree-{r} mass matrix on element {element.id} is numerically singular"
        ) from exc
    stacked = rhs.reshape(4, nr, nloc).transpose(1, 0, 2).reshape(nr, 4 * nloc)
    maps = cho_solve(cho, stacked)
    maps = maps.reshape(nr, 4, nloc).transpose(1, 0, 2).reshape(2, 2, nr, nloc)

    return LocalHessianOp(
        element=element, r=r, k=k, p=p, q=q, maps=maps, mass=mass,
        hess_basis=hess_basis, interior_basis=interior_basis,
        rhs=rhs if keep_rhs else None,
    )


def local_stiffness(op: LocalHessianOp) -> np.ndarray:
    """Element energy matrix: sum over direction pairs of maps^T mass maps.

    Symmetric positive semi-definite; its kernel consists exactly of the
    embeddings of globally linear functions.
    """
    nloc = op.n_local
    K = np.zeros((nloc, nloc))
    for i in range(2):
        for j in range(2):
            D = op.maps[i, j]
            K += D.T @ (op.mass @ D)
    return K


def local_load(element: Element, f, k: int, p: int, q: int,
               interior_basis: ElementBasis | None = None,
               quad_degree: int | None = None) -> np.ndarray:
    """Local load vector: moments of f against the interior basis, zero on edge DOFs."""
    basis = interior_basis if interior_basis is not None else ElementBasis(element, k)
    if quad_degree is None:
        quad_degree = min(k + 20, DEGREE_CAP)
    pts, w = element_quadrature(element, quad_degree)
    vals = np.asarray(f(pts[:, 0], pts[:, 1]), dtype=float)
    out = np.zeros(local_dimension(element, k, p, q))
    out[:basis.dim] = basis.eval(pts).T @ (w * vals)
    return out


def embed_local(element: Element, mesh: Mesh, k: int, p: int, q: int, u, grad,
                interior_basis: ElementBasis | None = None,
                quad_degree: int | None = None) -> np.ndarray:
    """Local DOF vector of the componentwise projection of a smooth function.

    When u is a polynomial representable in every block, this is the exact
    embedding (interior u, trace of u, trace of its gradient).
    """
    basis = interior_basis if interior_basis is not None else ElementBasis(element, k)
    out = np.zeros(local_dimension(element, k, p, q))
    out[:basis.dim] = basis.project(u, quad_degree)
    ux, uy = grad
    offset = basis.dim
    for edge_id in element.edge_ids:
        edge = mesh.edges[edge_id]
        out[offset:offset + p + 1] = project_edge(u, edge, p, quad_degree)
        offset += p + 1
        out[offset:offset + q + 1] = project_edge(ux, edge, q, quad_degree)
        offset += q + 1
        out[offset:offset + q + 1] = project_edge(uy, edge, q, quad_degree)
        offset += q + 1
    return out
