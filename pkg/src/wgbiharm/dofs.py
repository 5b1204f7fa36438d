"""Global degree-of-freedom numbering and coefficient containers.

A weak function on the mesh is the coefficient triple (interior polynomial of
degree k per element, trace polynomial of degree p per edge, two gradient
polynomials of degree q per edge).  Edge blocks are stored once per edge in
the canonical edge parameterization, which enforces single-valuedness across
interior edges by construction.  Boundary-edge trace and gradient blocks are
the prescribed DOFs; everything else is free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import ElementBasis, polynomial_dim, project_edge
from .mesh import Element, Mesh


class DofMap:
    """Block layout: all element-interior blocks, then per-edge [trace, g1, g2]."""

    def __init__(self, mesh: Mesh, k: int, p: int, q: int):
        if not (k >= p >= q >= 1):
            raise ValueError(f"degrees must satisfy k >= p >= q >= 1, got k={k}, p={p}, q={q}")
        self.mesh = mesh
        self.k, self.p, self.q = k, p, q
        self.n_interior = polynomial_dim(k)
        self.trace_dim = p + 1
        self.grad_dim = q + 1
        self.per_edge = self.trace_dim + 2 * self.grad_dim
        self.n_elements = mesh.n_elements
        self.n_edges = mesh.n_edges
        self.edge_base = self.n_elements * self.n_interior
        self.n_total = self.edge_base + self.n_edges * self.per_edge

        free = np.ones(self.n_total, dtype=bool)
        for e in mesh.edges:
            if e.on_boundary:
                start = self.edge_base + e.id * self.per_edge
                free[start:start + self.per_edge] = False
        self.free_mask = free
        self.free_dofs = np.flatnonzero(free)
        self.prescribed_dofs = np.flatnonzero(~free)
        self.n_free = self.free_dofs.size
        self.n_prescribed = self.prescribed_dofs.size

    def interior_slice(self, element_id: int) -> slice:
        start = element_id * self.n_interior
        return slice(start, start + self.n_interior)

    def trace_slice(self, edge_id: int) -> slice:
        start = self.edge_base + edge_id * self.per_edge
        return slice(start, start + self.trace_dim)

    def grad_slice(self, edge_id: int, comp: int) -> slice:
        start = self.edge_base + edge_id * self.per_edge + self.trace_dim + comp * self.grad_dim
        return slice(start, start + self.grad_dim)

    def cell_dofs(self, element: Element) -> np.ndarray:
        """Global ids of the element's DOFs in the local layout order.

        Local layout: interior block, then for each edge of the element (in
        loop order) its trace block followed by the two gradient blocks.
        """
        parts = [np.arange(element.id * self.n_interior, (element.id + 1) * self.n_interior)]
        for edge_id in element.edge_ids:
            start = self.edge_base + edge_id * self.per_edge
            parts.append(np.arange(start, start + self.per_edge))
        return np.concatenate(parts)

    def local_dim(self, element: Element) -> int:
        return self.n_interior + element.n_edges * self.per_edge


def number_dofs(mesh: Mesh, k: int, p: int, q: int) -> DofMap:
    """Build the global DOF numbering for the weak space of degrees (k, p, q)."""
    return DofMap(mesh, k, p, q)


@dataclass
class WeakFunction:
    """Global coefficient vector over a DofMap."""

    dofmap: DofMap
    values: np.ndarray

    @classmethod
    def zeros(cls, dofmap: DofMap) -> "WeakFunction":
        return cls(dofmap, np.zeros(dofmap.n_total))

    def local_vector(self, element: Element) -> np.ndarray:
        return self.values[self.dofmap.cell_dofs(element)]

    def interior_coeffs(self, element_id: int) -> np.ndarray:
        return self.values[self.dofmap.interior_slice(element_id)]

    def trace_coeffs(self, edge_id: int) -> np.ndarray:
        return self.values[self.dofmap.trace_slice(edge_id)]

    def grad_coeffs(self, edge_id: int, comp: int) -> np.ndarray:
        return self.values[self.dofmap.grad_slice(edge_id, comp)]

    def __sub__(self, other: "WeakFunction") -> "WeakFunction":
        if other.dofmap is not self.dofmap:
            raise ValueError("weak functions live on different DOF maps")
        return WeakFunction(self.dofmap, self.values - other.values)

    def __add__(self, other: "WeakFunction") -> "WeakFunction":
        if other.dofmap is not self.dofmap:
            raise ValueError("weak functions live on different DOF maps")
        return WeakFunction(self.dofmap, self.values + other.values)

    def __mul__(self, c: float) -> "WeakFunction":
        return WeakFunction(self.dofmap, c * self.values)

    __rmul__ = __mul__


def project_weak(u, grad, mesh: Mesh, k: int, p: int, q: int,
                 dofmap: DofMap | None = None,
                 quad_degree: int | None = None) -> WeakFunction:
    """Componentwise L2 projection of a smooth function into the weak space.

    Interior blocks get the element projection of u; every edge gets the trace
    projection of u and the projections of the two Cartesian components of
    grad = (ux, uy).  Shared edges are computed once, so the result is
    single-valued across interior edges by construction.
    """
    if dofmap is None:
        dofmap = DofMap(mesh, k, p, q)
    elif (dofmap.k, dofmap.p, dofmap.q) != (k, p, q):
        raise ValueError("dofmap degrees do not match the requested projection")
    vals = np.zeros(dofmap.n_total)
    for element in mesh.elements:
        basis = ElementBasis(element, k)
        vals[dofmap.interior_slice(element.id)] = basis.project(u, quad_degree)
    ux, uy = grad
    for edge in mesh.edges:
        vals[dofmap.trace_slice(edge.id)] = project_edge(u, edge, p, quad_degree)
        vals[dofmap.grad_slice(edge.id, 0)] = project_edge(ux, edge, q, quad_degree)
        vals[dofmap.grad_slice(edge.id, 1)] = project_edge(uy, edge, q, quad_degree)
    return WeakFunction(dofmap, vals)
