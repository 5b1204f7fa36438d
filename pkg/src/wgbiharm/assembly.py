"""Global assembly: stiffness matrix, load vector, boundary elimination.

Boundary conditions are imposed by elimination, not penalty: the trace block
of every boundary edge gets the edge projection of the Dirichlet datum, and
the gradient blocks get the normal/tangential projections recombined into
Cartesian components (valid on straight edges, where the normal and tangent
are constant).  The reduced matrix over the free DOFs stays symmetric
positive definite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import project_edge
from .dofs import DofMap, WeakFunction
from .hessian import LocalHessianOp, build_local_hessian, local_load, local_stiffness
from .mesh import Mesh


@dataclass
class GlobalSystem:
    """Reduced SPD system over free DOFs plus the eliminated boundary values."""

    A: sp.csr_matrix
    b: np.ndarray
    prescribed_values: np.ndarray
    dofmap: DofMap

    def full_solution(self, x_free: np.ndarray) -> np.ndarray:
        vals = np.zeros(self.dofmap.n_total)
        vals[self.dofmap.free_dofs] = x_free
        vals[self.dofmap.prescribed_dofs] = self.prescribed_values
        return vals


def build_local_ops(mesh: Mesh, k: int, p: int, q: int,
                    r_override: int | None = None) -> list[LocalHessianOp]:
    """Weak-Hessian operators for every element, in element order."""
    return [build_local_hessian(el, mesh, k, p, q, r=r_override) for el in mesh.elements]


def boundary_values(mesh: Mesh, dofmap: DofMap, xi, nu, tangential,
                    quad_degree: int | None = None) -> np.ndarray:
    """Projected boundary data over the prescribed DOFs.

    xi(x, y) is the Dirichlet trace; nu and tangential are the normal and
    tangential derivative data with signature f(x, y, normal, tangent), where
    normal is the outward unit normal of the edge's unique element and tangent
    the canonical edge tangent.  The two derivative projections are recombined
    as g = (Q nu) * normal + (Q tangential) * tangent, componentwise.
    """
    full = np.zeros(dofmap.n_total)
    for edge in mesh.edges:
        if not edge.on_boundary:
            continue
        (eid,) = edge.element_ids
        normal = edge.normals[eid]
        tangent = edge.tangent
        full[dofmap.trace_slice(edge.id)] = project_edge(xi, edge, dofmap.p, quad_degree)
        cn = project_edge(lambda x, y: nu(x, y, normal, tangent), edge, dofmap.q, quad_degree)
        ct = project_edge(lambda x, y: tangential(x, y, normal, tangent), edge, dofmap.q, quad_degree)
        full[dofmap.grad_slice(edge.id, 0)] = cn * normal[0] + ct * tangent[0]
        full[dofmap.grad_slice(edge.id, 1)] = cn * normal[1] + ct * tangent[1]
    return full[dofmap.prescribed_dofs]


def assemble(mesh: Mesh, dofmap: DofMap, ops: list[LocalHessianOp], f,
             prescribed_values: np.ndarray | None = None,
             load_quad_degree: int | None = None) -> GlobalSystem:
    """Scatter element energy matrices and loads, then eliminate boundary DOFs.

    Triplets are accumulated in element order and summed by the sparse
    conversion, so repeated runs produce bitwise-identical matrices.
    """
    n = dofmap.n_total
    load = np.zeros(n)
    nnz = sum(dofmap.local_dim(el) ** 2 for el in mesh.elements)
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz)
    pos = 0
    for op in ops:
        element = op.element
        gdofs = dofmap.cell_dofs(element)
        K = local_stiffness(op)
        load[gdofs] += local_load(element, f, dofmap.k, dofmap.p, dofmap.q,
                                  interior_basis=op.interior_basis,
                                  quad_degree=load_quad_degree)
        m = gdofs.size
        block = slice(pos, pos + m * m)
        rows[block] = np.repeat(gdofs, m)
        cols[block] = np.tile(gdofs, m)
        vals[block] = K.ravel()
        pos += m * m

    A_full = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    free = dofmap.free_dofs
    prescribed = dofmap.prescribed_dofs
    if prescribed_values is None:
        prescribed_values = np.zeros(prescribed.size)
    A_free = A_full[free][:, free]
    b = load[free] - A_full[free][:, prescribed] @ prescribed_values
    return GlobalSystem(A=A_free, b=b, prescribed_values=prescribed_values, dofmap=dofmap)


def solution_function(system: GlobalSystem, x_free: np.ndarray) -> WeakFunction:
    return WeakFunction(system.dofmap, system.full_solution(x_free))
