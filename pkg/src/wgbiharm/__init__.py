"""Stabilizer-free weak Galerkin solver for the biharmonic equation on polygonal meshes."""

from .assembly import GlobalSystem, assemble, boundary_values, build_local_ops, solution_function
from .basis import (
    ConditioningError,
    EdgeBasis,
    ElementBasis,
    mass_matrix_element,
    project_edge,
    project_element,
)
from .dofs import DofMap, WeakFunction, number_dofs, project_weak
from .harness import CaseResult, ConvergenceReport, convergence_study, rates_pass, run_case
from .hessian import (
    LocalHessianOp,
    build_local_hessian,
    default_hessian_degree,
    embed_local,
    local_load,
    local_stiffness,
)
from .mesh import (
    Edge,
    Element,
    Mesh,
    TriangulationError,
    ValidationReport,
    build_mesh,
    generate_mesh,
    load_mesh,
    save_mesh,
    triangulate,
    validate,
)
from .norms import ErrorTriple, discrete_h2_norm, energy_norm, l2_interior_error, true_energy_error
from .problems import ManufacturedProblem, get_problem, registry
from .quadrature import (
    QuadratureRule,
    edge_rule,
    integrate_edge,
    integrate_element,
    triangle_rule,
)
from .solver import SolveReport, SolverError, smallest_ritz_value, solve_spd

__version__ = "0.1.0"
