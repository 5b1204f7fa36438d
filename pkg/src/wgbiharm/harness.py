"""Single-run and convergence-study drivers with CSV/plot-data output."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass
from math import log2
from pathlib import Path

from .assembly import assemble, boundary_values, build_local_ops
from .dofs import WeakFunction, number_dofs, project_weak
from .mesh import Mesh, generate_mesh
from .norms import ErrorTriple, discrete_h2_norm, l2_interior_error, true_energy_error
from .problems import ManufacturedProblem
from .solver import SolveReport, solve_spd

CSV_HEADER = ["level", "h", "dofs", "e_tb", "e_h2", "e_l2",
              "rate_tb", "rate_h2", "rate_l2", "iters", "seconds"]

# Observed orders must reach the proven order minus this slack on the finest
# consecutive pair of levels; coarse levels are pre-asymptotic.
RATE_SLACK = 0.3

# Errors below this are rounding floor; no rate is reported across them.
RATE_FLOOR = 1e-13


@dataclass
class CaseResult:
    problem: str
    h: float
    n_free: int
    errors: ErrorTriple
    report: SolveReport
    seconds: float
    u_h: WeakFunction
    ops: list
    mesh: Mesh


def run_case(problem: ManufacturedProblem, mesh: Mesh, k: int, p: int, q: int,
             r_override: int | None = None, solver: str = "auto",
             tol: float = 1e-10) -> CaseResult:
    """Discretize, solve, and measure errors for one problem on one mesh."""
    start = time.perf_counter()
    dofmap = number_dofs(mesh, k, p, q)
    ops = build_local_ops(mesh, k, p, q, r_override=r_override)
    xi, nu, tangential = problem.boundary_fields()
    prescribed = boundary_values(mesh, dofmap, xi, nu, tangential)
    system = assemble(mesh, dofmap, ops, problem.f, prescribed)
    x, report = solve_spd(system.A, system.b, tol=tol, method=solver)
    u_h = WeakFunction(dofmap, system.full_solution(x))

    e_tb = true_energy_error(problem.hess, u_h, ops)
    q_h_u = project_weak(problem.u, problem.grad, mesh, k, p, q, dofmap=dofmap)
    e_h2 = discrete_h2_norm(q_h_u - u_h, mesh, ops=ops)
    e_l2 = l2_interior_error(problem.u, u_h, mesh)
    seconds = time.perf_counter() - start
    return CaseResult(
        problem=problem.name, h=mesh.mesh_size_h, n_free=dofmap.n_free,
        errors=ErrorTriple(triple_bar=e_tb, discrete_h2=e_h2, l2_interior=e_l2),
        report=report, seconds=seconds, u_h=u_h, ops=ops, mesh=mesh,
    )


@dataclass
class LevelRow:
    level: int
    h: float
    dofs: int
    e_tb: float
    e_h2: float
    e_l2: float
    iters: int
    seconds: float


@dataclass
class ConvergenceReport:
    problem: str
    family: str
    k: int
    p: int
    q: int
    rows: list[LevelRow]

    def rates(self) -> list[tuple[float | None, float | None, float | None]]:
        """Observed orders log2(e(h)/e(h/2)) between consecutive rows."""
        out: list[tuple[float | None, float | None, float | None]] = [(None, None, None)]
        for prev, cur in zip(self.rows, self.rows[1:]):
            trio = []
            for a, b in ((prev.e_tb, cur.e_tb), (prev.e_h2, cur.e_h2), (prev.e_l2, cur.e_l2)):
                trio.append(log2(a / b) if a > RATE_FLOOR and b > RATE_FLOOR else None)
            out.append(tuple(trio))
        return out

    def final_rates(self) -> tuple[float | None, float | None, float | None]:
        return self.rates()[-1]

    def _table(self) -> list[list[str]]:
        rows = []
        for row, rate in zip(self.rows, self.rates()):
            rows.append([
                str(row.level), repr(row.h), str(row.dofs),
                repr(row.e_tb), repr(row.e_h2), repr(row.e_l2),
                *("" if r is None else repr(r) for r in rate),
                str(row.iters), f"{row.seconds:.3f}",
            ])
        return rows

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            writer.writerows(self._table())

    def to_gnuplot(self, path) -> None:
        """Whitespace-separated data block ready for `plot "..." using 2:4`."""
        lines = ["# " + " ".join(CSV_HEADER)]
        for row in self._table():
            lines.append(" ".join(cell if cell else "nan" for cell in row))
        Path(path).write_text("\n".join(lines) + "\n")

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(CSV_HEADER)
        writer.writerows(self._table())
        return buf.getvalue()


def convergence_study(problem: ManufacturedProblem, family: str, levels: int,
                      k: int, p: int, q: int, nx0: int = 4,
                      r_override: int | None = None, solver: str = "auto",
                      tol: float = 1e-10) -> ConvergenceReport:
    """Run the problem over meshes with nx = nx0, 2 nx0, ... (levels rows)."""
    if levels < 1:
        raise ValueError("levels must be at least 1")
    rows = []
    for level in range(levels):
        nx = nx0 * 2**level
        mesh = generate_mesh(nx, nx, family)
        result = run_case(problem, mesh, k, p, q, r_override=r_override,
                          solver=solver, tol=tol)
        rows.append(LevelRow(
            level=level, h=result.h, dofs=result.n_free,
            e_tb=result.errors.triple_bar, e_h2=result.errors.discrete_h2,
            e_l2=result.errors.l2_interior,
            iters=result.report.iterations, seconds=result.seconds,
        ))
    return ConvergenceReport(problem=problem.name, family=family, k=k, p=p, q=q, rows=rows)


def rate_thresholds(k: int) -> tuple[float, float]:
    """(energy, L2) observed-order thresholds: proven order minus the slack."""
    return (k - 1) - RATE_SLACK, (k + 1) - RATE_SLACK


def rates_pass(report: ConvergenceReport) -> tuple[bool, list[str]]:
    """Check the finest-pair observed orders against the thresholds.

    Rates at the rounding floor (exactly reproduced solutions) pass trivially.
    """
    tb_min, l2_min = rate_thresholds(report.k)
    rate_tb, _, rate_l2 = report.final_rates()
    messages = []
    ok = True
    floor = all(r.e_tb < 1e-8 and r.e_l2 < 1e-8 for r in report.rows)
    if floor:
        messages.append("errors at rounding floor; rate check skipped")
        return True, messages
    if rate_tb is None or rate_tb < tb_min:
        ok = False
        messages.append(f"energy rate {rate_tb} below threshold {tb_min}")
    if rate_l2 is None or rate_l2 < l2_min:
        ok = False
        messages.append(f"L2 rate {rate_l2} below threshold {l2_min}")
    if ok:
        messages.append(f"rates ok (energy {rate_tb:.2f} >= {tb_min}, L2 {rate_l2:.2f} >= {l2_min})")
    return ok, messages


def case_csv_row(result: CaseResult) -> str:
    """Single-row CSV (same schema as studies) for one solve."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(CSV_HEADER)
    writer.writerow([
        "0", repr(result.h), str(result.n_free),
        repr(result.errors.triple_bar), repr(result.errors.discrete_h2),
        repr(result.errors.l2_interior), "", "", "",
        str(result.report.iterations), f"{result.seconds:.3f}",
    ])
    return buf.getvalue()
