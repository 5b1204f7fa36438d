"""Direct and iterative solvers for the assembled SPD system."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eigvalsh_tridiagonal

# Above this free-DOF count the default solve switches to preconditioned CG.
DIRECT_LIMIT = 20000

SYMMETRY_RTOL = 1e-12


class SolverError(RuntimeError):
    """Solve failed: indefiniteness, stagnation, or residual above tolerance."""


@dataclass
class SolveReport:
    """method, iteration count, and the final residual measures.

    residual is |Ax-b|/|b|; backward is |Ax-b|/(|b| + |A| |x|), the measure a
    backward-stable solve can always drive below tolerance.  On systems where
    |A| |x| >> |b| (small-data problems on fine meshes) the plain relative
    residual bottoms out around eps * |A| |x| / |b|, which can exceed any
    tolerance below ~1e-9; success therefore requires residual <= tol OR
    backward <= tol.
    """

    method: str
    iterations: int
    residual: float
    backward: float


def _as_csr(A) -> sp.csr_matrix:
    if sp.issparse(A):
        return A.tocsr()
    return sp.csr_matrix(np.asarray(A, dtype=float))


def _check_symmetry(A: sp.csr_matrix) -> None:
    scale = np.abs(A.data).max() if A.nnz else 1.0
    diff = A - A.T
    dev = np.abs(diff.data).max() if diff.nnz else 0.0
    if dev > SYMMETRY_RTOL * scale:
        raise ValueError(f"matrix is not symmetric (relative deviation {dev / scale:.2e})")


def _norm1(A: sp.csr_matrix) -> float:
    return float(np.max(np.abs(A).sum(axis=1))) if A.nnz else 0.0


def _direct_spd(A: sp.csr_matrix, b: np.ndarray, tol: float):
    # Symmetric-mode SuperLU without partial pivoting factors an SPD matrix
    # with positive pivots; a nonpositive pivot flags loss of definiteness.
    lu = spla.splu(A.tocsc(), permc_spec="MMD_AT_PLUS_A",
                   diag_pivot_thresh=0.0, options={"SymmetricMode": True})
    if lu.U.diagonal().min() <= 0.0:
        raise SolverError("direct factorization hit a nonpositive pivot; matrix is not positive definite")
    bnorm = np.linalg.norm(b)
    norm_a = _norm1(A)
    x = lu.solve(b)
    for _ in range(4):
        res = b - A @ x
        if np.linalg.norm(res) <= tol * bnorm:
            break
        x = x + lu.solve(res)
    rnorm = np.linalg.norm(b - A @ x)
    residual = rnorm / bnorm
    backward = rnorm / (bnorm + norm_a * np.linalg.norm(x))
    if residual > tol and backward > tol:
        raise SolverError(f"direct solve residual {residual:.2e} exceeds tolerance {tol:.2e}")
    return x, residual, backward


def _pcg_jacobi(A: sp.csr_matrix, b: np.ndarray, tol: float, max_iter: int):
    diag = A.diagonal()
    if diag.min() <= 0.0:
        raise SolverError("nonpositive diagonal entry; matrix is not positive definite")
    inv_diag = 1.0 / diag
    bnorm = np.linalg.norm(b)
    norm_a = _norm1(A)
    x = np.zeros_like(b)
    r = b.copy()
    z = inv_diag * r
    d = z.copy()
    rz = float(r @ z)
    best = np.linalg.norm(r)
    since_best = 0
    for it in range(1, max_iter + 1):
        Ad = A @ d
        dAd = float(d @ Ad)
        if dAd <= 0.0:
            raise SolverError("conjugate gradients found a nonpositive curvature direction; matrix is not positive definite")
        alpha = rz / dAd
        x += alpha * d
        r -= alpha * Ad
        rnorm = np.linalg.norm(r)
        if rnorm <= tol * bnorm or rnorm <= tol * (bnorm + norm_a * np.linalg.norm(x)):
            return x, it, rnorm / bnorm, rnorm / (bnorm + norm_a * np.linalg.norm(x))
        if rnorm < best:
            best = rnorm
            since_best = 0
        else:
            since_best += 1
            if since_best >= 50:
                raise SolverError(
                    f"conjugate gradients stagnated for 50 iterations at residual {rnorm / bnorm:.2e}"
                )
        z = inv_diag * r
        rz_new = float(r @ z)
        d = z + (rz_new / rz) * d
        rz = rz_new
    raise SolverError(f"conjugate gradients did not converge within {max_iter} iterations")


def solve_spd(A, b, tol: float = 1e-10, method: str = "auto",
              max_iter: int | None = None) -> tuple[np.ndarray, SolveReport]:
    """Solve the symmetric positive definite system A x = b.

    method 'auto' uses the direct factorization up to DIRECT_LIMIT free DOFs
    and Jacobi-preconditioned conjugate gradients beyond; 'cholesky' and
    'cg_jacobi' force one path.  Raises SolverError when the matrix turns out
    indefinite or the requested relative residual cannot be reached.
    """
    A = _as_csr(A)
    b = np.asarray(b, dtype=float)
    if not np.all(np.isfinite(b)):
        raise ValueError("right-hand side contains non-finite entries")
    _check_symmetry(A)
    n = b.size
    if method == "auto":
        method = "cholesky" if n <= DIRECT_LIMIT else "cg_jacobi"
    if np.linalg.norm(b) == 0.0:
        return np.zeros(n), SolveReport(method=method, iterations=0, residual=0.0, backward=0.0)
    if method == "cholesky":
        x, residual, backward = _direct_spd(A, b, tol)
        return x, SolveReport(method="cholesky", iterations=0, residual=residual, backward=backward)
    if method == "cg_jacobi":
        if max_iter is None:
            max_iter = max(1000, 10 * n)
        x, iters, residual, backward = _pcg_jacobi(A, b, tol, max_iter)
        return x, SolveReport(method="cg_jacobi", iterations=iters, residual=residual, backward=backward)
    raise ValueError(f"unknown solver method {method!r}")


def smallest_ritz_value(A, num_iter: int = 60) -> float:
    """Smallest Ritz value from a deterministic Lanczos run (>= lambda_min).

    A positive value certifies that A is positive definite on the probed
    subspace; the start vector is fixed so results are reproducible.
    """
    A = _as_csr(A)
    n = A.shape[0]
    if n == 1:
        return float(A[0, 0])
    m = min(num_iter, n)
    v = np.ones(n) / np.sqrt(n)
    V = np.zeros((n, m))
    alphas, betas = [], []
    V[:, 0] = v
    w = A @ v
    alpha = float(v @ w)
    alphas.append(alpha)
    w = w - alpha * v
    scale = np.abs(A.data).max() if A.nnz else 1.0
    for j in range(1, m):
        # full reorthogonalization keeps the small desk-scale runs accurate
        w -= V[:, :j] @ (V[:, :j].T @ w)
        w -= V[:, :j] @ (V[:, :j].T @ w)
        beta = np.linalg.norm(w)
        if beta <= 1e-14 * scale:
            break
        v = w / beta
        V[:, j] = v
        w = A @ v
        alpha = float(v @ w)
        alphas.append(alpha)
        betas.append(beta)
        w = w - alpha * v - beta * V[:, j - 1]
    if not betas:
        return alphas[0]
    return float(eigvalsh_tridiagonal(np.array(alphas), np.array(betas))[0])
