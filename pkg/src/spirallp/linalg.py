"""Linear algebra kernels shared by the solver, geometry, and crossover layers.

Everything here is a pure function of its inputs: spectral norm estimation by
power iteration, minimal-norm least squares (dense direct or chunked LSMR),
orthogonal projection onto a kernel, dense SVD summaries, and the two-stage
LU procedure that extends an independent column set to a full basis.

Matrices may be dense ndarrays or any scipy.sparse matrix; column submatrices
throughout the package are scipy CSC.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

# Rank cutoff for direct minimal-norm solves (relative to the top singular value).
RANK_RTOL = 1e-10
# Pivot magnitudes below PIVOT_RTOL * column scale count as numerically zero.
PIVOT_RTOL = 1e-10
# Certificate target for the iterative solver: ||A^T(Ax-b)|| <= CERT_RTOL * (1 + ||b||).
CERT_RTOL = 1e-10
CERT_RTOL_ACCEPT = 1e-8

SVD_GUARD = 512


class SpectralEstimateError(RuntimeError):
    """Power iteration hit its cap; carries the best estimate so far."""

    def __init__(self, message: str, best_estimate: float):
        super().__init__(message)
        self.best_estimate = best_estimate


class IterativeSolveError(RuntimeError):
    """LSMR failed to certify a minimal-norm solution; carries the residual history."""

    def __init__(self, message: str, residual_history: list[float]):
        super().__init__(message)
        self.residual_history = residual_history


class RankCompletionError(RuntimeError):
    """Candidate columns cannot extend the basis to full rank."""

    def __init__(self, message: str, achieved_rank: int, selection: "LuSelection"):
        super().__init__(message)
        self.achieved_rank = achieved_rank
        self.selection = selection


@dataclass
class LsSolveReport:
    """Minimal-norm least-squares solution with its certificate numbers."""

    solution: np.ndarray
    normal_residual_norm: float
    iterations: int
    method: str


@dataclass
class SpectralSummary:
    rank: int
    singular_values: np.ndarray
    kernel_basis_cols: np.ndarray
    kernel_basis_rows: np.ndarray


@dataclass
class LuSelection:
    selected_columns: list[int]
    pivot_order: list[int]
    fill_diagnostics: dict = field(default_factory=dict)


def _as_dense(A) -> np.ndarray:
    if sp.issparse(A):
        return np.asarray(A.todense())
    return np.asarray(A, dtype=float)


def spectral_norm_estimate(A, tol: float = 1e-4, max_iter: int = 5000) -> float:
    """Estimate ||A||_2 by power iteration on A^T A.

    Starts from the normalized all-ones vector so repeated calls are bitwise
    identical; if that start is (numerically) orthogonal to the dominant
    subspace the iteration restarts once from a fixed pseudorandom vector.
    Returns 0.0 for a zero matrix. Raises SpectralEstimateError when the
    Rayleigh quotient has not stabilized within max_iter rounds.
    """
    m, n = A.shape
    if m == 0 or n == 0:
        return 0.0
    At = A.T
    v = np.ones(n) / np.sqrt(n)
    sigma = 0.0
    restarted = False
    for _ in range(max_iter):
        u = A @ v
        norm_u = float(np.linalg.norm(u))
        if norm_u == 0.0:
            if restarted:
                return 0.0
            # The all-ones start lies in the kernel (e.g. A = [[1, -1]]);
            # restart once from a fixed random direction.
            v = np.random.default_rng(20240515).standard_normal(n)
            nv = float(np.linalg.norm(v))
            if nv == 0.0:
                return 0.0
            v = v / nv
            restarted = True
            continue
        w = At @ u
        norm_w = float(np.linalg.norm(w))
        sigma_new = norm_u
        if norm_w == 0.0:
            return sigma_new
        if abs(sigma_new - sigma) <= 0.5 * tol * max(sigma_new, 1e-300):
            return sigma_new
        sigma = sigma_new
        v = w / norm_w
    raise SpectralEstimateError(
        "power iteration did not stabilize within %d rounds (best estimate %.6e)"
        % (max_iter, sigma),
        best_estimate=sigma,
    )


def _lstsq_direct(A, b: np.ndarray, cond: float = RANK_RTOL) -> LsSolveReport:
    dense = _as_dense(A)
    x, _, _, _ = scipy.linalg.lstsq(dense, b, cond=cond, lapack_driver="gelsd")
    nrn = float(np.linalg.norm(dense.T @ (dense @ x - b)))
    return LsSolveReport(solution=x, normal_residual_norm=nrn, iterations=0, method="direct")


def _lstsq_iterative(A, b: np.ndarray) -> LsSolveReport:
    m, n = A.shape
    norm_b = float(np.linalg.norm(b))
    target = CERT_RTOL * (1.0 + norm_b)
    accept = CERT_RTOL_ACCEPT * (1.0 + norm_b)
    cap = max(10 * (m + n), 20)
    chunk = max(m + n, 10)
    x = np.zeros(n)
    total_iters = 0
    history: list[float] = []
    normar = float(np.linalg.norm(A.T @ b))
    while total_iters < cap:
        budget = min(chunk, cap - total_iters)
        # x0 keeps the iterate in range(A^T), so the chunked limit stays the
        # minimal-norm solution.
        x, istop, itn, _, normar, *_ = spla.lsmr(
            A, b, atol=1e-16, btol=1e-16, conlim=0.0, maxiter=budget, x0=x
        )
        total_iters += itn
        normar = float(normar)
        history.append(normar)
        if normar <= target or istop in (1, 2):
            break
        if itn == 0:
            break
    nrn = float(np.linalg.norm(A.T @ (A @ x - b)))
    if nrn > accept:
        raise IterativeSolveError(
            "LSMR stalled after %d iterations: normal residual %.3e exceeds %.3e"
            % (total_iters, nrn, accept),
            residual_history=history,
        )
    return LsSolveReport(
        solution=x, normal_residual_norm=nrn, iterations=total_iters, method="iterative"
    )


def least_squares(
    A, b, method: str = "auto", tol: float = RANK_RTOL, direct_threshold: int = 1000
) -> LsSolveReport:
    """Minimal-norm least-squares solve of min ||Ax - b||_2.

    method="direct" densifies and uses an SVD-based LAPACK solve with rank
    cutoff ``tol``; "iterative" runs LSMR in chunks until the normal-equation
    residual certificate holds; "auto" picks direct below ``direct_threshold``.
    The returned solution is orthogonal to kernel(A) in every case.
    """
    b = np.asarray(b, dtype=float).ravel()
    m, n = A.shape
    if b.shape[0] != m:
        raise ValueError("rhs length %d does not match %d rows" % (b.shape[0], m))
    if n == 0:
        return LsSolveReport(np.zeros(0), 0.0, 0, "direct")
    if m == 0:
        return LsSolveReport(np.zeros(n), 0.0, 0, "direct")
    if method == "auto":
        method = "direct" if min(m, n) < direct_threshold else "iterative"
    if method == "direct":
        return _lstsq_direct(A, b, cond=tol)
    if method == "iterative":
        return _lstsq_iterative(A, b)
    raise ValueError("unknown least-squares method %r" % (method,))


def project_kernel(A, x0, method: str = "auto") -> np.ndarray:
    """Orthogonal projection of x0 onto {x : Ax = 0}, via a minimal-norm solve."""
    x0 = np.asarray(x0, dtype=float).ravel()
    m, n = A.shape
    if x0.shape[0] != n:
        raise ValueError("x0 length %d does not match %d columns" % (x0.shape[0], n))
    if m == 0 or n == 0:
        return x0.copy()
    rep = least_squares(A, A @ x0, method=method)
    return x0 - rep.solution


def svd_summary(A) -> SpectralSummary:
    """Dense SVD with rank decision and orthonormal kernel bases.

    Guarded to matrices of at most 512 x 512; the geometry layer only ever
    needs it at test scale.
    """
    m, n = A.shape
    if m > SVD_GUARD or n > SVD_GUARD:
        raise ValueError(
            "svd_summary is limited to %dx%d (got %dx%d)" % (SVD_GUARD, SVD_GUARD, m, n)
        )
    dense = _as_dense(A)
    if m == 0 or n == 0:
        return SpectralSummary(
            rank=0,
            singular_values=np.zeros(0),
            kernel_basis_cols=np.eye(n),
            kernel_basis_rows=np.eye(m),
        )
    U, s, Vt = np.linalg.svd(dense, full_matrices=True)
    if s.size and s[0] > 0:
        rank = int(np.sum(s > RANK_RTOL * s[0]))
    else:
        rank = 0
    return SpectralSummary(
        rank=rank,
        singular_values=s[:rank].copy(),
        kernel_basis_cols=Vt[rank:].T.copy(),
        kernel_basis_rows=U[:, rank:].copy(),
    )


def lu_select_independent_columns(A_B, A_C) -> LuSelection:
    """Extend the independent columns of A_B to a basis using columns of A_C.

    Two-stage procedure: LU-factor A_B with row pivoting to split the rows,
    form the Schur-style complement of the candidate columns against that
    factorization, then run a greedy left-to-right elimination with partial
    pivoting on the complement, keeping each candidate whose pivot survives
    the relative threshold.  Scanning in the given order makes the selection
    match a greedy exhaustive rank test candidate by candidate.
    """
    m = A_B.shape[0]
    k = A_B.shape[1]
    if A_C.shape[0] != m:
        raise ValueError("row counts differ: %d vs %d" % (m, A_C.shape[0]))
    need = m - k
    diagnostics = {"rank_start": k, "candidates": A_C.shape[1]}
    if need <= 0:
        diagnostics["rank"] = k
        return LuSelection([], [], diagnostics)

    dense_C = _as_dense(A_C)
    if k > 0:
        dense_B = _as_dense(A_B)
        P, L, _ = scipy.linalg.lu(dense_B)
        # P @ L @ U = A_B, so P.T reorders rows to make the leading k x k
        # block of L unit lower triangular.
        rows_perm = P.T @ dense_C
        L11 = L[:k, :k]
        L21 = L[k:, :k]
        top = rows_perm[:k, :]
        S = rows_perm[k:, :] - L21 @ scipy.linalg.solve_triangular(L11, top, lower=True, unit_diagonal=True)
    else:
        S = dense_C.copy()

    col_scales = np.maximum(1.0, np.max(np.abs(dense_C), axis=0, initial=0.0))
    selected: list[int] = []
    pivot_rows: list[int] = []
    used = np.zeros(S.shape[0], dtype=bool)
    work = S.copy()
    min_pivot = np.inf
    for j in range(work.shape[1]):
        col = work[:, j].copy()
        col[used] = 0.0
        pivot_row = int(np.argmax(np.abs(col)))
        pivot = col[pivot_row]
        if abs(pivot) <= PIVOT_RTOL * col_scales[j]:
            continue
        selected.append(j)
        pivot_rows.append(pivot_row)
        used[pivot_row] = True
        min_pivot = min(min_pivot, abs(pivot))
        if len(selected) == need:
            break
        # Eliminate the pivot row from the remaining candidates.
        factors = work[pivot_row, j + 1:] / pivot
        work[:, j + 1:] -= np.outer(col, factors)
        work[pivot_row, j + 1:] = 0.0

    diagnostics["rank"] = k + len(selected)
    diagnostics["min_pivot"] = None if not selected else float(min_pivot)
    if len(selected) < need:
        raise RankCompletionError(
            "cannot complete basis: reached rank %d of %d" % (k + len(selected), m),
            achieved_rank=k + len(selected),
            selection=LuSelection(selected, pivot_rows, diagnostics),
        )
    return LuSelection(selected, pivot_rows, diagnostics)
