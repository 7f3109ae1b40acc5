"""Unit tests for the shared linear algebra kernels."""

import numpy as np
import pytest
import scipy.sparse as sp
from numpy.testing import assert_allclose

from spirallp import (
    IterativeSolveError,
    RankCompletionError,
    SpectralEstimateError,
    least_squares,
    lu_select_independent_columns,
    project_kernel,
    spectral_norm_estimate,
    svd_summary,
)

RNG_SEED = 20240601


def _random_matrix(rng, m, n, rank=None):
    A = rng.standard_normal((m, n))
    if rank is not None and rank < min(m, n):
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
        s[rank:] = 0.0
        A = (U * s) @ Vt
    return A


class TestSpectralNorm:
    def test_diagonal(self):
        A = np.diag([1.0, 2.0, 3.0, 4.0, 5.0])
        assert spectral_norm_estimate(A) == pytest.approx(5.0, rel=1e-4)

    def test_single_row(self):
        A = np.array([[1.0, 2.0]])
        assert spectral_norm_estimate(A) == pytest.approx(np.sqrt(5.0), rel=1e-4)

    def test_zero_matrix(self):
        assert spectral_norm_estimate(np.zeros((3, 4))) == 0.0

    def test_empty(self):
        assert spectral_norm_estimate(np.zeros((0, 4))) == 0.0

    def test_ones_start_in_kernel_restarts(self):
        # A @ ones = 0, so the deterministic start vector gives u = 0 and the
        # estimator must restart from its fixed fallback direction.
        A = np.array([[1.0, -1.0]])
        assert spectral_norm_estimate(A) == pytest.approx(np.sqrt(2.0), rel=1e-4)

    def test_matches_numpy_on_random(self):
        rng = np.random.default_rng(RNG_SEED)
        for _ in range(20):
            A = rng.standard_normal((rng.integers(1, 9), rng.integers(1, 9)))
            exact = np.linalg.norm(A, 2)
            assert spectral_norm_estimate(A) == pytest.approx(exact, rel=2e-4, abs=1e-12)

    def test_sparse_input(self):
        A = sp.csc_matrix(np.diag([3.0, 7.0]))
        assert spectral_norm_estimate(A) == pytest.approx(7.0, rel=1e-4)

    def test_deterministic(self):
        A = np.random.default_rng(3).standard_normal((6, 6))
        assert spectral_norm_estimate(A) == spectral_norm_estimate(A)

    def test_non_convergence_raises_with_best_estimate(self):
        # Two nearly equal dominant singular values make progress per round
        # tiny but nonzero, so a zero tolerance cannot be met in few rounds.
        A = np.diag([1.0, 1.0 - 1e-6])
        with pytest.raises(SpectralEstimateError) as info:
            spectral_norm_estimate(A, tol=0.0, max_iter=5)
        assert info.value.best_estimate == pytest.approx(1.0, rel=1e-3)


class TestLeastSquares:
    def test_minimal_norm_underdetermined(self):
        rep = least_squares(np.array([[1.0, 2.0]]), np.array([1.0]))
        assert_allclose(rep.solution, [0.2, 0.4], atol=1e-12)

    def test_overdetermined_average(self):
        rep = least_squares(np.array([[1.0], [1.0]]), np.array([1.0, 2.0]))
        assert_allclose(rep.solution, [1.5], atol=1e-12)

    def test_methods_agree(self):
        rng = np.random.default_rng(RNG_SEED)
        for trial in range(25):
            m, n = int(rng.integers(1, 10)), int(rng.integers(1, 10))
            A = _random_matrix(rng, m, n, rank=int(rng.integers(1, min(m, n) + 1)))
            b = rng.standard_normal(m)
            direct = least_squares(A, b, method="direct")
            iterative = least_squares(A, b, method="iterative")
            assert direct.method == "direct"
            assert iterative.method == "iterative"
            assert_allclose(iterative.solution, direct.solution, atol=1e-6)

    def test_certificate_holds(self):
        rng = np.random.default_rng(RNG_SEED + 1)
        for trial in range(25):
            m, n = int(rng.integers(1, 12)), int(rng.integers(1, 12))
            A = rng.standard_normal((m, n))
            b = rng.standard_normal(m)
            for method in ("direct", "iterative"):
                rep = least_squares(A, b, method=method)
                cert = np.linalg.norm(A.T @ (A @ rep.solution - b))
                assert cert <= 1e-8 * (1.0 + np.linalg.norm(b))
                assert rep.normal_residual_norm == pytest.approx(cert, abs=1e-12)

    def test_solution_orthogonal_to_kernel(self):
        rng = np.random.default_rng(RNG_SEED + 2)
        for method in ("direct", "iterative"):
            A = _random_matrix(rng, 4, 7, rank=3)
            b = rng.standard_normal(4)
            rep = least_squares(A, b, method=method)
            kernel = svd_summary(A).kernel_basis_cols
            assert_allclose(kernel.T @ rep.solution, 0.0, atol=1e-7)

    def test_sparse_input(self):
        A = sp.csc_matrix(np.array([[1.0, 2.0]]))
        rep = least_squares(A, np.array([1.0]), method="iterative")
        assert_allclose(rep.solution, [0.2, 0.4], atol=1e-8)

    def test_auto_threshold_switch(self):
        A = np.array([[2.0]])
        b = np.array([4.0])
        assert least_squares(A, b, direct_threshold=2).method == "direct"
        assert least_squares(A, b, direct_threshold=1).method == "iterative"

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            least_squares(np.eye(2), np.ones(3))

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            least_squares(np.eye(2), np.ones(2), method="magic")

    def test_empty_dimensions(self):
        assert least_squares(np.zeros((0, 3)), np.zeros(0)).solution.shape == (3,)
        assert least_squares(np.zeros((3, 0)), np.ones(3)).solution.shape == (0,)


class TestProjectKernel:
    def test_worked_example(self):
        out = project_kernel(np.array([[1.0, 2.0]]), np.array([1.0, 1.0]))
        assert_allclose(out, [0.4, -0.2], atol=1e-12)

    def test_kernel_point_unchanged(self):
        out = project_kernel(np.array([[1.0, 2.0]]), np.array([2.0, -1.0]))
        assert_allclose(out, [2.0, -1.0], atol=1e-12)

    def test_result_in_kernel_and_idempotent(self):
        rng = np.random.default_rng(RNG_SEED + 3)
        for _ in range(20):
            A = _random_matrix(rng, 3, 6, rank=2)
            x0 = rng.standard_normal(6)
            p = project_kernel(A, x0)
            assert np.linalg.norm(A @ p) <= 1e-8 * (1.0 + np.linalg.norm(x0))
            assert_allclose(project_kernel(A, p), p, atol=1e-8)

    def test_orthogonality_of_removed_part(self):
        rng = np.random.default_rng(RNG_SEED + 4)
        A = rng.standard_normal((2, 5))
        x0 = rng.standard_normal(5)
        p = project_kernel(A, x0)
        # The removed component lies in range(A^T), hence is orthogonal to p.
        assert abs((x0 - p) @ p) <= 1e-10

    def test_empty_rows(self):
        x0 = np.array([1.0, 2.0])
        assert_allclose(project_kernel(np.zeros((0, 2)), x0), x0)


class TestSvdSummary:
    def test_rank_deficient(self):
        out = svd_summary(np.array([[1.0, 2.0], [2.0, 4.0]]))
        assert out.rank == 1
        assert out.singular_values.shape == (1,)
        assert out.kernel_basis_cols.shape == (2, 1)
        assert out.kernel_basis_rows.shape == (2, 1)

    def test_kernel_bases_orthonormal_and_annihilating(self):
        rng = np.random.default_rng(RNG_SEED + 5)
        A = _random_matrix(rng, 5, 8, rank=3)
        out = svd_summary(A)
        assert out.rank == 3
        K = out.kernel_basis_cols
        assert_allclose(K.T @ K, np.eye(K.shape[1]), atol=1e-10)
        assert_allclose(A @ K, 0.0, atol=1e-10)
        R = out.kernel_basis_rows
        assert_allclose(R.T @ R, np.eye(R.shape[1]), atol=1e-10)
        assert_allclose(R.T @ A, 0.0, atol=1e-10)

    def test_full_rank_identity(self):
        out = svd_summary(np.eye(3))
        assert out.rank == 3
        assert out.kernel_basis_cols.shape == (3, 0)

    def test_size_guard(self):
        with pytest.raises(ValueError):
            svd_summary(np.zeros((513, 2)))


def _brute_force_selection(A_B, A_C):
    """Greedy left-to-right rank oracle via numpy matrix_rank."""
    picked = []
    current = A_B.copy()
    m = A_B.shape[0]
    rank = np.linalg.matrix_rank(current) if current.size else 0
    for j in range(A_C.shape[1]):
        if rank == m:
            break
        trial = np.hstack([current, A_C[:, [j]]])
        r = np.linalg.matrix_rank(trial)
        if r > rank:
            picked.append(j)
            current = trial
            rank = r
    return picked, rank


class TestLuSelection:
    def test_second_candidate_selected(self):
        # The first candidate is parallel to the existing basis column.
        A_B = np.array([[1.0], [0.0]])
        A_C = np.array([[2.0, 0.0], [0.0, 1.0]])
        out = lu_select_independent_columns(A_B, A_C)
        assert out.selected_columns == [1]

    def test_full_basis_selects_nothing(self):
        out = lu_select_independent_columns(np.eye(2), np.ones((2, 3)))
        assert out.selected_columns == []

    def test_identity_completion_from_empty(self):
        out = lu_select_independent_columns(np.zeros((3, 0)), np.eye(3))
        assert out.selected_columns == [0, 1, 2]

    def test_failure_carries_achieved_rank(self):
        A_B = np.array([[1.0], [0.0], [0.0]])
        A_C = np.array([[3.0, 1.0], [0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(RankCompletionError) as info:
            lu_select_independent_columns(A_B, A_C)
        assert info.value.achieved_rank == 2
        assert info.value.selection.selected_columns == [1]

    def test_row_count_mismatch(self):
        with pytest.raises(ValueError):
            lu_select_independent_columns(np.eye(2), np.ones((3, 1)))

    def test_sparse_inputs(self):
        A_B = sp.csc_matrix(np.array([[1.0], [1.0]]))
        A_C = sp.csc_matrix(np.array([[1.0, 2.0], [1.0, 0.0]]))
        out = lu_select_independent_columns(A_B, A_C)
        assert out.selected_columns == [1]

    def test_matches_greedy_rank_oracle(self):
        rng = np.random.default_rng(RNG_SEED + 6)
        for trial in range(60):
            m = int(rng.integers(1, 7))
            k = int(rng.integers(0, m + 1))
            # Independent starting columns with random conditioning.
            A_B = _random_matrix(rng, m, k)
            while k and np.linalg.matrix_rank(A_B) < k:
                A_B = _random_matrix(rng, m, k)
            nc = int(rng.integers(0, 7))
            A_C = rng.standard_normal((m, nc))
            # Half the trials plant dependent candidates to exercise skips.
            if nc and trial % 2 == 0:
                j = int(rng.integers(0, nc))
                mix = rng.standard_normal(k)
                A_C[:, j] = A_B @ mix if k else 0.0
            expected, reachable = _brute_force_selection(A_B, A_C)
            if reachable < m:
                with pytest.raises(RankCompletionError):
                    lu_select_independent_columns(A_B, A_C)
            else:
                out = lu_select_independent_columns(A_B, A_C)
                assert out.selected_columns == expected
                full = np.hstack([A_B, A_C[:, out.selected_columns]])
                assert np.linalg.matrix_rank(full) == m

    def test_selection_yields_nonsingular_completion(self):
        rng = np.random.default_rng(RNG_SEED + 7)
        for _ in range(20):
            m = int(rng.integers(2, 8))
            A_B = rng.standard_normal((m, int(rng.integers(0, m))))
            A_C = rng.standard_normal((m, m + 2))
            out = lu_select_independent_columns(A_B, A_C)
            basis = np.hstack([A_B, A_C[:, out.selected_columns]])
            assert basis.shape == (m, m)
            assert abs(np.linalg.det(basis)) > 1e-12
