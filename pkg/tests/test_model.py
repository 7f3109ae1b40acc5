"""Unit tests for the problem representations and the equality reformulation."""

import numpy as np
import pytest
import scipy.optimize
import scipy.sparse as sp
from numpy.testing import assert_allclose

from spirallp import (
    BoxLp,
    GeneralLp,
    ReformulatedLp,
    StandardLp,
    as_box,
    reformulate,
    svd_summary,
    toy_example,
)

RNG_SEED = 20240602


def _random_general(rng, m=None, n=None):
    m = m if m is not None else int(rng.integers(1, 6))
    n = n if n is not None else int(rng.integers(1, 8))
    A = rng.standard_normal((m, n))
    A[rng.random((m, n)) < 0.3] = 0.0
    mid = A @ rng.uniform(0.0, 1.0, size=n)
    half = rng.uniform(0.1, 2.0, size=m)
    row_lower = mid - half
    row_upper = mid + half
    eq = rng.random(m) < 0.4
    row_lower[eq] = mid[eq]
    row_upper[eq] = mid[eq]
    return GeneralLp(
        A=sp.csc_matrix(A),
        c=rng.standard_normal(n),
        row_lower=row_lower,
        row_upper=row_upper,
        col_lower=np.zeros(n),
        col_upper=rng.uniform(1.0, 4.0, size=n),
    )


class TestStandardLp:
    def test_toy_example_values(self):
        lp = toy_example()
        assert lp.shape == (1, 2)
        assert_allclose(lp.A.toarray(), [[1.0, 2.0]])
        assert_allclose(lp.b, [1.0])
        assert_allclose(lp.c, [2.0, 3.0])

    def test_to_box(self):
        box = toy_example().to_box()
        assert box.is_standard()
        assert_allclose(box.lower, [0.0, 0.0])
        assert np.all(np.isinf(box.upper))
        assert box.objective(np.array([0.0, 0.5])) == pytest.approx(1.5)

    def test_rejects_nonfinite_data(self):
        with pytest.raises(ValueError):
            StandardLp(A=np.eye(2), b=np.array([1.0, np.inf]), c=np.zeros(2))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValueError):
            StandardLp(A=np.eye(2), b=np.ones(3), c=np.zeros(2))


class TestBoxLp:
    def test_clamp_and_objective(self):
        box = BoxLp(
            A=np.array([[1.0, 1.0]]),
            b=np.array([1.0]),
            c=np.array([1.0, 2.0]),
            lower=np.array([0.0, -1.0]),
            upper=np.array([2.0, 1.0]),
            c0=5.0,
        )
        assert_allclose(box.clamp(np.array([-3.0, 3.0])), [0.0, 1.0])
        assert box.objective(np.array([1.0, 1.0])) == pytest.approx(8.0)
        assert not box.is_standard()

    def test_fixed_variable_allowed(self):
        box = BoxLp(
            A=np.eye(1), b=np.zeros(1), c=np.zeros(1),
            lower=np.array([2.0]), upper=np.array([2.0]),
        )
        assert_allclose(box.clamp(np.array([9.0])), [2.0])

    def test_crossed_bounds_rejected(self):
        with pytest.raises(ValueError, match="column 1"):
            BoxLp(
                A=np.eye(2), b=np.zeros(2), c=np.zeros(2),
                lower=np.array([0.0, 1.0]), upper=np.array([1.0, 0.0]),
            )

    def test_duplicate_entries_canonicalized(self):
        coo = sp.coo_matrix(([1.0, 2.0], ([0, 0], [0, 0])), shape=(1, 1))
        box = BoxLp(A=coo, b=np.zeros(1), c=np.zeros(1),
                    lower=np.zeros(1), upper=np.ones(1))
        assert_allclose(box.A.toarray(), [[3.0]])


class TestGeneralLp:
    def test_rejects_maximization(self):
        with pytest.raises(ValueError, match="minimization"):
            GeneralLp(
                A=np.eye(1), c=np.zeros(1),
                row_lower=np.zeros(1), row_upper=np.zeros(1),
                col_lower=np.zeros(1), col_upper=np.ones(1),
                objective_sense="max",
            )

    def test_rejects_crossed_row_interval(self):
        with pytest.raises(ValueError, match="row 0"):
            GeneralLp(
                A=np.eye(1), c=np.zeros(1),
                row_lower=np.ones(1), row_upper=np.zeros(1),
                col_lower=np.zeros(1), col_upper=np.ones(1),
            )


class TestReformulation:
    def test_structure(self):
        rng = np.random.default_rng(RNG_SEED)
        lp = _random_general(rng, m=3, n=4)
        ref = reformulate(lp, shift=10.0)
        m, n = lp.shape
        assert ref.shape == (m, n + m)
        assert_allclose(ref.A_ext.toarray()[:, :n], lp.A.toarray())
        assert_allclose(ref.A_ext.toarray()[:, n:], -np.eye(m))
        assert_allclose(ref.rhs, -10.0)
        assert_allclose(ref.var_lower[:n], lp.col_lower)
        assert_allclose(ref.var_lower[n:], lp.row_lower + 10.0)
        assert_allclose(ref.var_upper[n:], lp.row_upper + 10.0)

    def test_full_row_rank(self):
        rng = np.random.default_rng(RNG_SEED + 1)
        for _ in range(20):
            lp = _random_general(rng)
            ref = reformulate(lp)
            assert svd_summary(ref.A_ext).rank == lp.shape[0]

    def test_extend_restrict_roundtrip(self):
        rng = np.random.default_rng(RNG_SEED + 2)
        lp = _random_general(rng, m=3, n=5)
        ref = reformulate(lp)
        x = rng.uniform(0.0, 1.0, size=5)
        xw = ref.extend_point(x)
        assert_allclose(ref.restrict_point(xw), x)
        # The lifted point satisfies the equality system exactly.
        assert_allclose(ref.A_ext @ xw, ref.rhs, atol=1e-12)
        # Feasible rows of the base problem land inside the shifted bounds.
        Ax = lp.A @ x
        inside = (Ax >= lp.row_lower - 1e-12) & (Ax <= lp.row_upper + 1e-12)
        w = xw[5:]
        assert np.all(w[inside] >= ref.var_lower[5:][inside] - 1e-12)
        assert np.all(w[inside] <= ref.var_upper[5:][inside] + 1e-12)

    def test_box_objective_matches_base(self):
        rng = np.random.default_rng(RNG_SEED + 3)
        lp = _random_general(rng, m=2, n=4)
        lp.objective_shift = 7.5
        ref = reformulate(lp)
        box = ref.to_box()
        x = rng.uniform(0.0, 1.0, size=4)
        assert box.objective(ref.extend_point(x)) == pytest.approx(
            float(lp.c @ x) + 7.5
        )

    def test_optimal_value_preserved(self):
        # Independent oracle: solve base and reformulated forms with HiGHS and
        # compare optima.
        rng = np.random.default_rng(RNG_SEED + 4)
        solved = 0
        for _ in range(12):
            lp = _random_general(rng)
            base = scipy.optimize.linprog(
                lp.c,
                A_ub=sp.vstack([lp.A, -lp.A]).toarray(),
                b_ub=np.concatenate([lp.row_upper, -lp.row_lower]),
                bounds=list(zip(lp.col_lower, lp.col_upper)),
                method="highs",
            )
            if not base.success:
                continue
            ref = reformulate(lp)
            box = ref.to_box()
            lifted = scipy.optimize.linprog(
                box.c,
                A_eq=box.A.toarray(),
                b_eq=box.b,
                bounds=list(zip(box.lower, box.upper)),
                method="highs",
            )
            assert lifted.success
            assert lifted.fun == pytest.approx(base.fun, rel=1e-7, abs=1e-7)
            solved += 1
        assert solved >= 5

    def test_default_shift(self):
        lp = _random_general(np.random.default_rng(RNG_SEED + 5), m=2, n=2)
        assert ReformulatedLp(base=lp).shift == 10.0


class TestAsBox:
    def test_passthrough_and_coercions(self):
        std = toy_example()
        box = std.to_box()
        assert as_box(box) is box
        assert_allclose(as_box(std).A.toarray(), box.A.toarray())
        lp = _random_general(np.random.default_rng(RNG_SEED + 6), m=2, n=3)
        ref_box = as_box(lp)
        assert ref_box.shape == (2, 5)
        assert_allclose(as_box(reformulate(lp)).A.toarray(), ref_box.A.toarray())

    def test_rejects_unknown_type(self):
        with pytest.raises(TypeError):
            as_box("not an lp")
