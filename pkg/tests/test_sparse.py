import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lumen.errors import DimensionMismatchError
from lumen.sparse import SparseMatrixCSR, assemble_csr, solve_bicgstab, solve_cg, spmv


def dense_from_triplets(triplets, nrows, ncols):
    out = np.zeros((nrows, ncols))
    for r, c, v in triplets:
        out[r, c] += v
    return out


def laplacian_1d(n):
    trip = []
    for i in range(n):
        trip.append((i, i, 2.0))
        if i > 0:
            trip.append((i, i - 1, -1.0))
        if i + 1 < n:
            trip.append((i, i + 1, -1.0))
    return trip


# ---- assembly ----

def test_assemble_single_entry_identity():
    a = assemble_csr([(0, 0, 1.0)], 1, 1)
    assert a.toarray().tolist() == [[1.0]]


def test_assemble_sums_duplicates():
    a = assemble_csr([(0, 0, 1.0), (0, 0, 2.0)], 1, 1)
    assert a.nnz == 1
    assert a.toarray()[0, 0] == 3.0


def test_assemble_1d_laplacian_pattern():
    a = assemble_csr(laplacian_1d(3), 3, 3)
    np.testing.assert_array_equal(
        a.toarray(), [[2, -1, 0], [-1, 2, -1], [0, -1, 2]]
    )
    assert a.row_offsets.tolist() == [0, 2, 5, 7]


def test_assemble_bounds_check():
    with pytest.raises(IndexError):
        assemble_csr([(2, 0, 1.0)], 2, 2)
    with pytest.raises(IndexError):
        assemble_csr([(0, -1, 1.0)], 2, 2)


def test_assemble_empty():
    a = assemble_csr([], 3, 2)
    assert a.nnz == 0
    assert spmv(a, np.ones(2)).tolist() == [0, 0, 0]


def test_csr_invariants_enforced():
    with pytest.raises(ValueError):
        SparseMatrixCSR(2, 2, [0, 1, 1], [0, 1], [1.0, 1.0])  # offsets end wrong
    with pytest.raises(ValueError):
        SparseMatrixCSR(1, 2, [0, 2], [1, 0], [1.0, 1.0])  # columns decrease


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**31),
    nrows=st.integers(1, 32),
    ncols=st.integers(1, 32),
    nnz=st.integers(0, 120),
)
def test_assemble_spmv_matches_dense(seed, nrows, ncols, nnz):
    rng = np.random.default_rng(seed)
    trips = [
        (int(rng.integers(nrows)), int(rng.integers(ncols)), float(rng.normal()))
        for _ in range(nnz)
    ]
    a = assemble_csr(trips, nrows, ncols)
    x = rng.normal(size=ncols)
    dense = dense_from_triplets(trips, nrows, ncols)
    np.testing.assert_allclose(spmv(a, x), dense @ x, rtol=1e-13, atol=1e-13)


def test_spmv_identity_and_zero():
    eye = assemble_csr([(i, i, 1.0) for i in range(4)], 4, 4)
    x = np.arange(4.0)
    np.testing.assert_array_equal(spmv(eye, x), x)
    zero = assemble_csr([], 4, 4)
    np.testing.assert_array_equal(spmv(zero, x), np.zeros(4))


def test_spmv_laplacian_hand_value():
    a = assemble_csr(laplacian_1d(3), 3, 3)
    np.testing.assert_array_equal(spmv(a, np.ones(3)), [1.0, 0.0, 1.0])


def test_spmv_dimension_mismatch():
    a = assemble_csr([(0, 0, 1.0)], 1, 1)
    with pytest.raises(DimensionMismatchError):
        spmv(a, np.ones(2))


# ---- CG ----

def test_cg_identity_one_iteration():
    eye = assemble_csr([(i, i, 1.0) for i in range(5)], 5, 5)
    b = np.array([3.0, -1.0, 0.5, 2.0, 9.0])
    x, report = solve_cg(eye, b)
    np.testing.assert_allclose(x, b, atol=1e-14)
    assert report.converged and report.iterations <= 1


def test_cg_diagonal():
    a = assemble_csr([(0, 0, 2.0), (1, 1, 4.0)], 2, 2)
    x, report = solve_cg(a, np.array([2.0, 8.0]))
    np.testing.assert_allclose(x, [1.0, 2.0], atol=1e-12)
    assert report.converged


def test_cg_shifted_laplacian_matches_dense():
    trips = laplacian_1d(3) + [(i, i, 1.0) for i in range(3)]
    a = assemble_csr(trips, 3, 3)
    b = np.ones(3)
    expected = np.linalg.solve(dense_from_triplets(trips, 3, 3), b)
    x, report = solve_cg(a, b, tol=1e-12)
    assert report.converged
    assert report.final_residual_norm <= 1e-10
    np.testing.assert_allclose(x, expected, atol=1e-10)


def test_cg_zero_rhs():
    a = assemble_csr(laplacian_1d(4), 4, 4)
    x, report = solve_cg(a, np.zeros(4))
    assert report.converged and report.iterations == 0
    np.testing.assert_array_equal(x, np.zeros(4))


def test_cg_reports_failure_within_budget():
    a = assemble_csr(laplacian_1d(50), 50, 50)
    b = np.random.default_rng(0).normal(size=50)
    _, report = solve_cg(a, b, tol=1e-14, max_iter=2)
    assert not report.converged
    assert report.iterations <= 2


def test_cg_deterministic():
    rng = np.random.default_rng(1)
    trips = laplacian_1d(20) + [(i, i, 0.5) for i in range(20)]
    a = assemble_csr(trips, 20, 20)
    b = rng.normal(size=20)
    x1, r1 = solve_cg(a, b)
    x2, r2 = solve_cg(a, b)
    np.testing.assert_array_equal(x1, x2)
    assert r1 == r2


def test_cg_jacobi_option():
    trips = [(0, 0, 100.0), (1, 1, 0.01), (0, 1, 0.001), (1, 0, 0.001)]
    a = assemble_csr(trips, 2, 2)
    b = np.array([1.0, 1.0])
    expected = np.linalg.solve(dense_from_triplets(trips, 2, 2), b)
    x, report = solve_cg(a, b, tol=1e-12, jacobi=True)
    assert report.converged
    np.testing.assert_allclose(x, expected, rtol=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_cg_random_spd_reaches_tolerance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 40))
    trips = []
    for i in range(n):
        trips.append((i, i, 2.0 + float(rng.random())))
        if i + 1 < n:
            w = -float(rng.random())
            trips.append((i, i + 1, w))
            trips.append((i + 1, i, w))
    a = assemble_csr(trips, n, n)
    b = rng.normal(size=n)
    x, report = solve_cg(a, b, tol=1e-11)
    assert report.converged
    assert report.final_residual_norm <= 1e-11 * np.linalg.norm(b)
    resid = np.linalg.norm(b - dense_from_triplets(trips, n, n) @ x)
    assert resid <= 1.1e-11 * np.linalg.norm(b)


# ---- BiCGStab ----

def test_bicgstab_identity():
    eye = assemble_csr([(i, i, 1.0) for i in range(3)], 3, 3)
    b = np.array([1.0, 2.0, 3.0])
    x, report = solve_bicgstab(eye, b)
    np.testing.assert_allclose(x, b, atol=1e-14)
    assert report.converged


def test_bicgstab_upper_triangular():
    trips = [(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)]
    a = assemble_csr(trips, 2, 2)
    x, report = solve_bicgstab(a, np.array([2.0, 1.0]))
    assert report.converged
    np.testing.assert_allclose(x, [1.0, 1.0], atol=1e-10)


@pytest.mark.parametrize("seed", range(8))
def test_bicgstab_random_diagonally_dominant(seed):
    rng = np.random.default_rng(100 + seed)
    n = 20
    dense = rng.normal(size=(n, n))
    dense += np.diag(np.abs(dense).sum(axis=1) + 1.0)
    trips = [
        (i, j, float(dense[i, j])) for i in range(n) for j in range(n)
    ]
    a = assemble_csr(trips, n, n)
    b = rng.normal(size=n)
    x, report = solve_bicgstab(a, b, tol=1e-10)
    assert report.converged
    expected = np.linalg.solve(dense, b)
    assert np.abs(x - expected).max() <= 1e-8 * max(1.0, np.abs(expected).max())


def test_bicgstab_warm_start_exact_solution():
    trips = laplacian_1d(6) + [(i, i, 1.0) for i in range(6)]
    a = assemble_csr(trips, 6, 6)
    b = np.ones(6)
    x_exact = np.linalg.solve(dense_from_triplets(trips, 6, 6), b)
    x, report = solve_bicgstab(a, b, x0=x_exact)
    assert report.converged and report.iterations == 0
    np.testing.assert_allclose(x, x_exact)


def test_bicgstab_deterministic():
    rng = np.random.default_rng(2)
    n = 15
    dense = rng.normal(size=(n, n)) + np.eye(n) * 20
    trips = [(i, j, float(dense[i, j])) for i in range(n) for j in range(n)]
    a = assemble_csr(trips, n, n)
    b = rng.normal(size=n)
    x1, r1 = solve_bicgstab(a, b)
    x2, r2 = solve_bicgstab(a, b)
    np.testing.assert_array_equal(x1, x2)
    assert r1 == r2


def test_report_invariant_converged_implies_tolerance():
    # across a mix of solves, converged=True must mean the recomputed
    # residual is within the requested relative tolerance
    rng = np.random.default_rng(3)
    for seed in range(5):
        n = 12
        dense = rng.normal(size=(n, n)) + np.eye(n) * 10
        trips = [(i, j, float(dense[i, j])) for i in range(n) for j in range(n)]
        a = assemble_csr(trips, n, n)
        b = rng.normal(size=n)
        for solver in (solve_cg, solve_bicgstab):
            x, report = solver(a, b, tol=1e-9)
            if report.converged:
                assert (
                    np.linalg.norm(b - dense @ x)
                    <= 1e-9 * np.linalg.norm(b) * (1 + 1e-12)
                )


def test_matrix_market_dump():
    a = assemble_csr([(0, 0, 1.5), (1, 0, -2.0)], 2, 2)
    text = a.to_matrix_market()
    lines = text.strip().splitlines()
    assert lines[0].startswith("%%MatrixMarket")
    assert lines[1] == "2 2 2"
    assert "1 1 1.5" in lines[2]
