"""Minimal CSR sparse matrix and iterative solvers.

Shared by the diffusion inpainting (symmetric systems, CG) and the osmosis
evolution (nonsymmetric systems, BiCGStab). Solves are deterministic: the
initial guess is the zero vector unless a warm start is passed, and reports
always carry the residual recomputed from scratch, never the recurrence
value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionMismatchError


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    final_residual_norm: float
    converged: bool


class SparseMatrixCSR:
    """Compressed sparse row matrix, double precision, immutable."""

    __slots__ = ("nrows", "ncols", "row_offsets", "col_indices", "values")

    def __init__(self, nrows, ncols, row_offsets, col_indices, values):
        row_offsets = np.array(row_offsets, dtype=np.int64, copy=True)
        col_indices = np.array(col_indices, dtype=np.int64, copy=True)
        values = np.array(values, dtype=np.float64, copy=True)
        if row_offsets.shape != (nrows + 1,):
            raise ValueError("row_offsets must have length nrows + 1")
        if row_offsets[0] != 0 or row_offsets[-1] != values.size:
            raise ValueError("row_offsets must start at 0 and end at nnz")
        if np.any(np.diff(row_offsets) < 0):
            raise ValueError("row_offsets must be non-decreasing")
        if col_indices.shape != values.shape:
            raise ValueError("col_indices and values must have equal length")
        if col_indices.size and (
            col_indices.min() < 0 or col_indices.max() >= ncols
        ):
            raise ValueError("column index out of range")
        # strictly increasing columns within each row
        if col_indices.size:
            inner = np.ones(col_indices.size, dtype=bool)
            starts = row_offsets[1:-1]
            inner[starts[starts < col_indices.size]] = False  # row starts may decrease
            if np.any((np.diff(col_indices) <= 0) & inner[1:]):
                raise ValueError("columns must be strictly increasing within a row")
        for name, val in (
            ("nrows", int(nrows)),
            ("ncols", int(ncols)),
            ("row_offsets", row_offsets),
            ("col_indices", col_indices),
            ("values", values),
        ):
            object.__setattr__(self, name, val)
        row_offsets.flags.writeable = False
        col_indices.flags.writeable = False
        values.flags.writeable = False

    def __setattr__(self, name, value):
        raise AttributeError("SparseMatrixCSR is immutable")

    @property
    def nnz(self) -> int:
        return self.values.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def diagonal(self) -> np.ndarray:
        diag = np.zeros(min(self.nrows, self.ncols))
        for i in range(self.nrows):
            lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
            pos = np.searchsorted(self.col_indices[lo:hi], i)
            if pos < hi - lo and self.col_indices[lo + pos] == i:
                diag[i] = self.values[lo + pos]
        return diag

    def toarray(self) -> np.ndarray:
        dense = np.zeros((self.nrows, self.ncols))
        row_ids = np.repeat(np.arange(self.nrows), np.diff(self.row_offsets))
        dense[row_ids, self.col_indices] = self.values
        return dense

    def to_matrix_market(self) -> str:
        """Coordinate-format Matrix Market text, for external cross-checks."""
        lines = [
            "%%MatrixMarket matrix coordinate real general",
            f"{self.nrows} {self.ncols} {self.nnz}",
        ]
        row_ids = np.repeat(np.arange(self.nrows), np.diff(self.row_offsets))
        for r, c, v in zip(row_ids, self.col_indices, self.values):
            lines.append(f"{r + 1} {c + 1} {float(v)!r}")
        return "\n".join(lines) + "\n"


def assemble_csr(triplets, nrows: int, ncols: int) -> SparseMatrixCSR:
    """Build CSR from (row, col, value) triplets.

    Accepts either an iterable of 3-tuples or a (rows, cols, values) triple
    of arrays. Duplicate coordinates are summed in input order; rows come
    out with strictly increasing columns.
    """
    if isinstance(triplets, tuple) and len(triplets) == 3:
        rows, cols, vals = (np.asarray(a) for a in triplets)
    else:
        items = list(triplets)
        if items:
            rows = np.array([t[0] for t in items], dtype=np.int64)
            cols = np.array([t[1] for t in items], dtype=np.int64)
            vals = np.array([t[2] for t in items], dtype=np.float64)
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
            vals = np.zeros(0)
    rows = rows.astype(np.int64, copy=False)
    cols = cols.astype(np.int64, copy=False)
    vals = vals.astype(np.float64, copy=False)

    if rows.size:
        if rows.min() < 0 or rows.max() >= nrows:
            raise IndexError("triplet row index out of bounds")
        if cols.min() < 0 or cols.max() >= ncols:
            raise IndexError("triplet column index out of bounds")

    order = np.lexsort((cols, rows))  # stable: duplicates keep input order
    rows, cols, vals = rows[order], cols[order], vals[order]
    if rows.size:
        first = np.ones(rows.size, dtype=bool)
        first[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
        starts = np.flatnonzero(first)
        summed = np.add.reduceat(vals, starts)
        rows, cols, vals = rows[starts], cols[starts], summed
    offsets = np.zeros(nrows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=nrows), out=offsets[1:])
    return SparseMatrixCSR(nrows, ncols, offsets, cols, vals)


def spmv(matrix: SparseMatrixCSR, x: np.ndarray) -> np.ndarray:
    """y = A x."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (matrix.ncols,):
        raise DimensionMismatchError(
            f"vector length {x.shape} does not match {matrix.ncols} columns"
        )
    return kernels.spmv(matrix.row_offsets, matrix.col_indices, matrix.values, x)


def _jacobi_scale(matrix: SparseMatrixCSR, symmetric: bool):
    diag = matrix.diagonal()
    safe = np.where(diag != 0.0, np.abs(diag), 1.0)
    dinv = 1.0 / np.sqrt(safe) if symmetric else 1.0 / safe
    row_ids = np.repeat(np.arange(matrix.nrows), np.diff(matrix.row_offsets))
    if symmetric:
        vals = matrix.values * dinv[row_ids] * dinv[matrix.col_indices]
    else:
        vals = matrix.values * dinv[row_ids]
    scaled = SparseMatrixCSR(
        matrix.nrows, matrix.ncols, matrix.row_offsets, matrix.col_indices, vals
    )
    return scaled, dinv


def _finalize(matrix, b, x, total_iters, tol):
    r = b - spmv(matrix, x)
    rnorm = float(np.linalg.norm(r))
    bnorm = float(np.linalg.norm(b))
    converged = rnorm <= tol * bnorm
    return x, SolveReport(total_iters, rnorm, converged)


def solve_cg(matrix, b, tol=1e-10, max_iter=None, x0=None, jacobi=False):
    """Conjugate gradients for symmetric positive definite systems.

    Returns (x, SolveReport). Convergence means the recomputed residual
    satisfies ||b - Ax|| <= tol * ||b||. With jacobi=True the system is
    symmetrically diagonal-scaled before solving.
    """
    b = np.asarray(b, dtype=np.float64)
    if matrix.nrows != matrix.ncols:
        raise DimensionMismatchError("CG requires a square matrix")
    if b.shape != (matrix.nrows,):
        raise DimensionMismatchError("right-hand side length mismatch")
    if max_iter is None:
        max_iter = 10 * matrix.nrows + 50
    x = np.zeros(matrix.nrows) if x0 is None else np.asarray(x0, dtype=np.float64).copy()

    work, rhs = matrix, b
    dinv = None
    if jacobi:
        work, dinv = _jacobi_scale(matrix, symmetric=True)
        rhs = b * dinv
        x = x / dinv if x0 is not None else x

    tol_abs = tol * float(np.linalg.norm(rhs))
    total = 0
    while True:
        x, iters, status = kernels.cg_sweep(
            work.row_offsets, work.col_indices, work.values, rhs, x,
            tol_abs, max_iter - total,
        )
        total += iters
        if status != kernels.STATUS_CONVERGED or total >= max_iter:
            break
        # verify against the true residual; polish if the recurrence drifted
        true_r = float(np.linalg.norm(rhs - kernels.spmv(
            work.row_offsets, work.col_indices, work.values, x)))
        if true_r <= tol_abs:
            break
    xout = x * dinv if jacobi else x
    return _finalize(matrix, b, xout, total, tol)


def solve_bicgstab(matrix, b, tol=1e-10, max_iter=None, x0=None, jacobi=False):
    """BiCGStab for general square nonsingular systems.

    On an inner-product breakdown the iteration restarts once from the
    current iterate; a second breakdown reports converged=False. Returns
    (x, SolveReport) with the residual recomputed from scratch.
    """
    b = np.asarray(b, dtype=np.float64)
    if matrix.nrows != matrix.ncols:
        raise DimensionMismatchError("BiCGStab requires a square matrix")
    if b.shape != (matrix.nrows,):
        raise DimensionMismatchError("right-hand side length mismatch")
    if max_iter is None:
        max_iter = 10 * matrix.nrows + 50
    x = np.zeros(matrix.nrows) if x0 is None else np.asarray(x0, dtype=np.float64).copy()

    work, rhs = matrix, b
    dinv = None
    if jacobi:
        work, dinv = _jacobi_scale(matrix, symmetric=False)
        rhs = b * dinv

    tol_abs = tol * float(np.linalg.norm(rhs))
    total = 0
    restarts = 0
    while True:
        x, iters, status = kernels.bicgstab_sweep(
            work.row_offsets, work.col_indices, work.values, rhs, x,
            tol_abs, max_iter - total,
        )
        total += iters
        if total >= max_iter or status == kernels.STATUS_MAXITER:
            break
        if status == kernels.STATUS_BREAKDOWN:
            restarts += 1
            if restarts > 1:
                break
            continue  # restart once from the current iterate
        true_r = float(np.linalg.norm(rhs - kernels.spmv(
            work.row_offsets, work.col_indices, work.values, x)))
        if true_r <= tol_abs:
            break
    return _finalize(matrix, b, x, total, tol)
