"""Diffusion-type PDE inpainting on the masked region.

Two methods: harmonic (discrete Laplace equation with Dirichlet data from
the known pixels) and total variation, solved by lagged diffusivity as a
sequence of weighted-Laplacian SPD systems. Both use 5-point stencils with
homogeneous Neumann walls at the raster border, realized by truncating the
stencil (the diagonal counts only in-image neighbors). Grid spacing is 1;
only steady states are sought, so all PDE constants are absorbed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import AllUnknownError, SolverDivergedError
from .raster import BinaryMask, RasterImage, require_same_shape
from .sparse import SolveReport, SparseMatrixCSR, assemble_csr, solve_cg

_OFFSETS = ((0, 1), (0, -1), (1, 0), (-1, 0))  # (dy, dx)


class DiffusionKind(Enum):
    HARMONIC = "harmonic"
    TOTAL_VARIATION = "tv"


@dataclass(frozen=True)
class DiffusionMethod:
    """Inpainting PDE selection plus the TV regularization knobs."""

    kind: DiffusionKind
    tv_epsilon: float = 1e-3
    tv_outer_iters: int = 30

    def __post_init__(self):
        if self.tv_epsilon <= 0:
            raise ValueError("tv_epsilon must be > 0")
        if self.tv_outer_iters < 1:
            raise ValueError("tv_outer_iters must be >= 1")

    @classmethod
    def harmonic(cls) -> "DiffusionMethod":
        return cls(DiffusionKind.HARMONIC)

    @classmethod
    def total_variation(cls, epsilon: float = 1e-3, outer_iters: int = 30):
        return cls(DiffusionKind.TOTAL_VARIATION, epsilon, outer_iters)


@dataclass(frozen=True)
class InpaintResult:
    image: RasterImage
    solver_reports: tuple[SolveReport, ...]
    residual_mean_value: float | None


def _unknown_layout(mask: BinaryMask):
    """Row-major compact numbering of the unknown pixels."""
    bits = mask.bits
    flat = np.flatnonzero(bits.ravel())
    compact = np.full(bits.size, -1, dtype=np.int64)
    compact[flat] = np.arange(flat.size)
    return flat, compact


def build_harmonic_system(channel: RasterImage, mask: BinaryMask):
    """Discrete Laplace system over the unknown pixels of one channel.

    Returns (A, rhs, index_map): one row per unknown pixel in row-major
    order, diagonal equal to the number of in-image neighbors, -1 for each
    unknown neighbor, and known-neighbor values accumulated into the
    right-hand side. index_map holds the flat row-major pixel index of
    each system row.
    """
    if channel.channels != 1:
        raise ValueError("build_harmonic_system expects a single channel")
    require_same_shape(channel, mask)
    if mask.bits.all():
        raise AllUnknownError("mask covers the entire image")

    h, w = mask.height, mask.width
    vals2d = channel.data[:, :, 0]
    flat, compact = _unknown_layout(mask)
    n = flat.size
    rhs = np.zeros(n)
    diag = np.zeros(n)
    rows_acc = [np.arange(n, dtype=np.int64)]
    cols_acc = [np.arange(n, dtype=np.int64)]
    vals_acc = [diag]  # filled in place below

    ys, xs = np.divmod(flat, w)
    for dy, dx in _OFFSETS:
        ny, nx = ys + dy, xs + dx
        inside = (ny >= 0) & (ny < h) & (nx >= 0) & (nx < w)
        diag[inside] += 1.0
        niy, nix = ny[inside], nx[inside]
        nflat = niy * w + nix
        nbr_unknown = mask.bits[niy, nix]
        tgt = np.flatnonzero(inside)
        unk = tgt[nbr_unknown]
        kno = tgt[~nbr_unknown]
        rows_acc.append(unk.astype(np.int64))
        cols_acc.append(compact[nflat[nbr_unknown]])
        vals_acc.append(np.full(unk.size, -1.0))
        np.add.at(rhs, kno, vals2d[niy[~nbr_unknown], nix[~nbr_unknown]])

    A = assemble_csr(
        (np.concatenate(rows_acc), np.concatenate(cols_acc), np.concatenate(vals_acc)),
        n,
        n,
    )
    return A, rhs, flat


def _tv_edge_weights(u: np.ndarray, epsilon: float):
    """Diffusivity 1/sqrt(|grad u|^2 + eps^2) from forward differences,
    attached to each pixel's right and down edges."""
    gx = np.zeros_like(u)
    gy = np.zeros_like(u)
    gx[:, :-1] = u[:, 1:] - u[:, :-1]
    gy[:-1, :] = u[1:, :] - u[:-1, :]
    return 1.0 / np.sqrt(gx * gx + gy * gy + epsilon * epsilon)


def _build_weighted_system(u: np.ndarray, mask: BinaryMask, weights: np.ndarray):
    """Weighted 5-point system over unknowns; edge (p,q) carries the weight
    of the forward-difference base pixel, so the matrix stays symmetric."""
    h, w = u.shape
    flat, compact = _unknown_layout(mask)
    n = flat.size
    rhs = np.zeros(n)
    diag = np.zeros(n)
    rows_acc = [np.arange(n, dtype=np.int64)]
    cols_acc = [np.arange(n, dtype=np.int64)]
    vals_acc = [diag]

    ys, xs = np.divmod(flat, w)
    for dy, dx in _OFFSETS:
        ny, nx = ys + dy, xs + dx
        inside = (ny >= 0) & (ny < h) & (nx >= 0) & (nx < w)
        niy, nix = ny[inside], nx[inside]
        # weight lives on the edge's base pixel: the lexicographically
        # smaller endpoint along the edge direction
        base_y = np.minimum(ys[inside], niy)
        base_x = np.minimum(xs[inside], nix)
        wgt = weights[base_y, base_x]
        np.add.at(diag, np.flatnonzero(inside), wgt)
        nbr_unknown = mask.bits[niy, nix]
        tgt = np.flatnonzero(inside)
        unk = tgt[nbr_unknown]
        kno = tgt[~nbr_unknown]
        rows_acc.append(unk.astype(np.int64))
        cols_acc.append(compact[(niy * w + nix)[nbr_unknown]])
        vals_acc.append(-wgt[nbr_unknown])
        np.add.at(rhs, kno, wgt[~nbr_unknown] * u[niy[~nbr_unknown], nix[~nbr_unknown]])

    A = assemble_csr(
        (np.concatenate(rows_acc), np.concatenate(cols_acc), np.concatenate(vals_acc)),
        n,
        n,
    )
    return A, rhs, flat


def _mean_value_residual(data: np.ndarray, mask_bits: np.ndarray) -> float:
    """Max over unknown pixels and channels of |u - mean(in-image
    4-neighbor values)|."""
    if not mask_bits.any():
        return 0.0
    h, w, c = data.shape
    nbr_sum = np.zeros_like(data)
    nbr_cnt = np.zeros((h, w, 1))
    nbr_sum[1:, :] += data[:-1, :]
    nbr_cnt[1:, :] += 1
    nbr_sum[:-1, :] += data[1:, :]
    nbr_cnt[:-1, :] += 1
    nbr_sum[:, 1:] += data[:, :-1]
    nbr_cnt[:, 1:] += 1
    nbr_sum[:, :-1] += data[:, 1:]
    nbr_cnt[:, :-1] += 1
    resid = np.abs(data - nbr_sum / nbr_cnt)
    return float(resid[mask_bits].max())


def inpaint_diffusion(
    image: RasterImage,
    mask: BinaryMask,
    method: DiffusionMethod,
    solver_tol: float = 1e-10,
) -> InpaintResult:
    """Inpaint the masked pixels of each channel independently.

    Known pixels are bit-identical in the output. Raises AllUnknownError
    when the mask covers the whole image and SolverDivergedError when a
    linear solve fails to converge.
    """
    require_same_shape(image, mask)
    if mask.bits.all():
        raise AllUnknownError("mask covers the entire image")

    out = image.data.copy()
    reports = []
    if not mask.bits.any():
        reports = [SolveReport(0, 0.0, True)] * image.channels
        residual = 0.0 if method.kind is DiffusionKind.HARMONIC else None
        return InpaintResult(RasterImage(out), tuple(reports), residual)

    for ch in range(image.channels):
        channel = RasterImage(image.data[:, :, ch])
        if method.kind is DiffusionKind.HARMONIC:
            A, rhs, index_map = build_harmonic_system(channel, mask)
            x, report = solve_cg(A, rhs, tol=solver_tol)
            if not report.converged:
                raise SolverDivergedError(
                    f"harmonic solve failed on channel {ch}: {report}"
                )
        else:
            x, report = _tv_channel(channel.data[:, :, 0], mask, method, solver_tol)
            index_map = np.flatnonzero(mask.bits.ravel())
        plane = out[:, :, ch].ravel()
        plane[index_map] = x
        out[:, :, ch] = plane.reshape(mask.height, mask.width)
        reports.append(report)

    residual = (
        _mean_value_residual(out, mask.bits)
        if method.kind is DiffusionKind.HARMONIC
        else None
    )
    return InpaintResult(RasterImage(out), tuple(reports), residual)


def _tv_channel(values: np.ndarray, mask: BinaryMask, method, solver_tol):
    """Lagged-diffusivity fixed point: refresh edge weights from the
    current iterate, solve the weighted SPD system, repeat."""
    u = values.copy()
    known = ~mask.bits
    u[mask.bits] = u[known].mean()  # neutral start for the first weights
    x = None
    report = None
    for _ in range(method.tv_outer_iters):
        weights = _tv_edge_weights(u, method.tv_epsilon)
        A, rhs, flat = _build_weighted_system(values, mask, weights)
        x, report = solve_cg(A, rhs, tol=solver_tol, x0=u.ravel()[flat])
        if not report.converged:
            raise SolverDivergedError(f"TV inner solve failed: {report}")
        u.ravel()[flat] = x
    return x, report
