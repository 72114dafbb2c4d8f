"""Drift-diffusion osmosis: structure transfer with exact mass conservation.

The evolution du/dt = A u uses a face-based discretization: for the face
between pixels p and q carrying drift delta, the flux is
(u_q - u_p) - delta (u_q + u_p)/2, accumulated with opposite signs into
rows p and q. Every column of A sums to zero, so the implicit Euler steps
conserve the mean exactly up to solver tolerance. With drift
d = grad ln(v + eps) the shifted guidance v + eps is an exact discrete
steady state, and evolutions converge to a rescaled copy of the guidance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DimensionMismatchError, SolverDivergedError
from .raster import BinaryMask, RasterImage, require_same_shape, to_grayscale
from .sparse import SparseMatrixCSR, assemble_csr, solve_bicgstab


@dataclass(frozen=True)
class DriftField:
    """Staggered drift: d1 on vertical faces (h, w-1), d2 on horizontal
    faces (h-1, w)."""

    d1: np.ndarray
    d2: np.ndarray

    def __post_init__(self):
        d1 = np.array(self.d1, dtype=np.float64, copy=True)
        d2 = np.array(self.d2, dtype=np.float64, copy=True)
        if d1.ndim != 2 or d2.ndim != 2:
            raise ValueError("drift components must be 2-dim")
        h = d1.shape[0]
        w = d2.shape[1]
        if d1.shape != (h, w - 1) or d2.shape != (h - 1, w):
            raise ValueError(
                f"inconsistent drift shapes {d1.shape} / {d2.shape}"
            )
        if not (np.all(np.isfinite(d1)) and np.all(np.isfinite(d2))):
            raise ValueError("drift values must be finite")
        d1.flags.writeable = False
        d2.flags.writeable = False
        object.__setattr__(self, "d1", d1)
        object.__setattr__(self, "d2", d2)

    @property
    def height(self) -> int:
        return self.d1.shape[0]

    @property
    def width(self) -> int:
        return self.d2.shape[1]


@dataclass(frozen=True)
class OsmosisParams:
    """Implicit evolution controls.

    dt defaults far beyond any explicit stability limit because the
    implicit scheme is unconditionally stable; the offset guards the
    logarithmic drift at black pixels at the scale of one 8-bit quantum.
    presmooth_steps optionally denoises the guidance with pure-diffusion
    steps of length presmooth_dt before the drift is computed.
    """

    dt: float = 1000.0
    steps: int = 500
    steady_tol: float = 1e-8
    offset: float = 1.0 / 255.0
    solver_tol: float = 1e-12
    presmooth_steps: int = 0
    presmooth_dt: float = 1.0

    def __post_init__(self):
        if self.dt <= 0 or self.presmooth_dt <= 0:
            raise ValueError("time steps must be > 0")
        if self.offset <= 0:
            raise ValueError("offset must be > 0")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.presmooth_steps < 0:
            raise ValueError("presmooth_steps must be >= 0")


def compute_drift(guidance: RasterImage, offset: float = 1.0 / 255.0) -> DriftField:
    """Canonical logarithmic drift of the guidance, evaluated per face.

    With v = guidance + offset the face value between horizontally adjacent
    pixels is 2 (v_right - v_left) / (v_right + v_left); vertical faces are
    analogous. The formula is invariant under v -> c v, so doubling the
    guidance (with offset scaled along) leaves the drift unchanged.
    """
    if guidance.channels != 1:
        raise ValueError("compute_drift expects a single-channel guidance")
    v = guidance.data[:, :, 0] + offset
    d1 = 2.0 * (v[:, 1:] - v[:, :-1]) / (v[:, 1:] + v[:, :-1])
    d2 = 2.0 * (v[1:, :] - v[:-1, :]) / (v[1:, :] + v[:-1, :])
    return DriftField(d1, d2)


def assemble_osmosis_operator(
    drift: DriftField, width: int, height: int
) -> SparseMatrixCSR:
    """Conservative osmosis operator A with homogeneous Neumann walls.

    Row p of A u is the sum of signed face fluxes around pixel p; each
    interior face contributes the same flux with opposite signs to its two
    rows, which makes every column sum to zero exactly.
    """
    if drift.d1.shape != (height, width - 1) or drift.d2.shape != (height - 1, width):
        raise DimensionMismatchError(
            f"drift sized for {drift.width}x{drift.height}, grid is {width}x{height}"
        )
    n = width * height
    rows = []
    cols = []
    vals = []

    def add_faces(pflat: np.ndarray, qflat: np.ndarray, delta: np.ndarray):
        half = 0.5 * delta
        rows.append(pflat)
        cols.append(pflat)
        vals.append(-1.0 - half)
        rows.append(pflat)
        cols.append(qflat)
        vals.append(1.0 - half)
        rows.append(qflat)
        cols.append(pflat)
        vals.append(1.0 + half)
        rows.append(qflat)
        cols.append(qflat)
        vals.append(-1.0 + half)

    if width > 1:
        ys, xs = np.mgrid[0:height, 0 : width - 1]
        p = (ys * width + xs).ravel()
        add_faces(p, p + 1, drift.d1.ravel())
    if height > 1:
        ys, xs = np.mgrid[0 : height - 1, 0:width]
        p = (ys * width + xs).ravel()
        add_faces(p, p + width, drift.d2.ravel())

    if not rows:  # single-pixel grid has no faces
        return assemble_csr([], n, n)
    return assemble_csr(
        (np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)), n, n
    )


def implicit_matrix(operator: SparseMatrixCSR, dt: float) -> SparseMatrixCSR:
    """M = I - dt A, the matrix solved once per implicit Euler step."""
    n = operator.nrows
    row_ids = np.repeat(np.arange(n, dtype=np.int64), np.diff(operator.row_offsets))
    rows = np.concatenate([row_ids, np.arange(n, dtype=np.int64)])
    cols = np.concatenate([operator.col_indices, np.arange(n, dtype=np.int64)])
    vals = np.concatenate([-dt * operator.values, np.ones(n)])
    return assemble_csr((rows, cols, vals), n, n)


def evolve_iterates(
    u0: np.ndarray, operator: SparseMatrixCSR, params: OsmosisParams
) -> Iterator[np.ndarray]:
    """Yield the unclamped iterate after each implicit Euler step.

    Each step solves (I - dt A) u_next = u with BiCGStab warm-started from
    the current iterate. Stops after params.steps yields; early stopping on
    steady_tol is the caller's decision.
    """
    shape = u0.shape
    m = implicit_matrix(operator, params.dt)
    u = np.asarray(u0, dtype=np.float64).ravel().copy()
    for _ in range(params.steps):
        x, report = solve_bicgstab(m, u, tol=params.solver_tol, x0=u)
        if not report.converged:
            raise SolverDivergedError(f"implicit osmosis step failed: {report}")
        u = x
        yield u.reshape(shape)


def _evolve_to_steady(u0: np.ndarray, operator, params) -> np.ndarray:
    u = u0
    for u_next in evolve_iterates(u0, operator, params):
        denom = float(np.linalg.norm(u.ravel()))
        change = float(np.linalg.norm((u_next - u).ravel()))
        rel = change / denom if denom > 0 else change
        u = u_next
        if rel <= params.steady_tol:
            break
    return u


def osmosis_evolve(
    u0: RasterImage, drift: DriftField, params: OsmosisParams | None = None
) -> RasterImage:
    """Evolve a single-channel image to the osmosis steady state.

    The mean intensity is conserved at every step; the output is clamped
    to [0, 1] only at the final write-back.
    """
    params = params or OsmosisParams()
    if u0.channels != 1:
        raise ValueError("osmosis_evolve expects a single-channel image")
    if (drift.height, drift.width) != (u0.height, u0.width):
        raise DimensionMismatchError(
            f"drift sized for {drift.width}x{drift.height}, "
            f"image is {u0.width}x{u0.height}"
        )
    operator = assemble_osmosis_operator(drift, u0.width, u0.height)
    final = _evolve_to_steady(u0.data[:, :, 0], operator, params)
    return RasterImage(np.clip(final, 0.0, 1.0))


def _combined_drift(
    d_inside: DriftField, d_outside: DriftField, region: np.ndarray
) -> DriftField:
    """Per-face switch: a face takes the inside drift when either endpoint
    lies in the region."""
    h_face = region[:, 1:] | region[:, :-1]
    v_face = region[1:, :] | region[:-1, :]
    return DriftField(
        np.where(h_face, d_inside.d1, d_outside.d1),
        np.where(v_face, d_inside.d2, d_outside.d2),
    )


def _presmooth(gray: RasterImage, params: OsmosisParams) -> RasterImage:
    if params.presmooth_steps == 0:
        return gray
    zero = DriftField(
        np.zeros((gray.height, gray.width - 1)),
        np.zeros((gray.height - 1, gray.width)),
    )
    operator = assemble_osmosis_operator(zero, gray.width, gray.height)
    smooth_params = OsmosisParams(
        dt=params.presmooth_dt,
        steps=params.presmooth_steps,
        steady_tol=0.0,
        offset=params.offset,
        solver_tol=params.solver_tol,
    )
    u = gray.data[:, :, 0]
    for u in evolve_iterates(u, operator, smooth_params):
        pass
    return RasterImage(np.clip(u, 0.0, 1.0))


def fuse_multispectral(
    visible: RasterImage,
    source: RasterImage,
    region: BinaryMask | None,
    params: OsmosisParams | None = None,
) -> RasterImage:
    """Encode the source channel's structure into the visible image.

    Faces with an endpoint inside `region` (None = everywhere) take their
    drift from the source channel; all other faces take it from the visible
    channel itself, whose shifted content is then an exact steady state, so
    changes concentrate inside the region. Each visible channel evolves
    independently as channel + offset and is shifted back afterwards.
    """
    params = params or OsmosisParams()
    if (source.height, source.width) != (visible.height, visible.width):
        raise DimensionMismatchError(
            f"visible {visible.width}x{visible.height} vs "
            f"source {source.width}x{source.height}"
        )
    if region is not None:
        require_same_shape(visible, region)
        region_bits = region.bits
    else:
        region_bits = np.ones((visible.height, visible.width), dtype=bool)

    guidance = _presmooth(to_grayscale(source), params)
    d_source = compute_drift(guidance, params.offset)

    out = np.empty_like(visible.data)
    for ch in range(visible.channels):
        chan = visible.data[:, :, ch]
        d_self = compute_drift(RasterImage(chan), params.offset)
        drift = _combined_drift(d_source, d_self, region_bits)
        operator = assemble_osmosis_operator(drift, visible.width, visible.height)
        shifted = _evolve_to_steady(chan + params.offset, operator, params)
        out[:, :, ch] = shifted - params.offset
    return RasterImage(np.clip(out, 0.0, 1.0))
