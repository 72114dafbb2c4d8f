"""Greedy exemplar-based inpainting for large textured losses.

Fill-front pixels are ranked by priority = confidence x data term, the best
target patch is completed by copying the minimum-SSD fully-known source
patch, confidence propagates to the filled pixels, and the loop repeats
until the hole is gone. All ties break on the smallest row-major index, so
runs are bit-reproducible. Copying never synthesizes values: every filled
pixel equals some pixel of the original known region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NoValidSourceError
from .raster import BinaryMask, PixelCoord, RasterImage, require_same_shape

_LUMA = np.array([0.2126, 0.7152, 0.0722])


@dataclass(frozen=True)
class ExemplarTrace:
    """Result of a traced run: the restored image, the number of greedy
    iterations, and the final confidence map (1 on originally known
    pixels, patch-mean values in [0, 1] on filled ones)."""

    image: "RasterImage"
    iterations: int
    confidence: np.ndarray


def initial_confidence(mask: BinaryMask) -> np.ndarray:
    """Confidence map seed: 1 on known pixels, 0 on unknown; values never
    exceed 1 during filling because propagation only copies patch means."""
    return np.where(mask.bits, 0.0, 1.0)


@dataclass(frozen=True)
class ExemplarParams:
    """Patch geometry and search behavior.

    search_window is a radius in pixels around the target; None searches
    the whole image, which keeps the oracle trivially correct at desk
    scale. data_term_alpha normalizes the isophote strength; intensities
    live in [0,1], so 1.0 keeps the data term unit-scaled.
    """

    patch_size: int = 9
    search_window: int | None = None
    data_term_alpha: float = 1.0

    def __post_init__(self):
        if self.patch_size < 3 or self.patch_size % 2 == 0:
            raise ValueError("patch_size must be an odd integer >= 3")
        if self.search_window is not None and self.search_window < self.patch_size:
            raise ValueError("search_window radius must be >= patch_size")
        if self.data_term_alpha <= 0:
            raise ValueError("data_term_alpha must be > 0")


def fill_front(mask: BinaryMask) -> list[PixelCoord]:
    """Unknown pixels with at least one known 4-neighbor, row-major."""
    unknown = mask.bits
    known = ~unknown
    nbr_known = np.zeros_like(known)
    nbr_known[1:, :] |= known[:-1, :]
    nbr_known[:-1, :] |= known[1:, :]
    nbr_known[:, 1:] |= known[:, :-1]
    nbr_known[:, :-1] |= known[:, 1:]
    ys, xs = np.nonzero(unknown & nbr_known)
    return [PixelCoord(int(x), int(y)) for y, x in zip(ys, xs)]


def patch_ssd(
    image: RasterImage,
    mask: BinaryMask,
    target_center: PixelCoord,
    source_center: PixelCoord,
    patch_size: int,
) -> tuple[float, bool]:
    """Sum of squared differences over the known pixels of the target patch.

    valid=False when the source patch leaves the image or overlaps any
    unknown pixel; the ssd is then reported as inf.
    """
    require_same_shape(image, mask)
    half = patch_size // 2
    h, w = image.height, image.width
    sy, sx = source_center.y, source_center.x
    if sy - half < 0 or sy + half >= h or sx - half < 0 or sx + half >= w:
        return float("inf"), False
    if mask.bits[sy - half : sy + half + 1, sx - half : sx + half + 1].any():
        return float("inf"), False
    ty, tx = target_center.y, target_center.x
    y0, y1 = max(0, ty - half), min(h - 1, ty + half)
    x0, x1 = max(0, tx - half), min(w - 1, tx + half)
    if y1 < y0 or x1 < x0:
        return 0.0, True
    tblock = image.data[y0 : y1 + 1, x0 : x1 + 1]
    sblock = image.data[
        sy + (y0 - ty) : sy + (y1 - ty) + 1, sx + (x0 - tx) : sx + (x1 - tx) + 1
    ]
    knw = ~mask.bits[y0 : y1 + 1, x0 : x1 + 1]
    diff = tblock - sblock
    return float((diff * diff)[knw].sum()), True


def _valid_sources(unknown: np.ndarray, half: int) -> np.ndarray:
    """uint8 map of centers whose patch is fully in-bounds and fully known."""
    h, w = unknown.shape
    ps = 2 * half + 1
    out = np.zeros((h, w), dtype=np.uint8)
    if h < ps or w < ps:
        return out
    integral = np.zeros((h + 1, w + 1), dtype=np.int64)
    integral[1:, 1:] = unknown.astype(np.int64).cumsum(0).cumsum(1)
    cnt = (
        integral[ps:, ps:]
        - integral[:-ps, ps:]
        - integral[ps:, :-ps]
        + integral[:-ps, :-ps]
    )
    out[half : h - half, half : w - half] = cnt == 0
    return out


def _patch_means(values: np.ndarray, fy: np.ndarray, fx: np.ndarray, half: int):
    """Mean of `values` over the in-bounds patch around each front pixel."""
    h, w = values.shape
    integral = np.zeros((h + 1, w + 1))
    integral[1:, 1:] = values.cumsum(0).cumsum(1)
    y0 = np.maximum(fy - half, 0)
    y1 = np.minimum(fy + half, h - 1)
    x0 = np.maximum(fx - half, 0)
    x1 = np.minimum(fx + half, w - 1)
    sums = (
        integral[y1 + 1, x1 + 1]
        - integral[y0, x1 + 1]
        - integral[y1 + 1, x0]
        + integral[y0, x0]
    )
    return sums / ((y1 - y0 + 1) * (x1 - x0 + 1))


def _data_terms(img, conf, unknown, fy, fx, alpha):
    """Isophote-times-normal strength at each front pixel.

    Gradients use central differences (one-sided at the border) on the
    confidence-weighted grayscale, which zeroes unknown pixels out; the
    front normal comes from the gradient of the mask indicator. Where that
    gradient vanishes the data term is degenerate and flagged.
    """
    gray = img[:, :, 0] if img.shape[2] == 1 else img @ _LUMA
    weighted = gray * conf
    if weighted.shape[0] > 1 and weighted.shape[1] > 1:
        gy, gx = np.gradient(weighted)
        my, mx = np.gradient(unknown.astype(np.float64))
    else:  # np.gradient needs >= 2 samples per axis
        gy = gx = np.zeros_like(weighted)
        my = mx = np.zeros_like(weighted)
    iso_x, iso_y = -gy[fy, fx], gx[fy, fx]
    nx, ny = mx[fy, fx], my[fy, fx]
    norm = np.sqrt(nx * nx + ny * ny)
    degenerate = norm == 0.0
    safe = np.where(degenerate, 1.0, norm)
    data = np.abs(iso_x * nx + iso_y * ny) / (safe * alpha)
    return np.where(degenerate, 0.0, data), degenerate


def _greedy_fill(image: RasterImage, mask: BinaryMask, params: ExemplarParams):
    require_same_shape(image, mask)
    h, w = image.height, image.width
    img = image.data.copy()
    unknown = mask.bits.copy()
    conf = initial_confidence(mask)
    half = params.patch_size // 2

    if not unknown.any():
        return img, 0, conf
    if not _valid_sources(unknown, half).any():
        raise NoValidSourceError(
            f"no fully known {params.patch_size}x{params.patch_size} source patch"
        )

    iterations = 0
    while unknown.any():
        fy, fx = np.nonzero(_front(unknown))
        confidences = _patch_means(conf, fy, fx, half)
        data, degenerate = _data_terms(
            img, conf, unknown, fy, fx, params.data_term_alpha
        )
        priority = np.where(degenerate, confidences, confidences * data)
        sel = int(np.argmax(priority))  # first max = smallest row-major index
        ty, tx = int(fy[sel]), int(fx[sel])

        if params.search_window is None:
            sy_lo, sy_hi = half, h - 1 - half
            sx_lo, sx_hi = half, w - 1 - half
        else:
            r = params.search_window
            sy_lo, sy_hi = max(half, ty - r), min(h - 1 - half, ty + r)
            sx_lo, sx_hi = max(half, tx - r), min(w - 1 - half, tx + r)

        valid = _valid_sources(unknown, half)
        known_u8 = (~unknown).astype(np.uint8)
        _, sy, sx = kernels.best_source_patch(
            img, known_u8, valid, ty, tx, half, sy_lo, sy_hi, sx_lo, sx_hi
        )
        if sy < 0:
            raise NoValidSourceError(
                "no valid source patch inside the search window"
            )

        y0, y1 = max(0, ty - half), min(h - 1, ty + half)
        x0, x1 = max(0, tx - half), min(w - 1, tx + half)
        hole = unknown[y0 : y1 + 1, x0 : x1 + 1]
        src = img[sy + (y0 - ty) : sy + (y1 - ty) + 1, sx + (x0 - tx) : sx + (x1 - tx) + 1]
        img[y0 : y1 + 1, x0 : x1 + 1][hole] = src[hole]
        conf[y0 : y1 + 1, x0 : x1 + 1][hole] = confidences[sel]
        unknown[y0 : y1 + 1, x0 : x1 + 1][hole] = False
        iterations += 1
    return img, iterations, conf


def _front(unknown: np.ndarray) -> np.ndarray:
    known = ~unknown
    nbr_known = np.zeros_like(known)
    nbr_known[1:, :] |= known[:-1, :]
    nbr_known[:-1, :] |= known[1:, :]
    nbr_known[:, 1:] |= known[:, :-1]
    nbr_known[:, :-1] |= known[:, 1:]
    return unknown & nbr_known


def inpaint_exemplar(
    image: RasterImage, mask: BinaryMask, params: ExemplarParams | None = None
) -> RasterImage:
    """Fill the masked region by greedy exemplar copying.

    Raises NoValidSourceError when no fully known patch of the requested
    size exists. Known pixels are bit-identical in the output.
    """
    img, _, _ = _greedy_fill(image, mask, params or ExemplarParams())
    return RasterImage(img)


def inpaint_exemplar_traced(
    image: RasterImage, mask: BinaryMask, params: ExemplarParams | None = None
) -> ExemplarTrace:
    """Same as inpaint_exemplar but also reports iteration count and the
    final confidence map."""
    img, iterations, conf = _greedy_fill(image, mask, params or ExemplarParams())
    return ExemplarTrace(RasterImage(img), iterations, conf)
