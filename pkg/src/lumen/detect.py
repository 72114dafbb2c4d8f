"""Semi-supervised damage detection: seeded region growing plus mask
morphology to consolidate the detected region before inpainting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import OutOfBoundsError
from .raster import BinaryMask, DamageClass, PixelCoord, RasterImage


@dataclass(frozen=True)
class SeedSet:
    """User-picked seed pixels with an intensity tolerance.

    The damage class is carried as metadata into job records; it does not
    change the growth rule.
    """

    seeds: tuple[PixelCoord, ...]
    tolerance: float
    damage_class: DamageClass = DamageClass.LACUNA

    def __init__(self, seeds, tolerance, damage_class=DamageClass.LACUNA):
        object.__setattr__(self, "seeds", tuple(PixelCoord(*s) for s in seeds))
        object.__setattr__(self, "tolerance", float(tolerance))
        object.__setattr__(self, "damage_class", damage_class)
        if self.tolerance < 0:
            raise ValueError("tolerance must be >= 0")


def grow_region(image: RasterImage, seed_set: SeedSet) -> BinaryMask:
    """Union over seeds of the maximal 4-connected region whose pixels stay
    within `tolerance` Euclidean intensity distance of that seed's value.

    Distance is measured against the seed pixel itself, not a running mean,
    so the result is order-independent and deterministic. An empty seed
    list yields an all-false mask.
    """
    for seed in seed_set.seeds:
        if not image.contains(seed):
            raise OutOfBoundsError(
                f"seed {seed} outside {image.width}x{image.height} image"
            )
    region = np.zeros((image.height, image.width), dtype=bool)
    for seed in seed_set.seeds:
        region |= kernels.grow_from_seed(
            image.data, seed.y, seed.x, seed_set.tolerance
        )
    return BinaryMask(region)


def dilate_mask(mask: BinaryMask, radius: int) -> BinaryMask:
    """Morphological dilation with a square element of side 2*radius + 1."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return mask
    out = mask.bits.copy()
    # separable: sweep rows then columns
    for axis in (0, 1):
        acc = out.copy()
        for shift in range(1, radius + 1):
            acc[_shift_slices(shift, axis)] |= out[_shift_slices(-shift, axis)]
            acc[_shift_slices(-shift, axis)] |= out[_shift_slices(shift, axis)]
        out = acc
    return BinaryMask(out)


def _shift_slices(shift: int, axis: int):
    if shift > 0:
        sl = slice(shift, None)
    elif shift < 0:
        sl = slice(None, shift)
    else:
        sl = slice(None)
    return (sl, slice(None)) if axis == 0 else (slice(None), sl)


def close_holes(mask: BinaryMask) -> BinaryMask:
    """Fill every false 4-connected component that does not touch the
    raster border."""
    false_region = ~mask.bits
    reach = np.zeros_like(false_region)
    # flood the false region inward from the border
    reach[0, :] = false_region[0, :]
    reach[-1, :] = false_region[-1, :]
    reach[:, 0] = false_region[:, 0]
    reach[:, -1] = false_region[:, -1]
    frontier = reach.copy()
    while frontier.any():
        nxt = np.zeros_like(frontier)
        nxt[1:, :] |= frontier[:-1, :]
        nxt[:-1, :] |= frontier[1:, :]
        nxt[:, 1:] |= frontier[:, :-1]
        nxt[:, :-1] |= frontier[:, 1:]
        frontier = nxt & false_region & ~reach
        reach |= frontier
    return BinaryMask(mask.bits | (false_region & ~reach))
