"""Core raster types shared by every restoration module.

Images are dense float64 rasters normalized to [0, 1] with 1 or 3 channels;
masks are boolean rasters marking the pixels to be restored. Both are
immutable after construction so they can be shared freely across threads.
"""

from __future__ import annotations

from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatchError

# Rec. 709 luminance coefficients
_LUMA_R = 0.2126
_LUMA_G = 0.7152
_LUMA_B = 0.0722


class DamageClass(Enum):
    """Damage taxonomy carried as metadata on detection requests."""

    LACUNA = "lacuna"
    DEGRADATION = "degradation"
    ABRASION = "abrasion"
    OVERPAINT = "overpaint"


class PixelCoord(NamedTuple):
    """0-based (column, row) pixel position."""

    x: int
    y: int


class RasterImage:
    """Immutable float raster, values in [0, 1], 1 or 3 channels.

    Data is stored row-major as a read-only (height, width, channels)
    float64 array. Values are clamped into [0, 1] on construction.
    """

    __slots__ = ("data",)

    def __init__(self, data) -> None:
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.ndim != 3:
            raise ValueError(f"expected 2- or 3-dim pixel data, got ndim={arr.ndim}")
        if arr.shape[2] not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {arr.shape[2]}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must have at least one pixel")
        if not np.all(np.isfinite(arr)):
            raise ValueError("pixel data must be finite")
        arr = np.clip(arr, 0.0, 1.0)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("RasterImage is immutable")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def pixel(self, coord: PixelCoord) -> np.ndarray:
        """Channel vector at a coordinate; raises when out of bounds."""
        if not self.contains(coord):
            raise IndexError(f"{coord} outside {self.width}x{self.height} image")
        return self.data[coord.y, coord.x]

    def contains(self, coord: PixelCoord) -> bool:
        return 0 <= coord.x < self.width and 0 <= coord.y < self.height

    def __eq__(self, other) -> bool:
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(
            np.array_equal(self.data, other.data)
        )

    def __repr__(self) -> str:
        return f"RasterImage({self.width}x{self.height}, channels={self.channels})"


class BinaryMask:
    """Immutable boolean raster; true marks damaged (unknown) pixels."""

    __slots__ = ("bits",)

    def __init__(self, bits) -> None:
        arr = np.asarray(bits, dtype=bool)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-dim, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("mask must have at least one pixel")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "bits", arr)

    def __setattr__(self, name, value):
        raise AttributeError("BinaryMask is immutable")

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @classmethod
    def full(cls, width: int, height: int, value: bool = False) -> "BinaryMask":
        return cls(np.full((height, width), value, dtype=bool))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(
            np.array_equal(self.bits, other.bits)
        )

    def __repr__(self) -> str:
        return f"BinaryMask({self.width}x{self.height}, true={int(self.bits.sum())})"


def require_same_shape(image: RasterImage, mask: BinaryMask) -> None:
    """Joint operations demand identical raster dimensions."""
    if (image.height, image.width) != (mask.height, mask.width):
        raise DimensionMismatchError(
            f"image {image.width}x{image.height} vs mask {mask.width}x{mask.height}"
        )


def to_grayscale(image: RasterImage) -> RasterImage:
    """Rec. 709 luminance; single-channel input is returned unchanged."""
    if image.channels == 1:
        return image
    r, g, b = image.data[:, :, 0], image.data[:, :, 1], image.data[:, :, 2]
    return RasterImage(_LUMA_R * r + _LUMA_G * g + _LUMA_B * b)


def mask_stats(mask: BinaryMask) -> tuple[int, float]:
    """Count of damaged pixels and their fraction of the raster."""
    count = int(mask.bits.sum())
    return count, count / (mask.width * mask.height)
