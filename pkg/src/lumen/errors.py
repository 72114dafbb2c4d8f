"""Exception types raised by the restoration engine."""


class LumenError(Exception):
    """Base class for all engine errors."""


class DecodeError(LumenError):
    """Raised when an image file or byte stream is malformed."""


class UnsupportedFormatError(DecodeError):
    """Raised for well-formed files the engine deliberately does not read
    (palette PNGs, exotic bit depths, non-binary PNM variants)."""


class OutOfBoundsError(LumenError):
    """Raised when a pixel coordinate lies outside its raster."""


class DimensionMismatchError(LumenError):
    """Raised when jointly used rasters, masks or vectors disagree in size."""


class AllUnknownError(LumenError):
    """Raised when an inpainting mask covers the entire image, leaving no
    known data to diffuse from."""


class SolverDivergedError(LumenError):
    """Raised when an iterative linear solve fails to reach its tolerance."""


class NoValidSourceError(LumenError):
    """Raised when exemplar inpainting finds no fully known source patch."""
