"""Virtual restoration engine for digitized illuminated manuscripts.

Detect damaged regions by seeded region growing, inpaint them with
diffusion PDEs or exemplar patch copying, and fuse multispectral channels
through a drift-diffusion osmosis model. Exposed as a library, a CLI
(``lumen``), an HTTP job service, and a browser UI served by the service.
"""

from .detect import SeedSet, close_holes, dilate_mask, grow_region
from .errors import (
    AllUnknownError,
    DecodeError,
    DimensionMismatchError,
    LumenError,
    NoValidSourceError,
    OutOfBoundsError,
    SolverDivergedError,
    UnsupportedFormatError,
)
from .exemplar import (
    ExemplarParams,
    ExemplarTrace,
    fill_front,
    inpaint_exemplar,
    inpaint_exemplar_traced,
    patch_ssd,
)
from .osmosis import (
    DriftField,
    OsmosisParams,
    assemble_osmosis_operator,
    compute_drift,
    fuse_multispectral,
    osmosis_evolve,
)
from .pde import (
    DiffusionMethod,
    InpaintResult,
    build_harmonic_system,
    inpaint_diffusion,
)
from .png_io import load_image, load_mask, save_image, save_mask
from .raster import (
    BinaryMask,
    DamageClass,
    PixelCoord,
    RasterImage,
    mask_stats,
    to_grayscale,
)
from .sparse import SolveReport, SparseMatrixCSR, assemble_csr, solve_bicgstab, solve_cg, spmv

__version__ = "0.1.0"

__all__ = [
    "AllUnknownError",
    "BinaryMask",
    "DamageClass",
    "DecodeError",
    "DiffusionMethod",
    "DimensionMismatchError",
    "DriftField",
    "ExemplarParams",
    "ExemplarTrace",
    "InpaintResult",
    "LumenError",
    "NoValidSourceError",
    "OsmosisParams",
    "OutOfBoundsError",
    "PixelCoord",
    "RasterImage",
    "SeedSet",
    "SolveReport",
    "SolverDivergedError",
    "SparseMatrixCSR",
    "UnsupportedFormatError",
    "assemble_csr",
    "assemble_osmosis_operator",
    "build_harmonic_system",
    "close_holes",
    "compute_drift",
    "dilate_mask",
    "fill_front",
    "fuse_multispectral",
    "grow_region",
    "inpaint_diffusion",
    "inpaint_exemplar",
    "inpaint_exemplar_traced",
    "load_image",
    "load_mask",
    "mask_stats",
    "osmosis_evolve",
    "patch_ssd",
    "save_image",
    "save_mask",
    "solve_bicgstab",
    "solve_cg",
    "spmv",
    "to_grayscale",
]
