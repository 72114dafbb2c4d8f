"""Shared fixtures and independent reference oracles.

The oracles deliberately avoid the library's own code paths: brute-force
BFS for region growing, dense loop-built matrices solved with numpy for
the PDE systems, and per-face dense assembly for the osmosis operator.
"""

from collections import deque

import numpy as np
import pytest

from lumen.raster import BinaryMask, RasterImage


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger numba compilation once so timed tests measure compute."""
    from lumen.detect import SeedSet, grow_region
    from lumen.exemplar import ExemplarParams, inpaint_exemplar
    from lumen.pde import DiffusionMethod, inpaint_diffusion
    from lumen.png_io import decode_png, encode_png

    rng = np.random.default_rng(0)
    img = RasterImage(rng.random((8, 8, 1)))
    mask = np.zeros((8, 8), dtype=bool)
    mask[3:5, 3:5] = True
    inpaint_diffusion(img, BinaryMask(mask), DiffusionMethod.harmonic())
    inpaint_exemplar(img, BinaryMask(mask), ExemplarParams(patch_size=3))
    grow_region(img, SeedSet([(0, 0)], 0.05))
    decode_png(encode_png((img.data * 255).astype(np.uint8)))


def flood_fill_oracle(data: np.ndarray, seeds, tolerance: float) -> np.ndarray:
    """Brute-force BFS flood fill, union over seeds. data: (h, w, c)."""
    h, w, _ = data.shape
    out = np.zeros((h, w), dtype=bool)
    for sx, sy in seeds:
        seed_val = data[sy, sx]
        seen = np.zeros((h, w), dtype=bool)
        seen[sy, sx] = True
        todo = deque([(sy, sx)])
        while todo:
            y, x = todo.popleft()
            for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
                if 0 <= ny < h and 0 <= nx < w and not seen[ny, nx]:
                    if np.sqrt(((data[ny, nx] - seed_val) ** 2).sum()) <= tolerance:
                        seen[ny, nx] = True
                        todo.append((ny, nx))
        out |= seen
    return out


def dense_harmonic_system(values: np.ndarray, mask_bits: np.ndarray):
    """Loop-built dense harmonic system over the unknown pixels."""
    h, w = values.shape
    unknown = [(y, x) for y in range(h) for x in range(w) if mask_bits[y, x]]
    index = {p: i for i, p in enumerate(unknown)}
    n = len(unknown)
    a = np.zeros((n, n))
    b = np.zeros(n)
    for i, (y, x) in enumerate(unknown):
        for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
            if 0 <= ny < h and 0 <= nx < w:
                a[i, i] += 1.0
                if mask_bits[ny, nx]:
                    a[i, index[(ny, nx)]] -= 1.0
                else:
                    b[i] += values[ny, nx]
    return a, b, unknown


def dense_harmonic_solve(values: np.ndarray, mask_bits: np.ndarray) -> np.ndarray:
    """Inpainted channel computed entirely through numpy dense solve."""
    a, b, unknown = dense_harmonic_system(values, mask_bits)
    out = values.copy()
    if unknown:
        x = np.linalg.solve(a, b)
        for val, (y, xx) in zip(x, unknown):
            out[y, xx] = val
    return out


def dense_osmosis_operator(d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    """Per-face dense assembly of the drift-diffusion operator."""
    h = d1.shape[0]
    w = d2.shape[1]
    n = h * w
    a = np.zeros((n, n))

    def face(p, q, delta):
        a[p, p] += -1.0 - delta / 2.0
        a[p, q] += 1.0 - delta / 2.0
        a[q, p] += 1.0 + delta / 2.0
        a[q, q] += -1.0 + delta / 2.0

    for y in range(h):
        for x in range(w - 1):
            face(y * w + x, y * w + x + 1, d1[y, x])
    for y in range(h - 1):
        for x in range(w):
            face(y * w + x, (y + 1) * w + x, d2[y, x])
    return a


def dense_steady_state(a: np.ndarray, mean_value: float) -> np.ndarray:
    """Kernel vector of the dense operator scaled to a target mean."""
    eigvals, eigvecs = np.linalg.eig(a)
    k = np.argmin(np.abs(eigvals))
    vec = np.real(eigvecs[:, k])
    return vec * (mean_value / vec.mean())


def random_image(rng, h, w, c=1) -> RasterImage:
    return RasterImage(rng.random((h, w, c)))


def random_mask(rng, h, w, density=0.2) -> BinaryMask:
    bits = rng.random((h, w)) < density
    if bits.all():  # keep at least one known pixel
        bits[0, 0] = False
    return BinaryMask(bits)
