"""PNG and binary PNM image I/O with bit-exact round trips.

Reads 8- and 16-bit grayscale and RGB PNGs (including Adam7 interlaced),
plus binary PGM (P5) and PPM (P6). Palette PNGs and other bit depths are
rejected as unsupported; gray+alpha and RGBA inputs have the alpha channel
discarded with a warning. Saving always writes an 8-bit PNG with
sample = floor(255 v + 0.5), so any image whose values are exact multiples
of 1/255 round-trips exactly.

Masks travel as 8-bit grayscale PNG: 0 = known, 255 = damaged; any sample
at or above half intensity reads as damaged.
"""

from __future__ import annotations

import struct
import warnings
import zlib
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DecodeError, UnsupportedFormatError
from .raster import BinaryMask, RasterImage, to_grayscale

_PNG_SIG = b"\x89PNG\r\n\x1a\n"
_CHANNELS = {0: 1, 2: 3, 4: 2, 6: 4}
_MAX_PIXELS = 1 << 28

# Adam7 pass origins and strides: (x0, y0, dx, dy)
_ADAM7 = (
    (0, 0, 8, 8),
    (4, 0, 8, 8),
    (0, 4, 4, 8),
    (2, 0, 4, 4),
    (0, 2, 2, 4),
    (1, 0, 2, 2),
    (0, 1, 1, 2),
)

MASK_THRESHOLD = 128.0 / 255.0


def _parse_chunks(data: bytes):
    pos = len(_PNG_SIG)
    chunks = []
    while True:
        if pos + 8 > len(data):
            raise DecodeError("truncated PNG: missing chunk header")
        length, ctype = struct.unpack_from(">I4s", data, pos)
        pos += 8
        if pos + length + 4 > len(data):
            raise DecodeError("truncated PNG: chunk runs past end of stream")
        payload = data[pos : pos + length]
        crc = struct.unpack_from(">I", data, pos + length)[0]
        if zlib.crc32(ctype + payload) & 0xFFFFFFFF != crc:
            raise DecodeError(f"PNG chunk {ctype!r} fails CRC check")
        pos += length + 4
        chunks.append((ctype, payload))
        if ctype == b"IEND":
            return chunks


def _unfilter(raw: bytes, height: int, rowbytes: int, bpp: int) -> np.ndarray:
    expected = height * (1 + rowbytes)
    if len(raw) < expected:
        raise DecodeError("PNG pixel data shorter than image dimensions imply")
    arr = np.frombuffer(raw[:expected], dtype=np.uint8).reshape(height, 1 + rowbytes)
    if arr.shape[0] and not np.all(arr[:, 0] <= 4):
        raise DecodeError("invalid PNG scanline filter type")
    return kernels.unfilter_scanlines(np.ascontiguousarray(arr), bpp)


def _to_samples(recon: np.ndarray, width: int, nch: int, depth: int) -> np.ndarray:
    if depth == 8:
        return recon.reshape(-1, width, nch)
    return (
        recon.view(np.dtype(">u2")).astype(np.uint16).reshape(-1, width, nch)
    )


def decode_png(data: bytes) -> np.ndarray:
    """Decode PNG bytes to a float64 (height, width, {1,3}) array in [0,1]."""
    if len(data) < len(_PNG_SIG) or data[: len(_PNG_SIG)] != _PNG_SIG:
        raise DecodeError("not a PNG stream")
    chunks = _parse_chunks(data)
    ctype, ihdr = chunks[0]
    if ctype != b"IHDR" or len(ihdr) != 13:
        raise DecodeError("PNG does not start with a valid IHDR chunk")
    width, height, depth, color, comp, filt, interlace = struct.unpack(
        ">IIBBBBB", ihdr
    )
    if width == 0 or height == 0:
        raise DecodeError("PNG declares zero width or height")
    if width * height > _MAX_PIXELS:
        raise DecodeError("PNG dimensions exceed the supported size")
    if comp != 0 or filt != 0 or interlace not in (0, 1):
        raise DecodeError("PNG uses an unknown compression/filter/interlace method")
    if color == 3:
        raise UnsupportedFormatError("palette PNGs are not supported")
    if color not in _CHANNELS:
        raise UnsupportedFormatError(f"unsupported PNG color type {color}")
    if depth not in (8, 16):
        raise UnsupportedFormatError(f"unsupported PNG bit depth {depth}")

    idat = b"".join(payload for t, payload in chunks if t == b"IDAT")
    if not idat:
        raise DecodeError("PNG contains no IDAT data")
    try:
        raw = zlib.decompress(idat)
    except zlib.error as exc:
        raise DecodeError(f"PNG deflate stream is corrupt: {exc}") from exc

    nch = _CHANNELS[color]
    bps = depth // 8
    bpp = nch * bps

    if interlace == 0:
        recon = _unfilter(raw, height, width * bpp, bpp)
        samples = _to_samples(recon, width, nch, depth)
    else:
        samples = np.zeros((height, width, nch), dtype=np.uint16 if depth == 16 else np.uint8)
        pos = 0
        for x0, y0, dx, dy in _ADAM7:
            pw = (width - x0 + dx - 1) // dx
            ph = (height - y0 + dy - 1) // dy
            if pw <= 0 or ph <= 0:
                continue
            nbytes = ph * (1 + pw * bpp)
            recon = _unfilter(raw[pos : pos + nbytes], ph, pw * bpp, bpp)
            pos += nbytes
            samples[y0::dy, x0::dx] = _to_samples(recon, pw, nch, depth)

    if nch in (2, 4):
        warnings.warn("alpha channel discarded on load", stacklevel=3)
        samples = samples[:, :, : nch - 1]
    return samples.astype(np.float64) / (65535.0 if depth == 16 else 255.0)


def encode_png(samples: np.ndarray) -> bytes:
    """Encode uint8 samples (height, width, {1,3}) as a deterministic PNG."""
    if samples.dtype != np.uint8 or samples.ndim != 3 or samples.shape[2] not in (1, 3):
        raise ValueError("encode_png expects uint8 (h, w, 1|3) samples")
    height, width, nch = samples.shape
    color = 0 if nch == 1 else 2
    scanlines = np.zeros((height, 1 + width * nch), dtype=np.uint8)
    scanlines[:, 1:] = samples.reshape(height, width * nch)
    body = zlib.compress(scanlines.tobytes(), 6)

    def chunk(ctype: bytes, payload: bytes) -> bytes:
        crc = zlib.crc32(ctype + payload) & 0xFFFFFFFF
        return struct.pack(">I", len(payload)) + ctype + payload + struct.pack(">I", crc)

    ihdr = struct.pack(">IIBBBBB", width, height, 8, color, 0, 0, 0)
    return _PNG_SIG + chunk(b"IHDR", ihdr) + chunk(b"IDAT", body) + chunk(b"IEND", b"")


def decode_pnm(data: bytes) -> np.ndarray:
    """Decode binary PGM (P5) or PPM (P6) bytes to float64 (h, w, c)."""
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise UnsupportedFormatError("only binary PGM (P5) and PPM (P6) are supported")
    nch = 1 if magic == b"P5" else 3

    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(data):
            raise DecodeError("truncated PNM header")
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
        elif c.isspace():
            pos += 1
        elif c.isdigit():
            start = pos
            while pos < len(data) and data[pos : pos + 1].isdigit():
                pos += 1
            fields.append(int(data[start:pos]))
        else:
            raise DecodeError("malformed PNM header")
    pos += 1  # single whitespace after maxval

    width, height, maxval = fields
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise DecodeError("PNM header values out of range")
    bps = 1 if maxval < 256 else 2
    need = width * height * nch * bps
    if len(data) - pos < need:
        raise DecodeError("truncated PNM pixel data")
    flat = np.frombuffer(data, dtype=np.uint8 if bps == 1 else np.dtype(">u2"),
                         count=width * height * nch, offset=pos)
    return flat.astype(np.float64).reshape(height, width, nch) / maxval


def decode_image_bytes(data: bytes) -> RasterImage:
    """Sniff PNG vs binary PNM and decode to a RasterImage."""
    if data[: len(_PNG_SIG)] == _PNG_SIG:
        return RasterImage(decode_png(data))
    if data[:2] in (b"P5", b"P6"):
        return RasterImage(decode_pnm(data))
    raise UnsupportedFormatError("unrecognized image format (expect PNG, PGM or PPM)")


def quantize_u8(image: RasterImage) -> np.ndarray:
    """Round-half-up quantization to 8-bit samples."""
    return np.floor(image.data * 255.0 + 0.5).astype(np.uint8)


def encode_image_png(image: RasterImage) -> bytes:
    return encode_png(quantize_u8(image))


def load_image(path) -> RasterImage:
    """Load a PNG/PGM/PPM file; values map to [0,1] by s/(2^depth - 1)."""
    data = Path(path).read_bytes()
    return decode_image_bytes(data)


def save_image(image: RasterImage, path) -> None:
    """Write an 8-bit PNG. Raises OSError when the path is not writable."""
    Path(path).write_bytes(encode_image_png(image))


def mask_from_image(image: RasterImage) -> BinaryMask:
    gray = to_grayscale(image)
    return BinaryMask(gray.data[:, :, 0] >= MASK_THRESHOLD)


def decode_mask_bytes(data: bytes) -> BinaryMask:
    return mask_from_image(decode_image_bytes(data))


def encode_mask_png(mask: BinaryMask) -> bytes:
    samples = np.where(mask.bits, 255, 0).astype(np.uint8)[:, :, np.newaxis]
    return encode_png(samples)


def load_mask(path) -> BinaryMask:
    return decode_mask_bytes(Path(path).read_bytes())


def save_mask(mask: BinaryMask, path) -> None:
    Path(path).write_bytes(encode_mask_png(mask))
